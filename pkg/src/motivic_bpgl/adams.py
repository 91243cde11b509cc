"""Adams spectral sequences for BPGL<0> and BPGL<1>: differential rules,
page bookkeeping, homotopy assembly, and the cooperations and n-line sums.

A page is a list of v_0-towers.  A tower is one family member c * v_1^k * x
together with all of its v_0 multiples, or an isolated class.  The rule
d_r(y^n x) = x' y^(n-1) v_0^r x kills the whole source tower and cuts the
target tower down to height r.  Over C and R the rule set is empty and
E_infinity = E_2.
"""
from __future__ import annotations

import copy
import itertools
from collections import Counter
from dataclasses import dataclass, field, replace

from . import linalg
from .closed_forms import (Family, _shift, coefficient_families, lightning_families, ring_families,
                           torsion_generators)
from .ext import ExtChart, _window
from .grading import ConfigurationError, Degree, FieldSpec, legendre, nu

TARGETS = ("BPGL0", "BPGL1")
INERT = ("W", "B")


class RuleConsistencyError(RuntimeError):
    """A differential's target is missing from the page it should land on."""


# ---------------------------------------------------------------- rules


@dataclass(frozen=True)
class DifferentialRule:
    r: int
    s: int  # the rule is d_r(y^(p^s)); it reaches y^n with nu_p(n) = s by Leibniz
    source: str
    target: str
    source_deg: tuple
    target_deg: tuple
    scope: tuple = ("v0", "v1", "coefficients", "x_i")

    def __post_init__(self):
        s, f, w = self.source_deg
        if tuple(self.target_deg) != (s - 1, f + self.r, w):
            raise ConfigurationError(f"rule d_{self.r}({self.source}) violates the (-1, r, 0) degree law")

    def describe(self) -> str:
        return f"d_{self.r}({self.source}) = {self.target}"


def _power(name: str, e: int) -> str:
    return "" if e == 0 else name if e == 1 else f"{name}^{e}"


def differential_rules(spec: FieldSpec, target: str = "BPGL0", s_max: int = 6,
                       variant: str = "corrected") -> list[DifferentialRule]:
    """Rules for the Adams spectral sequence of BPGL<0> or BPGL<1>.

    Empty over C and R.  Over F_q with a trivial twist the page is
    nu_p(q^i - 1) + s, for s >= 0.  With a nontrivial twist only s >= 1
    occurs, and the page is nu_p(q^(pi) - 1) + s - 1.  The "literal" variant
    drops the -1; it is kept so the difference can be tested.  BPGL<1>
    inherits the BPGL<0> rules, and v_1 is a permanent cycle.  Unit scalars
    are set to 1.
    """
    if target not in TARGETS:
        raise ConfigurationError(f"unknown target {target!r}")
    if variant not in ("corrected", "literal"):
        raise ConfigurationError(f"unknown variant {variant!r}")
    if spec.field != "F":
        return []
    p, q, i = spec.p, spec.q, spec.i
    if spec.bockstein_trivial:
        base, s_min, off, x = nu(q ** i - 1, p), 0, 0, "u"
    else:
        base, s_min = nu(q ** (p * i) - 1, p), 1
        off = -1 if variant == "corrected" else 0
        x = "rho" if p == 2 else "gamma"
    y = "tau" if p == 2 else "zeta"
    out = []
    for s in range(s_min, s_max + 1):
        n = p ** s
        r = base + s + off
        tgt = x + _power(y, n - 1) + _power("v0", r)
        out.append(DifferentialRule(r, s, _power(y, n), tgt, (0, 0, -n * i), (-1, r, -n * i)))
    return out


# ---------------------------------------------------------------- pages


@dataclass
class Tower:
    label: str
    deg: tuple  # (s, f, w) of the bottom class
    height: int | None  # None: infinite v_0-tower; 0: gone
    gen: str = ""
    mono: tuple | None = None  # (x exponent, y exponent, v_1 exponent) over F_q
    summand: str = ""


@dataclass
class SSPage:
    spec: FieldSpec
    n: int
    window: dict
    towers: list = field(default_factory=list)
    r: int = 2
    log: list = field(default_factory=list)  # (r, source index, target index) into towers
    flags: list = field(default_factory=list)

    def live(self):
        return [t for t in self.towers if t.height != 0]

    def dims(self) -> Counter:
        (s0, s1), (f0, f1), (w0, w1) = self.window["s"], self.window["f"], self.window["w"]
        out: Counter = Counter()
        for t in self.live():
            s, f, w = t.deg
            if not (s0 <= s <= s1 and w0 <= w <= w1):
                continue
            top = f1 if t.height is None else min(f1, f + t.height - 1)
            for g in range(max(f, f0), top + 1):
                out[(s, g, w)] += 1
        return out

    def chart(self) -> ExtChart:
        dims = dict(self.dims())
        labels: dict = {}
        tags: dict = {}
        for t in self.live():
            s, f, w = t.deg
            top = self.window["f"][1] if t.height is None else f + t.height - 1
            for g in range(f, top + 1):
                if (s, g, w) in dims:
                    labels.setdefault((s, g, w), []).append(t.label + (f" v0^{g - f}" if g > f else ""))
                    tags.setdefault((s, g, w), []).append(t.summand)
        chart = ExtChart(self.spec, self.n, self.window, dims, labels, tags)
        chart.meta = {"op": "ss_page", "page": self.r}
        return chart

    def compare(self, chart: ExtChart) -> dict:
        """Degrees where this page and a computed chart differ."""
        mine = self.dims()
        keys = set(mine) | set(chart.dims)
        return {k: (mine.get(k, 0), chart.dim(*k)) for k in sorted(keys) if mine.get(k, 0) != chart.dim(*k)}


def _family_towers(F: Family, p: int, n: int, win: dict, summand: str) -> list[Tower]:
    (s0, s1), (_, f1), (w0, w1) = win["s"], win["f"], win["w"]
    bmax = 0 if F.step is None or F.step == (0, 0) else (w1 - w0) + f1 * (p - 1) + 1
    cmax = 0 if n == 0 else f1 if F.v1_max is None else min(F.v1_max, f1)
    out = []
    for b in range(bmax + 1):
        s = F.base[0] + (F.step[0] * b if b else 0)
        w = F.base[2] + (F.step[1] * b if b else 0)
        for c in range(cmax + 1):
            deg = (s + c * (2 * p - 2), F.base[1] + c, w + c * (p - 1))
            if not (s0 <= deg[0] <= s1 and w0 <= deg[2] <= w1) or deg[1] > f1:
                continue
            mono = None
            if F.coeff is not None:
                x, y0, ystep = F.coeff
                mono = (x, y0 + ystep * b, c)
            label = F.label.replace("@", f"({b})") + (f" v1^{c}" if c else "")
            out.append(Tower(label, deg, None if F.v0 else 1, F.gen, mono, summand))
    return out


def page_from_families(spec: FieldSpec, n: int, fams: list[Family], window=None, summand: str = "") -> SSPage:
    """The E_2 page spanned by closed-form families.  Towers are listed one
    stem below the window too, so every differential out of the window's
    bottom stem has its target on the page."""
    win = _window(window)
    wide = dict(win)
    wide["s"] = (win["s"][0] - 1, win["s"][1])
    towers: list = []
    for F in fams:
        towers += _family_towers(F, spec.p, n, wide, summand)
    return SSPage(spec, n, win, towers)


def e2_page(spec: FieldSpec, target: str = "BPGL0", window=None) -> SSPage:
    if target not in TARGETS:
        raise ConfigurationError(f"unknown target {target!r}")
    n = TARGETS.index(target)
    return page_from_families(spec, n, coefficient_families(spec, n, "corrected"), window, target)


def run_ss(page: SSPage, rules: list[DifferentialRule]) -> SSPage:
    """Apply the rules page by page.

    On page r every source is paired with its target first, and then all
    pairs cancel together.  The rule for y^(p^s) reaches y^n x (nu_p(n) = s)
    through d(y^n) = (n / p^s) y^(n - p^s) d(y^(p^s)), where n / p^s is a
    unit, and extends over v_0, v_1 and module generators.  Towers without a
    coefficient monomial (free and torsion summands) are inert.
    """
    out = copy.deepcopy(page)
    p = out.spec.p
    s_lo = out.window["s"][0]
    index = {(t.gen, t.mono): t for t in out.towers if t.mono is not None}
    pos = {id(t): j for j, t in enumerate(out.towers)}
    s_top = max((r.s for r in rules), default=None)
    for r in sorted({rule.r for rule in rules}):
        pairs = []
        for rule in (x for x in rules if x.r == r):
            for t in out.towers:
                if t.mono is None or t.height == 0:
                    continue
                x, n, c = t.mono
                if x != 0 or n == 0 or nu(n, p) != rule.s:
                    continue
                tgt = index.get((t.gen, (1, n - 1, c)))
                if tgt is None:
                    if t.deg[0] - 1 < s_lo - 1:
                        continue
                    raise RuleConsistencyError(f"{rule.describe()}: no target for {t.label}")
                if tgt.height is not None or tgt.summand in INERT:
                    raise RuleConsistencyError(f"{rule.describe()}: target of {t.label} is not a free v0-tower")
                pairs.append((t, tgt))
        for t, tgt in pairs:
            t.height = 0
            tgt.height = r + t.deg[1] - tgt.deg[1]
            out.log.append((r, pos[id(t)], pos[id(tgt)]))
        out.r = r + 1
    if s_top is not None:
        for t in out.live():
            if t.mono and t.mono[0] == 0 and t.mono[1] and nu(t.mono[1], p) > s_top:
                out.flags.append(f"no rule reaches {t.label}")
    return out


# ---------------------------------------------------------------- homotopy


@dataclass(frozen=True)
class Summand:
    h: int | None  # None for Z_p, else the group is Z/p^h
    label: str = ""
    gen: str = ""
    f: int = 0


@dataclass
class HomotopyTable:
    spec: FieldSpec
    window: dict
    entries: dict = field(default_factory=dict)  # (s, w) -> [Summand]
    extensions: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    parts: dict = field(default_factory=dict)  # summand key -> HomotopyTable
    meta: dict = field(default_factory=dict)

    def add(self, sw, summand: Summand) -> None:
        self.entries.setdefault(tuple(sw), []).append(summand)

    def _group(self, h) -> str:
        p = self.spec.p
        return f"Z_{p}" if h is None else f"Z/{p ** h}"

    def groups(self, s: int, w: int) -> list[str]:
        hs = [x.h for x in self.entries.get((s, w), [])]
        return [self._group(h) for h in sorted(hs, key=lambda h: (h is None, h or 0))]

    def descriptor(self, s: int, w: int) -> str:
        return " + ".join(self.groups(s, w)) or "0"

    def order_exponent(self, s: int, w: int) -> int | None:
        """log_p of the group order; None when a Z_p summand is present."""
        hs = [x.h for x in self.entries.get((s, w), [])]
        return None if any(h is None for h in hs) else sum(hs)

    def order(self, s: int, w: int) -> int | None:
        e = self.order_exponent(s, w)
        return None if e is None else self.spec.p ** e

    def ranks(self) -> dict:
        """{(s, w): Counter of group names}, the data compared across routes."""
        return {k: Counter(self.groups(*k)) for k in sorted(self.entries) if self.entries[k]}

    def restricted(self, window) -> "HomotopyTable":
        (s0, s1), (w0, w1) = window["s"], window["w"]
        out = HomotopyTable(self.spec, dict(self.window, s=(s0, s1), w=(w0, w1)),
                            extensions=list(self.extensions), flags=list(self.flags), meta=dict(self.meta))
        for (s, w), v in self.entries.items():
            if s0 <= s <= s1 and w0 <= w <= w1:
                out.entries[(s, w)] = list(v)
        return out

    def shifted(self, ds: int, dw: int, tag: str = "") -> "HomotopyTable":
        out = HomotopyTable(self.spec, self.window, extensions=list(self.extensions), flags=list(self.flags),
                            meta=dict(self.meta))
        for (s, w), v in self.entries.items():
            out.entries[(s + ds, w + dw)] = [replace(x, label=x.label + tag, gen=x.gen + tag) for x in v]
        return out

    def absorb(self, other: "HomotopyTable", key=None) -> None:
        for sw, v in other.entries.items():
            for x in v:
                self.add(sw, x)
        self.extensions += [e for e in other.extensions if e not in self.extensions]
        self.flags += other.flags
        if key is not None:
            self.parts[key] = other

    def to_tsv(self) -> str:
        lines = ["s\tw\tgroup\tgenerators"]
        for (s, w) in sorted(self.entries):
            if not self.entries[(s, w)]:
                continue
            gens = ",".join(sorted(x.label for x in self.entries[(s, w)]))
            lines.append(f"{s}\t{w}\t{self.descriptor(s, w)}\t{gens}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {"spec": self.spec.to_dict(), "window": {k: list(v) for k, v in self.window.items()},
                "groups": [{"s": s, "w": w, "group": self.descriptor(s, w),
                            "summands": [{"h": x.h, "label": x.label, "gen": x.gen, "f": x.f}
                                         for x in self.entries[(s, w)]]}
                           for (s, w) in sorted(self.entries) if self.entries[(s, w)]],
                "extensions": self.extensions, "flags": self.flags, "meta": self.meta}


def assemble_homotopy(einf: SSPage, extensions=()) -> HomotopyTable:
    """Read groups off the final page with the convention that v_0 detects p.
    An infinite tower gives Z_p, a tower of height h gives Z/p^h, and an
    isolated class gives Z/p.  Extensions are declared data and are not
    inferred."""
    (s0, s1), (w0, w1) = einf.window["s"], einf.window["w"]
    table = HomotopyTable(einf.spec, einf.window, extensions=list(extensions), flags=list(einf.flags))
    for t in einf.live():
        s, f, w = t.deg
        if s0 <= s <= s1 and w0 <= w <= w1:
            table.add((s, w), Summand(t.height, t.label, t.gen, f))
    table.meta = {"op": "assemble_homotopy", "page": einf.r}
    return table


def homotopy(spec: FieldSpec, target: str = "BPGL0", window=None, variant: str = "corrected") -> HomotopyTable:
    """pi_{*,*} of BPGL<0> or BPGL<1> through the window."""
    page = e2_page(spec, target, window)
    einf = run_ss(page, differential_rules(spec, target, variant=variant))
    table = assemble_homotopy(einf)
    table.meta.update({"target": target, "variant": variant})
    return table


def _compose(rows: list[dict], nxt: list[dict], p: int) -> list[dict]:
    out = []
    for r in rows:
        acc: dict = {}
        for k, c in r.items():
            for l, c2 in nxt[k].items():
                acc[l] = (acc.get(l, 0) + c * c2) % p
        out.append({l: c for l, c in acc.items() if c})
    return out


def homotopy_from_chart(chart: ExtChart) -> HomotopyTable:
    """Read homotopy directly off a computed chart with no differentials.

    The F_p[v_0]-module in each (s, w) column is split into cyclic pieces
    using the ranks of powers of v_0.  A piece that reaches the top of the
    filtration window is read as Z_p, and the column is flagged.
    """
    p = chart.spec.p
    f0, f1 = chart.window["f"]
    v0 = chart.products.get("v0", {})
    table = HomotopyTable(chart.spec, chart.window)
    cols: dict = {}
    for (s, f, w), d in chart.dims.items():
        if d:
            cols.setdefault((s, w), {})[f] = d

    for (s, w), dims in sorted(cols.items()):
        memo: dict = {}

        def rank(a: int, b: int) -> int:
            """Rank of v_0^(b-a) out of filtration a."""
            if a < f0 or b > f1 or a > b or not dims.get(a) or not dims.get(b):
                return 0
            if a == b:
                return dims[a]
            key = (a, b)
            if key not in memo:
                rows = [{j: 1} for j in range(dims[a])]
                for g in range(a, b):
                    table_g = v0.get((s, g, w))
                    if table_g is None:
                        raise ConfigurationError(f"v0 products missing at {(s, g, w)}")
                    rows = _compose(rows, table_g, p)
                n = dims[b]
                memo[key] = linalg.rank([linalg.sparse_row(r, n, p) for r in rows], n, p) if rows else 0
            return memo[key]

        for a in range(f0, f1 + 1):
            for b in range(a, f1 + 1):
                if b == f1:
                    cnt = rank(a, b) - rank(a - 1, b)
                else:
                    cnt = rank(a, b) - rank(a - 1, b) - rank(a, b + 1) + rank(a - 1, b + 1)
                if cnt < 0:
                    raise ConfigurationError(f"inconsistent v0 ranks at {(s, w)}")
                for _ in range(cnt):
                    h = None if b == f1 else b - a + 1
                    table.add((s, w), Summand(h, f"({s},{a},{w})", "", a))
                if cnt and b == f1 and a < f1:
                    table.flags.append(f"tower at {(s, a, w)} reaches f={f1}; read as Z_{p}")
    table.meta = {"op": "homotopy_from_chart"}
    return table


# ---------------------------------------------------------------- closed tables


def soule_table(spec: FieldSpec, window=None, v1: bool = False) -> HomotopyTable:
    """Z_p at (0, 0) and Z/(q^-w - 1)_p at (-1, w), w <= -1, for BPGL<0> over
    F_q.  With ``v1`` the answer is tensored with Z_p[v_1] (BPGL<1>)."""
    if spec.field != "F":
        raise ConfigurationError("the Soule groups are for finite fields")
    win = _window(window)
    (s0, s1), (_, f1), (w0, w1) = win["s"], win["f"], win["w"]
    p, q = spec.p, spec.q
    table = HomotopyTable(spec, win)
    for c in range(f1 + 1 if v1 else 1):
        ds, dw = c * (2 * p - 2), c * (p - 1)
        tag = f" v1^{c}" if c else ""
        if s0 <= ds <= s1 and w0 <= dw <= w1:
            table.add((ds, dw), Summand(None, "1" + tag, "", c))
        for w in range(w0 - dw, 0):
            h = nu(q ** (-w) - 1, p)
            if h and s0 <= ds - 1 <= s1 and w0 <= w + dw <= w1:
                table.add((ds - 1, w + dw), Summand(h, f"K({-w}){tag}", "", c))
    table.meta = {"op": "soule_table", "v1": v1}
    return table


def base_table(spec: FieldSpec, target: str, window=None) -> HomotopyTable:
    """pi BPGL<n> from closed data: Soule (and Soule[v_1]) over F_q, the
    collapsed E_2 page over C and R."""
    if spec.field == "F":
        return soule_table(spec, window, v1=target == "BPGL1")
    return assemble_homotopy(e2_page(spec, target, window))


# ---------------------------------------------------------------- summands


@dataclass
class SummandData:
    key: tuple
    m: int  # lightning flash index of the core
    core_ok: bool  # Margolis data of the core agree with L(m)
    free: list  # socle degrees (s, w) of the free summands, before the suspension
    shift: tuple  # (s, w) suspension of the whole summand
    page: SSPage | None = None
    table: HomotopyTable | None = None


def _free_socle(pair, d) -> tuple:
    top = (1 << (pair.n + 1)) - 1
    t = Degree(*d) - pair.deg(top)
    return (t.s, t.w)


def _core_matches(core, m: int, spec: FieldSpec) -> bool:
    from .comodules import lightning_flash
    from .margolis import margolis_homology

    L = lightning_flash(spec, m, core.ring)
    if core.rank != L.rank:
        return False
    return all(margolis_homology(core, i).dims() == margolis_homology(L, i).dims() for i in (0, 1))


def summand_families(spec: FieldSpec, target: str, m: int | None, free: list, shift: tuple,
                     tag: str) -> list[Family]:
    """Families of Ext(core) + Ext(free part), suspended by ``shift``."""
    d = (shift[0], 0, shift[1])
    fams: list = []
    if m is not None:
        if target == "BPGL1":
            fams += _shift(lightning_families(spec, m, "corrected"), d, tag)
        else:
            fams += _shift(coefficient_families(spec, 0, "corrected"), d, tag)
    for t, (s, w) in enumerate(free):
        fams += _shift(ring_families(spec), (s + shift[0], 0, w + shift[1]), f"{tag}{{W{t}}}")
    return fams


def _run_summand(spec: FieldSpec, target: str, data: SummandData, window, tag: str) -> None:
    n = TARGETS.index(target)
    fams = summand_families(spec, target, data.m, data.free, data.shift, tag)
    page = page_from_families(spec, n, [f for f in fams if "{W" not in f.gen], window, tag)
    page.towers += page_from_families(spec, n, [f for f in fams if "{W" in f.gen], window, "W").towers
    einf = run_ss(page, differential_rules(spec, target))
    ext = [f"v1 x{j}{tag} = p x{j + 1}{tag}" for j in range(data.m)] if target == "BPGL1" and data.m else []
    table = assemble_homotopy(einf, ext)
    if not data.core_ok:
        table.flags.append(f"core{data.key} is not matched to a single lightning flash")
    data.page, data.table = page, table


def _stratum_module(spec: FieldSpec, target: str, k: int, ring=None):
    from .comodules import brown_gitler

    return brown_gitler(spec, -1 if target == "BPGL0" else 0, k, ring)


def cooperations(target: str, spec: FieldSpec, k_max: int, window=None) -> HomotopyTable:
    """pi_{*,*}(BPGL<n> ^ BPGL<n>) as a sum over the weight strata k.

    Stratum k is Sigma^{2k(p-1), k(p-1)} B_{n-1}(k).  It is split into a core
    and free summands, and the core is checked against L(nu_p(k!)) (BPGL<1>),
    or against M_p for k = 0 and 0 for k >= 1 (BPGL<0>).  Each summand runs
    through the rules and is assembled separately.
    """
    if target not in TARGETS:
        raise ConfigurationError(f"unknown target {target!r}")
    win = _window(window)
    total = HomotopyTable(spec, win, meta={"op": "cooperations", "target": target, "k_max": k_max})
    for k in range(k_max + 1):
        data = stratum_summand(target, spec, k, win)
        total.absorb(data.table, k)
    return total


def stratum_summand(target: str, spec: FieldSpec, k: int, window=None) -> SummandData:
    """Split, check, run and assemble stratum k; the E_2 page is kept on the result."""
    from .margolis import split_free_summands

    if target not in TARGETS:
        raise ConfigurationError(f"unknown target {target!r}")
    win = _window(window)
    p = spec.p
    B = _stratum_module(spec, target, k)
    sp = split_free_summands(B)
    m = legendre(k, p) if target == "BPGL1" else (0 if k == 0 else None)
    if target == "BPGL1":
        core_ok = _core_matches(sp.core, m, spec)
    else:
        core_ok = sp.core.rank == (1 if k == 0 else 0)
    shift = (2 * k * (p - 1), k * (p - 1))
    data = SummandData((k,), m, core_ok, [_free_socle(B.pair, d) for d in sp.free], shift)
    _run_summand(spec, target, data, win, f"[k={k}]")
    data.table.meta.update({"k": k, "m": m, "free": len(data.free)})
    return data


def cooperations_formula(target: str, spec: FieldSpec, k: int, free: list, window=None) -> HomotopyTable:
    """The closed answer for stratum k: nu_p(k!) copies of pi BPGL<0> on
    x_0..x_(nu-1), one pi BPGL<1> on x_nu, plus pi HF_p = M_p for each free
    summand (socle degrees ``free``, before the suspension)."""
    win = _window(window)
    p = spec.p
    shift = (2 * k * (p - 1), k * (p - 1))
    wide = dict(win)
    wide["s"] = (win["s"][0] - shift[0] - 2 * (k + 1) * (p - 1), win["s"][1])
    wide["w"] = (win["w"][0] - shift[1] - (k + 1) * (p - 1), win["w"][1])
    out = HomotopyTable(spec, win)
    if target == "BPGL1":
        nu_k = legendre(k, p)
        for j in range(nu_k + 1):
            part = base_table(spec, "BPGL0" if j < nu_k else "BPGL1", wide)
            out.absorb(part.shifted(shift[0] + 2 * j * (p - 1), shift[1] + j * (p - 1), f"{{x{j}}}"))
    elif k == 0:
        out.absorb(base_table(spec, "BPGL0", wide))
    for t, (s, w) in enumerate(free):
        fams = _shift(ring_families(spec), (s + shift[0], 0, w + shift[1]), f"{{W{t}}}")
        out.absorb(assemble_homotopy(page_from_families(spec, 0, fams, wide)))
    return out.restricted(win)


# ---------------------------------------------------------------- n-line


def n_line(n: int, spec: FieldSpec, window=None, max_total: int | None = None) -> HomotopyTable:
    """Summands of pi(BPGL<1> ^ bar{BPGL<1>}^n) indexed by I = (k_1..k_n), k_j >= 1.

    The E_2 input for I is Ext of B_0(k_1) (x) ... (x) B_0(k_n), suspended by
    (2|I|(p-1), |I|(p-1)).  After the free summands are split off, the core is
    checked against L(sum nu_p(k_j!)).  A core that fails the check keeps its
    computed ranks, with the label "core(I)".
    """
    from .comodules import tensor
    from .margolis import split_free_summands

    if n < 1:
        raise ConfigurationError("n must be at least 1")
    win = _window(window)
    p = spec.p
    if max_total is None:
        max_total = max(n, (win["s"][1] - win["w"][0]) // (p - 1) + 1)
    total = HomotopyTable(spec, win, meta={"op": "n_line", "n": n})
    for K in range(n, max_total + 1):
        for I in _compositions(K, n):
            mods = [_stratum_module(spec, "BPGL1", k) for k in I]
            T = mods[0]
            for M in mods[1:]:
                T = tensor(T, M)
            sp = split_free_summands(T)
            m = sum(legendre(k, p) for k in I)
            ok = _core_matches(sp.core, m, spec)
            data = SummandData(I, m, ok, [_free_socle(T.pair, d) for d in sp.free],
                               (2 * K * (p - 1), K * (p - 1)))
            tag = f"[I={','.join(map(str, I))}]"
            _run_summand(spec, "BPGL1", data, win, tag)
            data.table.meta.update({"I": list(I), "m": m, "label": f"L({m})" if ok else f"core({I})",
                                    "free": len(data.free)})
            total.absorb(data.table, I)
    return total


def _compositions(K: int, n: int):
    for cut in itertools.combinations(range(1, K), n - 1):
        bounds = (0,) + cut + (K,)
        yield tuple(bounds[j + 1] - bounds[j] for j in range(n))


# ---------------------------------------------------------------- Bockstein path


def bockstein_ss(spec: FieldSpec, n: int, window=None) -> ExtChart:
    """Ext_{E(n)}(M_p) over F_q from the untwisted answer by a single
    Bockstein differential.

    E_1 = F_p[y, v_0, v_1] (x) E[x] with x the square-zero class (rho, gamma
    or u).  When the twist is nontrivial, d_1(y^k) = k x y^(k-1) v_0.  With a
    trivial twist there is no differential.
    """
    if spec.field != "F":
        raise ConfigurationError("the Bockstein path needs a square-zero twist class (finite fields)")
    if n not in (0, 1):
        raise ConfigurationError("n must be 0 or 1")
    win = _window(window)
    (s0, s1), (f0, f1), (w0, w1) = win["s"], win["f"], win["w"]
    p, i = spec.p, spec.i
    twisted = not spec.bockstein_trivial
    xn = "u" if not twisted else ("rho" if p == 2 else "gamma")
    yn = "tau" if p == 2 else "zeta"
    dims: Counter = Counter()
    labels: dict = {}
    for e in (0, 1):
        for c in range(f1 + 1 if n else 1):
            for a in range(f1 + 1 - c):
                kmax = (c * (p - 1) - e * i - w0) // i
                for k in range(kmax + 1):
                    if twisted and e == 0 and k % p:
                        continue  # source of d_1
                    if twisted and e == 1 and a >= 1 and (k + 1) % p:
                        continue  # hit by d_1(y^(k+1) v0^(a-1))
                    s, f, w = -e + c * (2 * p - 2), a + c, -i * (e + k) + c * (p - 1)
                    if s0 <= s <= s1 and f0 <= f <= f1 and w0 <= w <= w1:
                        dims[(s, f, w)] += 1
                        lab = (_power(xn, e) + _power(yn, k) + _power("v0", a) + _power("v1", c)) or "1"
                        labels.setdefault((s, f, w), []).append(lab)
    chart = ExtChart(spec, n, win, dict(dims), labels, {d: [""] * v for d, v in dims.items()})
    chart.meta = {"op": "bockstein_ss", "twisted": twisted}
    return chart


# ---------------------------------------------------------------- collapse


@dataclass(frozen=True)
class Generator:
    name: str
    deg: tuple  # (s, f, w)
    kind: str  # "x" (top torsion-free), "xj" (lower x_j), "y", "b"
    bound: int = 0  # for y_l: largest v_0 power


@dataclass
class CollapseReport:
    spec: FieldSpec
    k: int
    window: dict
    generators: list = field(default_factory=list)
    excluded: Counter = field(default_factory=Counter)  # reason -> number of (source, r, target) cases
    candidates: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.candidates


def bimodule_generators(p: int, K: int, M: int, shift: tuple = (0, 0), tag: str = "") -> list[Generator]:
    """Module generators of Ext_{E(1)}(L(K), L(M)) over M_p[v_0, v_1]."""
    ds, dw = shift
    out = []
    if K <= M:
        top = M - K
        for j in range(top + 1):
            deg = (2 * j * (p - 1) + ds, 0, j * (p - 1) + dw)
            out.append(Generator(f"x{j}{tag}", deg, "x" if j == top else "xj"))
    else:
        r = K - M
        out.append(Generator(f"x{tag}", (ds, r, dw), "x"))
        for j in range(r):
            deg = (-1 - (2 * p - 2) * (r - j) + ds, 0, -(p - 1) * (r - j) + dw)
            out.append(Generator(f"y{j}{tag}", deg, "y", j))
    for t, (s, w) in enumerate(torsion_generators(p, K, M)):
        out.append(Generator(f"b{t}{tag}", (s + ds, 0, w + dw), "b"))
    return out


def collapse_page(spec: FieldSpec, k: int, window=None) -> list[Generator]:
    """Generators of sum_m Sigma^{2(m-k)(p-1), (m-k)(p-1)} Ext(L(nu_p(k!)), L(nu_p(m!)))
    that can reach the window."""
    win = _window(window)
    p = spec.p
    K = legendre(k, p)
    m_hi = k + K + (win["s"][1] + 2 * p) // (2 * p - 2) + 2
    gens = []
    for m in range(0, m_hi + 1):
        shift = (2 * (m - k) * (p - 1), (m - k) * (p - 1))
        gens += bimodule_generators(p, K, legendre(m, p), shift, f"[m={m}]")
    return gens


def _allowed(g: Generator, i: int, j: int) -> bool:
    if g.kind == "x":
        return True
    if g.kind == "xj":
        return j == 0
    if g.kind == "y":
        return j == 0 and i <= g.bound
    return i == 0 and j == 0


def verify_collapse(spec: FieldSpec, k: int, window=None) -> CollapseReport:
    """Check that no differential can leave a module generator of the page.

    For every generator a (x, x_l, y_l, b) and every page r, every candidate
    target c v_0^i v_1^j g in degree |a| + (-1, r, 0) is listed and then
    excluded for one of three reasons.  torsion: a v_1-torsion source cannot
    hit a v_1-torsion-free class.  coefficient-degree: M_p has no monomial c
    of the required degree.  filtration: v_0^i v_1^j g is zero, because of
    the y-triangle bounds or because b lives in filtration 0.  Candidates
    that survive all three are reported.
    """
    from .grading import CoefficientRing

    win = _window(window)
    (s0, s1), (_, f1), (w0, w1) = win["s"], win["f"], win["w"]
    p = spec.p
    ring = CoefficientRing(spec)
    gens = collapse_page(spec, k, win)
    report = CollapseReport(spec, k, win, gens)
    sources = [g for g in gens if s0 <= g.deg[0] <= s1 and w0 <= g.deg[2] <= w1 and g.deg[1] <= f1]
    for a in sources:
        a_torsion = a.kind in ("y", "b")
        for r in range(1, f1 - a.deg[1] + 1):
            ts, tf, tw = a.deg[0] - 1, a.deg[1] + r, a.deg[2]
            for g in gens:
                if g.deg[1] > tf:
                    continue
                for j in range(tf - g.deg[1] + 1):
                    i = tf - g.deg[1] - j
                    if a_torsion and g.kind in ("x", "xj"):
                        report.excluded["torsion"] += 1
                        continue
                    cs, cw = ts - g.deg[0] - j * (2 * p - 2), tw - g.deg[2] - j * (p - 1)
                    if ring.monomial_in_degree((cs, cw)) is None:
                        report.excluded["coefficient-degree"] += 1
                        continue
                    if not _allowed(g, i, j):
                        report.excluded["filtration"] += 1
                        continue
                    c = ring.name_of(ring.monomial_in_degree((cs, cw)))
                    report.candidates.append({"source": a.name, "r": r, "target": g.name, "c": c,
                                              "v0": i, "v1": j, "degree": (ts, tf, tw)})
    return report
