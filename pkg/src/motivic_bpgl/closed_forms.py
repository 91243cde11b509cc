"""Closed-form Ext charts, generated from presentations for comparison
against computed charts.

A closed form is a list of coefficient families.  Each family is a string of
filtration-0 classes c * y^b (y the polynomial coefficient generator or one
of its powers) together with the v_0 / v_1 multiples it supports.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace

from . import linalg
from .ext import ExtChart, _window
from .grading import ConfigurationError, FieldSpec

KINDS = ("ExtE0", "ExtE1", "ExtL", "ExtLL")
VARIANTS = ("literal", "corrected")


@dataclass(frozen=True)
class Family:
    label: str
    base: tuple  # (s, f, w) of the first class
    step: tuple | None  # (s, w) of the polynomial generator, None for a single class
    v0: bool  # supports v_0 multiples
    v1_max: int | None = None  # None = unbounded v_1 multiples
    coeff: tuple | None = None  # (x exponent, y exponent of the base, y step) over F_q
    gen: str = ""  # module generator the family sits on


@dataclass(frozen=True)
class Descriptor:
    kind: str
    spec: FieldSpec
    k: int = 0
    m: int = 0
    variant: str = "literal"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unsupported descriptor {self.kind!r}")
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"unknown variant {self.variant!r}")
        if self.k < 0 or self.m < 0:
            raise ConfigurationError("k, m must be nonnegative")

    @classmethod
    def parse(cls, text: str, spec: FieldSpec, variant: str = "literal") -> "Descriptor":
        """``ExtE0``, ``ExtE1``, ``ExtL:m`` or ``ExtLL:k:m``."""
        parts = text.split(":")
        try:
            nums = [int(x) for x in parts[1:]]
        except ValueError as exc:
            raise ConfigurationError(f"bad descriptor {text!r}") from exc
        kind = parts[0]
        if kind in ("ExtE0", "ExtE1") and not nums:
            return cls(kind, spec, variant=variant)
        if kind == "ExtL" and len(nums) == 1:
            return cls(kind, spec, m=nums[0], variant=variant)
        if kind == "ExtLL" and len(nums) == 2:
            return cls(kind, spec, k=nums[0], m=nums[1], variant=variant)
        raise ConfigurationError(f"unsupported descriptor {text!r}")


def _shift(fams: list[Family], d: tuple, tag: str) -> list[Family]:
    out = []
    for F in fams:
        b = (F.base[0] + d[0], F.base[1] + d[1], F.base[2] + d[2])
        out.append(replace(F, label=f"{F.label}{tag}", base=b, gen=F.gen + tag))
    return out


def coefficient_families(spec: FieldSpec, n: int, variant: str = "literal") -> list[Family]:
    """Ext_{E(n)}(M_p) as a list of families."""
    if n not in (0, 1):
        raise ConfigurationError("closed forms exist for E(0) and E(1) only")
    p = spec.p
    if spec.field == "C":
        return [Family("tau^@", (0, 0, 0), (0, -1), True)]
    if spec.field == "R" and p > 2:
        return [Family("theta^@", (0, 0, 0), (0, -2), True)]
    if spec.field == "R":
        if n == 0:
            fams = [Family("tau^2@", (0, 0, 0), (0, -2), True)]
            fams += [Family(f"rho^{a}tau^2@", (-a, 0, -a), (0, -2), False) for a in range(1, 64)]
            return fams
        fams = [Family("tau^4@", (0, 0, 0), (0, -4), True),
                Family("tau^2v0*tau^4@", (0, 1, -2), (0, -4), True)]
        fams += [Family(f"rho^{a}tau^4@", (-a, 0, -a), (0, -4), False, None if a < 3 else 0)
                 for a in range(1, 64)]
        return fams
    i = spec.i
    if spec.bockstein_trivial:
        y = "tau" if p == 2 else "zeta"
        return [Family(f"{y}^@", (0, 0, 0), (0, -i), True, coeff=(0, 0, 1)),
                Family(f"u*{y}^@", (-1, 0, -i), (0, -i), True, coeff=(1, 0, 1))]
    if p == 2:
        # F_2[rho, tau^2, v0, rho tau]/(rho^2, rho v0, rho(rho tau), (rho tau)^2)
        return [Family("tau^2@", (0, 0, 0), (0, -2), True, coeff=(0, 0, 2)),
                Family("rho*tau^2@", (-1, 0, -1), (0, -2), False, coeff=(1, 0, 2)),
                Family("rhotau*tau^2@", (-1, 0, -2), (0, -2), True, coeff=(1, 1, 2))]
    fams = [Family("zeta^p@", (0, 0, 0), (0, -p * i), True, coeff=(0, 0, p)),
            Family("gamma*zeta^p@", (-1, 0, -i), (0, -p * i), False, coeff=(1, 0, p))]
    for j in range(1, p):
        tower = variant == "literal" or j == p - 1
        fams.append(Family(f"gamma zeta^{j}*zeta^p@", (-1, 0, -i - j * i), (0, -p * i), tower,
                           coeff=(1, j, p)))
    return fams


def lightning_families(spec: FieldSpec, m: int, variant: str = "literal") -> list[Family]:
    """Ext_{E(1)}(M_p, L(m)): E(0)-answers on x_0..x_{m-1}, the E(1)-answer on x_m."""
    p = spec.p
    out = []
    for j in range(m + 1):
        d = (2 * j * (p - 1), 0, j * (p - 1))
        fams = _shift(coefficient_families(spec, 0 if j < m else 1, variant), d, f"{{x{j}}}")
        if j < m:
            fams = [replace(F, v1_max=0) for F in fams]
        out += fams
    return out


def _tensor_case(spec: FieldSpec) -> bool:
    """Ext_{E(1)}(M_p) = M_p (x) F_p[v0, v1]: C, R at odd p, untwisted F_q."""
    if spec.field == "C":
        return True
    if spec.field == "R":
        return spec.p > 2
    return spec.bockstein_trivial


def torsion_generators(p: int, k: int, m: int) -> list[tuple]:
    """Filtration-0 torsion generators (s, w) of Ext(L(k), L(m)).

    Each step of the flash sequence shifts the previous torsion by
    -(2p-2, p-1) and adds the filtration-0 part of the cokernel term
    Sigma^{-(2p-1), -(p-1)} Ext_{E(0)}(M_p, L(m)): the E(0)-free cells of L(m)
    always, the bottom tower class only while k <= m (for k > m it becomes
    a y-class).
    """
    out: list = []
    for j in range(1, k + 1):
        out = [(s - (2 * p - 2), w - (p - 1)) for s, w in out]
        out += [(i * (2 * p - 2) - (2 * p - 1), (i - 1) * (p - 1)) for i in range(1, m + 1)]
        if j <= m:
            out.append((-(2 * p - 1), -(p - 1)))
    return sorted(out)


def _bimodule_families(spec: FieldSpec, k: int, m: int, variant: str) -> list[Family]:
    """Ext_{E(1)}(L(k), L(m)).

    k <= m (every field): Ext(M_p, L(m-k)) plus torsion, each torsion
    generator carrying a full copy of M_p.  k > m: the classical answer
    (x in filtration k-m and the y-triangle) tensored with M_p, plus torsion.
    """
    if k > m and not _tensor_case(spec):
        raise ConfigurationError(f"ExtLL closed form for k > m not tabulated over {spec.name} at p={spec.p}")
    p = spec.p
    coeff0 = ring_families(spec)
    if k <= m:
        out = lightning_families(spec, m - k, variant)
    else:
        r = k - m
        out = _shift(coefficient_families(spec, 1, variant), (0, r, 0), "{x}")
        for j in range(r):
            s, w = -1 - (2 * p - 2) * (r - j), -(p - 1) * (r - j)
            for a in range(j + 1):
                out += _shift(coeff0, (s, a, w), f"{{v0^{a}y{j}}}")
    for t, (s, w) in enumerate(torsion_generators(p, k, m)):
        out += _shift(coeff0, (s, 0, w), f"{{b{t}}}")
    return out


def families(desc: Descriptor) -> list[Family]:
    if desc.kind == "ExtE0":
        return coefficient_families(desc.spec, 0, desc.variant)
    if desc.kind == "ExtE1":
        return coefficient_families(desc.spec, 1, desc.variant)
    if desc.kind == "ExtL":
        return lightning_families(desc.spec, desc.m, desc.variant)
    return _bimodule_families(desc.spec, desc.k, desc.m, desc.variant)


def _members(F: Family, p: int, n: int, win: dict):
    (s0, s1), (f0, f1), (w0, w1) = win["s"], win["f"], win["w"]
    dv1 = (2 * p - 2, 1, p - 1)
    bmax = 0 if F.step is None or F.step == (0, 0) else (w1 - w0) + f1 * (p - 1) + 1
    for b in range(bmax + 1):
        s = F.base[0] + (F.step[0] * b if b else 0)
        w = F.base[2] + (F.step[1] * b if b else 0)
        for c in range(f1 + 1):
            if n == 0 and c:
                break
            if F.v1_max is not None and c > F.v1_max:
                break
            for a in range(f1 + 1):
                if a and not F.v0:
                    break
                f = F.base[1] + a + c
                ss, ww = s + c * dv1[0], w + c * dv1[2]
                if f0 <= f <= f1 and s0 <= ss <= s1 and w0 <= ww <= w1:
                    yield (ss, f, ww), (b, a, c)


def closed_form_chart(desc: Descriptor, window=None) -> ExtChart:
    """The tabulated answer as a chart of dimensions and labels."""
    win = _window(window)
    n = 0 if desc.kind == "ExtE0" else 1
    p = desc.spec.p
    dims: Counter = Counter()
    labels: dict = {}
    for F in families(desc):
        for deg, (b, a, c) in _members(F, p, n, win):
            dims[deg] += 1
            lab = F.label.replace("@", f"({b})")
            if a:
                lab += f" v0^{a}"
            if c:
                lab += f" v1^{c}"
            labels.setdefault(deg, []).append(lab)
    chart = ExtChart(desc.spec, n, win, dict(dims), labels, {d: [""] * v for d, v in dims.items()})
    chart.meta = {"op": "closed_form", "kind": desc.kind, "k": desc.k, "m": desc.m, "variant": desc.variant}
    return chart


def compare(computed: ExtChart, expected: ExtChart) -> dict:
    """Degrees where the two charts disagree: {(s, f, w): (computed, expected)}."""
    keys = set(computed.dims) | set(expected.dims)
    return {k: (computed.dim(*k), expected.dim(*k)) for k in sorted(keys)
            if computed.dim(*k) != expected.dim(*k)}


def real_triangle_report(chart: ExtChart, k: int, m: int) -> list[str]:
    """Check the k > m answer over R at p = 2 against a computed chart.

    Verifies the y-triangle (y_i, tau^2 y_i, v_1 y_i = v_0 y_{i+1},
    v_0 y_0 = 0, v_0 tau^2 y_0 != 0 = v_0^2 tau^2 y_0, v_1 y_{r-1} = 0), the
    class x with v_1 x != 0, the class b and rho-multiplication out of y_0.
    Returns the failed items; an empty list means agreement.
    """
    spec = chart.spec
    if spec.field != "R" or spec.p != 2 or k <= m:
        raise ConfigurationError("the triangle formation is the R, p = 2, k > m case")
    r = k - m
    bad: list[str] = []
    y = [(-2 * (r - i) - 1, 0, -(r - i)) for i in range(r)]
    ty = [(s, f, w - 2) for s, f, w in y]

    def rk(name, deg):
        got = chart.product_rank(name, deg)
        return 0 if got is None else got

    for i in range(r):
        if not chart.dim(*y[i]):
            bad.append(f"y{i} missing at {y[i]}")
        if not chart.dim(*ty[i]):
            bad.append(f"tau^2 y{i} missing at {ty[i]}")
    if chart.dim(*y[0]) and rk("v0", y[0]) >= chart.dim(*y[0]):
        bad.append("v0 y0 != 0")
    if not rk("v0", ty[0]):
        bad.append("v0 tau^2 y0 = 0")
    up = (ty[0][0], 1, ty[0][2])
    if rk("v0", up):
        # v0 on the whole degree may be nonzero; require it to kill the v0-image
        rows, n = chart.product_rows("v0", ty[0])
        rows2, n2 = chart.product_rows("v0", up)
        img = linalg.image(rows, n, spec.p)
        for v in img:
            acc: dict = {}
            for j, c in linalg.row_entries(v, spec.p).items():
                for l, c2 in linalg.row_entries(rows2[j], spec.p).items():
                    acc[l] = (acc.get(l, 0) + c * c2) % spec.p
            if any(acc.values()):
                bad.append("v0^2 tau^2 y0 != 0")
                break
    for i in range(r - 1):
        a, b = chart.product_rows("v1", y[i]) or ([], 0), chart.product_rows("v0", y[i + 1]) or ([], 0)
        ia = linalg.image(a[0], a[1], spec.p) if a[0] and a[1] else []
        ib = linalg.image(b[0], b[1], spec.p) if b[0] and b[1] else []
        if not ia or not ib or linalg.rank(ia + ib, a[1], spec.p) == len(ia) + len(ib):
            bad.append(f"v1 y{i} = v0 y{i + 1} not visible")
    if chart.dim(*y[-1]) and rk("v1", y[-1]) >= chart.dim(*y[-1]):
        bad.append(f"v1 y{r - 1} != 0")
    x = (0, r, 0)
    if not chart.dim(*x) or not rk("v1", x):
        bad.append("x missing or v1 x = 0")
    b = (-2 * r - 1, 0, -r - 1)
    if not chart.dim(*b):
        bad.append(f"b missing at {b}")
    deg = y[0]
    while chart.products.get("rho", {}).get(deg) is not None:
        if not rk("rho", deg):
            bad.append(f"rho-tower from y0 stops at {deg}")
            break
        deg = chart.target("rho", deg)
    return bad


def ring_families(spec: FieldSpec) -> list[Family]:
    """Every monomial of M_p as an isolated filtration-0 class (Hom into a
    free E(n)-module)."""
    if spec.field == "C":
        return [Family("tau^@", (0, 0, 0), (0, -1), False, 0)]
    if spec.field == "R" and spec.p > 2:
        return [Family("theta^@", (0, 0, 0), (0, -2), False, 0)]
    if spec.field == "R":
        fams = [Family("tau^@", (0, 0, 0), (0, -1), False, 0)]
        return fams + [Family(f"rho^{a}tau^@", (-a, 0, -a), (0, -1), False, 0) for a in range(1, 64)]
    i = spec.i
    x = "u" if spec.bockstein_trivial else ("rho" if spec.p == 2 else "gamma")
    y = "tau" if spec.p == 2 else "zeta"
    return [Family(f"{y}^@", (0, 0, 0), (0, -i), False, 0),
            Family(f"{x}{y}^@", (-1, 0, -i), (0, -i), False, 0)]
