"""Minimal free resolutions over E(n) and Ext charts with products.

Ext_E(N, M) is computed as the cohomology of Hom_E(P, M) for a minimal
resolution P of N.  A map of internal degree T sends a generator g of P_f to
M in degree |g| + T; the class then sits at stem s = T.s - f, filtration f,
weight T.w.  ``ext_chart(M)`` is Ext_E(M_p, M), the Adams E_2-term of the
module M.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from . import linalg
from .comodules import lightning_flash, quotient_dual, unit_module
from .grading import ConfigurationError, Degree, FieldSpec
from .modules import FinModule, ModuleError, free_module
from .steenrod import ExteriorAlgebraPair, tau_degree


class TruncationError(RuntimeError):
    pass


def phi(d) -> int:
    """Positive grading on E(n): every generator raises -s-w."""
    return -d[0] - d[1]


def _koszul_degrees(N: FinModule, f: int) -> list[Degree]:
    """Degrees where Tor_f(N, F_p) can live: |b| - a|Q_0| - c|Q_1|, a + c = f."""
    p = N.p
    q0, q1 = Degree(1, 0), tau_degree(1, p)
    out = set()
    for d in set(N.degrees):
        if N.n == 0:
            out.add(d - Degree(f * q0.s, f * q0.w))
        else:
            for a in range(f + 1):
                c = f - a
                out.add(d - Degree(a * q0.s + c * q1.s, a * q0.w + c * q1.w))
    return sorted(out, key=lambda d: (phi(d), d.s, d.w))


@dataclass
class Stage:
    module: FinModule  # P_f
    gen_degrees: list
    images: list  # d(g_i) as vectors in P_{f-1} (or in N for f = 0)
    terms: list = field(default_factory=list)  # d(g_i) as [(gen, E, a, c)] for f >= 1


class Resolution:
    """Minimal free resolution of ``N`` through stage ``max_f``."""

    def __init__(self, N: FinModule, max_f: int):
        self.N = N
        self.pair = N.pair
        self.p = N.p
        self.max_f = max_f
        self.stages: list[Stage] = []
        self.minimal = True
        self._build()

    # image of a*(g Q_E) under d, computed inside the target Y
    @staticmethod
    def _d_basis(X: FinModule, Y: FinModule, images, inv, D, j):
        gi, E = inv[j]
        a = X.mono(D, j)
        gd = X.gen_degrees[gi]
        img = Y.act(images[gi], gd, E)
        return Y.mul(a, img, gd - X.pair.deg(E))

    def _generators(self, X: FinModule, dmap, cands):
        """Choose new generators in ``X`` covering ker(dmap) in the candidate degrees."""
        p = self.p
        pair = self.pair
        chosen: list = []
        for D in cands:
            basis = X.basis(D)
            if not basis:
                continue
            nb = len(basis)
            if dmap is None:
                ker = [linalg.sparse_row({i: 1}, nb, p) for i in range(nb)]
            else:
                rows, ncols = dmap(D)
                ker = linalg.kernel(rows, ncols, p) if ncols else \
                    [linalg.sparse_row({i: 1}, nb, p) for i in range(nb)]
            if not ker:
                continue
            ech = linalg.Echelon(nb, p)
            for gd, vec in chosen:
                for E in pair.subsets:
                    a = X.ring.monomial_in_degree(D - gd + pair.deg(E))
                    if a is None:
                        continue
                    w = X.mul(a, X.act(vec, gd, E), gd - pair.deg(E))
                    if w:
                        ech.add(X.vec_to_row(w, D))
            for v in ker:
                if ech.add(v):
                    chosen.append((D, X.row_to_vec(v, D)))
        return chosen

    def _build(self):
        N = self.N
        pair = self.pair
        # stage 0: minimal generators of N
        prev_X, prev_map = N, None
        for f in range(self.max_f + 1):
            cands = _koszul_degrees(N, f)
            gens = self._generators(prev_X, prev_map, cands)
            degs = [d for d, _ in gens]
            P = free_module(pair, degs, [f"g{f}_{i}" for i in range(len(degs))], tag=f"P{f}")
            images = [v for _, v in gens]
            st = Stage(P, degs, images)
            if f >= 1:
                Xprev = prev_X
                inv = {j: key for key, j in Xprev.gen_index.items()}
                for D, v in gens:
                    tl = []
                    for j, c in v.items():
                        gi, E = inv[j]
                        a = Xprev.mono(D, j)
                        if E == 0 and a == Xprev.ring.one:
                            self.minimal = False
                        tl.append((gi, E, a, c))
                    st.terms.append(tl)
            self.stages.append(st)
            # map P_f -> previous target
            Y = prev_X
            inv_P = {j: key for key, j in P.gen_index.items()}

            def dmap(D, P=P, Y=Y, images=images, inv_P=inv_P):
                tb = Y.basis(D)
                rows = []
                for j in P.basis(D):
                    img = self._d_basis(P, Y, images, inv_P, D, j)
                    rows.append(Y.vec_to_row(img, D))
                return rows, len(tb)

            prev_X, prev_map = P, dmap

    def generator_degrees(self, f: int) -> list:
        return self.stages[f].gen_degrees

    def check_dd(self) -> bool:
        """d o d = 0 on every generator."""
        for f in range(2, len(self.stages)):
            P1 = self.stages[f - 1].module
            P0 = self.stages[f - 2].module
            inv1 = {j: key for key, j in P1.gen_index.items()}
            for D, v in zip(self.stages[f].gen_degrees, self.stages[f].images):
                acc: dict = {}
                for j, c in v.items():
                    w = self._d_basis(P1, P0, self.stages[f - 1].images, inv1, D, j)
                    for k, c2 in w.items():
                        acc[k] = (acc.get(k, 0) + c * c2) % self.p
                if any(acc.values()):
                    return False
        return True


_RES_CACHE: dict = {}


def minimal_resolution(N: FinModule, max_f: int) -> Resolution:
    return Resolution(N, max_f)


def _unit_resolution(pair: ExteriorAlgebraPair, max_f: int) -> Resolution:
    key = (pair.spec, pair.n, max_f)
    hit = _RES_CACHE.get(key)
    if hit is None:
        hit = Resolution(unit_module(pair), max_f)
        _RES_CACHE[key] = hit
    return hit


# ---------------------------------------------------------------- Hom complex


class _Cohomology:
    """Cocycle representatives and coordinates of one cohomology group."""

    def __init__(self, ncols, p, boundaries, cocycles):
        self.p = p
        self.ncols = ncols
        ech = linalg.Echelon(ncols, p)
        for b in boundaries:
            ech.add(b)
        self.nb = len(ech)
        self.reps = []
        for z in cocycles:
            if ech.add(z):
                self.reps.append(z)
        self._rows = linalg.image(boundaries, ncols, p) if boundaries else []
        self._all = list(self._rows) + list(self.reps)

    def coords(self, v) -> dict:
        if not self.reps:
            return {}
        sol = linalg.solve(self._all, self.ncols, self.p, v)
        if sol is None:
            raise ModuleError("product is not a cocycle")
        ent = linalg.row_entries(sol, self.p)
        nb = len(self._rows)
        return {i - nb: c for i, c in ent.items() if i >= nb}


class ExtComputation:
    """Cohomology of Hom_E(P, M) for a resolution P."""

    def __init__(self, res: Resolution, M: FinModule):
        if res.pair.spec != M.pair.spec or res.pair.n != M.n:
            raise ConfigurationError("resolution and module live over different algebras")
        self.res = res
        self.M = M
        self.p = M.p
        self._coh: dict = {}

    def hom_basis(self, f: int, T) -> list:
        out = []
        for gi, gd in enumerate(self.res.stages[f].gen_degrees):
            for k in self.M.basis(gd + T):
                out.append((gi, k))
        return out

    def apply(self, f1: int, T, phi_map: dict, gi_new: int) -> dict:
        """phi(d g) for g the gi_new-th generator of P_{f1}; phi: gen -> M-vector."""
        M = self.M
        st = self.res.stages[f1]
        prev = self.res.stages[f1 - 1]
        p = self.p
        out: dict = {}
        for gi, E, a, c in st.terms[gi_new]:
            v = phi_map.get(gi)
            if not v:
                continue
            dg = prev.gen_degrees[gi] + T
            w = M.mul(a, M.act(v, dg, E), dg - M.pair.deg(E))
            for k, c2 in w.items():
                out[k] = (out.get(k, 0) + c * c2) % p
        return {k: c for k, c in out.items() if c}

    def to_map(self, f: int, T, row) -> dict:
        basis = self.hom_basis(f, T)
        out: dict = {}
        for i, c in linalg.row_entries(row, self.p).items():
            gi, k = basis[i]
            out.setdefault(gi, {})[k] = c
        return out

    def to_row(self, f: int, T, phi_map: dict):
        basis = self.hom_basis(f, T)
        pos = {b: i for i, b in enumerate(basis)}
        ent = {}
        for gi, v in phi_map.items():
            for k, c in v.items():
                ent[pos[(gi, k)]] = c
        return linalg.sparse_row(ent, len(basis), self.p)

    def delta_rows(self, f: int, T):
        """Rows of delta: Hom^f_T -> Hom^{f+1}_T."""
        src = self.hom_basis(f, T)
        tgt = self.hom_basis(f + 1, T)
        pos = {b: i for i, b in enumerate(tgt)}
        ngen = len(self.res.stages[f + 1].gen_degrees)
        rows = []
        for gi, k in src:
            ent = {}
            for g2 in range(ngen):
                for l, c in self.apply(f + 1, T, {gi: {k: 1}}, g2).items():
                    ent[pos[(g2, l)]] = c
            rows.append(linalg.sparse_row(ent, len(tgt), self.p))
        return rows, len(tgt)

    def cohomology(self, f: int, T) -> _Cohomology:
        T = Degree(*T)
        key = (f, T)
        hit = self._coh.get(key)
        if hit is not None:
            return hit
        if f + 1 >= len(self.res.stages):
            raise TruncationError(f"resolution too short for filtration {f}")
        n_here = len(self.hom_basis(f, T))
        rows, nt = self.delta_rows(f, T)
        if n_here == 0:
            cocycles = []
        elif nt == 0:
            cocycles = [linalg.sparse_row({i: 1}, n_here, self.p) for i in range(n_here)]
        else:
            cocycles = linalg.kernel(rows, nt, self.p)
        bounds = []
        if f > 0 and n_here:
            brows, _ = self.delta_rows(f - 1, T)
            bounds = [r for r in brows if not linalg.is_zero(r, self.p)]
        hit = _Cohomology(n_here, self.p, bounds, cocycles)
        self._coh[key] = hit
        return hit

    def dim(self, s: int, f: int, w: int) -> int:
        return len(self.cohomology(f, (s + f, w)).reps)


# ---------------------------------------------------------------- charts


@dataclass
class ExtChart:
    spec: FieldSpec
    n: int
    window: dict
    dims: dict = field(default_factory=dict)  # (s, f, w) -> int
    labels: dict = field(default_factory=dict)  # (s, f, w) -> [str]
    tags: dict = field(default_factory=dict)  # (s, f, w) -> [str]
    products: dict = field(default_factory=dict)  # name -> {(s, f, w): [ {j: c} per class ]}
    product_degrees: dict = field(default_factory=dict)  # name -> (ds, df, dw)
    meta: dict = field(default_factory=dict)

    def dim(self, s, f, w) -> int:
        return self.dims.get((s, f, w), 0)

    def nonzero(self) -> dict:
        return {k: v for k, v in sorted(self.dims.items()) if v}

    def total(self) -> int:
        return sum(self.dims.values())

    def target(self, name: str, deg) -> tuple:
        ds, df, dw = self.product_degrees[name]
        return (deg[0] + ds, deg[1] + df, deg[2] + dw)

    def product_rows(self, name: str, deg):
        """Matrix of multiplication by ``name`` out of ``deg`` as sparse rows,
        or None when the product was not computed there."""
        table = self.products.get(name, {}).get(tuple(deg))
        if table is None:
            return None
        n = self.dim(*self.target(name, deg))
        return [linalg.sparse_row(v, n, self.spec.p) for v in table], n

    def product_rank(self, name: str, deg) -> int | None:
        got = self.product_rows(name, deg)
        if got is None:
            return None
        rows, n = got
        return linalg.rank(rows, n, self.spec.p) if rows and n else 0


def _window(window) -> dict:
    w = {"s": (-6, 10), "f": (0, 6), "w": (-6, 6)}
    if window:
        w.update({k: tuple(v) for k, v in window.items()})
    return w


def _ext_module(E: FinModule, i: int) -> FinModule:
    """The two-cell module {e, e'} with e Q_i = e' (the extension for v_i)."""
    pair = E.pair
    d = tau_degree(i, pair.p)
    act = {G: [{}, {}] for G in pair.subsets if G}
    act[1 << i][0] = {1: 1}
    return FinModule(pair, [Degree(0, 0), Degree(-d.s, -d.w)], ["e", "e'"], act, tag=f"ext(v{i})")


class ExtProducts:
    """v_i products by the connecting map of M (x) e' -> M (x) {e, e'} -> M,
    and products by invariant coefficients."""

    def __init__(self, comp: ExtComputation):
        from .comodules import tensor

        self.comp = comp
        M = comp.M
        self.tensors = {}
        for i in range(M.n + 1):
            T = tensor(M, _ext_module(M, i))
            self.tensors[i] = T

    def v(self, i: int, f: int, Tdeg, phi_map: dict) -> dict:
        """Cocycle representing v_i * [phi] in Hom^{f+1} at T + |tau_i|."""
        comp = self.comp
        M = comp.M
        Tn = self.tensors[i]
        idx = Tn.factor_index
        st = comp.res.stages[f + 1]
        prev = comp.res.stages[f]
        p = comp.p
        out = {}
        for g2, terms in enumerate(st.terms):
            acc: dict = {}
            for gi, E, a, c in terms:
                v = phi_map.get(gi)
                if not v:
                    continue
                lift = {idx[(k, 0)]: c0 for k, c0 in v.items()}
                dg = prev.gen_degrees[gi] + Tdeg
                w = Tn.mul(a, Tn.act(lift, dg, E), dg - M.pair.deg(E))
                for k, c2 in w.items():
                    acc[k] = (acc.get(k, 0) + c * c2) % p
            vec = {}
            for t, c in acc.items():
                if not c:
                    continue
                k, e = divmod(t, 2)
                if e != 1:
                    raise ModuleError("connecting map left the sub")
                vec[k] = c
            if vec:
                out[g2] = vec
        return out

    def coefficient(self, a, f: int, Tdeg, phi_map: dict) -> dict:
        M = self.comp.M
        gd = self.comp.res.stages[f].gen_degrees
        out = {}
        for gi, v in phi_map.items():
            w = M.mul(a, v, gd[gi] + Tdeg)
            if w:
                out[gi] = w
        return out


def _coefficient_products(pair: ExteriorAlgebraPair) -> dict:
    ring = pair.ring
    out = {}
    for k, g in enumerate(ring.gens):
        for e in (1, pair.p, pair.p ** 2):
            if g.nilpotent and e > 1:
                continue
            a = [0] * len(ring.gens)
            a[k] = e
            a = tuple(a)
            if pair.is_invariant(a):
                out[ring.name_of(a)] = a
    return out


def chart_from(comp: ExtComputation, window=None, products: bool = True, label_fn=None) -> ExtChart:
    win = _window(window)
    M = comp.M
    pair = M.pair
    p = M.p
    chart = ExtChart(pair.spec, M.n, win)
    (s0, s1), (f0, f1), (w0, w1) = win["s"], win["f"], win["w"]
    reps = {}
    for f in range(f0, f1 + 1):
        for s in range(s0, s1 + 1):
            for w in range(w0, w1 + 1):
                T = Degree(s + f, w)
                coh = comp.cohomology(f, T)
                d = len(coh.reps)
                if not d:
                    continue
                chart.dims[(s, f, w)] = d
                maps = [comp.to_map(f, T, r) for r in coh.reps]
                reps[(s, f, w)] = maps
                labs = []
                for mp in maps:
                    gi = min(mp)
                    k = min(mp[gi])
                    gd = comp.res.stages[f].gen_degrees[gi]
                    labs.append(label_fn(f, gi, M.label(gd + T, k)) if label_fn else
                                f"{M.label(gd + T, k)}@g{f}_{gi}")
                chart.labels[(s, f, w)] = labs
                chart.tags[(s, f, w)] = ["" for _ in maps]
    if not products:
        return chart
    prod = ExtProducts(comp)
    for i in range(M.n + 1):
        name = f"v{i}"
        dt = tau_degree(i, p)
        chart.product_degrees[name] = (dt.s - 1, 1, dt.w)
        table = {}
        for (s, f, w), maps in reps.items():
            if f + 1 > f1:
                continue
            T = Degree(s + f, w)
            T2 = T + dt
            tgt = comp.cohomology(f + 1, T2)
            table[(s, f, w)] = [tgt.coords(comp.to_row(f + 1, T2, prod.v(i, f, T, mp))) for mp in maps]
        chart.products[name] = table
    for name, a in _coefficient_products(pair).items():
        da = pair.ring.degree(a)
        chart.product_degrees[name] = (da.s, 0, da.w)
        table = {}
        for (s, f, w), maps in reps.items():
            T = Degree(s + f, w)
            T2 = T + da
            s2, w2 = s + da.s, w + da.w
            if not (s0 <= s2 <= s1 and w0 <= w2 <= w1):
                continue
            tgt = comp.cohomology(f, T2)
            table[(s, f, w)] = [tgt.coords(comp.to_row(f, T2, prod.coefficient(a, f, T, mp))) for mp in maps]
        chart.products[name] = table
    return chart


def ext_chart(M: FinModule, window=None, products: bool = True) -> ExtChart:
    """Ext_E(M_p, M) through the window, by resolving M_p."""
    win = _window(window)
    res = _unit_resolution(M.pair, win["f"][1] + 2)
    comp = ExtComputation(res, M)
    chart = chart_from(comp, win, products)
    chart.meta = {"op": "ext_chart", "module": M.tag, "minimal": res.minimal}
    return chart


def ext_between(N: FinModule, M: FinModule, window=None, products: bool = True) -> ExtChart:
    """Ext_E(N, M) by resolving N."""
    win = _window(window)
    res = Resolution(N, win["f"][1] + 2)
    comp = ExtComputation(res, M)
    chart = chart_from(comp, win, products)
    chart.meta = {"op": "ext", "source": N.tag, "target": M.tag, "minimal": res.minimal}
    return chart


def _change_basis(chart: ExtChart, deg: tuple, basis: list[dict]) -> None:
    """Replace the basis at ``deg`` by ``basis`` (each a combination {j: c} of
    the old basis vectors), rewriting labels and every product table."""
    p = chart.spec.p
    d = chart.dims[deg]
    P = [linalg.sparse_row(v, d, p) for v in basis]

    def combine(rows: list[dict], v: dict) -> dict:
        acc: dict = {}
        for j, c in v.items():
            for k, c2 in rows[j].items():
                acc[k] = (acc.get(k, 0) + c * c2) % p
        return {k: c for k, c in acc.items() if c}

    def coords(v: dict) -> dict:
        sol = linalg.solve(P, d, p, linalg.sparse_row(v, d, p))
        return linalg.row_entries(sol, p)

    for name, table in chart.products.items():
        if deg in table:
            table[deg] = [combine(table[deg], v) for v in basis]
        for src, rows in table.items():
            if chart.target(name, src) == deg:
                table[src] = [coords(v) for v in rows]
    old = chart.labels.get(deg, [""] * d)
    chart.labels[deg] = [" + ".join((old[j] if c == 1 else f"{c}*{old[j]}") for j, c in sorted(v.items()))
                         for v in basis]


def tag_b_summand(chart: ExtChart) -> ExtChart:
    """Tag filtration-0 negative-stem classes killed by v_0 and v_1 as B.

    The joint kernel of v_0 and v_1 is computed in each such degree; when it is
    not spanned by basis vectors the basis there is changed so that it is.
    """
    p = chart.spec.p
    for (s, f, w), d in sorted(chart.dims.items()):
        if f != 0 or s >= 0:
            continue
        deg = (s, f, w)
        tables = [chart.products.get(name, {}).get(deg) for name in ("v0", "v1")]
        if any(t is None for t in tables):
            continue
        n0 = chart.dim(*chart.target("v0", deg))
        n1 = chart.dim(*chart.target("v1", deg))
        rows = [linalg.sparse_row({**tables[0][j], **{n0 + k: c for k, c in tables[1][j].items()}}, n0 + n1, p)
                for j in range(d)]
        ker = [linalg.row_entries(v, p) for v in linalg.kernel(rows, n0 + n1, p)] if n0 + n1 else \
            [{j: 1} for j in range(d)]
        if not ker:
            continue
        if all(len(v) == 1 for v in ker):
            hit = {j for v in ker for j in v}
            chart.tags[deg] = ["B" if j in hit else t for j, t in enumerate(chart.tags[deg])]
            continue
        ech = linalg.Echelon(d, p)
        for v in ker:
            ech.add(linalg.sparse_row(v, d, p))
        rest = [{j: 1} for j in range(d) if ech.add(linalg.sparse_row({j: 1}, d, p))]
        _change_basis(chart, deg, ker + rest)
        chart.tags[deg] = ["B"] * len(ker) + [""] * len(rest)
    return chart


def ext_bimodule(spec: FieldSpec, k: int, m: int, window=None, products: bool = True) -> ExtChart:
    """Ext_{E(1)}(L(k), L(m))."""
    if k < 0 or m < 0:
        raise ConfigurationError("k, m must be nonnegative")
    Lk = lightning_flash(spec, k)
    Lm = lightning_flash(spec, m, Lk.ring)
    chart = ext_between(Lk, Lm, window, products)
    chart.meta.update({"op": "ext_bimodule", "k": k, "m": m})
    if products:
        tag_b_summand(chart)
    return chart


def wrong_side_check(M: FinModule, window=None) -> dict:
    """Compare Ext_{E(1)}((E(1)//E(0))^dual, M) computed by resolution with
    the shortcut Sigma^{-(2p-1), -(p-1)} Ext_{E(0)}(M_p, M).

    Returns the degrees where they differ (empty when consistent).
    """
    if M.n != 1:
        raise ConfigurationError("the shortcut needs an E(1)-module")
    win = _window(window)
    p = M.p
    direct = ext_between(quotient_dual(M.pair), M, win, products=False)
    ds, dw = 2 * p - 1, p - 1
    shifted = {key: val for key, val in win.items()}
    shifted["s"] = (win["s"][0] + ds, win["s"][1] + ds)
    shifted["w"] = (win["w"][0] + dw, win["w"][1] + dw)
    short = ext_chart(M.restrict(0), shifted, products=False)
    moved = {(s - ds, f, w - dw): d for (s, f, w), d in short.dims.items()}
    keys = set(direct.dims) | set(moved)
    return {k: (direct.dims.get(k, 0), moved.get(k, 0)) for k in sorted(keys)
            if direct.dims.get(k, 0) != moved.get(k, 0)}
