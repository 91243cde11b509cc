"""Margolis homology, freeness, free-summand splitting and the Whitehead test.

Margolis homology is computed on F_p (x) M, i.e. after killing both the
square-zero (or rho) generator and the polynomial generator of the
coefficient ring.  For modules free over the coefficients this is the
double reduction (M/(x))/(y) in every field case.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from . import linalg
from .grading import FieldSpec, legendre
from .modules import FinModule, ModuleError, ModuleMap, Quotient
from .steenrod import WeightedMonomial


@dataclass
class MargolisResult:
    module: FinModule
    i: int
    classes: dict = field(default_factory=dict)  # degree -> list of representative vectors {k: c}

    @property
    def total_dim(self) -> int:
        return sum(len(v) for v in self.classes.values())

    def dims(self) -> dict:
        return {d: len(v) for d, v in sorted(self.classes.items()) if v}

    def labels(self) -> dict:
        M = self.module
        out = {}
        for d, vs in sorted(self.classes.items()):
            out[d] = [" + ".join(f"{c}*{M.labels[k]}" if c != 1 else M.labels[k]
                                 for k, c in sorted(v.items())) for v in vs]
        return out


def _pure(M: FinModule) -> dict:
    by: dict = {}
    for k, d in enumerate(M.degrees):
        by.setdefault(d, []).append(k)
    return by


def _reduced_rows(M: FinModule, G: int, src: list, tgt: list):
    red = M.reduced_matrix(G)
    pos = {k: i for i, k in enumerate(tgt)}
    rows = []
    for j in src:
        rows.append(linalg.sparse_row({pos[k]: c for (a, k), c in red.items() if a == j and k in pos},
                                      len(tgt), M.p))
    return rows


def _check_square_zero(M: FinModule, G: int) -> None:
    red = M.reduced_matrix(G)
    p = M.p
    for j in range(M.rank):
        acc: dict = {}
        for (a, k), c in red.items():
            if a != j:
                continue
            for (b, l), c2 in red.items():
                if b == k:
                    acc[l] = (acc.get(l, 0) + c * c2) % p
        if any(acc.values()):
            raise ModuleError(f"reduced Q^2 does not vanish on {M.labels[j]}")


def margolis_homology(M: FinModule, i: int, spec: FieldSpec | None = None, window=None) -> MargolisResult:
    """Homology of Q_i acting on F_p (x) M, per degree.

    ``window`` optionally restricts to degrees (s, w) with s in [s0, s1].
    """
    if i > M.n or i < 0:
        raise ModuleError(f"Q_{i} is not in E({M.n})")
    if spec is not None and spec != M.pair.spec:
        raise ModuleError("field mismatch")
    G = 1 << i
    _check_square_zero(M, G)
    dq = M.pair.deg(G)
    pure = _pure(M)
    res = MargolisResult(M, i)
    p = M.p
    for d in sorted(pure):
        if window is not None and not (window[0] <= d.s <= window[1]):
            continue
        here = pure[d]
        below = pure.get(d - dq, [])
        above = pure.get(d + dq, [])
        out_rows = _reduced_rows(M, G, here, below)
        ker = linalg.kernel(out_rows, len(below), p) if below else \
            [linalg.sparse_row({j: 1}, len(here), p) for j in range(len(here))]
        in_rows = _reduced_rows(M, G, above, here) if above else []
        ech = linalg.Echelon(len(here), p)
        for r in in_rows:
            ech.add(r)
        reps = []
        for v in ker:
            if ech.add(v):
                reps.append({here[j]: c for j, c in linalg.row_entries(v, p).items()})
        if reps:
            res.classes[d] = reps
    return res


def is_free(M: FinModule, window=None) -> bool:
    """Freeness over E(n) within the window.

    Modules here are free over the coefficient ring by construction, so the
    F_p[x]-freeness half of the criterion holds automatically; what remains
    is vanishing of every Margolis homology.
    """
    return all(margolis_homology(M, i, window=window).total_dim == 0 for i in range(M.n + 1))


def _top(M: FinModule) -> int:
    return (1 << (M.n + 1)) - 1


@dataclass
class Splitting:
    core: FinModule
    free: list  # suspension degrees of the split free summands
    projection: ModuleMap  # original module -> core


def split_free_summands(M: FinModule) -> Splitting:
    """Repeatedly split off free cyclic summands, lowest degree first.

    A pure element x with x Q_top nonzero after reduction generates a free
    summand; free modules are injective, so M = xE (+) M/xE.
    """
    top = _top(M)
    dtop = M.pair.deg(top)
    cur = M
    proj = ModuleMap(M, M, [{j: 1} for j in range(M.rank)])
    free: list = []
    for _ in range(M.rank + 1):
        pure = _pure(cur)
        pick = None
        for d in sorted(pure):
            below = pure.get(d - dtop, [])
            if not below:
                continue
            rows = _reduced_rows(cur, top, pure[d], below)
            for j, r in zip(pure[d], rows):
                if not linalg.is_zero(r, cur.p):
                    pick = (d, j)
                    break
            if pick:
                break
        if pick is None:
            return Splitting(cur, free, proj)
        d, j = pick
        Qt = Quotient(cur, [(d, {j: 1})], tag=M.tag + "/free")
        free.append(d)
        proj = proj.compose(Qt.projection())
        cur = Qt.Q
    raise ModuleError("free-summand extraction did not terminate")


def _reduced_map(f: ModuleMap, dsrc, src_ks, tgt_ks):
    pos = {k: i for i, k in enumerate(tgt_ks)}
    rows = []
    for j in src_ks:
        img = f.images[j]
        rows.append(linalg.sparse_row({pos[k]: c for k, c in img.items() if k in pos}, len(tgt_ks), f.src.p))
    return rows


def margolis_map_iso(f: ModuleMap, i: int) -> bool:
    """Does f induce an isomorphism on Q_i-Margolis homology?"""
    M, N = f.src, f.tgt
    p = M.p
    HM = margolis_homology(M, i)
    HN = margolis_homology(N, i)
    if HM.dims() != HN.dims():
        return False
    G = 1 << i
    dq = N.pair.deg(G)
    pureN = _pure(N)
    for d, reps in HM.classes.items():
        here = pureN.get(d, [])
        above = pureN.get(d + dq, [])
        ech = linalg.Echelon(len(here), p)
        for r in (_reduced_rows(N, G, above, here) if above else []):
            ech.add(r)
        pos = {k: i for i, k in enumerate(here)}
        for v in reps:
            img: dict = {}
            for k, c in v.items():
                for l, c2 in f.images[k].items():
                    if N.degrees[l] == d:
                        img[pos[l]] = (img.get(pos[l], 0) + c * c2) % p
            if not ech.add(linalg.sparse_row(img, len(here), p)):
                return False
    return True


def stable_equivalence(f: ModuleMap) -> bool:
    """Whitehead test: f is a stable equivalence iff it is a Margolis
    isomorphism for every Q_i (verdict within the modules' finite range)."""
    if not f.is_module_map():
        return False
    return all(margolis_map_iso(f, i) for i in range(f.src.n + 1))


# ---------------------------------------------------------------- S(k) inside B_0(k)


def p_adic_digits(k: int, p: int) -> list[int]:
    out = []
    while k:
        out.append(k % p)
        k //= p
    return out


def s_top_monomial(k: int, p: int) -> WeightedMonomial:
    """tau_I * xi_I^{d_I - 1} * prod_{i<I} xi_i^{d_i} with I the top p-adic
    digit of k (xi_0 = 1); it sits in the degree of x_{nu_p(k!)}."""
    digits = p_adic_digits(k, p)
    top = len(digits) - 1
    if top < 1:
        raise ModuleError("S(k) needs k >= p")
    xi = [0] * top
    for i, d in enumerate(digits):
        e = d - 1 if i == top else d
        if i >= 1 and e:
            xi[i - 1] += e
    return WeightedMonomial(tuple(xi), 1 << top).trimmed()


def s_map(spec: FieldSpec, k: int, B: FinModule | None = None):
    """The map L(nu_p(k!)) -> B_0(k) picking out S(k).

    The top generator goes to :func:`s_top_monomial`; lower generators are
    solved downward from x_{j-1} Q_0 = x_j Q_1.
    """
    from .comodules import brown_gitler, lightning_flash, map_from_generators

    p = spec.p
    B = B if B is not None else brown_gitler(spec, 0, k)
    nu = legendre(k, p)
    L = lightning_flash(spec, nu, B.ring)
    if nu == 0:
        return ModuleMap(L, B, [{B.monomials.index(WeightedMonomial((), 0)): 1}]), L, B
    top = s_top_monomial(k, p)
    idx = {m: j for j, m in enumerate(B.monomials)}
    imgs = [None] * nu
    imgs[nu - 1] = {idx[top]: 1}
    for j in range(nu - 1, 0, -1):
        dj = L.degrees[L.generators[j]]
        y = B.act(imgs[j], dj, 2)
        dy = dj - B.pair.deg(2)
        dx = dy + B.pair.deg(1)
        rows, tb = B.q_matrix(dx, 1)
        sol = linalg.solve(rows, len(tb), p, B.vec_to_row(y, dy))
        if sol is None:
            raise ModuleError(f"S({k}): cannot solve x_{j} Q_0 = x_{j + 1} Q_1")
        src = B.basis(dx)
        imgs[j - 1] = {src[i]: c for i, c in linalg.row_entries(sol, p).items()}
    f = map_from_generators(L, B, imgs)
    return f, L, B
