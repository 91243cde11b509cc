"""Brown-Gitler comodules, lightning flash modules, tensor products and the
homology of BPGL<n>."""
from __future__ import annotations

from dataclasses import dataclass

from .grading import CoefficientRing, ConfigurationError, Degree, FieldSpec
from .modules import FinModule, ModuleError, ModuleMap, Quotient, present
from .steenrod import Coaction, ExteriorAlgebraPair, WeightedMonomial, basis_A_mod_En, tau_degree


def unit_module(pair: ExteriorAlgebraPair) -> FinModule:
    """M_p itself."""
    return FinModule(pair, [Degree(0, 0)], ["1"], tag="M")


def _pair(spec: FieldSpec, n: int, ring=None) -> ExteriorAlgebraPair:
    return ExteriorAlgebraPair(spec, n, ring or CoefficientRing(spec))


# ---------------------------------------------------------------- Brown-Gitler


def weighted_module(spec: FieldSpec, n: int, m: int, monos: list[WeightedMonomial], tag: str,
                    ring=None) -> FinModule:
    """Span of the given monomials of A//E(n)^dual with the E(m)-action
    read off from the coaction (m <= n + 1).  Raises if the span is not closed."""
    pair = _pair(spec, m, ring)
    alpha = Coaction(pair, n)
    p = spec.p
    index = {m: j for j, m in enumerate(monos)}
    act = {E: [dict() for _ in monos] for E in pair.subsets if E}
    for j, m in enumerate(monos):
        for (E, a, r), c in alpha(m).items():
            if E == 0:
                continue
            k = index.get(r)
            if k is None:
                raise ModuleError(f"{tag}: {m.name()} Q_{E} leaves the span via {r.name()}")
            act[E][j][k] = (act[E][j].get(k, 0) + c) % p
    M = FinModule(pair, [m.degree(p) for m in monos], [m.name() for m in monos], act, tag=tag)
    M.monomials = list(monos)
    return M


def brown_gitler(spec: FieldSpec, n: int, k: int, ring=None) -> FinModule:
    """B_n(k): monomials of A//E(n)^dual of weight at most k, as an
    E(n+1)-module (n = -1 means the full dual Steenrod algebra)."""
    if n not in (-1, 0):
        raise ConfigurationError(f"B_{n}(k) unsupported; n must be -1 or 0")
    if k < 0:
        raise ConfigurationError("k must be nonnegative")
    monos = basis_A_mod_En(spec.p, n, k)
    return weighted_module(spec, n, n + 1, monos, f"B{n}({k})", ring)


# ---------------------------------------------------------------- lightning flash


def lightning_flash(spec: FieldSpec, k: int, ring=None) -> FinModule:
    """L_p(k) over E(1): generators x_1..x_k glued by x_{i+1}Q_1 = x_iQ_0.

    For k = 1 the relation x_1 Q_0 Q_1 = 0 is imposed explicitly; for k >= 2 it
    follows from the gluing relations.
    """
    pair = _pair(spec, 1, ring)
    p = spec.p
    if k == 0:
        M = unit_module(pair)
        M.tag = "L(0)"
        M.generators = []
        return M
    degs = [Degree(i * (2 * p - 2) + 1, i * (p - 1)) for i in range(1, k + 1)]
    rels = [{(i + 1, 2): 1, (i, 1): -1} for i in range(k - 1)]
    if k == 1:
        rels = [{(0, 3): 1}]
    M, Qt = present(pair, degs, rels, [f"x{i}" for i in range(1, k + 1)], tag=f"L({k})")
    M.presentation = Qt
    M.generators = [Qt.new_index[Qt.M.gen_index[(i, 0)]] for i in range(k)]
    return M


def map_from_generators(src: FinModule, tgt: FinModule, gen_images: list[dict],
                        shift=(0, 0)) -> ModuleMap:
    """Module map out of a presented module (possibly suspended by ``shift``),
    fixed by generator images."""
    Qt: Quotient = src.presentation
    F = Qt.M
    inv = {j: key for key, j in F.gen_index.items()}
    imgs = []
    for k_old in Qt.keep:
        g, E = inv[k_old]
        imgs.append(tgt.act(gen_images[g], F.gen_degrees[g] + Degree(*shift), E))
    return ModuleMap(src, tgt, imgs)


def quotient_dual(pair: ExteriorAlgebraPair) -> FinModule:
    """(E(1)//E(0))^dual on {1, tau_1} with tau_1 Q_1 = 1."""
    if pair.n != 1:
        raise ConfigurationError("(E(1)//E(0))^dual lives over E(1)")
    cyc = FinModule(pair, [Degree(0, 0), tau_degree(1, pair.p)], ["1", "tau1"],
                    {1: [{}, {}], 2: [{}, {0: 1}], 3: [{}, {}]}, tag="E(1)//E(0)")
    return cyc


def flash_ses(spec: FieldSpec, k: int, ring=None):
    """Maps Sigma L(k-1) -> L(k) -> (E(1)//E(0))^dual with explicit matrices."""
    if k < 1:
        raise ConfigurationError("the sequence needs k >= 1")
    p = spec.p
    L = lightning_flash(spec, k, ring)
    shift = Degree(2 * (p - 1), p - 1)
    pair = L.pair
    if k == 1:
        sub = unit_module(pair).shift(shift)
        # bottom of the shifted L(0) goes to x_1 Q_0
        x1 = L.generators[0]
        inc = ModuleMap(sub, L, [L.act({x1: 1}, L.degrees[x1], 1)])
    else:
        base = lightning_flash(spec, k - 1, ring)
        sub = base.shift(shift)
        sub.presentation = base.presentation
        inc = map_from_generators(sub, L, [{L.generators[i + 1]: 1} for i in range(k - 1)], shift)
    cok = quotient_dual(pair)
    gens = [(sub.degrees[j], inc.images[j]) for j in range(sub.rank)]
    Qt = Quotient(L, gens, tag="coker")
    return sub, L, inc, Qt, cok


# ---------------------------------------------------------------- tensor


def tensor(M: FinModule, N: FinModule, tag: str | None = None) -> FinModule:
    if M.pair.spec != N.pair.spec or M.n != N.n:
        raise ConfigurationError("tensor factors must share the field and E(n)")
    pair = M.pair
    ring = M.ring
    p = M.p
    idx = {}
    degrees, labels = [], []
    for j in range(M.rank):
        for l in range(N.rank):
            idx[(j, l)] = len(degrees)
            degrees.append(M.degrees[j] + N.degrees[l])
            labels.append(f"{M.labels[j]}|{N.labels[l]}")
    act = {K: [dict() for _ in degrees] for K in pair.subsets if K}

    def terms(X: FinModule, j: int, G: int):
        if G == 0:
            return [(j, ring.one, 1)]
        out = []
        for k, c in X.action[G][j].items():
            b = ring.monomial_in_degree(X.degrees[j] - pair.deg(G) - X.degrees[k])
            out.append((k, b, c))
        return out

    for j in range(M.rank):
        for l in range(N.rank):
            src = idx[(j, l)]
            for G in pair.subsets:
                for k, b, c in terms(M, j, G):
                    xdeg = M.degrees[j] - pair.deg(G)  # |b m_k|
                    for H in pair.subsets:
                        if G == 0 and H == 0:
                            continue
                        for m, b2, c2 in terms(N, l, H):
                            sign = 1
                            if p != 2:
                                if xdeg.s % 2 and pair.deg(H).s % 2:
                                    sign = -sign
                                if M.degrees[k].s % 2 and ring.parity(b2):
                                    sign = -sign
                            s1, bb = ring.multiply(b, b2)
                            if bb is None:
                                continue
                            for K, r, cr in pair.mul_e(G, H):
                                s2, rbb = ring.multiply(r, bb)
                                if rbb is None:
                                    continue
                                t = idx[(k, m)]
                                row = act[K][src]
                                row[t] = (row.get(t, 0) + sign * s1 * s2 * c * c2 * cr) % p
    T = FinModule(pair, degrees, labels, act, tag=tag or f"{M.tag}(x){N.tag}")
    T.factor_index = idx
    return T


# ---------------------------------------------------------------- homology of BPGL<n>


@dataclass
class BPGLHomology:
    module: FinModule
    strata: dict  # k -> list of basis indices
    n: int
    max_k: int

    def stratum_ranks(self) -> dict:
        return {k: len(v) for k, v in self.strata.items()}


def homology_BPGL(spec: FieldSpec, n: int, max_k: int, ring=None, bar: bool = False) -> BPGLHomology:
    """A//E(n)^dual through weight p*max_k with the weight strata labelled.

    Stratum k is the monomials of weight exactly p*k; it is checked to be
    closed under the E(n)-action and isomorphic to the suspended B_{n-1}(k).
    """
    if n not in (0, 1):
        raise ConfigurationError("homology_BPGL needs n in {0, 1}")
    p = spec.p
    monos = basis_A_mod_En(p, n, p * max_k)
    if bar:
        monos = [m for m in monos if m.weight(p) > 0]
    M = weighted_module(spec, n, n, monos, f"H(BPGL<{n}>{'bar' if bar else ''})", ring)
    strata: dict = {}
    for j, m in enumerate(monos):
        w = m.weight(p)
        if w % p:
            raise ModuleError(f"weight {w} of {m.name()} is not a multiple of p")
        strata.setdefault(w // p, []).append(j)
    for k, js in strata.items():
        js_set = set(js)
        for E in M.action:
            for j in js:
                if not set(M.action[E][j]) <= js_set:
                    raise ModuleError(f"stratum {k} is not closed under Q_{E}")
    return BPGLHomology(M, strata, n, max_k)


def homology_BPGL_bar(spec: FieldSpec, n: int, max_k: int, ring=None) -> BPGLHomology:
    return homology_BPGL(spec, n, max_k, ring, bar=True)


def stratum_map(spec: FieldSpec, n: int, k: int) -> list[tuple[WeightedMonomial, WeightedMonomial]]:
    """Pairs (x in B_{n-1}(k), monomial of weight pk) under x -> shift(x) xi_1^{k - wt x}."""
    p = spec.p
    out = []
    for x in basis_A_mod_En(p, n - 1, k):
        y = x.shift_up()
        e = k - x.weight(p)
        if e:
            y = y.times_xi(1, e)
        out.append((x, y))
    return out


def check_stratum_isomorphism(spec: FieldSpec, n: int, k: int, ring=None) -> bool:
    """Compare the E(n)-action on stratum k with Sigma^{2k(p-1),k(p-1)} B_{n-1}(k)."""
    p = spec.p
    B = brown_gitler(spec, n - 1, k, ring).restrict(n)
    H = homology_BPGL(spec, n, k, ring)
    M = H.module
    pairs = stratum_map(spec, n, k)
    hidx = {m: j for j, m in enumerate(M.monomials)}
    bidx = {m: j for j, m in enumerate(B.monomials)}
    phi = {bidx[x]: hidx[y] for x, y in pairs}
    if sorted(phi.values()) != sorted(H.strata.get(k, [])):
        return False
    shift = Degree(2 * k * (p - 1), k * (p - 1))
    for j, h in phi.items():
        if B.degrees[j] + shift != M.degrees[h]:
            return False
        for E in B.action:
            mapped = {phi[i]: c for i, c in B.action[E][j].items()}
            if mapped != M.action[E][h]:
                return False
    return True
