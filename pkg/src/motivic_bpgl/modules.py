"""Finitely generated E(n)-modules that are free over the coefficient ring.

A module has an M-basis ``m_0, ..., m_{r-1}`` with bidegrees and, for every
nonempty subset ``E`` of ``{0..n}``, the right-basis coefficients
``m_j Q_E = sum_k c * a_jk * m_k``.  The coefficient monomial ``a_jk`` is the
unique one of the right degree, so only the scalar ``c`` is stored.

Homogeneous elements of degree ``d`` are dicts ``{k: c}`` over the basis
indices ``k`` for which a coefficient monomial of degree ``d - |m_k|`` exists.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from . import linalg
from .grading import Degree
from .steenrod import ExteriorAlgebraPair, _merge_sign, subset_name


class ModuleError(RuntimeError):
    pass


def _clean(v: dict, p: int) -> dict:
    return {k: c % p for k, c in v.items() if c % p}


class FinModule:
    def __init__(self, pair: ExteriorAlgebraPair, degrees, labels=None, action=None, tag: str = ""):
        self.pair = pair
        self.ring = pair.ring
        self.p = pair.p
        self.n = pair.n
        self.degrees = [Degree(*d) for d in degrees]
        self.labels = list(labels) if labels is not None else [f"m{j}" for j in range(len(self.degrees))]
        self.action = {E: [dict() for _ in self.degrees] for E in pair.subsets if E}
        if action:
            for E, rows in action.items():
                for j, row in enumerate(rows):
                    self.action[E][j] = _clean(row, self.p)
        self.tag = tag
        self._basis: dict = {}
        self._qmat: dict = {}

    # ---------- bookkeeping
    @property
    def rank(self) -> int:
        return len(self.degrees)

    def __repr__(self):
        return f"FinModule({self.tag or 'M'}, rank={self.rank}, n={self.n})"

    def mono(self, d, k):
        return self.ring.monomial_in_degree(Degree(*d) - self.degrees[k])

    def basis(self, d) -> list[int]:
        d = Degree(*d)
        hit = self._basis.get(d)
        if hit is None:
            hit = [k for k in range(self.rank) if self.mono(d, k) is not None]
            self._basis[d] = hit
        return hit

    def dim(self, d) -> int:
        return len(self.basis(d))

    def label(self, d, k) -> str:
        a = self.mono(d, k)
        name = self.ring.name_of(a)
        return self.labels[k] if name == "1" else f"{name}*{self.labels[k]}"

    def rank_by_degree(self) -> dict:
        out: dict = {}
        for d in self.degrees:
            out[d] = out.get(d, 0) + 1
        return out

    # ---------- actions on homogeneous elements
    def act(self, vec: dict, d, G: int) -> dict:
        """vec * Q_G for vec in degree d."""
        if G == 0:
            return dict(vec)
        d = Degree(*d)
        p = self.p
        pair = self.pair
        out: dict = {}
        for k, c in vec.items():
            a = self.mono(d, k)
            for E in pair.subsets:
                ct = pair.c_table(a, E).get(G)
                if ct is None:
                    continue
                b, cc = ct
                if E == 0:
                    y = {k: 1}
                else:
                    y = self.action[E][k]
                if not y:
                    continue
                target_deg = d - pair.deg(G)
                for l, c2 in y.items():
                    # b * (coefficient of m_l) must be nonzero in the target degree
                    if self.mono(target_deg, l) is None:
                        continue
                    src = self.degrees[k] - pair.deg(E) - self.degrees[l]
                    a2 = self.ring.monomial_in_degree(src)
                    sg, prod = self.ring.multiply(b, a2)
                    if prod is None:
                        continue
                    out[l] = (out.get(l, 0) + c * cc * c2 * sg) % p
        return _clean(out, p)

    def mul(self, a, vec: dict, d) -> dict:
        """a * vec, landing in degree d + |a|."""
        out: dict = {}
        for k, c in vec.items():
            sg, prod = self.ring.multiply(a, self.mono(d, k))
            if prod is not None:
                out[k] = (out.get(k, 0) + sg * c) % self.p
        return _clean(out, self.p)

    def q_matrix(self, d, G: int):
        """Rows: images of basis(d) under Q_G, packed over basis(d - |Q_G|)."""
        d = Degree(*d)
        key = (d, G)
        hit = self._qmat.get(key)
        if hit is not None:
            return hit
        tgt = d - self.pair.deg(G)
        tb = self.basis(tgt)
        pos = {k: i for i, k in enumerate(tb)}
        rows = []
        for k in self.basis(d):
            img = self.act({k: 1}, d, G)
            rows.append(linalg.sparse_row({pos[l]: c for l, c in img.items()}, len(tb), self.p))
        self._qmat[key] = (rows, tb)
        return rows, tb

    def vec_to_row(self, vec: dict, d):
        b = self.basis(d)
        pos = {k: i for i, k in enumerate(b)}
        return linalg.sparse_row({pos[k]: c for k, c in vec.items()}, len(b), self.p)

    def row_to_vec(self, row, d) -> dict:
        b = self.basis(d)
        return {b[i]: c for i, c in linalg.row_entries(row, self.p).items()}

    # ---------- consistency
    def check(self, coefficient_window=None) -> None:
        """Verify Q_E Q_F = sign Q_{E u F} (and 0 on overlaps) on basis elements
        and on coefficient multiples of them."""
        pair = self.pair
        subs = [E for E in pair.subsets if E]
        monos = [self.ring.one]
        if coefficient_window:
            monos += [m for m in coefficient_window if m != self.ring.one]
        for j in range(self.rank):
            for a in monos:
                d = self.degrees[j] + self.ring.degree(a)
                x = self.mul(a, {j: 1}, self.degrees[j])
                if not x:
                    continue
                for E in subs:
                    xe = self.act(x, d, E)
                    de = d - pair.deg(E)
                    for F in subs:
                        lhs = self.act(xe, de, F)
                        if E & F:
                            rhs = {}
                        else:
                            rhs = self.act(x, d, E | F)
                            if pair.p != 2:
                                s = _merge_sign(E, F)
                                rhs = _clean({k: s * c for k, c in rhs.items()}, self.p)
                        if lhs != rhs:
                            raise ModuleError(
                                f"{self.tag}: Q_{subset_name(E)}Q_{subset_name(F)} relation fails on "
                                f"{self.ring.name_of(a)}*{self.labels[j]}: {lhs} vs {rhs}")

    # ---------- derived modules
    def restrict(self, n: int) -> "FinModule":
        if n == self.n:
            return self
        if n > self.n:
            raise ModuleError("cannot extend scalars")
        pair = ExteriorAlgebraPair(self.pair.spec, n, self.ring)
        act = {E: self.action[E] for E in pair.subsets if E}
        return FinModule(pair, self.degrees, self.labels, act, tag=self.tag)

    def shift(self, d) -> "FinModule":
        d = Degree(*d)
        return FinModule(self.pair, [x + d for x in self.degrees], self.labels,
                         {E: [dict(r) for r in rows] for E, rows in self.action.items()},
                         tag=f"Sigma{tuple(d)}{self.tag}")

    def direct_sum(self, other: "FinModule") -> "FinModule":
        off = self.rank
        act = {}
        for E in self.action:
            act[E] = [dict(r) for r in self.action[E]] + [{k + off: c for k, c in r.items()} for r in other.action[E]]
        return FinModule(self.pair, self.degrees + other.degrees, self.labels + other.labels, act,
                         tag=f"({self.tag}+{other.tag})")

    def reduced_matrix(self, G: int):
        """Q_G on F_p (x) M, as a dense dict {(j, k): c} over pure basis pairs."""
        out = {}
        dG = self.pair.deg(G)
        for j in range(self.rank):
            for k, c in self.action[G][j].items():
                if self.degrees[j] - dG == self.degrees[k]:
                    out[(j, k)] = c
        return out


def free_module(pair: ExteriorAlgebraPair, gen_degrees, gen_labels=None, tag="free") -> FinModule:
    """Free module on generators g with M-basis g Q_E."""
    subs = pair.subsets
    gen_labels = gen_labels or [f"g{i}" for i in range(len(gen_degrees))]
    degrees, labels, index = [], [], {}
    for gi, gd in enumerate(gen_degrees):
        for E in subs:
            index[(gi, E)] = len(degrees)
            degrees.append(Degree(*gd) - pair.deg(E))
            labels.append(gen_labels[gi] + (f"Q{subset_name(E)}" if E else ""))
    act = {F: [dict() for _ in degrees] for F in subs if F}
    for (gi, E), j in index.items():
        for F in subs:
            if not F or E & F:
                continue
            s = _merge_sign(E, F) if pair.p != 2 else 1
            act[F][j] = {index[(gi, E | F)]: s % pair.p}
    M = FinModule(pair, degrees, labels, act, tag=tag)
    M.gen_index = index
    M.gen_degrees = [Degree(*g) for g in gen_degrees]
    return M


@dataclass
class ModuleMap:
    """Map of modules given by images of the source M-basis."""

    src: FinModule
    tgt: FinModule
    images: list = field(default_factory=list)  # images[j]: dict in tgt degree src.degrees[j]

    def apply(self, vec: dict, d) -> dict:
        p = self.src.p
        out: dict = {}
        for k, c in vec.items():
            a = self.src.mono(d, k)
            img = self.tgt.mul(a, self.images[k], self.src.degrees[k])
            for l, c2 in img.items():
                out[l] = (out.get(l, 0) + c * c2) % p
        return _clean(out, p)

    def is_module_map(self) -> bool:
        for j in range(self.src.rank):
            dj = self.src.degrees[j]
            for E in self.src.pair.subsets:
                if not E:
                    continue
                lhs = self.apply(self.src.act({j: 1}, dj, E), dj - self.src.pair.deg(E))
                rhs = self.tgt.act(self.images[j], dj, E)
                if lhs != rhs:
                    return False
        return True

    def compose(self, after: "ModuleMap") -> "ModuleMap":
        """after o self."""
        imgs = [after.apply(self.images[j], self.src.degrees[j]) for j in range(self.src.rank)]
        return ModuleMap(self.src, after.tgt, imgs)


def identity_map(M: FinModule) -> ModuleMap:
    return ModuleMap(M, M, [{j: 1} for j in range(M.rank)])


def zero_map(M: FinModule, N: FinModule) -> ModuleMap:
    return ModuleMap(M, N, [{} for _ in range(M.rank)])


class Quotient:
    """M / S where S is the submodule generated by homogeneous elements.

    S must be a free M-submodule whose reductions mod the augmentation ideal
    are independent (true for presentations and split free summands); the
    quotient then has the non-pivot basis elements of M as its M-basis.
    """

    def __init__(self, M: FinModule, gens: list, tag: str = "quotient"):
        self.M = M
        p = M.p
        pair = M.pair
        self.sub = []  # (degree, vec) spanning S over the coefficients
        for d, v in gens:
            d = Degree(*d)
            for E in pair.subsets:
                w = M.act(v, d, E)
                if w:
                    self.sub.append((d - pair.deg(E), w))
        by_deg: dict = {}
        for d, w in self.sub:
            by_deg.setdefault(d, []).append(w)
        pivots = set()
        for d, ws in sorted(by_deg.items()):
            pure = [k for k in range(M.rank) if M.degrees[k] == d]
            pos = {k: i for i, k in enumerate(pure)}
            rows = [linalg.sparse_row({pos[k]: c for k, c in w.items() if k in pos}, len(pure), p) for w in ws]
            for pc in linalg.rref(rows, len(pure), p)[0]:
                pivots.add(pure[pc])
        self.pivots = pivots
        self.keep = [k for k in range(M.rank) if k not in pivots]
        self.new_index = {k: i for i, k in enumerate(self.keep)}
        self._ech: dict = {}
        act = {E: [] for E in pair.subsets if E}
        for k in self.keep:
            dk = M.degrees[k]
            for E in act:
                img = M.act({k: 1}, dk, E)
                act[E].append(self.project(img, dk - pair.deg(E)))
        self.Q = FinModule(pair, [M.degrees[k] for k in self.keep], [M.labels[k] for k in self.keep], act, tag=tag)

    def _sub_echelon(self, d):
        d = Degree(*d)
        hit = self._ech.get(d)
        if hit is not None:
            return hit
        M = self.M
        b = M.basis(d)
        # columns: pivot coordinates first so reduction clears them
        order = [k for k in b if k in self.pivots] + [k for k in b if k not in self.pivots]
        pos = {k: i for i, k in enumerate(order)}
        ech = linalg.Echelon(len(order), M.p)
        for sd, w in self.sub:
            a = M.ring.monomial_in_degree(d - sd)
            if a is None:
                continue
            aw = M.mul(a, w, sd)
            if aw:
                ech.add(linalg.sparse_row({pos[k]: c for k, c in aw.items()}, len(order), M.p))
        npiv = sum(1 for k in b if k in self.pivots)
        if len(ech) != npiv:
            raise ModuleError(f"quotient is not free over the coefficients in degree {d} ({len(ech)} vs {npiv})")
        hit = (ech, order, pos)
        self._ech[d] = hit
        return hit

    def project(self, vec: dict, d) -> dict:
        if not vec:
            return {}
        ech, order, pos = self._sub_echelon(d)
        r = ech.reduce(linalg.sparse_row({pos[k]: c for k, c in vec.items()}, len(order), self.M.p))
        out = {}
        for i, c in linalg.row_entries(r, self.M.p).items():
            k = order[i]
            if k in self.pivots:
                raise ModuleError("projection left a pivot coordinate")
            out[self.new_index[k]] = c
        return out

    def projection(self) -> ModuleMap:
        M = self.M
        imgs = [self.project({k: 1}, M.degrees[k]) for k in range(M.rank)]
        return ModuleMap(M, self.Q, imgs)


def present(pair: ExteriorAlgebraPair, gen_degrees, relations, gen_labels=None, tag="presented"):
    """Module on generators modulo relations.

    ``relations`` are dicts ``{(gen, E): c}`` with all terms of one degree.
    Returns ``(module, quotient)``.
    """
    F = free_module(pair, gen_degrees, gen_labels, tag=f"free({tag})")
    gens = []
    for rel in relations:
        vec = {F.gen_index[key]: c for key, c in rel.items()}
        degs = {F.degrees[k] for k in vec}
        if len(degs) != 1:
            raise ModuleError("inhomogeneous relation")
        gens.append((degs.pop(), vec))
    Qt = Quotient(F, gens, tag=tag)
    return Qt.Q, Qt
