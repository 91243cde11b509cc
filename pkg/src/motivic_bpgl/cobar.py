"""Reduced cobar complex of E(n)^dual with coefficients in a comodule.

An element of C^f is written in right-basis form e_{G_1}|...|e_{G_f}|x with
x in M, so the basis is tuples (G_1, ..., G_f, k) with the coefficient of
m_k implied by degree.  The coaction of x = a*m_k is obtained by multiplying
eta_L(a) into psi(m_k) inside E(n)^dual, not from the module's precomputed
commutation table.
"""
from __future__ import annotations

import itertools

from . import linalg
from .grading import Degree
from .modules import FinModule, ModuleError


class CobarComplex:
    def __init__(self, M: FinModule, memory_guard: int = 200_000):
        self.M = M
        self.pair = M.pair
        self.p = M.p
        self.guard = memory_guard
        self.nonempty = [G for G in self.pair.subsets if G]
        self._basis: dict = {}
        self._psi: dict = {}
        self._rows: dict = {}
        self._tuples: dict = {}
        self._rank: dict = {}

    def _tuples_by_degree(self, f: int) -> dict:
        hit = self._tuples.get(f)
        if hit is None:
            hit = {}
            for tup in itertools.product(self.nonempty, repeat=f):
                s = w = 0
                for G in tup:
                    d = self.pair.deg(G)
                    s += d.s
                    w += d.w
                hit.setdefault(Degree(s, w), []).append(tup)
            self._tuples[f] = hit
        return hit

    def basis(self, f: int, T) -> list:
        T = Degree(*T)
        key = (f, T)
        hit = self._basis.get(key)
        if hit is not None:
            return hit
        M = self.M
        out = []
        for D, tups in self._tuples_by_degree(f).items():
            ks = M.basis(T - D)
            if not ks:
                continue
            for tup in tups:
                for k in ks:
                    out.append(tup + (k,))
        out.sort()
        if len(out) > self.guard:
            raise MemoryError(f"cobar C^{f} in degree {T} has {len(out)} cells")
        self._basis[key] = out
        return out

    def psi(self, d, k) -> dict:
        """Reduced coaction of a*m_k (a implied by d) as {(G, l): c}, G nonempty."""
        key = (d, k)
        hit = self._psi.get(key)
        if hit is not None:
            return hit
        pair, M, ring, p = self.pair, self.M, self.M.ring, self.p
        a = M.mono(d, k)
        # psi(m_k) = sum_E e_E (x) m_k Q_E, and m_k Q_E = sum_l c b_l m_l
        psi_m = {(0, ring.one, k): 1}
        for E in self.nonempty:
            for l, c in M.action[E][k].items():
                b = ring.monomial_in_degree(M.degrees[k] - pair.deg(E) - M.degrees[l])
                psi_m[(E, b, l)] = c
        out: dict = {}
        for (G, r), cr in pair.eta_L(a):
            pr = ring.parity(r)
            for (E, b, l), cm in psi_m.items():
                # (e_G r)(e_E b m_l) = +- e_G e_E (r b) m_l
                sg = -1 if (pr and pair.deg(E).s % 2) else 1
                s1, rb = ring.multiply(r, b)
                if rb is None:
                    continue
                for K, t, ct in pair.mul_e(G, E):
                    s2, trb = ring.multiply(t, rb)
                    if trb is None or K == 0:
                        continue
                    key2 = (K, l)
                    out[key2] = (out.get(key2, 0) + sg * s1 * s2 * cr * cm * ct) % p
        out = {kk: c for kk, c in out.items() if c}
        self._psi[key] = out
        return out

    def differential_rows(self, f: int, T):
        """Rows of d: C^f_T -> C^{f+1}_T."""
        T = Degree(*T)
        hit = self._rows.get((f, T))
        if hit is not None:
            return hit
        pair, p = self.pair, self.p
        src = self.basis(f, T)
        tgt = self.basis(f + 1, T)
        pos = {b: i for i, b in enumerate(tgt)}
        rows = []
        for cell in src:
            tup, k = cell[:-1], cell[-1]
            ent: dict = {}
            for i, G in enumerate(tup):
                sgn = -1 if (i + 1) % 2 else 1
                for S, Tt, c in pair.reduced_coproduct(G):
                    new = tup[:i] + (S, Tt) + tup[i + 1:] + (k,)
                    j = pos.get(new)
                    if j is None:
                        raise ModuleError("cobar target cell missing")
                    ent[j] = (ent.get(j, 0) + sgn * c) % p
            d = T
            for G in tup:
                d = d - pair.deg(G)
            sgn = -1 if (f + 1) % 2 else 1
            for (G, l), c in self.psi(d, k).items():
                new = tup + (G, l)
                j = pos.get(new)
                if j is None:
                    raise ModuleError("cobar target cell missing")
                ent[j] = (ent.get(j, 0) + sgn * c) % p
            rows.append(linalg.sparse_row({j: c for j, c in ent.items() if c}, len(tgt), p))
        self._rows[(f, T)] = (rows, len(tgt))
        return rows, len(tgt)

    def check_d_squared(self, f: int, T) -> bool:
        r1, n1 = self.differential_rows(f, T)
        r2, n2 = self.differential_rows(f + 1, T)
        p = self.p
        for r in r1:
            acc: dict = {}
            for j, c in linalg.row_entries(r, p).items():
                for l, c2 in linalg.row_entries(r2[j], p).items():
                    acc[l] = (acc.get(l, 0) + c * c2) % p
            if any(acc.values()):
                return False
        return True

    def rank(self, f: int, T) -> int:
        """Rank of d: C^f_T -> C^{f+1}_T."""
        key = (f, T)
        hit = self._rank.get(key)
        if hit is None:
            rows, nt = self.differential_rows(f, T)
            hit = linalg.rank(rows, nt, self.p) if (rows and nt) else 0
            self._rank[key] = hit
        return hit

    def dim(self, s: int, f: int, w: int) -> int:
        T = Degree(s + f, w)
        n_here = len(self.basis(f, T))
        if not n_here:
            return 0
        rk_in = self.rank(f - 1, T) if f > 0 else 0
        return n_here - self.rank(f, T) - rk_in


def cobar_ext_oracle(M: FinModule, window=None) -> dict:
    """Ext dimensions {(s, f, w): dim} of the comodule M via the cobar complex."""
    from .ext import _window

    win = _window(window)
    C = CobarComplex(M)
    (s0, s1), (f0, f1), (w0, w1) = win["s"], win["f"], win["w"]
    out = {}
    for f in range(f0, f1 + 1):
        for s in range(s0, s1 + 1):
            for w in range(w0, w1 + 1):
                d = C.dim(s, f, w)
                if d:
                    out[(s, f, w)] = d
    return out
