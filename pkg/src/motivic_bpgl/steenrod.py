"""Dual Steenrod algebra presentations and the exterior quotients E(n)^dual.

Elements of E(n)^dual are stored in *right form*: a dict
``{(E, a): c}`` meaning ``sum c * e_E * eta_R(a)`` where ``E`` is a bitmask of
tau-bar indices and ``a`` a coefficient monomial.  Every computation that mixes
coefficients with tau-bar classes goes through :meth:`ExteriorAlgebraPair.c_table`,
which records how a left coefficient moves past ``e_E``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .grading import CoefficientRing, ConfigurationError, Degree, FieldSpec


def bits(E: int) -> list[int]:
    out, i = [], 0
    while E:
        if E & 1:
            out.append(i)
        E >>= 1
        i += 1
    return out


def subset_name(E: int) -> str:
    return "".join(str(i) for i in bits(E))


def tau_degree(i: int, p: int) -> Degree:
    return Degree(2 * p ** i - 1, p ** i - 1)


def xi_degree(i: int, p: int) -> Degree:
    return Degree(2 * p ** i - 2, p ** i - 1)


def _merge_sign(S: int, T: int) -> int:
    """Sign of reordering tau_S * tau_T (odd classes) into increasing order."""
    inv = 0
    for t in bits(T):
        inv += bin(S >> (t + 1)).count("1")
    return -1 if inv % 2 else 1


class ExteriorAlgebraPair:
    """E(n)^dual = M[tau_0..tau_n]/J together with its twisted unit data."""

    def __init__(self, spec: FieldSpec, n: int, ring: CoefficientRing | None = None):
        if n not in (0, 1):
            raise ConfigurationError(f"E({n}) is not supported")
        self.spec = spec
        self.n = n
        self.p = spec.p
        self.ring = ring or CoefficientRing(spec)
        self.subsets = list(range(1 << (n + 1)))
        self.full = (1 << (n + 1)) - 1
        self._c: dict = {}
        self._deg: dict = {}
        self._cop: dict = {}

    # ---------- degrees
    def deg(self, E: int) -> Degree:
        hit = self._deg.get(E)
        if hit is not None:
            return hit
        s = w = 0
        for i in bits(E):
            d = tau_degree(i, self.p)
            s += d.s
            w += d.w
        self._deg[E] = Degree(s, w)
        return self._deg[E]

    def basis_degrees(self) -> list[Degree]:
        return [self.deg(E) for E in self.subsets]

    def sign_p(self, k: int) -> int:
        return k % self.p

    # ---------- multiplication of tau-bar monomials
    def mul_e(self, E: int, F: int) -> list[tuple[int, tuple, int]]:
        """e_E * e_F in right form as ``[(G, a, c)]``."""
        return self._mul_e(E, F)

    @lru_cache(maxsize=None)
    def _mul_e(self, E: int, F: int):
        p = self.p
        if E & F == 0:
            c = 1 if p == 2 else _merge_sign(E, F)
            return ((E | F, self.ring.one, c % p),)
        if p != 2 or not self.spec.twisted:
            return ()
        # p = 2 twisted: tau_i^2 = rho tau_{i+1} for i < n, tau_n^2 = 0
        i = bits(E & F)[0]
        if i >= self.n:
            return ()
        rho = self.ring.monomial(rho=1)
        E2, F2 = E & ~(1 << i), F & ~(1 << i)
        out: dict = {}
        for G, a, c in self._mul_e(E2, F2):
            for H, b, c2 in self._mul_e(G, 1 << (i + 1)):
                sg, ab = self.ring.multiply(a, b)
                if ab is None:
                    continue
                sg2, ab = self.ring.multiply(ab, rho)
                if ab is None:
                    continue
                key = (H, ab)
                out[key] = (out.get(key, 0) + c * c2) % 2
        return tuple((G, a, c) for (G, a), c in out.items() if c)

    def mul(self, x: dict, y: dict) -> dict:
        """Product of two right-form elements."""
        p = self.p
        out: dict = {}
        for (E, a), ca in x.items():
            pa = self.ring.parity(a)
            for (F, b), cb in y.items():
                sg = -1 if (pa and self.deg(F).s % 2) else 1
                sab, ab = self.ring.multiply(a, b)
                if ab is None:
                    continue
                for G, r, cr in self._mul_e(E, F):
                    sr, rab = self.ring.multiply(r, ab)
                    if rab is None:
                        continue
                    key = (G, rab)
                    out[key] = (out.get(key, 0) + sg * sab * sr * ca * cb * cr) % p
        return {k: v for k, v in out.items() if v}

    # ---------- units
    def eta_L_generator(self, k: int) -> dict:
        """eta_L of the k-th coefficient generator in right form."""
        ring = self.ring
        g = [0] * len(ring.gens)
        g[k] = 1
        g = tuple(g)
        out = {(0, g): 1}
        if self.spec.twisted and k == len(ring.gens) - 1 and len(ring.gens) == 2:
            # eta_L(y) = eta_R(y) - x tau_0 ; x tau_0 = (-1)^{|x||tau_0|} tau_0 eta_R(x)
            x = ring.monomial(**{ring.names[0]: 1})
            sign = -1 if self.p != 2 else 1
            if ring.parity(x):
                sign = -sign
            out[(1, x)] = sign % self.p
        return out

    @lru_cache(maxsize=None)
    def eta_L(self, a: tuple) -> tuple:
        """eta_L of a coefficient monomial, as a tuple of items for hashing."""
        cur = {(0, self.ring.one): 1}
        for k, e in enumerate(a):
            g = self.eta_L_generator(k)
            for _ in range(e):
                cur = self.mul(cur, g)
        return tuple(sorted(cur.items()))

    def c_table(self, a: tuple, E: int) -> dict:
        """``{G: (b, c)}`` with eta_L(a) e_E = sum_G e_G eta_R(c b)."""
        key = (a, E)
        hit = self._c.get(key)
        if hit is not None:
            return hit
        prod = self.mul(dict(self.eta_L(a)), {(E, self.ring.one): 1})
        out = {}
        for (G, b), c in prod.items():
            out[G] = (b, c)  # at most one monomial per degree
        self._c[key] = out
        return out

    def is_invariant(self, a: tuple) -> bool:
        """True when eta_L(a) = eta_R(a)."""
        return dict(self.eta_L(a)) == {(0, a): 1}

    # ---------- coproduct
    def reduced_coproduct(self, G: int) -> list[tuple[int, int, int]]:
        """Delta-bar(e_G) = sum c e_S (x) e_T over proper splittings."""
        hit = self._cop.get(G)
        if hit is not None:
            return hit
        out = []
        idx = bits(G)
        for choice in itertools.product((0, 1), repeat=len(idx)):
            S = sum(1 << i for i, c in zip(idx, choice) if c == 0)
            T = G & ~S
            if S == 0 or T == 0:
                continue
            c = 1
            if self.p != 2:
                # a right-chosen factor must pass every later left-chosen one
                inv = 0
                for j in range(len(idx)):
                    if choice[j] == 1:
                        inv += sum(1 for k in range(j + 1, len(idx)) if choice[k] == 0)
                c = -1 if inv % 2 else 1
            out.append((S, T, c % self.p))
        self._cop[G] = out
        return out

    def relations(self) -> list[str]:
        n = self.n
        if self.p == 2 and self.spec.twisted:
            rel = [f"tau{i}^2 = rho*tau{i + 1}" for i in range(n)]
            return rel + [f"tau{n}^2 = 0"]
        return [f"tau{i}^2 = 0" for i in range(n + 1)]


# ---------------------------------------------------------------- dual Steenrod


@dataclass(frozen=True, order=True)
class WeightedMonomial:
    """xi-bar exponents (index 1..) and a tau-bar bitmask (index 0..)."""

    xi: tuple = ()
    tau: int = 0

    def trimmed(self) -> "WeightedMonomial":
        xi = list(self.xi)
        while xi and xi[-1] == 0:
            xi.pop()
        return WeightedMonomial(tuple(xi), self.tau)

    def weight(self, p: int) -> int:
        w = sum(e * p ** (i + 1) for i, e in enumerate(self.xi))
        return w + sum(p ** i for i in bits(self.tau))

    def degree(self, p: int) -> Degree:
        s = w = 0
        for i, e in enumerate(self.xi):
            d = xi_degree(i + 1, p)
            s += e * d.s
            w += e * d.w
        for i in bits(self.tau):
            d = tau_degree(i, p)
            s += d.s
            w += d.w
        return Degree(s, w)

    def name(self) -> str:
        parts = []
        for i, e in enumerate(self.xi):
            if e == 1:
                parts.append(f"xi{i + 1}")
            elif e > 1:
                parts.append(f"xi{i + 1}^{e}")
        parts += [f"tau{i}" for i in bits(self.tau)]
        return "*".join(parts) if parts else "1"

    def shift_up(self) -> "WeightedMonomial":
        """xi_i -> xi_{i+1}, tau_i -> tau_{i+1}."""
        return WeightedMonomial((0,) + self.xi, self.tau << 1).trimmed()

    def times_xi(self, i: int, e: int = 1) -> "WeightedMonomial":
        xi = list(self.xi) + [0] * max(0, i - len(self.xi))
        xi[i - 1] += e
        return WeightedMonomial(tuple(xi), self.tau).trimmed()


def _lowest_tau(n: int) -> int:
    """Smallest tau-bar index surviving in A//E(n)^dual (n = -1 means A^dual)."""
    return n + 1


def basis_A_mod_En(p: int, n: int, max_weight: int) -> list[WeightedMonomial]:
    """Normal-form monomials of A//E(n)^dual with weight <= max_weight."""
    if n not in (-1, 0, 1):
        raise ConfigurationError(f"n={n} unsupported")
    lo = _lowest_tau(n)
    gens = []  # (kind, index, weight)
    i = 1
    while p ** i <= max_weight:
        gens.append(("xi", i, p ** i))
        i += 1
    i = lo
    while p ** i <= max_weight:
        gens.append(("tau", i, p ** i))
        i += 1
    out: list[WeightedMonomial] = []

    def rec(k: int, budget: int, xi: dict, tau: int):
        if k == len(gens):
            top = max(xi) if xi else 0
            out.append(WeightedMonomial(tuple(xi.get(j, 0) for j in range(1, top + 1)), tau))
            return
        kind, idx, wt = gens[k]
        if kind == "tau":
            rec(k + 1, budget, xi, tau)
            if wt <= budget:
                rec(k + 1, budget - wt, xi, tau | (1 << idx))
            return
        e = 0
        while e * wt <= budget:
            x2 = dict(xi)
            if e:
                x2[idx] = e
            rec(k + 1, budget - e * wt, x2, tau)
            e += 1

    rec(0, max_weight, {}, 0)
    out.sort(key=lambda m: (m.weight(p), m.degree(p), m))
    return out


class DualSteenrod:
    """Relations and multiplication in A_p^dual with coefficients.

    Elements: dict ``{(coef_monomial, xi_tuple, tau_exponent_tuple): c}`` in
    left form; tau-bar exponents may exceed one before normalisation.
    """

    def __init__(self, spec: FieldSpec, ring: CoefficientRing | None = None):
        self.spec = spec
        self.p = spec.p
        self.ring = ring or CoefficientRing(spec)

    def square_rule(self, i: int) -> list[tuple[tuple, tuple, tuple, int]]:
        """tau_i^2 as ``[(coef, xi, tau_exps, c)]``."""
        if self.p != 2:
            return []
        ring = self.ring
        xi = tuple([0] * i + [1])  # xi_{i+1}
        out = [(ring.monomial(tau=1), xi, (), 1)]
        if "rho" in ring.names:
            t1 = tuple([0] * (i + 1) + [1])
            out.append((ring.monomial(rho=1), (), t1, 1))
            out.append((ring.monomial(rho=1), xi, (1,), 1))
        return out

    def relations(self) -> list[str]:
        if self.p != 2:
            return ["tau_i^2 = 0"]
        if "rho" in self.ring.names:
            return ["tau_i^2 = tau*xi_{i+1} + rho*tau_{i+1} + rho*tau_0*xi_{i+1}"]
        return ["tau_i^2 = tau*xi_{i+1}"]

    @staticmethod
    def _add(v, w):
        n = max(len(v), len(w))
        return tuple((v[k] if k < len(v) else 0) + (w[k] if k < len(w) else 0) for k in range(n))

    @staticmethod
    def _trim(v):
        v = list(v)
        while v and v[-1] == 0:
            v.pop()
        return tuple(v)

    def _raw_product(self, x, y) -> dict:
        """Concatenate monomials with the odd-p sign, no rewriting."""
        out: dict = {}
        p = self.p
        for (a, xi, ta), c1 in x.items():
            for (b, xj, tb), c2 in y.items():
                sg, ab = self.ring.multiply(a, b)
                if ab is None:
                    continue
                sign = 1
                if p != 2:
                    # tau parts are odd; coefficient parities also pass the tau part of x
                    if any(e > 1 for e in self._add(ta, tb)):
                        continue
                    S = sum(1 << k for k, e in enumerate(ta) if e)
                    T = sum(1 << k for k, e in enumerate(tb) if e)
                    if S & T:
                        continue
                    sign = _merge_sign(S, T)
                    if self.ring.parity(b) and bin(S).count("1") % 2:
                        sign = -sign
                key = (ab, self._trim(self._add(xi, xj)), self._trim(self._add(ta, tb)))
                out[key] = (out.get(key, 0) + sign * sg * c1 * c2) % p
        return {k: v for k, v in out.items() if v}

    def normalize(self, x: dict, order: str = "low") -> dict:
        """Rewrite tau-bar squares until square-free.

        ``order`` picks which squared index to rewrite first ("low" or "high");
        confluence means the result does not depend on it.
        """
        p = self.p
        todo = dict(x)
        done: dict = {}
        while todo:
            key, c = todo.popitem()
            a, xi, ta = key
            sq = [k for k, e in enumerate(ta) if e > 1]
            if not sq:
                done[key] = (done.get(key, 0) + c) % p
                continue
            i = sq[0] if order == "low" else sq[-1]
            rest = list(ta)
            rest[i] -= 2
            base = {(a, xi, self._trim(tuple(rest))): c}
            rhs = {}
            for coef, xj, tb, cc in self.square_rule(i):
                k2 = (coef, self._trim(xj), self._trim(tb))
                rhs[k2] = (rhs.get(k2, 0) + cc) % p
            for k2, c2 in self._raw_product(base, rhs).items():
                todo[k2] = (todo.get(k2, 0) + c2) % p
                if todo[k2] == 0:
                    del todo[k2]
        return {k: v for k, v in done.items() if v}

    def multiply(self, x: dict, y: dict, order: str = "low") -> dict:
        return self.normalize(self._raw_product(x, y), order)

    def weight(self, key) -> int:
        _, xi, ta = key
        p = self.p
        return sum(e * p ** (i + 1) for i, e in enumerate(xi)) + sum(e * p ** i for i, e in enumerate(ta))


# ---------------------------------------------------------------- coaction


class Coaction:
    """alpha: A//E(n)^dual -> E(m)^dual (x) A//E(n)^dual for m <= n + 1.

    Output entries are ``{(E, a, WeightedMonomial): c}``: the term
    ``e_E (x) a*mono``, i.e. already in right-basis form.
    """

    def __init__(self, pair: ExteriorAlgebraPair, n: int):
        if pair.n > n + 1:
            raise ConfigurationError(f"E({pair.n}) does not coact on A//E({n})")
        self.pair = pair
        self.n = n
        self.p = pair.p
        self._cache: dict = {}

    def _gen_tau(self, j: int) -> dict:
        p, m = self.p, self.pair.n
        one = self.pair.ring.one
        out = {(0, one, WeightedMonomial((), 1 << j)): 1}
        for i in range(0, min(m, j) + 1):
            mono = WeightedMonomial()
            if j - i > 0:
                mono = mono.times_xi(j - i, p ** i)
            key = (1 << i, one, mono)
            out[key] = (out.get(key, 0) + 1) % p
        return out

    def _mul(self, x: dict, y: dict) -> dict:
        """Multiply in E(m)^dual (x) A^dual with Koszul signs (right factors
        square-free in tau-bar by construction)."""
        pair, p, ring = self.pair, self.p, self.pair.ring
        out: dict = {}
        for (E1, a1, r1), c1 in x.items():
            for (E2, a2, r2), c2 in y.items():
                if r1.tau & r2.tau:
                    raise AssertionError("coaction produced a squared tau in the right factor")
                sign = 1
                if p != 2:
                    # r1 (with coefficient a1) passes e_E2
                    par = (r1.degree(p).s + ring.parity(a1)) % 2
                    if par and pair.deg(E2).s % 2:
                        sign = -sign
                    sign *= _merge_sign(r1.tau, r2.tau)
                    if ring.parity(a2) and bin(r1.tau).count("1") % 2:
                        sign = -sign
                xi = DualSteenrod._trim(DualSteenrod._add(r1.xi, r2.xi))
                r = WeightedMonomial(xi, r1.tau | r2.tau)
                s12, a12 = ring.multiply(a1, a2)
                if a12 is None:
                    continue
                for G, b, cb in pair.mul_e(E1, E2):
                    sb, ab = ring.multiply(b, a12)
                    if ab is None:
                        continue
                    key = (G, ab, r)
                    out[key] = (out.get(key, 0) + sign * s12 * sb * c1 * c2 * cb) % p
        return {k: v for k, v in out.items() if v}

    def __call__(self, mono: WeightedMonomial) -> dict:
        hit = self._cache.get(mono)
        if hit is not None:
            return hit
        one = self.pair.ring.one
        cur = {(0, one, WeightedMonomial()): 1}
        for i, e in enumerate(mono.xi):
            for _ in range(e):
                cur = self._mul(cur, {(0, one, WeightedMonomial().times_xi(i + 1)): 1})
        for j in bits(mono.tau):
            cur = self._mul(cur, self._gen_tau(j))
        self._cache[mono] = cur
        return cur


def coaction(pair: ExteriorAlgebraPair, n: int, mono: WeightedMonomial) -> dict:
    return Coaction(pair, n)(mono)


def right_action(pair: ExteriorAlgebraPair, n: int, mono: WeightedMonomial, i: int) -> dict:
    """mono * Q_i as ``{(a, WeightedMonomial): c}``."""
    out = {}
    for (E, a, r), c in Coaction(pair, n)(mono).items():
        if E == 1 << i:
            out[(a, r)] = c
    return out


def relative_steenrod_check(spec: FieldSpec, n: int) -> bool:
    pair = ExteriorAlgebraPair(spec, n)
    p = spec.p
    expected = [Degree(0, 0), Degree(1, 0)]
    if n == 1:
        expected += [Degree(2 * p - 1, p - 1), Degree(2 * p, p - 1)]
    got = sorted(pair.basis_degrees())
    if got != sorted(expected):
        raise AssertionError(f"E({n}) basis degrees {got} != {sorted(expected)}")
    return True
