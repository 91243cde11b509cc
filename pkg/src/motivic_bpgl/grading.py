"""Base fields, degrees and the coefficient rings M_p^F."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional


class ConfigurationError(ValueError):
    pass


class Degree(NamedTuple):
    s: int
    w: int

    def __add__(self, o):
        return Degree(self.s + o[0], self.w + o[1])

    def __sub__(self, o):
        return Degree(self.s - o[0], self.w - o[1])

    def __neg__(self):
        return Degree(-self.s, -self.w)


class TriDegree(NamedTuple):
    s: int
    f: int
    w: int


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % k == 0:
            return False
        k += 1
    return True


def _prime_power_base(q: int) -> Optional[int]:
    for ell in range(2, q + 1):
        if q % ell == 0:
            m = q
            while m % ell == 0:
                m //= ell
            return ell if m == 1 else None
    return None


def nu(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0")
    n, v = abs(n), 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def legendre(k: int, p: int) -> int:
    """nu_p(k!) by Legendre's formula."""
    out, pk = 0, p
    while pk <= k:
        out += k // pk
        pk *= p
    return out


@dataclass(frozen=True)
class FieldSpec:
    field: str  # "C", "R" or "F"
    p: int
    q: Optional[int] = None

    def __post_init__(self):
        if self.field not in ("C", "R", "F"):
            raise ConfigurationError(f"unknown field kind {self.field!r}")
        if not _is_prime(self.p) or self.p >= 256:
            raise ConfigurationError(f"p={self.p} must be a prime below 256")
        if self.field == "F":
            if self.q is None:
                raise ConfigurationError("finite field needs q")
            ell = _prime_power_base(self.q)
            if ell is None:
                raise ConfigurationError(f"q={self.q} is not a prime power")
            if ell == self.p:
                raise ConfigurationError(f"char F_{self.q} equals p={self.p}")
        elif self.q is not None:
            raise ConfigurationError("q only makes sense for finite fields")

    @classmethod
    def parse(cls, text: str, p: int) -> "FieldSpec":
        t = text.strip()
        if t in ("C", "R"):
            return cls(t, p)
        if t.startswith("Fq:") or t.startswith("F:"):
            return cls("F", p, int(t.split(":", 1)[1]))
        raise ConfigurationError(f"cannot parse field {text!r}")

    @property
    def name(self) -> str:
        return self.field if self.field != "F" else f"Fq:{self.q}"

    @property
    def i(self) -> int:
        """Smallest i > 0 with p | q^i - 1 (finite fields only)."""
        if self.field != "F":
            raise ConfigurationError("i is defined for finite fields only")
        j, x = 1, self.q % self.p
        while x != 1:
            x = (x * self.q) % self.p
            j += 1
        return j

    @property
    def bockstein_trivial(self) -> bool:
        if self.field != "F":
            raise ConfigurationError("Bockstein data is defined for finite fields only")
        if self.p == 2:
            return self.q % 4 == 1
        return pow(self.q, self.i, self.p ** 2) == 1

    @property
    def twisted(self) -> bool:
        """True when eta_R moves the polynomial coefficient generator."""
        if self.field == "R":
            return self.p == 2
        if self.field == "F":
            return not self.bockstein_trivial
        return False

    def to_dict(self) -> dict:
        return {"field": self.field, "p": self.p, "q": self.q}


@dataclass(frozen=True)
class Generator:
    name: str
    deg: Degree
    nilpotent: bool  # squares to zero


class CoefficientRing:
    """Monomial model of M_p^F.

    Every case has at most two generators ``(x, y)`` where ``x`` (if present)
    is square-zero or the free class rho, and ``y`` is polynomial.  Monomials
    are exponent tuples aligned with ``gens``.  There is at most one monomial
    in each bidegree, which the rest of the package relies on.
    """

    def __init__(self, spec: FieldSpec):
        self.spec = spec
        p = spec.p
        f = spec.field
        if f == "C":
            gens = [Generator("tau", Degree(0, -1), False)]
        elif f == "R" and p == 2:
            gens = [Generator("rho", Degree(-1, -1), False), Generator("tau", Degree(0, -1), False)]
        elif f == "R":
            gens = [Generator("theta", Degree(0, -2), False)]
        elif p == 2:
            x = "u" if spec.bockstein_trivial else "rho"
            gens = [Generator(x, Degree(-1, -1), True), Generator("tau", Degree(0, -1), False)]
        else:
            i = spec.i
            x = "u" if spec.bockstein_trivial else "gamma"
            gens = [Generator(x, Degree(-1, -i), True), Generator("zeta", Degree(0, -i), False)]
        self.gens = tuple(gens)
        self.p = p
        self.names = tuple(g.name for g in gens)
        self.one = tuple(0 for _ in gens)
        self._cache: dict = {}

    def index(self, name: str) -> int:
        return self.names.index(name)

    def relations(self) -> list[str]:
        return [f"{g.name}^2" for g in self.gens if g.nilpotent]

    def degree(self, m) -> Degree:
        s = w = 0
        for e, g in zip(m, self.gens):
            s += e * g.deg.s
            w += e * g.deg.w
        return Degree(s, w)

    def parity(self, m) -> int:
        return self.degree(m).s % 2

    def monomial_in_degree(self, d):
        """The unique normal-form monomial of bidegree ``d`` or None."""
        d = Degree(*d)
        hit = self._cache.get(d, 0)
        if hit != 0:
            return hit
        res = None
        g = self.gens
        if len(g) == 1:
            gs, gw = g[0].deg
            # single polynomial generator with s = 0
            if d.s == 0 and gw != 0 and d.w % gw == 0 and d.w // gw >= 0:
                res = (d.w // gw,)
        else:
            xs, xw = g[0].deg
            ys, yw = g[1].deg
            a = d.s // xs if xs else 0
            if xs and d.s % xs == 0 and a >= 0 and (a <= 1 or not g[0].nilpotent):
                rest = d.w - a * xw
                if rest % yw == 0 and rest // yw >= 0:
                    res = (a, rest // yw)
        self._cache[d] = res
        return res

    def basis_in_degree(self, d) -> list:
        m = self.monomial_in_degree(d)
        return [] if m is None else [m]

    def multiply(self, a, b):
        """Product of monomials: ``(sign, monomial)`` or ``(0, None)``."""
        out = []
        for x, y, g in zip(a, b, self.gens):
            e = x + y
            if g.nilpotent and e > 1:
                return 0, None
            out.append(e)
        # odd generators: only the square-zero class can be odd, so no sign
        return 1, tuple(out)

    def name_of(self, m) -> str:
        parts = []
        for e, n in zip(m, self.names):
            if e == 1:
                parts.append(n)
            elif e > 1:
                parts.append(f"{n}^{e}")
        return "*".join(parts) if parts else "1"

    def monomial(self, **exps):
        m = [0] * len(self.gens)
        for k, v in exps.items():
            m[self.index(k)] = v
        return tuple(m)

    def monomials_in_window(self, s_range, w_range) -> list:
        out = []
        for s in range(s_range[0], s_range[1] + 1):
            for w in range(w_range[0], w_range[1] + 1):
                m = self.monomial_in_degree((s, w))
                if m is not None:
                    out.append(m)
        return out


def build_coefficient_ring(spec: FieldSpec) -> CoefficientRing:
    return CoefficientRing(spec)


def ring_basis_in_degree(ring: CoefficientRing, d) -> list:
    return ring.basis_in_degree(d)
