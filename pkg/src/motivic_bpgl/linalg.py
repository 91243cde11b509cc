"""Exact linear algebra over F_p.

Matrices are lists of rows; row ``i`` is the image of source basis vector ``i``.
Over F_2 a row is a Python int (bit ``j`` = column ``j``); over odd p a row is
a list of ints reduced mod p.  Pivots are always taken at the lowest column index,
from the lowest-index row that has one, so reduced forms are reproducible.
"""
from __future__ import annotations

from dataclasses import dataclass, field


class DegreeMismatch(ValueError):
    pass


def _inv(a: int, p: int) -> int:
    return pow(int(a), p - 2, p)


# ---------- row conversion

def to_rows(dense, p: int):
    """Convert a list of coefficient lists to the packed row format."""
    if p == 2:
        out = []
        for r in dense:
            v = 0
            for j, c in enumerate(r):
                if c % 2:
                    v |= 1 << j
            out.append(v)
        return out
    return [[c % p for c in r] for r in dense]


def from_row(row, ncols: int, p: int) -> list[int]:
    if p == 2:
        return [(row >> j) & 1 for j in range(ncols)]
    return list(row)


def sparse_row(entries: dict[int, int], ncols: int, p: int):
    """Build a packed row from ``{column: coefficient}``."""
    if p == 2:
        v = 0
        for j, c in entries.items():
            if c % 2:
                v ^= 1 << j
        return v
    r = [0] * ncols
    for j, c in entries.items():
        r[j] = (r[j] + c) % p
    return r


def row_entries(row, p: int) -> dict[int, int]:
    if p == 2:
        out, j = {}, 0
        while row:
            if row & 1:
                out[j] = 1
            row >>= 1
            j += 1
        return out
    return {j: c for j, c in enumerate(row) if c}


def zero_row(ncols: int, p: int):
    return 0 if p == 2 else [0] * ncols


def is_zero(row, p: int) -> bool:
    return row == 0 if p == 2 else not any(row)


# ---------- elimination

def _rref2(rows: list[int], ncols: int, track: bool):
    """Gauss-Jordan over F_2.  With ``track`` the bits above ``ncols`` record
    the combination of input rows."""
    work = []
    for i, r in enumerate(rows):
        work.append(r | (1 << (ncols + i)) if track else r)
    mask = (1 << ncols) - 1
    pivots: list[int] = []
    basis: list[int] = []
    rest: list[int] = []
    for r in work:
        for pc, b in zip(pivots, basis):
            if (r >> pc) & 1:
                r ^= b
        low = r & mask
        if low == 0:
            rest.append(r)
            continue
        pc = (low & -low).bit_length() - 1
        for k in range(len(basis)):
            if (basis[k] >> pc) & 1:
                basis[k] ^= r
        pivots.append(pc)
        basis.append(r)
    order = sorted(range(len(pivots)), key=lambda k: pivots[k])
    return [pivots[k] for k in order], [basis[k] for k in order], rest


def _rrefp(rows, ncols: int, p: int, track: bool):
    nr = len(rows)
    a = []
    for i, r in enumerate(rows):
        row = [c % p for c in r[:ncols]] + [0] * (ncols - len(r[:ncols]))
        if track:
            row += [1 if k == i else 0 for k in range(nr)]
        a.append(row)
    pivots = []
    prow = 0
    for c in range(ncols):
        if prow == nr:
            break
        k = next((k for k in range(prow, nr) if a[k][c]), None)
        if k is None:
            continue
        a[prow], a[k] = a[k], a[prow]
        inv = _inv(a[prow][c], p)
        piv = [x * inv % p for x in a[prow]]
        a[prow] = piv
        for k in range(nr):
            f = a[k][c] if k != prow else 0
            if f:
                a[k] = [(x - f * y) % p for x, y in zip(a[k], piv)]
        pivots.append(c)
        prow += 1
    return pivots, a[:prow], a[prow:]


def rref(rows, ncols: int, p: int, track: bool = False):
    """Return ``(pivots, reduced_rows, leftover_rows)``.

    Without tracking the leftover rows are zero and can be ignored; with
    tracking their tails (columns ``>= ncols``) span the left kernel.
    """
    if p == 2:
        return _rref2(list(rows), ncols, track)
    return _rrefp(list(rows), ncols, p, track)


def _rank2(rows) -> int:
    """Forward elimination only, keyed by lowest set bit."""
    piv: dict = {}
    for r in rows:
        while r:
            lb = r & -r
            b = piv.get(lb)
            if b is None:
                piv[lb] = r
                break
            r ^= b
    return len(piv)


def rank(rows, ncols: int, p: int) -> int:
    if p == 2:
        return _rank2(rows)
    return len(rref(rows, ncols, p)[0])


def _tail(row, ncols: int, nrows: int, p: int):
    if p == 2:
        return row >> ncols
    return row[ncols:ncols + nrows]


def kernel(rows, ncols: int, p: int) -> list:
    """Basis of ``{c : sum c_i row_i = 0}`` as packed rows of length ``len(rows)``."""
    nr = len(rows)
    _, _, rest = rref(rows, ncols, p, track=True)
    out = [_tail(r, ncols, nr, p) for r in rest]
    # normalise the kernel basis itself so output is canonical
    if not out:
        return []
    _, red, _ = rref(out, nr, p)
    return red


def image(rows, ncols: int, p: int) -> list:
    """Reduced basis of the row space."""
    return rref(rows, ncols, p)[1]


class Echelon:
    """Incrementally maintained reduced row space with membership tests."""

    def __init__(self, ncols: int, p: int):
        self.ncols = ncols
        self.p = p
        self.pivots: list[int] = []
        self.rows: list = []

    def reduce(self, v):
        p = self.p
        if p == 2:
            for pc, b in zip(self.pivots, self.rows):
                if (v >> pc) & 1:
                    v ^= b
            return v
        v = list(v)
        for pc, b in zip(self.pivots, self.rows):
            c = v[pc]
            if c:
                v = [(x - c * y) % p for x, y in zip(v, b)]
        return v

    def add(self, v) -> bool:
        """Insert ``v``; return True if it enlarged the span."""
        p = self.p
        v = self.reduce(v)
        if is_zero(v, p):
            return False
        if p == 2:
            pc = (v & -v).bit_length() - 1
            for k in range(len(self.rows)):
                if (self.rows[k] >> pc) & 1:
                    self.rows[k] ^= v
        else:
            pc = next(j for j, c in enumerate(v) if c)
            inv = _inv(v[pc], p)
            v = [x * inv % p for x in v]
            for k in range(len(self.rows)):
                c = self.rows[k][pc]
                if c:
                    self.rows[k] = [(x - c * y) % p for x, y in zip(self.rows[k], v)]
        self.pivots.append(pc)
        self.rows.append(v)
        return True

    def contains(self, v) -> bool:
        return is_zero(self.reduce(v), self.p)

    def __len__(self):
        return len(self.rows)


def solve(rows, ncols: int, p: int, target):
    """Return packed coefficients ``c`` with ``sum c_i row_i = target``, or None.

    The first solution in basis order is returned (free variables zero).
    """
    nr = len(rows)
    pivots, red, _ = rref(rows, ncols, p, track=True)
    t = target if p == 2 else list(target)
    acc = 0 if p == 2 else [0] * nr
    for pc, b in zip(pivots, red):
        if p == 2:
            if (t >> pc) & 1:
                t ^= b & ((1 << ncols) - 1)
                acc ^= b >> ncols
        else:
            c = t[pc]
            if c:
                t = [(x - c * y) % p for x, y in zip(t, b[:ncols])]
                acc = [(x + c * y) % p for x, y in zip(acc, b[ncols:ncols + nr])]
    if p == 2:
        return acc if t == 0 else None
    return acc if not any(t) else None


@dataclass
class GradedMatrix:
    """A degree-preserving map given blockwise.

    ``blocks[d]`` holds the rows (images of the source basis in degree ``d``)
    and ``source[d]``/``target[d]`` the basis labels.
    """

    p: int
    source: dict = field(default_factory=dict)
    target: dict = field(default_factory=dict)
    blocks: dict = field(default_factory=dict)

    def set_block(self, d, source_labels, target_labels, rows):
        if len(rows) != len(source_labels):
            raise DegreeMismatch(f"block at {d}: {len(rows)} rows for {len(source_labels)} sources")
        self.source[d] = list(source_labels)
        self.target[d] = list(target_labels)
        self.blocks[d] = list(rows)

    def _get(self, d):
        if d not in self.blocks:
            raise DegreeMismatch(f"no block in degree {d}")
        return self.blocks[d], len(self.target[d])

    def rank(self, d) -> int:
        rows, nc = self._get(d)
        return rank(rows, nc, self.p)

    def kernel(self, d) -> list:
        rows, nc = self._get(d)
        return kernel(rows, nc, self.p)

    def image(self, d) -> list:
        rows, nc = self._get(d)
        return image(rows, nc, self.p)

    def solve(self, d, target):
        rows, nc = self._get(d)
        return solve(rows, nc, self.p, target)
