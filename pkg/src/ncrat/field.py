"""Exact field arithmetic and dense linear algebra.

Scalars live in a prime field F_p (default p = 2^61 - 1) or in the exact
rationals.  Prime-field elements are canonical residues held as plain
ints; rational elements are fractions.Fraction in lowest terms.  Matrices
are immutable-by-convention row-major containers with exact rank,
inverse, solve, and Kronecker product.  Randomness only ever enters
through explicitly passed seeded generators.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import _modnum

MERSENNE61 = (1 << 61) - 1
DEFAULT_PRIME = MERSENNE61


class Singular(Exception):
    """The matrix (or scalar) has no inverse."""


def _is_prime(n: int) -> bool:
    """Miller-Rabin with fixed bases; deterministic for n < 3.3e24."""
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PrimeField:
    p: int

    kind = "prime"

    def __post_init__(self):
        if self.p < 3:
            raise ValueError("prime modulus must be at least 3")
        if not _is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")

    def normalize(self, a) -> int:
        if isinstance(a, Fraction):
            return self.normalize(a.numerator) * self.inv(self.normalize(a.denominator)) % self.p
        return int(a) % self.p

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def neg(self, a: int) -> int:
        return -a % self.p

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise Singular("division by zero in F_p")
        return pow(a, self.p - 2, self.p)

    def is_zero(self, a: int) -> bool:
        return a % self.p == 0

    @property
    def zero(self) -> int:
        return 0

    @property
    def one(self) -> int:
        return 1

    def rand(self, rng: random.Random) -> int:
        return rng.randrange(self.p)

    def format(self, a: int) -> str:
        return str(a)

    def parse(self, text: str) -> int:
        if "/" in text:
            num, den = text.split("/")
            return self.normalize(Fraction(int(num), int(den)))
        return int(text) % self.p


@dataclass(frozen=True)
class RationalField:
    kind = "rational"

    def normalize(self, a) -> Fraction:
        return Fraction(a)

    def add(self, a, b) -> Fraction:
        return a + b

    def sub(self, a, b) -> Fraction:
        return a - b

    def mul(self, a, b) -> Fraction:
        return a * b

    def neg(self, a) -> Fraction:
        return -a

    def inv(self, a) -> Fraction:
        if a == 0:
            raise Singular("division by zero in Q")
        return 1 / Fraction(a)

    def is_zero(self, a) -> bool:
        return a == 0

    @property
    def zero(self) -> Fraction:
        return Fraction(0)

    @property
    def one(self) -> Fraction:
        return Fraction(1)

    def rand(self, rng: random.Random) -> Fraction:
        return Fraction(rng.randrange(-(1 << 16), 1 << 16))

    def format(self, a: Fraction) -> str:
        if a.denominator == 1:
            return str(a.numerator)
        return f"{a.numerator}/{a.denominator}"

    def parse(self, text: str) -> Fraction:
        return Fraction(text)


Field = PrimeField | RationalField

QQ = RationalField()


def prime_field(p: int = DEFAULT_PRIME) -> PrimeField:
    return PrimeField(p)


class DenseMatrix:
    """Row-major exact matrix over a fixed field.  Treat as immutable."""

    __slots__ = ("field", "rows", "cols", "data")

    def __init__(self, field: Field, rows: int, cols: int, data: Sequence):
        if len(data) != rows * cols:
            raise ValueError("entry count does not match shape")
        self.field = field
        self.rows = rows
        self.cols = cols
        self.data = list(data)

    # -- constructors -------------------------------------------------

    @staticmethod
    def zeros(field: Field, rows: int, cols: int) -> "DenseMatrix":
        return DenseMatrix(field, rows, cols, [field.zero] * (rows * cols))

    @staticmethod
    def identity(field: Field, n: int) -> "DenseMatrix":
        m = DenseMatrix.zeros(field, n, n)
        for i in range(n):
            m.data[i * n + i] = field.one
        return m

    @staticmethod
    def from_rows(field: Field, rows: Iterable[Iterable]) -> "DenseMatrix":
        rows = [list(r) for r in rows]
        nr = len(rows)
        nc = len(rows[0]) if rows else 0
        data = []
        for r in rows:
            if len(r) != nc:
                raise ValueError("ragged rows")
            data.extend(field.normalize(x) for x in r)
        return DenseMatrix(field, nr, nc, data)

    @staticmethod
    def random(field: Field, rows: int, cols: int, rng: random.Random) -> "DenseMatrix":
        return DenseMatrix(field, rows, cols,
                           [field.rand(rng) for _ in range(rows * cols)])

    # -- access --------------------------------------------------------

    def at(self, i: int, j: int):
        return self.data[i * self.cols + j]

    def row(self, i: int) -> list:
        return self.data[i * self.cols:(i + 1) * self.cols]

    def to_lists(self) -> list[list]:
        return [self.row(i) for i in range(self.rows)]

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __eq__(self, other) -> bool:
        return (isinstance(other, DenseMatrix) and self.rows == other.rows
                and self.cols == other.cols and self.data == other.data)

    def __repr__(self) -> str:
        return f"DenseMatrix({self.rows}x{self.cols})"

    def is_zero(self) -> bool:
        f = self.field
        return all(f.is_zero(x) for x in self.data)

    # -- arithmetic ----------------------------------------------------

    def add(self, other: "DenseMatrix") -> "DenseMatrix":
        self._check_shape(other)
        f = self.field
        return DenseMatrix(f, self.rows, self.cols,
                           [f.add(a, b) for a, b in zip(self.data, other.data)])

    def sub(self, other: "DenseMatrix") -> "DenseMatrix":
        self._check_shape(other)
        f = self.field
        return DenseMatrix(f, self.rows, self.cols,
                           [f.sub(a, b) for a, b in zip(self.data, other.data)])

    def scale(self, c) -> "DenseMatrix":
        f = self.field
        c = f.normalize(c)
        return DenseMatrix(f, self.rows, self.cols, [f.mul(c, x) for x in self.data])

    def neg(self) -> "DenseMatrix":
        f = self.field
        return DenseMatrix(f, self.rows, self.cols, [f.neg(x) for x in self.data])

    def matmul(self, other: "DenseMatrix") -> "DenseMatrix":
        if self.cols != other.rows:
            raise ValueError("inner dimensions differ")
        f = self.field
        n, k, m = self.rows, self.cols, other.cols
        if f.kind == "prime":
            p = f.p
            out = [0] * (n * m)
            a, b = self.data, other.data
            for i in range(n):
                arow = a[i * k:(i + 1) * k]
                orow = out
                base = i * m
                for t in range(k):
                    av = arow[t]
                    if av:
                        brow = b[t * m:(t + 1) * m]
                        for j in range(m):
                            orow[base + j] = (orow[base + j] + av * brow[j]) % p
            return DenseMatrix(f, n, m, out)
        out = [f.zero] * (n * m)
        for i in range(n):
            for t in range(k):
                av = self.data[i * k + t]
                if not f.is_zero(av):
                    for j in range(m):
                        out[i * m + j] = f.add(out[i * m + j],
                                               f.mul(av, other.data[t * m + j]))
        return DenseMatrix(f, n, m, out)

    def transpose(self) -> "DenseMatrix":
        out = [self.field.zero] * (self.rows * self.cols)
        for i in range(self.rows):
            for j in range(self.cols):
                out[j * self.rows + i] = self.data[i * self.cols + j]
        return DenseMatrix(self.field, self.cols, self.rows, out)

    def _check_shape(self, other: "DenseMatrix"):
        if self.rows != other.rows or self.cols != other.cols:
            raise ValueError("shape mismatch")

    # -- numpy bridge (prime fields only) -------------------------------

    def _np(self):
        return np.array(self.data, dtype=np.uint64).reshape(self.rows, self.cols)

    @staticmethod
    def _from_np(field: Field, arr) -> "DenseMatrix":
        r, c = arr.shape
        return DenseMatrix(field, r, c, [int(x) for x in arr.ravel()])

    def _fast(self) -> bool:
        return self.field.kind == "prime" and _modnum.supported(self.field.p)


def kron(a: DenseMatrix, b: DenseMatrix) -> DenseMatrix:
    """Kronecker product; block (i,j) equals a[i,j] * b."""
    if a.field != b.field:
        raise ValueError("field mismatch")
    f = a.field
    if a._fast():
        return DenseMatrix._from_np(f, _modnum.kron_mod(a._np(), b._np(), f.p))
    rows = a.rows * b.rows
    cols = a.cols * b.cols
    out = [f.zero] * (rows * cols)
    for i in range(a.rows):
        for j in range(a.cols):
            v = a.at(i, j)
            if f.is_zero(v):
                continue
            for k in range(b.rows):
                base = (i * b.rows + k) * cols + j * b.cols
                for l in range(b.cols):
                    out[base + l] = f.mul(v, b.at(k, l))
    return DenseMatrix(f, rows, cols, out)


def _rank_generic(m: DenseMatrix) -> int:
    f = m.field
    a = [list(m.row(i)) for i in range(m.rows)]
    n, cols = m.rows, m.cols
    r = 0
    for c in range(cols):
        piv = None
        for i in range(r, n):
            if not f.is_zero(a[i][c]):
                piv = i
                break
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = f.inv(a[r][c])
        a[r] = [f.mul(inv, x) for x in a[r]]
        for i in range(r + 1, n):
            if not f.is_zero(a[i][c]):
                fac = a[i][c]
                a[i] = [f.sub(x, f.mul(fac, y)) for x, y in zip(a[i], a[r])]
        r += 1
        if r == n:
            break
    return r


def rank_of(m: DenseMatrix) -> int:
    """Exact rank by Gaussian elimination with first-nonzero pivoting."""
    if m.rows == 0 or m.cols == 0:
        return 0
    if m._fast():
        return _modnum.rank_mod(m._np(), m.field.p)
    return _rank_generic(m)


def _invert_generic(m: DenseMatrix) -> DenseMatrix:
    f = m.field
    n = m.rows
    a = [list(m.row(i)) + [f.one if j == i else f.zero for j in range(n)]
         for i in range(n)]
    r = 0
    for c in range(n):
        piv = None
        for i in range(r, n):
            if not f.is_zero(a[i][c]):
                piv = i
                break
        if piv is None:
            raise Singular("matrix is singular")
        a[r], a[piv] = a[piv], a[r]
        inv = f.inv(a[r][c])
        a[r] = [f.mul(inv, x) for x in a[r]]
        for i in range(n):
            if i != r and not f.is_zero(a[i][c]):
                fac = a[i][c]
                a[i] = [f.sub(x, f.mul(fac, y)) for x, y in zip(a[i], a[r])]
        r += 1
    return DenseMatrix(f, n, n, [a[i][n + j] for i in range(n) for j in range(n)])


def invert(m: DenseMatrix) -> DenseMatrix:
    """Exact inverse; raises Singular when no inverse exists."""
    if not m.is_square:
        raise ValueError("only square matrices can be inverted")
    if m.rows == 0:
        return m
    if m._fast():
        out = _modnum.inv_mod(m._np(), m.field.p)
        if out is None:
            raise Singular("matrix is singular")
        return DenseMatrix._from_np(m.field, out)
    return _invert_generic(m)


def solve(a: DenseMatrix, b: DenseMatrix) -> DenseMatrix:
    """X with a @ X = b for square invertible a; raises Singular otherwise."""
    if not a.is_square or a.rows != b.rows:
        raise ValueError("shape mismatch in solve")
    if a._fast():
        out = _modnum.solve_mod(a._np(), b._np(), a.field.p)
        if out is None:
            raise Singular("matrix is singular")
        return DenseMatrix._from_np(a.field, out)
    return invert(a).matmul(b)


def is_invertible(m: DenseMatrix) -> bool:
    return m.is_square and rank_of(m) == m.rows


@dataclass(frozen=True)
class MatrixTuple:
    """An n-tuple of square matrices of a common dimension d."""

    field: Field
    d: int
    mats: tuple[DenseMatrix, ...]

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be at least 1")
        for m in self.mats:
            if m.rows != self.d or m.cols != self.d:
                raise ValueError("all members must be square of dimension d")

    @property
    def n(self) -> int:
        return len(self.mats)

    def _np_stack(self):
        return np.stack([m._np() for m in self.mats]) if self.mats else \
            np.zeros((0, self.d, self.d), dtype=np.uint64)


def sample_tuple(field: Field, n: int, d: int, rng: random.Random | int) -> MatrixTuple:
    """n independent uniform d x d matrices; deterministic given the seed."""
    if isinstance(rng, int):
        rng = random.Random(rng)
    return MatrixTuple(field, d,
                       tuple(DenseMatrix.random(field, d, d, rng) for _ in range(n)))


# -- matrix-tuple text format ------------------------------------------


def dump_tuple(t: MatrixTuple) -> str:
    lines = []
    if t.field.kind == "prime":
        lines.append(f"field prime {t.field.p}")
    else:
        lines.append("field rational")
    lines.append(f"nvars {t.n}")
    lines.append(f"dim {t.d}")
    for m in t.mats:
        lines.append("")
        for i in range(t.d):
            lines.append(" ".join(t.field.format(x) for x in m.row(i)))
    return "\n".join(lines) + "\n"


def write_tuple(t: MatrixTuple, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(dump_tuple(t))


def parse_tuple(text: str) -> MatrixTuple:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("field "):
        raise ValueError("missing field header")
    head = lines[0].split()
    if head[1] == "prime":
        field: Field = PrimeField(int(head[2]))
    elif head[1] == "rational":
        field = QQ
    else:
        raise ValueError(f"unknown field kind {head[1]!r}")
    if not lines[1].startswith("nvars ") or not lines[2].startswith("dim "):
        raise ValueError("missing nvars/dim headers")
    n = int(lines[1].split()[1])
    d = int(lines[2].split()[1])
    body = lines[3:]
    if len(body) != n * d:
        raise ValueError(f"expected {n * d} matrix rows, found {len(body)}")
    mats = []
    for k in range(n):
        rows = []
        for i in range(d):
            parts = body[k * d + i].split()
            if len(parts) != d:
                raise ValueError(f"row {i} of matrix {k} has {len(parts)} entries")
            rows.append([field.parse(x) for x in parts])
        mats.append(DenseMatrix.from_rows(field, rows))
    return MatrixTuple(field, d, tuple(mats))


def read_tuple(path: str) -> MatrixTuple:
    with open(path) as fh:
        return parse_tuple(fh.read())
