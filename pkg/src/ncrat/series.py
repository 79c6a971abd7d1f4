"""Recognizable series (c, M, b): truncated evaluation, the finite-degree
zero test, full rational evaluation, and the scalar-scaling search that
upgrades a nonzero truncation to a nonzero full value.

A series c^t (I - M)^{-1} b with homogeneous transition pencil M of size
s is zero exactly when its truncation to degree s-1 is zero; the
truncation is an ordinary polynomial, so randomized evaluation at a
dimension exceeding half its degree decides it.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import freepoly
from .field import (DenseMatrix, Field, MatrixTuple, Singular, invert, kron,
                    sample_tuple)
from .pencil import LinearPencil, RealizedEntry, eval_pencil


class FieldTooSmall(Exception):
    """The scaling scan exhausted the field without a usable value."""


@dataclass(frozen=True)
class RecognizableSeries:
    """c: 1 x s row, M: homogeneous pencil (A0 = 0) of size s, b: s x 1."""

    c: DenseMatrix
    M: LinearPencil
    b: DenseMatrix

    def __post_init__(self):
        s = self.M.size
        if self.c.rows != 1 or self.c.cols != s or self.b.rows != s or self.b.cols != 1:
            raise ValueError("boundary vector shapes must be 1 x s and s x 1")
        if not self.M.coeffs[0].is_zero():
            raise ValueError("transition pencil must be homogeneous (A0 = 0)")

    @property
    def size(self) -> int:
        return self.M.size

    @property
    def field(self) -> Field:
        return self.M.field

    @property
    def nvars(self) -> int:
        return self.M.nvars


@dataclass(frozen=True)
class SeriesVerdict:
    kind: str                      # "zero" | "nonzero"
    witness: MatrixTuple | None
    dimension: int
    trials: int
    error_bound_num: int           # per-trial numerator of (s-1)*d / p
    error_bound_den: int


def truncated_eval(S: RecognizableSeries, k: int, t: MatrixTuple) -> DenseMatrix:
    """Exact partial sum sum_{i<=k} c^t M(t)^i b, a d x d block."""
    f = S.field
    eye = DenseMatrix.identity(f, t.d)
    cb = kron(S.c, eye)          # d x sd
    bb = kron(S.b, eye)          # sd x d
    acc = cb.matmul(bb)
    if k == 0:
        return acc
    Mt = eval_pencil(S.M, t)
    w = bb
    for _ in range(k):
        w = Mt.matmul(w)
        acc = acc.add(cb.matmul(w))
    return acc


def full_eval(S: RecognizableSeries, t: MatrixTuple) -> DenseMatrix:
    """(c x I)(I - M(t))^{-1}(b x I); raises Singular when I - M(t) is not
    invertible (the series value is undefined at t)."""
    f = S.field
    eye = DenseMatrix.identity(f, t.d)
    Mt = eval_pencil(S.M, t)
    resolvent = invert(DenseMatrix.identity(f, Mt.rows).sub(Mt))
    return kron(S.c, eye).matmul(resolvent).matmul(kron(S.b, eye))


def series_is_zero(S: RecognizableSeries, trials: int = 16,
                   seed: int = 0) -> SeriesVerdict:
    """Monte Carlo zero test through the degree-(s-1) truncation, evaluated
    at dimension ceil((s+1)/2); a Zero verdict is one-sided."""
    s = S.size
    d = (s + 1 + 1) // 2
    rng = random.Random(seed)
    nv = max(S.nvars, 1)
    if all(S.field.is_zero(x) for x in S.c.data) or \
            all(S.field.is_zero(x) for x in S.b.data):
        return SeriesVerdict("zero", None, d, 0, s - 1, _field_size(S.field))
    for _ in range(trials):
        t = sample_tuple(S.field, nv, d, rng)
        if not truncated_eval(S, s - 1, t).is_zero():
            return SeriesVerdict("nonzero", t, d, trials, 0, 1)
    return SeriesVerdict("zero", None, d, trials, (s - 1) * d, _field_size(S.field))


def _field_size(f: Field) -> int:
    return f.p if f.kind == "prime" else 1 << 62


def scaling_search(S: RecognizableSeries, t: MatrixTuple,
                   max_scan: int | None = None) -> tuple[int, DenseMatrix]:
    """Given a nonzero truncation at t, scan tau = 1, 2, ... for the first
    scalar with I - M(tau t) invertible and a nonzero full value.  The bad
    values are roots of one determinant and one numerator polynomial in
    tau, so the scan is short; FieldTooSmall only if the field runs out."""
    f = S.field
    if truncated_eval(S, S.size - 1, t).is_zero():
        raise ValueError("scaling search requires a nonzero truncation at t")
    eye = DenseMatrix.identity(f, t.d)
    cb = kron(S.c, eye)
    bb = kron(S.b, eye)
    Mt = eval_pencil(S.M, t)
    big_eye = DenseMatrix.identity(f, Mt.rows)
    limit = max_scan if max_scan is not None else _field_size(f) - 1
    tau = 0
    while tau < limit:
        tau += 1
        tf = f.normalize(tau)
        if f.is_zero(tf):
            break
        try:
            resolvent = invert(big_eye.sub(Mt.scale(tf)))
        except Singular:
            continue
        value = cb.matmul(resolvent).matmul(bb)
        if not value.is_zero():
            return tau, value
    raise FieldTooSmall("no usable scaling value found")


def symbolic_truncation(S: RecognizableSeries, k: int) -> freepoly.NcPoly:
    """Exact expansion of sum_{i<=k} c^t M^i b in the free algebra (oracle)."""
    f = S.field
    s = S.size

    def entry_poly(i: int, j: int) -> freepoly.NcPoly:
        terms = {}
        for v in range(1, S.nvars + 1):
            coeff = S.M.coeffs[v].at(i, j)
            if not f.is_zero(coeff):
                terms[(v,)] = coeff
        return freepoly.NcPoly(f, terms)

    Mp = [[entry_poly(i, j) for j in range(s)] for i in range(s)]
    # state = c^t M^i as a row of polynomials
    state = [freepoly.NcPoly.const(f, S.c.at(0, j)) for j in range(s)]
    acc = freepoly.NcPoly.zero(f)

    def dot_b(row) -> freepoly.NcPoly:
        out = freepoly.NcPoly.zero(f)
        for j in range(s):
            out = freepoly.add(out, freepoly.scale(S.b.at(j, 0), row[j]))
        return out

    acc = dot_b(state)
    for _ in range(k):
        nxt = []
        for j in range(s):
            cell = freepoly.NcPoly.zero(f)
            for i in range(s):
                if not state[i].is_zero() and not Mp[i][j].is_zero():
                    cell = freepoly.add(cell, freepoly.mul(state[i], Mp[i][j]))
            nxt.append(cell)
        state = nxt
        acc = freepoly.add(acc, dot_b(state))
    return acc


def assemble_shift_point(shift: MatrixTuple, zwitness: MatrixTuple,
                         tau: int = 1) -> MatrixTuple:
    """Fold a witness for the shift-expansion variables back into a matrix
    tuple for the original variables: P_i assembles the d x d grid of
    scaled z-blocks on top of the embedded base point shift_i x I."""
    f = shift.field
    d = shift.d
    dz = zwitness.d
    if zwitness.n != shift.n * d * d:
        raise ValueError("z-witness length must be n * d^2")
    tf = f.normalize(tau)
    mats = []
    for i in range(shift.n):
        big = kron(shift.mats[i], DenseMatrix.identity(f, dz))
        for j in range(d):
            for k in range(d):
                E = DenseMatrix.zeros(f, d, d)
                E.data[j * d + k] = f.one
                z = zwitness.mats[i * d * d + j * d + k].scale(tf)
                big = big.add(kron(E, z))
        mats.append(big)
    return MatrixTuple(f, d * dz, tuple(mats))


def shifted_entry_series(entry: RealizedEntry, shift: MatrixTuple,
                         block_row: int = 0, block_col: int = 0) -> RecognizableSeries:
    """Power-series expansion of a realized entry around an invertible base
    point: substituting x_i -> Z_i + shift_i with generic d x d matrices
    turns the (block_row, block_col) scalar coordinate of the entry's value
    block into a recognizable series over the n d^2 fresh variables, with
    transition -L(shift)^{-1} (sum_i A_i x E_jk) of size s*d."""
    L = entry.pencil
    f = L.field
    d = shift.d
    base = eval_pencil(L, shift)
    base_inv = invert(base)      # Singular here means the shift is unusable
    n = L.nvars
    sd = L.size * d
    coeffs = [DenseMatrix.zeros(f, sd, sd)]
    for i in range(n):
        Ai = L.coeffs[i + 1]
        for j in range(d):
            for k in range(d):
                E = DenseMatrix.zeros(f, d, d)
                E.data[j * d + k] = f.one
                coeffs.append(base_inv.matmul(kron(Ai, E)).neg())
    M = LinearPencil(f, sd, n * d * d, tuple(coeffs))
    crow = DenseMatrix.zeros(f, 1, sd)
    crow.data[(entry.row - 1) * d + block_row] = f.one
    bcol = DenseMatrix.zeros(f, sd, 1)
    for i in range(sd):
        bcol.data[i] = base_inv.at(i, (entry.col - 1) * d + block_col)
    return RecognizableSeries(crow, M, bcol)
