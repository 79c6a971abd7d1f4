"""Noncommutative rank of matrices whose entries are realized by small
pencils: entry normalization, the bordered reduction to one linear
pencil, blow-up rank with a verified witness, and the Schur-step rank
identity at the numeric level.

The reduction places the m^2 normalized entry pencils on a diagonal,
borders them with unit rows/columns routing entry (i,j) of the inverse
grid into position (i,j) of an m x m corner, and pads with a zero
corner; its noncommutative rank exceeds the input's by exactly m^2 s.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass

from .field import (DenseMatrix, Field, MatrixTuple, Singular, invert,
                    rank_of, sample_tuple)
from .pencil import (LinearPencil, PencilOracle, RealizedEntry,
                     pad_entry, relocate_entry, widen_entry, zero_entry)


class NotInvertiblePencil(Exception):
    """An entry pencil looks singular at every probed dimension; the entry
    value is undefined as a skew-field element here."""


class DivisibilityAnomaly(Exception):
    """The observed maximum rank is not a multiple of the final blow-up
    dimension even after the retry; raise trials or the field size."""


@dataclass(frozen=True)
class SkewMatrix:
    """m x m grid of realized entries, normalized to a common pencil size
    with designation (1,1).  `certified` records that every entry pencil
    passed the randomized invertibility probe at construction."""

    m: int
    entries: tuple[tuple[RealizedEntry, ...], ...]
    common_size: int
    nvars: int
    field: Field
    certified: bool = False


@dataclass(frozen=True)
class RankResult:
    r: int
    d: int
    witness: MatrixTuple
    certificate: int                       # rank of the evaluated matrix, r*d
    per_dim: tuple = ()                    # (d, max_rank, accepted r_d or None)
    anomalies: int = 0


@dataclass(frozen=True)
class RankParams:
    d_schedule: tuple[int, ...] | None = None
    trials: int = 16
    seed: int = 0


def probe_invertible(L: LinearPencil, dims=(1, 2, 3), trials: int = 8,
                     seed: int = 0) -> MatrixTuple | None:
    rng = random.Random(seed)
    oracle = PencilOracle(L)
    for d in dims:
        for _ in range(trials):
            t = sample_tuple(L.field, max(L.nvars, 1), d, rng)
            if oracle.is_invertible_at(t):
                return t
    return None


def normalize_entry(e: RealizedEntry, s: int, nvars: int | None = None,
                    check: bool = True, seed: int = 0) -> RealizedEntry:
    """Relocate the designation to (1,1), pad with an identity block to the
    target size, and certify pencil invertibility by randomized probing."""
    if e.size > s:
        raise ValueError("target size smaller than the entry pencil")
    out = pad_entry(relocate_entry(e), s)
    if nvars is not None:
        out = widen_entry(out, nvars)
    if check and probe_invertible(out.pencil, seed=seed) is None:
        raise NotInvertiblePencil(
            "entry pencil singular at all probed dimensions")
    return out


def make_skew_matrix(grid, field: Field, min_size: int = 2,
                     check: bool = True) -> SkewMatrix:
    """Normalize a grid of realized entries (None marks a zero entry) into a
    SkewMatrix with a common pencil size."""
    m = len(grid)
    for row in grid:
        if len(row) != m:
            raise ValueError("grid must be square")
    nvars = max([e.nvars for row in grid for e in row if e is not None],
                default=0)
    filled = [[zero_entry(field, nvars) if e is None else widen_entry(e, nvars)
               for e in row] for row in grid]
    s = max(max(e.size for row in filled for e in row), min_size)
    norm = tuple(tuple(normalize_entry(e, s, nvars, check=check, seed=17 * i + j)
                       for j, e in enumerate(row))
                 for i, row in enumerate(filled))
    return SkewMatrix(m=m, entries=norm, common_size=s, nvars=nvars,
                      field=field, certified=check)


def build_reduction_pencil(M: SkewMatrix) -> LinearPencil:
    """Diagonal of the m^2 entry pencils with unit borders and a zero
    corner; size exactly m^2 s + m."""
    f = M.field
    m, s = M.m, M.common_size
    N = m * m * s + m
    coeffs = [DenseMatrix.zeros(f, N, N) for _ in range(M.nvars + 1)]
    for i in range(m):
        for j in range(m):
            blk = (i * m + j) * s
            e = M.entries[i][j]
            for k in range(M.nvars + 1):
                src = e.pencil.coeffs[k]
                dst = coeffs[k]
                for a in range(s):
                    dst.data[(blk + a) * N + blk:(blk + a) * N + blk + s] = src.row(a)
            # right border: first row of the block connects to corner column j
            coeffs[0].data[blk * N + (m * m * s + j)] = f.one
            # bottom border: corner row i connects to the block's first column
            coeffs[0].data[(m * m * s + i) * N + blk] = f.neg(f.one)
    return LinearPencil(f, N, M.nvars, tuple(coeffs))


def assemble_at(M: SkewMatrix, t: MatrixTuple) -> DenseMatrix:
    """Evaluate the grid entrywise into an (m d) x (m d) matrix; raises
    Singular when some entry pencil is singular at t."""
    f = M.field
    m, d = M.m, t.d
    out = DenseMatrix.zeros(f, m * d, m * d)
    for i in range(m):
        for j in range(m):
            blk = M.entries[i][j].value_at(t)
            for a in range(d):
                row = blk.row(a)
                base = (i * d + a) * (m * d) + j * d
                out.data[base:base + d] = row
    return out


def ncrank_pencil(L: LinearPencil, params: RankParams = RankParams()) -> RankResult:
    """Blow-up rank of a linear pencil: for each scheduled dimension, take
    the maximum evaluated rank over sampled tuples, accept it when it is a
    multiple of d, and report max/d with the achieving tuple.  Monte Carlo:
    the result is a lower bound that meets the rank with high probability
    at the largest scheduled dimension."""
    schedule = params.d_schedule or tuple(range(1, L.size + 1))
    oracle = PencilOracle(L)
    best_r = 0
    best = None
    per_dim = []
    anomalies = 0
    last_d = schedule[-1]
    for d in schedule:
        rng = random.Random(params.seed * 1_000_003 + d)
        max_rank = -1
        max_t = None
        trials = params.trials
        attempt = 0
        while True:
            for _ in range(trials):
                t = sample_tuple(L.field, max(L.nvars, 1), d, rng)
                rk = oracle.rank_at(t)
                if rk > max_rank:
                    max_rank, max_t = rk, t
            if max_rank % d == 0:
                break
            anomalies += 1
            attempt += 1
            if attempt > 1 or d != last_d:
                break
            trials *= 2  # one doubling retry at the final dimension
        if max_rank % d != 0:
            if d == last_d:
                raise DivisibilityAnomaly(
                    f"max rank {max_rank} not divisible by d={d} after retry")
            per_dim.append((d, max_rank, None))
            continue
        r_d = max_rank // d
        per_dim.append((d, max_rank, r_d))
        if best is None or r_d > best_r:
            best_r = r_d
            best = (d, max_t, max_rank)
    if best is None:
        raise DivisibilityAnomaly("no dimension accepted")
    d, t, cert = best
    return RankResult(r=best_r, d=d, witness=t, certificate=cert,
                      per_dim=tuple(per_dim), anomalies=anomalies)


def ncrank_skew(M: SkewMatrix, params: RankParams = RankParams()) -> RankResult:
    """Noncommutative rank of the grid through the reduction pencil, with a
    witness tuple T satisfying rank(M(T)) = r d exactly."""
    L = build_reduction_pencil(M)
    offset = M.m * M.m * M.common_size
    schedule = params.d_schedule or tuple(range(1, 2 * M.m + 1))
    base_params = RankParams(d_schedule=schedule, trials=params.trials,
                             seed=params.seed)
    for retry in range(2):
        res = ncrank_pencil(L, base_params if retry == 0 else
                            RankParams(schedule, params.trials * 2, params.seed + 1))
        r = res.r - offset
        if r < 0 or r > M.m:
            continue
        try:
            cert = rank_of(assemble_at(M, res.witness))
        except Singular:
            continue
        if cert == r * res.d:
            per = tuple((d, mx - offset * d if acc is not None else mx,
                         acc - offset if acc is not None else None)
                        for d, mx, acc in res.per_dim)
            return RankResult(r=r, d=res.d, witness=res.witness,
                              certificate=cert, per_dim=per,
                              anomalies=res.anomalies)
    raise DivisibilityAnomaly("witness verification failed; raise trials")


def schur_step(P: DenseMatrix, r: int) -> tuple[DenseMatrix, bool]:
    """Split off an invertible top-left r x r block: returns the complement
    D - C A^{-1} B and whether rank(P) = r + rank(complement) (it always
    does when A is invertible; the flag is a numeric self-check)."""
    if not P.is_square or not (0 < r < P.rows):
        raise ValueError("need 0 < r < size")
    f = P.field
    n = P.rows
    A = DenseMatrix(f, r, r, [P.at(i, j) for i in range(r) for j in range(r)])
    B = DenseMatrix(f, r, n - r, [P.at(i, j) for i in range(r) for j in range(r, n)])
    C = DenseMatrix(f, n - r, r, [P.at(i, j) for i in range(r, n) for j in range(r)])
    D = DenseMatrix(f, n - r, n - r,
                    [P.at(i, j) for i in range(r, n) for j in range(r, n)])
    Ainv = invert(A)  # raises Singular when the block is not invertible
    comp = D.sub(C.matmul(Ainv).matmul(B))
    holds = rank_of(P) == r + rank_of(comp)
    return comp, holds


# -- skew-matrix file format ---------------------------------------------------


def parse_skew_file(text: str, field: Field, base_dir: str = ".",
                    check: bool = True) -> SkewMatrix:
    """Header `m <m>`, then m^2 row-major entry lines: `expr <expression>`
    (compiled through the circuit pipeline) or `pencil <path>` (a pencil
    file with a realize trailer)."""
    from .circuit import parse_expr, to_idrrsc
    from .pencil import compile_idrrsc, read_pencil

    lines = [ln.strip() for ln in text.splitlines()
             if ln.strip() and not ln.strip().startswith("#")]
    if not lines or not lines[0].startswith("m "):
        raise ValueError("missing m header")
    m = int(lines[0].split()[1])
    body = lines[1:]
    if len(body) != m * m:
        raise ValueError(f"expected {m * m} entries, found {len(body)}")
    grid = []
    for i in range(m):
        row = []
        for j in range(m):
            ln = body[i * m + j]
            kind, _, rest = ln.partition(" ")
            rest = rest.strip()
            if kind == "expr":
                if classify_is_zero_literal(rest):
                    row.append(None)
                    continue
                row.append(compile_idrrsc(to_idrrsc(parse_expr(rest)), field))
            elif kind == "pencil":
                L, realize = read_pencil(os.path.join(base_dir, rest))
                if realize is None:
                    raise ValueError(f"pencil file {rest!r} lacks a realize trailer")
                row.append(RealizedEntry(L, realize[0], realize[1]))
            else:
                raise ValueError(f"unknown entry kind {kind!r}")
        grid.append(row)
    return make_skew_matrix(grid, field, check=check)


def classify_is_zero_literal(text: str) -> bool:
    return text.strip() == "0"


def read_skew_file(path: str, field: Field, check: bool = True) -> SkewMatrix:
    with open(path) as fh:
        return parse_skew_file(fh.read(), field,
                               base_dir=os.path.dirname(path) or ".",
                               check=check)
