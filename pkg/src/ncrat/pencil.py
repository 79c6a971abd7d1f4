"""Linear pencil realizations.

A pencil L = A0 + sum_i Ai x_i is evaluated at a matrix tuple through
Kronecker products, A0 x I_d + sum Ai x t_i.  Rational functions are
realized as designated entries of pencil inverses; branching programs
embed through a unit-triangular bidiagonal pencil, inverses through a
one-row border gadget, and substitution of realized inverses into a
pencil through a four-block composition whose bottom-right block of the
inverse reproduces the substituted pencil's entire inverse.

The composition requires every placeholder variable to occur in exactly
one entry of the host pencil.  That is precisely the shape produced by
the tree-normalized compiler (each inverse gate feeds one edge of the
top branching program); sharing a placeholder across entries is rejected
rather than silently duplicated.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from . import _modnum
from .circuit import Abp, IdrCircuit
from .field import (DenseMatrix, Field, MatrixTuple, Singular, kron,
                    rank_of, solve)


class DimensionMismatch(Exception):
    """Placeholder count of the host pencil differs from the realized list."""


class DisjointnessViolation(ValueError):
    """A placeholder variable occurs in more than one host pencil entry."""


@dataclass(frozen=True)
class LinearPencil:
    """Coefficient matrices A0..An, all square of equal size."""

    field: Field
    size: int
    nvars: int
    coeffs: tuple[DenseMatrix, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.nvars + 1:
            raise ValueError("need one coefficient matrix per variable plus A0")
        for m in self.coeffs:
            if m.rows != self.size or m.cols != self.size:
                raise ValueError("coefficient matrices must be size x size")

    def _np_coeffs(self):
        return np.stack([m._np() for m in self.coeffs])


def pencil_from_rows(field: Field, rows_per_coeff: list) -> LinearPencil:
    coeffs = tuple(DenseMatrix.from_rows(field, rows) for rows in rows_per_coeff)
    return LinearPencil(field, coeffs[0].rows, len(coeffs) - 1, coeffs)


def eval_pencil(L: LinearPencil, t: MatrixTuple) -> DenseMatrix:
    """A0 x I_d + sum Ai x t_i, an (s d) x (s d) matrix."""
    if L.nvars > t.n:
        raise ValueError("tuple has fewer matrices than the pencil has variables")
    if L.field.kind == "prime" and _modnum.supported(L.field.p):
        arr = _modnum.eval_pencil_mod(L._np_coeffs(), t._np_stack(), t.d, L.field.p)
        return DenseMatrix._from_np(L.field, arr)
    acc = kron(L.coeffs[0], DenseMatrix.identity(L.field, t.d))
    for i in range(L.nvars):
        acc = acc.add(kron(L.coeffs[i + 1], t.mats[i]))
    return acc


@dataclass(frozen=True)
class RealizedEntry:
    """A pencil with a designated entry (row, col), 1-indexed: the realized
    element is ((L^{-1}))_{row, col}, a d x d block once evaluated."""

    pencil: LinearPencil
    row: int
    col: int

    def __post_init__(self):
        if not (1 <= self.row <= self.pencil.size and 1 <= self.col <= self.pencil.size):
            raise ValueError("designated entry out of range")

    @property
    def size(self) -> int:
        return self.pencil.size

    @property
    def nvars(self) -> int:
        return self.pencil.nvars

    def value_at(self, t: MatrixTuple) -> DenseMatrix:
        """The (row, col) block of L(t)^{-1}; raises Singular when L(t) is not
        invertible (the element is undefined at t)."""
        ev = eval_pencil(self.pencil, t)
        rhs = DenseMatrix.zeros(self.pencil.field, ev.rows, t.d)
        for b in range(t.d):
            rhs.data[((self.col - 1) * t.d + b) * t.d + b] = self.pencil.field.one
        sol = solve(ev, rhs)
        out = DenseMatrix.zeros(self.pencil.field, t.d, t.d)
        for a in range(t.d):
            for b in range(t.d):
                out.data[a * t.d + b] = sol.at((self.row - 1) * t.d + a, b)
        return out

    def defined_at(self, t: MatrixTuple) -> bool:
        try:
            self.value_at(t)
            return True
        except Singular:
            return False


def zero_entry(field: Field, nvars: int) -> RealizedEntry:
    """The zero element realized by an everywhere-invertible 2x2 pencil."""
    a0 = DenseMatrix.from_rows(field, [[0, 1], [1, 0]])
    zs = DenseMatrix.zeros(field, 2, 2)
    pencil = LinearPencil(field, 2, nvars, (a0,) + (zs,) * nvars)
    return RealizedEntry(pencil, 1, 1)


# -- branching program to pencil ---------------------------------------------


def from_abp(a: Abp, field: Field, nvars: int | None = None) -> RealizedEntry:
    """Unit upper-triangular bidiagonal pencil with the branching program's
    polynomial realized in the upper right corner; invertible at every
    tuple."""
    widths = a.widths
    n = a.nvars if nvars is None else nvars
    N = sum(widths)
    offs = [0]
    for w in widths:
        offs.append(offs[-1] + w)
    coeffs = [DenseMatrix.zeros(field, N, N) for _ in range(n + 1)]
    for i in range(N):
        coeffs[0].data[i * N + i] = field.one
    for t, layer in enumerate(a.layers):
        ro = offs[t]
        co = offs[t + 1]
        for i, row in enumerate(layer):
            for j, form in enumerate(row):
                for k, v in form.items():
                    coeffs[k].data[(ro + i) * N + co + j] = \
                        field.neg(field.normalize(v))
    pencil = LinearPencil(field, N, n, tuple(coeffs))
    return RealizedEntry(pencil, 1, N - widths[-1] + 1)


# -- inverse gadgets and composition ------------------------------------------


def realize_inverse(g: RealizedEntry) -> RealizedEntry:
    """One-row, one-column border around g's pencil; the bottom-right corner
    of the inverse is g^{-1}.  Invertible at t exactly when g is defined at
    t and g(t) is invertible."""
    f = g.pencil.field
    s = g.size
    n = g.nvars
    coeffs = []
    for k in range(n + 1):
        big = DenseMatrix.zeros(f, s + 1, s + 1)
        src = g.pencil.coeffs[k]
        for i in range(s):
            row = src.row(i)
            big.data[i * (s + 1):i * (s + 1) + s] = row
        if k == 0:
            big.data[(g.col - 1) * (s + 1) + s] = f.one          # e_v column
            big.data[s * (s + 1) + (g.row - 1)] = f.neg(f.one)   # -e_u^T row
        coeffs.append(big)
    pencil = LinearPencil(f, s + 1, n, tuple(coeffs))
    return RealizedEntry(pencil, s + 1, s + 1)


def hat_pencil(gs: list[RealizedEntry]) -> tuple[LinearPencil, list[tuple[int, int]]]:
    """Block diagonal of the inverse gadgets; position k of the returned list
    is the 1-indexed (i_k, j_k) where the k-th inverse is realized."""
    if not gs:
        raise ValueError("need at least one realized entry")
    f = gs[0].pencil.field
    n = max(g.nvars for g in gs)
    sizes = [g.size + 1 for g in gs]
    N = sum(sizes)
    coeffs = [DenseMatrix.zeros(f, N, N) for _ in range(n + 1)]
    positions = []
    off = 0
    for g in gs:
        blk = realize_inverse(g)
        bs = blk.pencil.size
        for k in range(n + 1):
            if k <= blk.pencil.nvars:
                src = blk.pencil.coeffs[k]
                dst = coeffs[k]
                for i in range(bs):
                    dst.data[(off + i) * N + off:(off + i) * N + off + bs] = src.row(i)
        positions.append((off + bs, off + bs))
        off += bs
    return LinearPencil(f, N, n, tuple(coeffs)), positions


@dataclass(frozen=True)
class RealizedGrid:
    """All s^2 entries of the inverse of a substituted pencil, realized in
    one pencil starting at a common offset."""

    pencil: LinearPencil
    offset: int
    s: int

    def entry(self, i: int, j: int) -> RealizedEntry:
        if not (1 <= i <= self.s and 1 <= j <= self.s):
            raise ValueError("grid index out of range")
        return RealizedEntry(self.pencil, self.offset + i, self.offset + j)


def _y_occurrences(L: LinearPencil, nx: int) -> list[tuple[int, int, object] | None]:
    occ = []
    f = L.field
    for k in range(nx + 1, L.nvars + 1):
        coeff = L.coeffs[k]
        found = None
        for i in range(L.size):
            for j in range(L.size):
                v = coeff.at(i, j)
                if not f.is_zero(v):
                    if found is not None:
                        raise DisjointnessViolation(
                            f"placeholder variable {k} occurs in more than one "
                            "entry of the host pencil")
                    found = (i, j, v)
        occ.append(found)
    return occ


def compose(L: LinearPencil, gs: list[RealizedEntry], nx: int) -> RealizedGrid:
    """Substitute g_k^{-1} for the placeholder variable nx+k of L.  The
    result realizes every entry of L(x, g_1^{-1}, ..., g_m^{-1})^{-1} at
    offset 2 s^2 + shat, in a pencil of size exactly
    sum_k size(g_k) + m + 2 s^2 + s.

    Block layout [I | H | I | L0]: the first identity feeds the inverse
    gadgets (columns weighted by the placeholder coefficients), the gadget
    exits feed the second identity at the host entry that the placeholder
    occupies, and the borders close the loop through the constant-plus-x
    part L0 of the host."""
    m = L.nvars - nx
    if m != len(gs):
        raise DimensionMismatch(
            f"host pencil has {m} placeholder variables, {len(gs)} realizations given")
    for g in gs:
        if g.nvars > nx:
            raise DimensionMismatch(
                "realized entries may only use the host's x variables")
    if m == 0:
        return RealizedGrid(L, 0, L.size)
    f = L.field
    s = L.size
    occ = _y_occurrences(L, nx)
    sizes = [g.size + 1 for g in gs]
    shat = sum(sizes)
    N = shat + 2 * s * s + s
    o1, oH, o3, oL = 0, s * s, s * s + shat, 2 * s * s + shat
    coeffs = [DenseMatrix.zeros(f, N, N) for _ in range(nx + 1)]
    c0 = coeffs[0]
    for q in range(s * s):
        c0.data[(o1 + q) * N + (o1 + q)] = f.one
        c0.data[(o3 + q) * N + (o3 + q)] = f.one
    # inverse gadgets on the diagonal of the H block
    corners = []
    off = oH
    for g in gs:
        blk = realize_inverse(g)
        bs = blk.pencil.size
        for k in range(nx + 1):
            if k <= blk.pencil.nvars:
                src = blk.pencil.coeffs[k]
                for i in range(bs):
                    coeffs[k].data[(off + i) * N + off:(off + i) * N + off + bs] = src.row(i)
        corners.append(off + bs - 1)
        off += bs
    # constant-plus-x part of the host in the last diagonal block
    for k in range(nx + 1):
        src = L.coeffs[k]
        for i in range(s):
            coeffs[k].data[(oL + i) * N + oL:(oL + i) * N + oL + s] = src.row(i)
    # connectors
    for k in range(m):
        if occ[k] is None:
            continue
        i0, j0, beta = occ[k]
        q = i0 * s + j0
        c0.data[(o1 + q) * N + corners[k]] = f.normalize(beta)
        c0.data[corners[k] * N + (o3 + q)] = f.one
    for i in range(s):
        for j in range(s):
            q = i * s + j
            c0.data[(o3 + q) * N + (oL + j)] = f.one
            c0.data[(oL + i) * N + (o1 + q)] = f.neg(f.one)
    pencil = LinearPencil(f, N, nx, tuple(coeffs))
    assert pencil.size == sum(g.size for g in gs) + m + 2 * s * s + s
    return RealizedGrid(pencil, oL, s)


def compile_idrrsc(idr: IdrCircuit, field: Field) -> RealizedEntry:
    """Compile the recursive decomposition into a single pencil realization:
    branching-program base case, composition step for the inverses."""
    if idr.m == 0:
        return from_abp(idr.top, field, nvars=idr.nx)
    gs = [compile_idrrsc(sub, field) for sub in idr.subs]
    host = from_abp(idr.top, field, nvars=idr.nx + idr.m)
    grid = compose(host.pencil, gs, idr.nx)
    return RealizedEntry(grid.pencil, grid.offset + host.row, grid.offset + host.col)


# -- generic-matrix blow-up with shift ----------------------------------------


def blowup_shift(L: LinearPencil, m: int, shift: MatrixTuple) -> LinearPencil:
    """Substitute x_i by a generic m x m matrix of fresh variables around a
    base point: the constant term becomes A0 x I_m + sum Ai x shift_i, and
    the coefficient of the fresh variable z^{(i)}_{jk} is Ai x E_jk.  The
    result has size s*m over n*m^2 variables, ordered i-major then row-major
    in (j, k)."""
    if shift.n != L.nvars:
        raise ValueError("shift tuple must match the pencil's variable count")
    if shift.d != m:
        raise ValueError("shift dimension must equal the blow-up dimension")
    f = L.field
    n = L.nvars
    a0 = eval_pencil(L, shift)
    coeffs = [a0]
    for i in range(n):
        Ai = L.coeffs[i + 1]
        for j in range(m):
            for k in range(m):
                E = DenseMatrix.zeros(f, m, m)
                E.data[j * m + k] = f.one
                coeffs.append(kron(Ai, E))
    return LinearPencil(f, L.size * m, n * m * m, tuple(coeffs))


# -- padding and relocation ---------------------------------------------------


def relocate_entry(e: RealizedEntry) -> RealizedEntry:
    """Move the designation to (1,1) by row/column swaps on the pencil; the
    realized value and invertibility at every tuple are unchanged."""
    if e.row == 1 and e.col == 1:
        return e
    f = e.pencil.field
    s = e.size
    u, v = e.row - 1, e.col - 1
    coeffs = []
    for src in e.pencil.coeffs:
        rows = src.to_lists()
        rows[0], rows[v] = rows[v], rows[0]
        for r in rows:
            r[0], r[u] = r[u], r[0]
        coeffs.append(DenseMatrix.from_rows(f, rows))
    return RealizedEntry(LinearPencil(f, s, e.pencil.nvars, tuple(coeffs)), 1, 1)


def pad_entry(e: RealizedEntry, size: int) -> RealizedEntry:
    """Embed the pencil in the top-left of a larger identity; designated
    entries of the inverse and invertibility are preserved."""
    if size < e.size:
        raise ValueError("cannot pad to a smaller size")
    if size == e.size:
        return e
    f = e.pencil.field
    coeffs = []
    for k, src in enumerate(e.pencil.coeffs):
        big = DenseMatrix.zeros(f, size, size)
        for i in range(e.size):
            big.data[i * size:i * size + e.size] = src.row(i)
        if k == 0:
            for i in range(e.size, size):
                big.data[i * size + i] = f.one
        coeffs.append(big)
    return RealizedEntry(LinearPencil(f, size, e.pencil.nvars, tuple(coeffs)),
                         e.row, e.col)


def widen_entry(e: RealizedEntry, nvars: int) -> RealizedEntry:
    """Extend the variable list with zero coefficient matrices."""
    if nvars < e.nvars:
        raise ValueError("cannot drop variables")
    if nvars == e.nvars:
        return e
    f = e.pencil.field
    extra = tuple(DenseMatrix.zeros(f, e.size, e.size)
                  for _ in range(nvars - e.nvars))
    pencil = LinearPencil(f, e.size, nvars, e.pencil.coeffs + extra)
    return RealizedEntry(pencil, e.row, e.col)


# -- structural rank oracle ---------------------------------------------------


class _SparseReducer:
    """Exact constant-pivot elimination on a sparse pencil view.

    Entries live in rows[r][c] = {k: value} dicts.  A row all of whose
    entries are constant (no k >= 1 component) supports a row pivot: the
    pivot column is cleared with affine multipliers and the pivot row and
    column leave the pencil, contributing exactly d to the rank at every
    tuple.  Constant columns support the symmetric column pivot.  The
    worklist keeps the pass near-linear in the number of nonzeros for the
    identity-heavy pencils the compiler produces."""

    def __init__(self, L: LinearPencil):
        f = self.field = L.field
        self.n = L.nvars
        self.rows: dict[int, dict[int, dict]] = {r: {} for r in range(L.size)}
        self.colrows: dict[int, set] = {c: set() for c in range(L.size)}
        self.row_varcnt = [0] * L.size
        self.col_varcnt = [0] * L.size
        for k, m in enumerate(L.coeffs):
            data = m.data
            N = L.size
            for r in range(N):
                base = r * N
                for c in range(N):
                    v = data[base + c]
                    if not f.is_zero(v):
                        self.rows[r].setdefault(c, {})[k] = v
        for r, row in self.rows.items():
            for c, e in row.items():
                self.colrows[c].add(r)
                if self._has_var(e):
                    self.row_varcnt[r] += 1
                    self.col_varcnt[c] += 1
        self.base = 0

    @staticmethod
    def _has_var(entry: dict) -> bool:
        return len(entry) > (1 if 0 in entry else 0)

    def _set_component(self, r: int, c: int, k: int, value) -> None:
        """rows[r][c][k] = value with full bookkeeping (value may be zero)."""
        f = self.field
        row = self.rows[r]
        entry = row.get(c)
        had_var = entry is not None and self._has_var(entry)
        if entry is None:
            if f.is_zero(value):
                return
            entry = row[c] = {}
            self.colrows[c].add(r)
        if f.is_zero(value):
            entry.pop(k, None)
        else:
            entry[k] = value
        if not entry:
            del row[c]
            self.colrows[c].discard(r)
            has_var = False
        else:
            has_var = self._has_var(entry)
        if has_var != had_var:
            delta = 1 if has_var else -1
            self.row_varcnt[r] += delta
            self.col_varcnt[c] += delta

    def reduce(self) -> None:
        f = self.field
        pending_rows = set(self.rows)
        pending_cols = set(self.colrows)
        while pending_rows or pending_cols:
            if pending_rows:
                r = pending_rows.pop()
                row = self.rows.get(r)
                if not row or self.row_varcnt[r]:
                    continue
                c = next(iter(row))
                alpha_inv = f.inv(row[c][0])
                rest = [(c2, e[0]) for c2, e in row.items() if c2 != c]
                for i in list(self.colrows[c]):
                    if i == r:
                        continue
                    entry = self.rows[i].pop(c)
                    self.colrows[c].discard(i)
                    if self._has_var(entry):
                        self.row_varcnt[i] -= 1
                        self.col_varcnt[c] -= 1
                        if self.row_varcnt[i] == 0:
                            pending_rows.add(i)
                    mults = [(k, f.mul(v, alpha_inv)) for k, v in entry.items()]
                    for c2, v2 in rest:
                        for k, mk in mults:
                            cur = self.rows[i].get(c2, {}).get(k, f.zero)
                            self._set_component(i, c2, k,
                                                f.sub(cur, f.mul(mk, v2)))
                        if self.col_varcnt[c2] == 0:
                            pending_cols.add(c2)
                    if self.row_varcnt[i] == 0:
                        pending_rows.add(i)
                for c2, _ in rest:
                    self.colrows[c2].discard(r)
                    if self.col_varcnt[c2] == 0:
                        pending_cols.add(c2)
                del self.rows[r]
                del self.colrows[c]
                self.base += 1
                continue
            c = pending_cols.pop()
            col = self.colrows.get(c)
            if not col or self.col_varcnt[c]:
                continue
            r = next(iter(col))
            row_r = self.rows[r]
            alpha_inv = f.inv(row_r[c][0])
            rest = [(c2, dict(row_r[c2])) for c2 in list(row_r) if c2 != c]
            # clear row r with column operations through the constant column c
            for c2, entry in rest:
                mults = [(k, f.mul(v, alpha_inv)) for k, v in entry.items()]
                for i in list(self.colrows[c]):
                    vi = self.rows[i][c][0]
                    for k, mk in mults:
                        cur = self.rows[i].get(c2, {}).get(k, f.zero)
                        self._set_component(i, c2, k, f.sub(cur, f.mul(mk, vi)))
                    if self.row_varcnt[i] == 0:
                        pending_rows.add(i)
                if self.col_varcnt[c2] == 0:
                    pending_cols.add(c2)
            # row r is now the singleton pivot; clear the rest of column c
            for i in list(self.colrows[c]):
                if i != r:
                    del self.rows[i][c]
                    if self.row_varcnt[i] == 0:
                        pending_rows.add(i)
            del self.rows[r]
            del self.colrows[c]
            self.base += 1

    def core_pencil(self) -> LinearPencil:
        f = self.field
        live_rows = sorted(self.rows)
        live_cols = sorted(self.colrows)
        nc = len(live_rows)
        assert nc == len(live_cols)
        rmap = {r: i for i, r in enumerate(live_rows)}
        cmap = {c: j for j, c in enumerate(live_cols)}
        coeffs = [DenseMatrix.zeros(f, nc, nc) for _ in range(self.n + 1)]
        for r, row in self.rows.items():
            for c, entry in row.items():
                for k, v in entry.items():
                    coeffs[k].data[rmap[r] * nc + cmap[c]] = v
        return LinearPencil(f, nc, self.n, tuple(coeffs))


class PencilOracle:
    """Rank and invertibility of a pencil at matrix tuples, through an
    exact structural reduction done once at construction: rank(L(t)) =
    base * d + rank(core(t)) for every tuple t."""

    def __init__(self, L: LinearPencil):
        self.field = L.field
        self.size = L.size
        red = _SparseReducer(L)
        red.reduce()
        self.base = red.base
        self.core = red.core_pencil()
        self._fast = L.field.kind == "prime" and _modnum.supported(L.field.p)
        self._core_np = self.core._np_coeffs() if self._fast else None

    @property
    def core_size(self) -> int:
        return self.core.size

    def rank_at(self, t: MatrixTuple) -> int:
        if self.core.size == 0:
            return self.base * t.d
        if self._fast:
            ev = _modnum.eval_pencil_mod(self._core_np, t._np_stack(), t.d,
                                         self.field.p)
            return self.base * t.d + _modnum.rank_mod(ev, self.field.p)
        return self.base * t.d + rank_of(eval_pencil(self.core, t))

    def is_invertible_at(self, t: MatrixTuple) -> bool:
        return self.rank_at(t) == self.size * t.d


def pencil_rank_at(L: LinearPencil, t: MatrixTuple) -> int:
    return rank_of(eval_pencil(L, t))


def is_invertible_at(L: LinearPencil, t: MatrixTuple) -> bool:
    return pencil_rank_at(L, t) == L.size * t.d


# -- pencil file format --------------------------------------------------------


def dump_pencil(L: LinearPencil, realize: tuple[int, int] | None = None) -> str:
    lines = [f"size {L.size}", f"nvars {L.nvars}"]
    if L.field.kind == "prime":
        lines.insert(0, f"field prime {L.field.p}")
    else:
        lines.insert(0, "field rational")
    f = L.field
    for k in range(L.nvars + 1):
        lines.append(f"coeff {k}")
        m = L.coeffs[k]
        for i in range(L.size):
            for j in range(L.size):
                v = m.at(i, j)
                if not f.is_zero(v):
                    lines.append(f"{i + 1} {j + 1} {f.format(v)}")
        lines.append("end")
    if realize is not None:
        lines.append(f"realize {realize[0]} {realize[1]}")
    return "\n".join(lines) + "\n"


def dump_realized(e: RealizedEntry) -> str:
    return dump_pencil(e.pencil, realize=(e.row, e.col))


def parse_pencil(text: str):
    """Returns (LinearPencil, realize-or-None)."""
    from .field import QQ, PrimeField
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    idx = 0
    field: Field | None = None
    if lines[idx].startswith("field "):
        parts = lines[idx].split()
        field = PrimeField(int(parts[2])) if parts[1] == "prime" else QQ
        idx += 1
    else:
        raise ValueError("missing field header")
    if not lines[idx].startswith("size "):
        raise ValueError("missing size header")
    size = int(lines[idx].split()[1])
    idx += 1
    if not lines[idx].startswith("nvars "):
        raise ValueError("missing nvars header")
    nvars = int(lines[idx].split()[1])
    idx += 1
    coeffs = [DenseMatrix.zeros(field, size, size) for _ in range(nvars + 1)]
    realize = None
    while idx < len(lines):
        ln = lines[idx]
        if ln.startswith("realize "):
            parts = ln.split()
            realize = (int(parts[1]), int(parts[2]))
            idx += 1
            continue
        if not ln.startswith("coeff "):
            raise ValueError(f"expected coeff block, found {ln!r}")
        k = int(ln.split()[1])
        if k > nvars:
            raise ValueError("coefficient index out of range")
        idx += 1
        while idx < len(lines) and lines[idx] != "end":
            r, c, v = lines[idx].split()
            coeffs[k].data[(int(r) - 1) * size + (int(c) - 1)] = field.parse(v)
            idx += 1
        if idx == len(lines):
            raise ValueError("unterminated coeff block")
        idx += 1
    return LinearPencil(field, size, nvars, tuple(coeffs)), realize


def read_pencil(path: str):
    with open(path) as fh:
        return parse_pencil(fh.read())


def write_pencil(L: LinearPencil, path: str,
                 realize: tuple[int, int] | None = None) -> None:
    with open(path, "w") as fh:
        fh.write(dump_pencil(L, realize))


def random_invertible_point(L: LinearPencil, d: int, rng: random.Random,
                            tries: int = 64) -> MatrixTuple | None:
    """A tuple where the pencil evaluates invertibly, or None."""
    from .field import sample_tuple
    for _ in range(tries):
        t = sample_tuple(L.field, max(L.nvars, 1), d, rng)
        if is_invertible_at(L, t):
            return t
    return None
