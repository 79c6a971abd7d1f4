"""Rational identity testing and the strong hitting-set pipeline.

A circuit is nonzero in the free skew field exactly when its inverse is
defined somewhere, and the compiled pencil of the inverse is invertible
at a tuple exactly when the circuit is defined there with an invertible
value.  So the randomized test samples tuples of growing dimension,
checks pencil invertibility through the reduced core, and re-verifies
any hit by direct evaluation.  Zero verdicts are one-sided Monte Carlo.

The hitting-set generator runs the desk-scale version of the pipeline:
variable reduction to 2(h+1) variables, generic matrices of an explicit
dimension d in place of the conditional logarithmic bound, sparse-point
assignments at prime-power values over exact integers, and transport of
each assignment back through p_i = sum_j q_{j0} q_{j1}^i q_{j0}.
"""

from __future__ import annotations

import functools
import random
from dataclasses import dataclass

from .circuit import (BlowupExceeded, RationalCircuit, Undefined, classify,
                      eval_circuit, parse_expr, to_idrrsc)
from .field import (DenseMatrix, Field, MatrixTuple, is_invertible,
                    sample_tuple)
from .pencil import PencilOracle, RealizedEntry, compile_idrrsc, realize_inverse
from .series import (FieldTooSmall, assemble_shift_point, scaling_search,
                     series_is_zero, shifted_entry_series)


class CompileFailed(Exception):
    """The circuit did not normalize into the compilable class."""


class WitnessNotFound(Exception):
    """Trials exhausted without a definedness + invertibility witness."""


@dataclass(frozen=True)
class RitParams:
    max_dim: int | None = None        # None: min(pencil size, dim_cap)
    dim_cap: int = 8
    trials: int = 8
    seed: int = 0


@dataclass(frozen=True)
class RitVerdict:
    kind: str                          # "zero" | "nonzero"
    witness: MatrixTuple | None = None
    dimension: int = 0
    pencil_size: int = 0
    trials_run: int = 0
    max_dim: int = 0
    error_bound_num: int = 0           # per-trial numerator over the field size
    error_bound_den: int = 1

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero"


def compile_circuit(c: RationalCircuit, field: Field) -> RealizedEntry:
    try:
        return _compile_cached(c, field)
    except BlowupExceeded as exc:
        raise CompileFailed(str(exc)) from exc


@functools.lru_cache(maxsize=16)
def _compile_cached(c: RationalCircuit, field: Field) -> RealizedEntry:
    return compile_idrrsc(to_idrrsc(c), field)


@functools.lru_cache(maxsize=16)
def _gate_oracle(c: RationalCircuit, field: Field):
    """Bordered pencil for the circuit's inverse plus its reduced oracle:
    invertible at t exactly when the circuit is defined at t with an
    invertible value."""
    gate = realize_inverse(_compile_cached(c, field))
    return gate, PencilOracle(gate.pencil)


def rit_test(c: RationalCircuit, field: Field,
             params: RitParams = RitParams()) -> RitVerdict:
    """Randomized black-box zero test; NonZero verdicts ship a tuple at
    which the circuit is defined with an invertible value, re-verified by
    direct evaluation."""
    try:
        gate, oracle = _gate_oracle(c, field)
    except BlowupExceeded as exc:
        raise CompileFailed(str(exc)) from exc
    max_dim = params.max_dim or min(gate.size, params.dim_cap)
    nv = max(c.nvars, 1)
    trials_run = 0
    rng = random.Random(params.seed)
    for d in range(1, max_dim + 1):
        for _ in range(params.trials):
            trials_run += 1
            t = sample_tuple(field, nv, d, rng)
            if not oracle.is_invertible_at(t):
                continue
            try:
                value = eval_circuit(c, t)
            except Undefined:
                continue
            if is_invertible(value):
                return RitVerdict("nonzero", witness=t, dimension=d,
                                  pencil_size=gate.size, trials_run=trials_run,
                                  max_dim=max_dim)
    return RitVerdict("zero", pencil_size=gate.size, trials_run=trials_run,
                      max_dim=max_dim,
                      error_bound_num=gate.size * max_dim,
                      error_bound_den=field.p if field.kind == "prime" else 1 << 62)


def strong_witness(c: RationalCircuit, field: Field,
                   params: RitParams = RitParams()) -> MatrixTuple:
    """A tuple where the circuit is defined and its value invertible."""
    verdict = rit_test(c, field, params)
    if verdict.kind != "nonzero":
        raise WitnessNotFound("no invertible image found; the circuit may be zero")
    return verdict.witness


# -- sparse hitting points -----------------------------------------------------


def _first_primes(n: int) -> list[int]:
    primes: list[int] = []
    cand = 2
    while len(primes) < n:
        if all(cand % q for q in primes if q * q <= cand):
            primes.append(cand)
        cand += 1
    return primes


def sparse_points(nvars: int, kappa: int, base_offset: int = 0) -> list[list[int]]:
    """Points (q_1^j, ..., q_nvars^j) for j = 0..kappa-1 over exact integers,
    with distinct primes q_i: distinct monomials take distinct values at the
    prime vector, so any nonzero kappa-sparse commutative polynomial
    survives at some point (Vandermonde argument)."""
    primes = _first_primes(nvars + base_offset)[base_offset:]
    return [[q ** j for q in primes] for j in range(kappa)]


@dataclass(frozen=True)
class HittingSet:
    tuples: tuple[MatrixTuple, ...]
    n: int
    s: int
    h: int
    d: int
    kappa: int


def hitting_set_generate(n: int, s: int, h: int, d: int, kappa: int | None,
                         field: Field, base_offset: int = 0) -> HittingSet:
    """Desk-scale strong hitting set for circuits with at most n variables,
    size s, inversion height h: sparse points assign integer values to the
    2(h+1) d^2 generic-matrix entries, and each assignment is transported
    through p_i = sum_j q_{j0} q_{j1}^i q_{j0}, reduced into the field at
    assembly."""
    if kappa is None:
        kappa = 2 * s * d
    nq = 2 * (h + 1)
    pts = sparse_points(nq * d * d, kappa, base_offset)
    tuples = []
    for pt in pts:
        qmats = []
        for k in range(nq):
            vals = pt[k * d * d:(k + 1) * d * d]
            qmats.append([vals[a * d:(a + 1) * d] for a in range(d)])
        pmats = []
        for i in range(1, n + 1):
            acc = [[0] * d for _ in range(d)]
            for j in range(h + 1):
                q0, q1 = qmats[2 * j], qmats[2 * j + 1]
                pw = q1
                for _ in range(i - 1):
                    pw = _imatmul(pw, q1)
                term = _imatmul(_imatmul(q0, pw), q0)
                acc = [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(acc, term)]
            pmats.append(DenseMatrix.from_rows(field, acc))
        tuples.append(MatrixTuple(field, d, tuple(pmats)))
    return HittingSet(tuple(tuples), n=n, s=s, h=h, d=d, kappa=kappa)


def _imatmul(a: list[list[int]], b: list[list[int]]) -> list[list[int]]:
    n, k, m = len(a), len(b), len(b[0])
    out = [[0] * m for _ in range(n)]
    for i in range(n):
        for t in range(k):
            v = a[i][t]
            if v:
                for j in range(m):
                    out[i][j] += v * b[t][j]
    return out


@dataclass(frozen=True)
class StrongReport:
    results: tuple            # (label, hit index or None)
    total: int
    hits: int

    @property
    def hit_rate(self) -> float:
        return self.hits / self.total if self.total else 1.0


def verify_strong(H: HittingSet, corpus, field: Field) -> StrongReport:
    """Per circuit: does some tuple give a defined, invertible value."""
    results = []
    hits = 0
    for label, circ in corpus:
        found = None
        for idx, t in enumerate(H.tuples):
            if circ.nvars > t.n:
                continue
            try:
                if is_invertible(eval_circuit(circ, t)):
                    found = idx
                    break
            except Undefined:
                continue
        if found is not None:
            hits += 1
        results.append((label, found))
    return StrongReport(tuple(results), total=len(results), hits=hits)


# -- dimension bootstrapping experiment -----------------------------------------


@dataclass(frozen=True)
class BootstrapRow:
    d: int
    defined: bool
    invertible: bool
    route: str                 # "direct" | "series"
    series_size: int = 0
    truncation_nonzero: bool | None = None
    tau: int | None = None
    assembled_dim: int | None = None      # d * (truncation-test dimension)
    assembled_nonzero: bool | None = None


@dataclass(frozen=True)
class BootstrapReport:
    height: int
    rows: tuple[BootstrapRow, ...]
    smallest_defined: int | None
    smallest_invertible: int | None


def bootstrap_dimension(c: RationalCircuit, field: Field,
                        schedule=(1, 2, 3, 4), trials: int = 16,
                        seed: int = 0, series_cap: int = 24) -> BootstrapReport:
    """For each scheduled dimension, look for a definedness point and an
    invertible image.  Where the compiled pencil is small enough, the
    shift-expansion route is exercised as well: expand the realized entry
    around the definedness point, zero-test the truncated series, and run
    the scaling search; its success is reported as the series route."""
    entry = compile_circuit(c, field)
    rows = []
    smallest_def = None
    smallest_inv = None
    rng = random.Random(seed)
    nv = max(c.nvars, 1)
    for d in schedule:
        defined = False
        invertible = False
        shift = None
        for _ in range(trials):
            t = sample_tuple(field, nv, d, rng)
            try:
                v = eval_circuit(c, t)
            except Undefined:
                continue
            if not defined:
                defined = True
                shift = t
            if is_invertible(v):
                invertible = True
                break
        route = "direct"
        series_size = 0
        trunc_nonzero = None
        tau = None
        assembled_dim = None
        assembled_nonzero = None
        if defined and entry.size * d <= series_cap:
            S = shifted_entry_series(entry, shift)
            series_size = S.size
            route = "series"
            verdict = series_is_zero(S, trials=trials, seed=seed + d)
            trunc_nonzero = verdict.kind == "nonzero"
            if trunc_nonzero:
                try:
                    tau, _ = scaling_search(S, verdict.witness)
                except FieldTooSmall:
                    tau = None
                if tau is not None:
                    # fold the series witness back into a point for the
                    # original variables and re-verify by direct evaluation
                    point = assemble_shift_point(shift, verdict.witness, tau)
                    assembled_dim = point.d
                    try:
                        assembled_nonzero = \
                            not eval_circuit(c, point).is_zero()
                    except Undefined:
                        assembled_nonzero = False
        rows.append(BootstrapRow(d=d, defined=defined, invertible=invertible,
                                 route=route, series_size=series_size,
                                 truncation_nonzero=trunc_nonzero, tau=tau,
                                 assembled_dim=assembled_dim,
                                 assembled_nonzero=assembled_nonzero))
        if defined and smallest_def is None:
            smallest_def = d
        if invertible and smallest_inv is None:
            smallest_inv = d
    return BootstrapReport(height=classify(c).height, rows=tuple(rows),
                           smallest_defined=smallest_def,
                           smallest_invertible=smallest_inv)


# -- reference corpus ------------------------------------------------------------


NONZERO_EXPRESSIONS: tuple[tuple[str, str], ...] = (
    ("var", "x1"),
    ("sum", "x1 + x2"),
    ("product", "x1*x2"),
    ("commutator", "x1*x2 - x2*x1"),
    ("inverse", "inv(x1)"),
    ("inverse-sum", "inv(x1) + inv(x2)"),
    ("commutator-inverse", "inv(x1*x2 - x2*x1)"),
    ("sandwich", "x1*inv(x2)*x1"),
    ("resolvent-difference", "inv(x1+x2) - inv(x1)"),
    ("double-inverse", "inv(inv(x1))"),
    ("nested-sum-inverse", "inv(x1 + inv(x2))"),
    ("hua-first-term", "inv(x1 + x1*inv(x2)*x1)"),
    ("cyclic-difference", "x1*x2*x3 - x3*x2*x1"),
    ("conjugate", "inv(x1)*x2*inv(x1)"),
    ("difference", "x1 - x2"),
    ("constant", "2/3"),
    ("commutator-inverse-times", "inv(x1*x2 - x2*x1)*x3"),
    ("harmonic-pair", "inv(inv(x1) + inv(x2))"),
    ("affine-square", "x1 + x1*x1"),
    ("cancelling-product", "inv(x1)*x1"),
    ("postfix-inverse", "(x1 + x2)^-1"),
    ("quadratic-shift", "x1*x1 - x2"),
    ("swap-inverses", "inv(x2)*inv(x1)"),
    ("affine", "x1 + 1"),
)

ZERO_EXPRESSIONS: tuple[tuple[str, str], ...] = (
    ("hua", "inv(x1 + x1*inv(x2)*x1) + inv(x1+x2) - inv(x1)"),
    ("hua-swapped", "inv(x2 + x2*inv(x1)*x2) + inv(x2+x1) - inv(x2)"),
    ("self-difference", "x1 - x1"),
    ("product-difference", "x1*x2 - x1*x2"),
    ("inverse-difference", "inv(x1) - inv(x1)"),
    ("one-minus-unit", "x1*inv(x1) - 1"),
    ("double-inverse-minus", "inv(inv(x1)) - x1"),
    ("unit-of-sum", "(x1+x2)*inv(x1+x2) - 1"),
    ("zero", "0"),
)


def corpus(include_zero: bool = True):
    """Parsed reference corpus as (label, circuit, expected_zero) triples."""
    out = [(name, parse_expr(src), False) for name, src in NONZERO_EXPRESSIONS]
    if include_zero:
        out += [(name, parse_expr(src), True) for name, src in ZERO_EXPRESSIONS]
    return out
