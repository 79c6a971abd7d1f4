import random

import pytest

from ncrat import freepoly as fp
from ncrat.field import (DenseMatrix, MatrixTuple, PrimeField, Singular,
                         invert, kron, prime_field, sample_tuple)
from ncrat.pencil import LinearPencil, eval_pencil
from ncrat.series import (FieldTooSmall, RecognizableSeries, full_eval,
                          scaling_search, series_is_zero, shifted_entry_series,
                          symbolic_truncation, truncated_eval)

F = prime_field()
F7 = PrimeField(7)


def geometric(field=F):
    c = DenseMatrix.from_rows(field, [[1]])
    b = DenseMatrix.from_rows(field, [[1]])
    M = LinearPencil(field, 1, 1, (DenseMatrix.zeros(field, 1, 1),
                                   DenseMatrix.from_rows(field, [[1]])))
    return RecognizableSeries(c, M, b)


def random_series(rng, size, nvars=2, field=F, force_zero=False):
    zero = DenseMatrix.zeros(field, size, size)
    if force_zero:
        # disjointly supported boundary vectors around a diagonal transition
        c = DenseMatrix.zeros(field, 1, size)
        b = DenseMatrix.zeros(field, size, 1)
        c.data[0] = field.one
        if size > 1:
            b.data[size - 1] = field.one
        coeffs = [zero]
        for _ in range(nvars):
            diag = DenseMatrix.zeros(field, size, size)
            for i in range(size):
                diag.data[i * size + i] = rng.randrange(field.p)
            coeffs.append(diag)
        return RecognizableSeries(c, LinearPencil(field, size, nvars,
                                                  tuple(coeffs)), b)
    c = DenseMatrix.random(field, 1, size, rng)
    b = DenseMatrix.random(field, size, 1, rng)
    coeffs = [zero]
    for _ in range(nvars):
        m = DenseMatrix.zeros(field, size, size)
        for i in range(size * size):
            if rng.random() < 0.5:
                m.data[i] = rng.randrange(field.p)
        coeffs.append(m)
    return RecognizableSeries(c, LinearPencil(field, size, nvars, tuple(coeffs)), b)


def test_series_requires_homogeneous_transition():
    bad = LinearPencil(F, 1, 1, (DenseMatrix.from_rows(F, [[1]]),
                                 DenseMatrix.from_rows(F, [[1]])))
    with pytest.raises(ValueError):
        RecognizableSeries(DenseMatrix.from_rows(F, [[1]]), bad,
                           DenseMatrix.from_rows(F, [[1]]))


# -- truncated_eval ---------------------------------------------------------------

def test_truncated_eval_k0_is_cb(rng):
    S = random_series(rng, 3)
    t = sample_tuple(F, 2, 2, rng)
    expect = kron(S.c.matmul(S.b), DenseMatrix.identity(F, 2))
    assert truncated_eval(S, 0, t) == expect


def test_truncated_eval_geometric():
    S = geometric()
    t = MatrixTuple(F, 1, (DenseMatrix.from_rows(F, [[2]]),))
    assert truncated_eval(S, 3, t).data[0] == 1 + 2 + 4 + 8


def test_truncated_eval_matches_symbolic_oracle(rng):
    for _ in range(20):
        size = rng.randrange(1, 4)
        S = random_series(rng, size)
        k = rng.randrange(0, 4)
        poly = symbolic_truncation(S, k)
        t = sample_tuple(F, 2, 2, rng)
        assert truncated_eval(S, k, t) == fp.eval_poly(poly, t)


def test_truncation_telescopes(rng):
    S = random_series(rng, 3)
    t = sample_tuple(F, 2, 2, rng)
    for k in range(3):
        diff = truncated_eval(S, k + 1, t).sub(truncated_eval(S, k, t))
        # independent route: c M^{k+1} b assembled directly
        Mt = eval_pencil(S.M, t)
        cb = kron(S.c, DenseMatrix.identity(F, 2))
        bb = kron(S.b, DenseMatrix.identity(F, 2))
        w = bb
        for _ in range(k + 1):
            w = Mt.matmul(w)
        assert diff == cb.matmul(w)


def test_degree2_truncation_coefficients(rng):
    # coefficients of the degree-2 truncation match the symbolic expansion of
    # c (I + M + M^2) b on a size-2 series
    S = random_series(rng, 2)
    poly = symbolic_truncation(S, 2)
    # manual expansion through freepoly matrix products
    f = F
    def entry_poly(i, j):
        terms = {}
        for v in (1, 2):
            cf = S.M.coeffs[v].at(i, j)
            if not f.is_zero(cf):
                terms[(v,)] = cf
        return fp.NcPoly(f, terms)
    Mp = [[entry_poly(i, j) for j in range(2)] for i in range(2)]
    acc = fp.NcPoly.zero(f)
    for i in range(2):
        for j in range(2):
            ci = fp.NcPoly.const(f, S.c.at(0, i))
            bj = fp.NcPoly.const(f, S.b.at(j, 0))
            term = fp.mul(ci, bj) if i == j else fp.NcPoly.zero(f)
            acc = fp.add(acc, term)
            acc = fp.add(acc, fp.mul(fp.mul(ci, Mp[i][j]), bj))
            for k in range(2):
                acc = fp.add(acc, fp.mul(fp.mul(ci, fp.mul(Mp[i][k], Mp[k][j])), bj))
    assert poly == acc


# -- series_is_zero -----------------------------------------------------------------

def test_zero_boundary_gives_zero(rng):
    S = random_series(rng, 3)
    zs = RecognizableSeries(DenseMatrix.zeros(F, 1, 3), S.M, S.b)
    assert series_is_zero(zs).kind == "zero"


def test_geometric_is_nonzero():
    v = series_is_zero(geometric())
    assert v.kind == "nonzero" and v.witness is not None and v.witness.d == 1


def test_verdict_matches_symbolic_oracle(rng):
    for i in range(25):
        size = rng.randrange(1, 5)
        force = rng.random() < 0.3
        S = random_series(rng, size, force_zero=force)
        verdict = series_is_zero(S, trials=12, seed=i)
        truly_zero = symbolic_truncation(S, size - 1).is_zero()
        assert verdict.kind == ("zero" if truly_zero else "nonzero")


def test_zero_test_dimension():
    S = geometric()
    assert series_is_zero(S).dimension == 1  # ceil((1+1)/2)
    rng = random.Random(0)
    S4 = random_series(rng, 4)
    assert series_is_zero(S4).dimension == 3  # ceil(5/2)


# -- full_eval -----------------------------------------------------------------------

def test_full_eval_geometric_mod7():
    S = geometric(F7)
    t = MatrixTuple(F7, 1, (DenseMatrix.from_rows(F7, [[2]]),))
    assert full_eval(S, t).data[0] == 6  # (1-2)^{-1} = -1


def test_full_eval_singular_at_identity():
    S = geometric()
    t = MatrixTuple(F, 1, (DenseMatrix.from_rows(F, [[1]]),))
    with pytest.raises(Singular):
        full_eval(S, t)


def test_full_eval_nilpotent_equals_truncation(rng):
    # strictly upper triangular transition: nilpotent at every tuple
    size = 3
    coeffs = [DenseMatrix.zeros(F, size, size)]
    for _ in range(2):
        m = DenseMatrix.zeros(F, size, size)
        for i in range(size):
            for j in range(i + 1, size):
                m.data[i * size + j] = rng.randrange(F.p)
        coeffs.append(m)
    S = RecognizableSeries(DenseMatrix.random(F, 1, size, rng),
                           LinearPencil(F, size, 2, tuple(coeffs)),
                           DenseMatrix.random(F, size, 1, rng))
    t = sample_tuple(F, 2, 2, rng)
    assert full_eval(S, t) == truncated_eval(S, size * t.d, t)


def test_resolvent_identity(rng):
    S = random_series(rng, 3)
    for _ in range(10):
        t = sample_tuple(F, 2, 2, rng)
        Mt = eval_pencil(S.M, t)
        eye = DenseMatrix.identity(F, Mt.rows)
        try:
            res = invert(eye.sub(Mt))
        except Singular:
            continue
        assert eye.sub(Mt).matmul(res) == eye


# -- scaling_search ---------------------------------------------------------------------

def test_scaling_polynomial_series_tau_one(rng):
    # nilpotent transition: full value equals the truncation, tau = 1 works
    size = 2
    coeffs = [DenseMatrix.zeros(F, size, size)]
    m = DenseMatrix.zeros(F, size, size)
    m.data[1] = 1
    coeffs.append(m)
    S = RecognizableSeries(DenseMatrix.from_rows(F, [[1, 0]]),
                           LinearPencil(F, size, 1, tuple(coeffs)),
                           DenseMatrix.from_rows(F, [[0], [1]]))
    t = sample_tuple(F, 1, 1, rng)
    tau, value = scaling_search(S, t)
    assert tau == 1 and not value.is_zero()


def test_scaling_geometric_at_one():
    S = geometric()
    t = MatrixTuple(F, 1, (DenseMatrix.from_rows(F, [[1]]),))
    tau, value = scaling_search(S, t)
    assert tau == 2
    assert value.data[0] == F.p - 1  # (1 - 2)^{-1}


def test_scaling_requires_nonzero_truncation(rng):
    S = random_series(rng, 2)
    zs = RecognizableSeries(DenseMatrix.zeros(F, 1, 2), S.M, S.b)
    t = sample_tuple(F, 2, 1, rng)
    with pytest.raises(ValueError):
        scaling_search(zs, t)


def test_scaling_respects_scan_cap():
    S = geometric()
    t = MatrixTuple(F, 1, (DenseMatrix.from_rows(F, [[1]]),))
    with pytest.raises(FieldTooSmall):
        scaling_search(S, t, max_scan=1)


def test_scaling_random_series_within_bound(rng):
    found = 0
    for i in range(30):
        size = rng.randrange(1, 5)
        S = random_series(rng, size)
        verdict = series_is_zero(S, trials=10, seed=100 + i)
        if verdict.kind != "nonzero":
            continue
        t = verdict.witness
        tau, value = scaling_search(S, t)
        assert not value.is_zero()
        assert tau <= size * t.d * size + 1
        found += 1
    assert found >= 20


# -- shift expansion -----------------------------------------------------------------------

def test_assemble_shift_point_folds_back(rng):
    # the assembled point evaluates the pencil exactly as the blown series:
    # full series value at tau*Z equals the designated coordinate of the
    # entry's value block at the assembled tuple
    from ncrat.circuit import parse_expr, to_idrrsc
    from ncrat.pencil import compile_idrrsc
    from ncrat.series import assemble_shift_point
    entry = compile_idrrsc(to_idrrsc(parse_expr("x1*x2 + x1")), F)
    d = 2
    shift = sample_tuple(F, 2, d, rng)
    S = shifted_entry_series(entry, shift, 0, 0)
    for tau in (1, 3):
        z = sample_tuple(F, 2 * d * d, 2, rng)
        scaled = MatrixTuple(F, z.d, tuple(m.scale(tau) for m in z.mats))
        point = assemble_shift_point(shift, z, tau)
        assert point.d == d * z.d
        try:
            lhs = full_eval(S, scaled)
        except Singular:
            continue
        rhs = entry.value_at(point)
        assert lhs.data[0] == rhs.at(0, 0)


def test_shifted_entry_series_matches_entry(rng):
    from ncrat.circuit import parse_expr, to_idrrsc
    from ncrat.pencil import compile_idrrsc
    entry = compile_idrrsc(to_idrrsc(parse_expr("x1*x2 + x2")), F)
    d = 2
    shift = sample_tuple(F, 2, d, rng)
    S = shifted_entry_series(entry, shift, 0, 0)
    assert S.size == entry.size * d
    # full value of the series at scalar z assembling q equals the entry's
    # value block at q + shift
    for _ in range(5):
        q = sample_tuple(F, 2, d, rng)
        zvals = []
        for i in range(2):
            for a in range(d):
                for bcol in range(d):
                    zvals.append(DenseMatrix.from_rows(F, [[q.mats[i].at(a, bcol)]]))
        zt = MatrixTuple(F, 1, tuple(zvals))
        shifted = MatrixTuple(F, d, tuple(q.mats[i].add(shift.mats[i])
                                          for i in range(2)))
        try:
            lhs = full_eval(S, zt)
        except Singular:
            continue
        rhs = entry.value_at(shifted)
        assert lhs.data[0] == rhs.at(0, 0)
