import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from srres.exactla import (
    GF2,
    GF3,
    QQ,
    FieldSpec,
    SparseMatrix,
    complex_retraction,
    invert,
    kernel_basis,
    rank,
    rref,
    solve,
    split,
)


def dense(rows, field):
    conv = [[field.of(x) if isinstance(x, int) else x for x in row] for row in rows]
    return SparseMatrix.from_dense(conv)


def test_field_parse_and_validation():
    assert FieldSpec.parse("q") == QQ
    assert FieldSpec.parse("f2") == GF2
    assert FieldSpec.parse("F101").p == 101
    with pytest.raises(ValueError):
        FieldSpec.parse("r")
    with pytest.raises(ValueError):
        FieldSpec(4)
    with pytest.raises(ValueError):
        FieldSpec(1)
    FieldSpec(2**31 - 1)  # Mersenne prime, in range
    with pytest.raises(ValueError):
        FieldSpec(2**31 + 11)


def test_field_arithmetic_gf():
    f = GF3
    assert f.add(2, 2) == 1
    assert f.inv(2) == 2
    assert f.of(-1) == 2
    assert f.of_fraction(1, 2) == 2
    with pytest.raises(ZeroDivisionError):
        f.inv(0)


def test_rref_spec_example():
    # [[1,2],[2,4]] over Q reduces to [[1,2],[0,0]] with pivot column 0.
    M = dense([[1, 2], [2, 4]], QQ)
    R, pivots, T = rref(M, QQ)
    assert R.to_dense(QQ) == [[Fraction(1), Fraction(2)], [Fraction(0), Fraction(0)]]
    assert pivots == [0]
    assert T.mul(M, QQ) == R


def test_rref_mod2():
    M = dense([[1, 1], [1, 1]], GF2)
    R, pivots, T = rref(M, GF2)
    assert R.to_dense(GF2) == [[1, 1], [0, 0]]
    assert pivots == [0]
    assert T.mul(M, GF2) == R


def test_kernel_basis_spec_example():
    M = dense([[1, 1]], QQ)
    assert kernel_basis(M, QQ) == [(Fraction(-1), Fraction(1))]


def test_solve_examples():
    M = dense([[1, 0], [0, 0]], QQ)
    assert solve(M, {0: Fraction(3)}, QQ) == (Fraction(3), Fraction(0))
    assert solve(M, {1: Fraction(1)}, QQ) is None  # a value, not an error
    # free variables are set to zero
    M2 = dense([[1, 1]], QQ)
    assert solve(M2, {0: Fraction(5)}, QQ) == (Fraction(5), Fraction(0))


def test_split_spec_example():
    M = dense([[1, 1], [0, 0]], QQ)
    sp = split(M, QQ)
    assert sp.kernel == ((Fraction(-1), Fraction(1)),)
    assert sp.complement == ((Fraction(1), Fraction(0)),)
    assert sp.image == ((Fraction(1), Fraction(0)),)
    assert sp.coords == SparseMatrix.identity(1, QQ)


def test_sparse_matrix_canonical_equality():
    a = SparseMatrix.build(2, 2, [(0, 0, Fraction(1)), (0, 0, Fraction(-1))], QQ)
    assert a.is_zero
    assert a == SparseMatrix.zero(2, 2)
    with pytest.raises(ValueError):
        SparseMatrix(1, 1, ((0, 0, Fraction(0)),))
    with pytest.raises(ValueError):
        SparseMatrix(1, 1, ((0, 0, Fraction(1)), (0, 0, Fraction(2))))


def _random_matrix(rng, field, nr, nc):
    trips = []
    for r in range(nr):
        for c in range(nc):
            if rng.random() < 0.55:
                trips.append((r, c, field.of(rng.randrange(-4, 5))))
    return SparseMatrix.build(nr, nc, trips, field)


@pytest.mark.parametrize("field", [QQ, GF2, GF3, FieldSpec(7)])
def test_rref_properties_random(field):
    rng = random.Random(20260814)
    for _ in range(25):
        nr, nc = rng.randrange(1, 7), rng.randrange(1, 7)
        M = _random_matrix(rng, field, nr, nc)
        R, pivots, T = rref(M, field)
        assert T.mul(M, field) == R
        assert rank(M, field) == len(pivots)
        # pivot columns carry unit vectors in R
        rd = R.row_dicts()
        for i, c in enumerate(pivots):
            col = [rd[r].get(c, field.zero()) for r in range(nr)]
            expect = [field.zero()] * nr
            expect[i] = field.one()
            assert col == expect
        # rank-nullity and kernel membership
        ker = kernel_basis(M, field)
        assert len(ker) == nc - len(pivots)
        for v in ker:
            assert M.mul_vec({i: x for i, x in enumerate(v) if x}, field) == {}


@pytest.mark.parametrize("field", [QQ, GF3])
def test_solve_random(field):
    rng = random.Random(7)
    for _ in range(30):
        nr, nc = rng.randrange(1, 6), rng.randrange(1, 6)
        M = _random_matrix(rng, field, nr, nc)
        x = {c: field.of(rng.randrange(-3, 4)) for c in range(nc)}
        b = M.mul_vec(x, field)
        got = solve(M, b, field)
        assert got is not None
        assert M.mul_vec({i: v for i, v in enumerate(got) if v}, field) == b


@pytest.mark.parametrize("field", [QQ, GF2])
def test_split_axioms_random(field):
    rng = random.Random(99)
    for _ in range(25):
        nr, nc = rng.randrange(1, 6), rng.randrange(1, 6)
        M = _random_matrix(rng, field, nr, nc)
        sp = split(M, field)
        # d restricted to the complement hits the image basis exactly
        for k, comp in enumerate(sp.complement):
            img = M.mul_vec({i: v for i, v in enumerate(comp) if v}, field)
            expect = {i: v for i, v in enumerate(sp.image[k]) if v}
            assert img == expect
        assert len(sp.kernel) + len(sp.complement) == nc


@given(st.integers(min_value=1, max_value=5), st.data())
@settings(max_examples=40, deadline=None)
def test_invert_roundtrip(n, data):
    rng = random.Random(data.draw(st.integers(min_value=0, max_value=10**6)))
    trips = []
    for r in range(n):
        for c in range(n):
            if rng.random() < 0.7:
                trips.append((r, c, QQ.of(rng.randrange(-3, 4))))
    M = SparseMatrix.build(n, n, trips, QQ)
    if rank(M, QQ) < n:
        return
    Minv = invert(M, QQ)
    assert Minv.mul(M, QQ) == SparseMatrix.identity(n, QQ)


def test_complex_retraction_axioms():
    # two-step complex 0 -> k^2 -> k -> 0 with d = (1 1)
    field = QQ
    dims = {0: 2, 1: 1}
    diffs = {0: dense([[1, 1]], field)}
    ret = complex_retraction(dims, diffs, field)
    # degree 0: kernel is 1-dim, no image in: H has dim 1
    assert ret[0].h_dim == 1
    # degree 1: image fills everything: H has dim 0
    assert ret[1].h_dim == 0
    _check_retraction_axioms(dims, diffs, ret, field)


def _check_retraction_axioms(dims, diffs, ret, field):
    for n, r in ret.items():
        if r.h_dim:
            assert r.pi.mul(r.sigma, field) == SparseMatrix.identity(r.h_dim, field)
        # d h + h d = 1 - sigma pi at degree n
        acc = SparseMatrix.zero(r.dim, r.dim)
        if (n - 1) in diffs:
            acc = acc.add(diffs[n - 1].mul(r.h, field), field)
        if n in diffs and (n + 1) in ret:
            acc = acc.add(ret[n + 1].h.mul(diffs[n], field), field)
        expect = SparseMatrix.identity(r.dim, field).add(
            r.sigma.mul(r.pi, field).scale(field.of(-1), field), field
        )
        assert acc == expect


def test_complex_retraction_zero_and_exact():
    field = GF2
    # zero differential: sigma pi = 1, h = 0
    dims = {0: 3}
    ret = complex_retraction(dims, {}, field)
    assert ret[0].sigma.mul(ret[0].pi, field) == SparseMatrix.identity(3, field)
    assert ret[0].h.is_zero
    # exact complex: pi = sigma = 0 and d h + h d = 1
    dims = {0: 1, 1: 1}
    diffs = {0: dense([[1]], field)}
    ret = complex_retraction(dims, diffs, field)
    assert ret[0].h_dim == 0 and ret[1].h_dim == 0
    _check_retraction_axioms(dims, diffs, ret, field)


@pytest.mark.parametrize("field", [QQ, GF2, GF3])
def test_complex_retraction_random_chain(field):
    rng = random.Random(4242)
    for _ in range(12):
        # build a random 3-term complex by composing a random map with a
        # projection so that d1 d0 = 0 holds by construction
        n0, n1, n2 = rng.randrange(1, 5), rng.randrange(1, 5), rng.randrange(1, 5)
        d0 = _random_matrix(rng, field, n1, n0)
        ker = kernel_basis(d0.transpose(field), field)  # rows annihilating im d0
        trips = []
        for r in range(n2):
            if ker:
                row = ker[rng.randrange(len(ker))]
                s = field.of(rng.randrange(-2, 3))
                for c, v in enumerate(row):
                    if v and s:
                        trips.append((r, c, field.mul(s, v)))
        d1 = SparseMatrix.build(n2, n1, trips, field)
        assert d1.mul(d0, field).is_zero
        dims = {0: n0, 1: n1, 2: n2}
        diffs = {0: d0, 1: d1}
        ret = complex_retraction(dims, diffs, field)
        _check_retraction_axioms(dims, diffs, ret, field)
