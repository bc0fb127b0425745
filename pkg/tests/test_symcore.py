import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import afracs, gauss, params, polys
from kahlerquant.params import ModelParams
from kahlerquant.symcore import (
    AFrac,
    DomainError,
    GaussRat,
    NotDivisible,
    ParamsMismatch,
    Poly,
    canonicalize,
    format_gaussrat,
    format_poly,
    mat_det,
    mat_inverse,
    mat_mul,
    is_identity,
    parse_afrac,
    parse_gaussrat,
    parse_poly,
)

P = params(2, -4)
Q = params(1, -4)


def test_model_params_validation():
    with pytest.raises(ValueError):
        ModelParams(0)
    with pytest.raises(ValueError):
        ModelParams(1, 0, 0)
    p = ModelParams(2, "-1/2", "1/3")
    assert p.k == Fraction(-1, 2) and p.c == Fraction(-1, 8)
    assert p.replace(n=3).n == 3


# ring laws ------------------------------------------------------------------


@settings(max_examples=1000, deadline=None)
@given(afracs(P), afracs(P), afracs(P))
def test_ring_laws(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == AFrac.zero(P)
    assert a * AFrac.one(P) == a


@settings(max_examples=300, deadline=None)
@given(afracs(P), afracs(P))
def test_leibniz_and_mixed_partials(a, b):
    for i in range(2):
        for conj in (False, True):
            assert (a * b).diff(i, conj) == a.diff(i, conj) * b + a * b.diff(i, conj)
    assert a.diff(0).diff(1, True) == a.diff(1, True).diff(0)
    assert a.diff(0).diff(1) == a.diff(1).diff(0)


@settings(max_examples=300, deadline=None)
@given(afracs(P))
def test_canonicalize_idempotent_and_roundtrip(a):
    c = canonicalize(a)
    assert canonicalize(c) == c
    assert str(c) == str(a)
    assert parse_afrac(str(a), P) == a
    assert a.conjugate().conjugate() == a


@settings(max_examples=200, deadline=None)
@given(polys(n=3))
def test_poly_roundtrip(p):
    assert parse_poly(format_poly(p), 3) == p


@given(gauss)
def test_gaussrat_roundtrip(x):
    assert parse_gaussrat(format_gaussrat(x)) == x


@settings(max_examples=100, deadline=None)
@given(afracs(P), st.integers(0, 2), st.booleans())
def test_derivative_matches_finite_difference(a, i, conj):
    i = i % 2
    rng = random.Random(0)
    for _ in range(5):
        z = [complex(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)) for _ in range(2)]
        h = 1e-6
        # d/dz = (d/dx - i d/dy)/2, d/dzbar = (d/dx + i d/dy)/2
        ex = list(z); ex[i] += h
        mx = list(z); mx[i] -= h
        ey = list(z); ey[i] += 1j * h
        my = list(z); my[i] -= 1j * h
        dx = (a.eval(ex) - a.eval(mx)) / (2 * h)
        dy = (a.eval(ey) - a.eval(my)) / (2 * h)
        fd = (dx + 1j * dy) / 2 if conj else (dx - 1j * dy) / 2
        exact = a.diff(i, conj).eval(z)
        assert abs(fd - exact) <= 1e-6 * max(1.0, abs(exact))


# examples ---------------------------------------------------------------------


def test_additive_and_common_denominator():
    z, zb, A = AFrac.z(Q, 0), AFrac.zbar(Q, 0), AFrac.A(Q)
    assert z / A + 0 == z / A
    lhs = z * zb / A + AFrac.one(Q) / A
    assert lhs.apow == 1 and lhs == (z * zb + 1) / A


def test_exponent_addition_and_cancellation():
    z, zb, A = AFrac.z(Q, 0), AFrac.zbar(Q, 0), AFrac.A(Q)
    prod = (z / A) * (zb / A)
    assert prod.apow == 2 and prod.num == (z * zb).num
    # N^1 = z/A; multiplying by A cancels to a polynomial
    n1 = z / A
    assert (n1 * A).apow == 0
    assert n1 * A == z


def test_a_derivative_and_constants():
    for n, k in [(1, -4), (2, 4), (3, -1)]:
        p = params(n, k)
        A = AFrac.A(p)
        for i in range(n):
            assert A.diff(i, True) == AFrac.z(p, i) * p.c
            assert A.diff(i) == AFrac.zbar(p, i) * p.c
        assert AFrac.const(p, 7).diff(0) == AFrac.zero(p)


def test_evaluation_and_domain():
    A = AFrac.A(Q)
    assert A.eval([0]) == 1
    with pytest.raises(DomainError):
        A.eval([1])
    with pytest.raises(DomainError):
        A.eval_exact([GaussRat(1)])
    H = AFrac.z(Q, 0) * AFrac.zbar(Q, 0) / A
    assert H.eval_exact([GaussRat(Fraction(1, 2))]) == GaussRat(Fraction(1, 3))
    assert abs(H.eval([0.5]) - 1 / 3) < 1e-15


def test_params_mismatch():
    with pytest.raises(ParamsMismatch):
        AFrac.z(P, 0) + AFrac.z(params(2, 4), 0)


def test_inverse_only_for_powers_of_a():
    A = AFrac.A(P)
    assert A.inverse() * A == AFrac.one(P)
    with pytest.raises(NotDivisible):
        AFrac.z(P, 0).inverse()


def test_matrix_helpers():
    p = params(2, -4)
    z = [AFrac.z(p, i) for i in range(2)]
    M = [[AFrac.one(p) + z[0], z[1]], [AFrac.zero(p), AFrac.A(p)]]
    assert mat_det(M) == (AFrac.one(p) + z[0]) * AFrac.A(p)
    D = [[AFrac.const(p, 2), AFrac.zero(p)], [AFrac.zero(p), AFrac.A(p)]]
    assert is_identity(mat_mul(D, mat_inverse(D)))


def test_k_zero_never_has_denominators():
    p = params(2, 0)
    A = AFrac.A(p)
    assert A == AFrac.one(p)
    assert (AFrac.z(p, 0) / A).apow == 0


def test_conjugation_reality():
    H = AFrac.z(Q, 0) * AFrac.zbar(Q, 0) / AFrac.A(Q)
    assert H.is_real()
    assert not (AFrac.z(Q, 0) / AFrac.A(Q)).is_real()
