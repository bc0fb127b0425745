import math
from fractions import Fraction

import pytest
from scipy.special import beta

from conftest import params
from kahlerquant.fock import (
    ADJOINT_CORRECTED,
    PAPER_LITERAL,
    DivergentIntegral,
    FockBasis,
    FockMeasure,
    adjointness_check,
    hermitian_invariance_check,
    monomial_norm,
    monomial_norms,
    norm_oracle,
    predicted_gap,
    quadrature,
    total_mass,
)
from kahlerquant.geometry import build_connection_form
from kahlerquant.observables import hamiltonian
from kahlerquant.quantize import quantize_observable, to_matrix

THIRD = Fraction(1, 3)


def test_basis_order_and_slices():
    B = FockBasis(2, 2)
    assert B.monomials == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert B.degree_slice(2) == [3, 4, 5]
    assert B.label(4) == "z1*z2" and B.label(0) == "1"
    assert B.index((0, 2)) == 5
    with pytest.raises(ValueError):
        FockBasis(1, -1)


def test_measure_exponents():
    p = params(1, -4, THIRD)
    assert FockMeasure(p, PAPER_LITERAL).exponent == 1
    assert FockMeasure(p, ADJOINT_CORRECTED).exponent == 2
    assert FockMeasure(p, ADJOINT_CORRECTED, offset=1).exponent == 3
    assert FockMeasure(params(1, 0)).exponent is None
    with pytest.raises(ValueError):
        FockMeasure(p, "bogus")


def test_quadrature_trivial():
    val, _ = quadrature(lambda x: 0.0, 0.0, 1.0)
    assert val == 0.0
    val, _ = quadrature(lambda x: x, 0.0, 2.0)
    assert abs(val - 2.0) < 1e-14


def test_total_masses():
    assert abs(total_mass(FockMeasure(params(1, 0))) - math.pi) < 1e-9
    corrected = FockMeasure(params(1, -4, THIRD), ADJOINT_CORRECTED)
    assert abs(total_mass(corrected) - math.pi / 3) < 1e-9


@pytest.mark.parametrize("l", range(13))
def test_gaussian_norms(l):
    m = FockMeasure(params(1, 0))
    expected = math.pi * math.factorial(l)
    assert abs(monomial_norm((l,), m) - expected) / expected < 1e-6
    assert norm_oracle((l,), m)[0] == math.factorial(l)


@pytest.mark.parametrize("l", range(13))
def test_beta_norms(l):
    m = FockMeasure(params(1, -4, THIRD), ADJOINT_CORRECTED)
    expected = math.pi * beta(l + 1, 3)
    assert abs(monomial_norm((l,), m) - expected) / expected < 1e-6
    assert abs(norm_oracle((l,), m)[1] - expected) / expected < 1e-12


@pytest.mark.parametrize("n,k,hbar,mode", [
    (2, -4, THIRD, ADJOINT_CORRECTED),
    (2, 0, Fraction(1, 2), PAPER_LITERAL),
    (3, -4, Fraction(1, 5), PAPER_LITERAL),
    (3, 0, 1, ADJOINT_CORRECTED),
    (1, 4, Fraction(1, 10), PAPER_LITERAL),
    (2, 1, Fraction(1, 10), ADJOINT_CORRECTED),
])
def test_quadrature_matches_oracle(n, k, hbar, mode):
    meas = FockMeasure(params(n, k, hbar), mode)
    for m in FockBasis(n, 2).monomials:
        ov = norm_oracle(m, meas)[1]
        assert abs(monomial_norm(m, meas) - ov) / ov < 1e-6


def test_divergence_is_reported():
    with pytest.raises(DivergentIntegral):
        monomial_norm((0,), FockMeasure(params(1, -4, 2)))
    with pytest.raises(DivergentIntegral):
        monomial_norm((20,), FockMeasure(params(1, 4, Fraction(1, 2))))


@pytest.mark.parametrize("n,L", [(1, 6), (2, 3)])
def test_gram_diagonal(n, L):
    rep = monomial_norms(FockBasis(n, L), FockMeasure(params(n, -4, THIRD), ADJOINT_CORRECTED))
    assert rep.off_diagonal_max < 1e-9
    assert rep.oracle_rel_error < 1e-6
    assert all(v > 0 for v in rep.norms)


def test_qh_matrix_is_hermitian_in_weighted_basis():
    QH = quantize_observable(hamiltonian(params(2, -4, THIRD)))
    M = to_matrix(QH, 4)
    for i in range(len(M.entries)):
        for j in range(len(M.entries)):
            if i != j:
                assert not M.entries[i][j]
            else:
                assert M.entries[i][i].im == 0


def test_adjointness_flat():
    p = params(1, 0)
    rep = adjointness_check(FockBasis(1, 8), FockMeasure(p))
    assert rep.max_abs_deviation < 1e-8


def test_adjointness_modes():
    p = params(1, -4, THIRD)
    basis = FockBasis(1, 10)
    corrected = adjointness_check(basis, FockMeasure(p, ADJOINT_CORRECTED))
    literal = adjointness_check(basis, FockMeasure(p, PAPER_LITERAL))
    assert corrected.max_abs_deviation < 1e-6
    assert abs(literal.raising_gap - 1 / 3) < 1e-6
    assert literal.gap_spread < 1e-6
    assert predicted_gap(FockMeasure(p, PAPER_LITERAL)) == THIRD
    assert predicted_gap(FockMeasure(p, ADJOINT_CORRECTED)) == 0


def test_predicted_gap_general():
    p = params(2, -4, Fraction(1, 5))
    # -hbar (n + 1) (k/4) / 2
    assert predicted_gap(FockMeasure(p, PAPER_LITERAL)) == Fraction(1, 5) * 3 / 2


def test_gap_changes_sign_with_curvature():
    p = params(2, 4, Fraction(1, 10))
    meas = FockMeasure(p, PAPER_LITERAL)
    assert predicted_gap(meas) == Fraction(-3, 20)
    rep = adjointness_check(FockBasis(2, 3), meas)
    assert abs(rep.raising_gap - float(predicted_gap(meas))) < 1e-9
    corrected = adjointness_check(FockBasis(2, 3), FockMeasure(p, ADJOINT_CORRECTED))
    assert corrected.max_abs_deviation < 1e-9


def test_hermitian_invariance():
    p = params(1, -4, THIRD)
    conn = build_connection_form(p)
    assert hermitian_invariance_check(conn, FockMeasure(p), samples=10) < 1e-7
    assert hermitian_invariance_check(conn, FockMeasure(p), points=[[0j]]) < 1e-7
    assert hermitian_invariance_check(conn, FockMeasure(p, offset=1), samples=10) > 1e-3
    q = params(2, 4, THIRD)
    assert hermitian_invariance_check(build_connection_form(q), FockMeasure(q), samples=10) < 1e-7


@pytest.mark.parametrize("k", [-4, 4])
def test_hermitian_invariance_small_hbar(k):
    p = params(2, k, Fraction(1, 50))
    assert hermitian_invariance_check(build_connection_form(p), FockMeasure(p), samples=10) < 1e-7


def test_sharp_weight_norms_match_oracle():
    meas = FockMeasure(params(2, 4, Fraction(1, 50)), ADJOINT_CORRECTED)
    for m in FockBasis(2, 2).monomials:
        ov = norm_oracle(m, meas)[1]
        assert abs(monomial_norm(m, meas) - ov) / ov < 1e-6
