from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import GRID, holo_polys, params
from kahlerquant.geometry import build_connection_form, build_metric, build_symplectic_form
from kahlerquant.observables import (
    NotPolarizationPreserving,
    PolyVectorField,
    check_preservation,
    hamiltonian,
    n_anti,
    n_holo,
    observable_family,
)
from kahlerquant.quantize import (
    HoloDiffOp,
    HolomorphicClosureError,
    SectionOp,
    calibrate_constant,
    covariant_derivative,
    format_diffop,
    homomorphism_check,
    op_commutator,
    operator_table,
    oscillator_multiplicity,
    parse_diffop,
    prequantize,
    printed_operators,
    quantize,
    quantize_observable,
    spectrum,
    to_matrix,
)
from kahlerquant.symcore import AFrac, GaussRat, Poly


# differential operators ------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(holo_polys(n=2), holo_polys(n=2), holo_polys(n=2))
def test_diffop_composition_matches_application(p, q, psi):
    P = HoloDiffOp.multiplication(p).compose(HoloDiffOp.derivative(2, 0)) + HoloDiffOp.multiplication(q)
    Q = HoloDiffOp.derivative(2, 1).compose(HoloDiffOp.multiplication(q))
    assert P.compose(Q).apply(psi) == P.apply(Q.apply(psi))
    assert op_commutator(P, Q).apply(psi) == P.apply(Q.apply(psi)) - Q.apply(P.apply(psi))


def test_canonical_commutator_and_roundtrip():
    z = HoloDiffOp.multiplication(Poly.var(1, 0))
    d = HoloDiffOp.derivative(1, 0)
    assert op_commutator(d, z) == HoloDiffOp.identity(1)
    P = printed_operators(params(2, -4, Fraction(1, 3)))["N^1"]
    assert parse_diffop(format_diffop(P), 2) == P
    assert parse_diffop("0", 2).is_zero()
    with pytest.raises(ValueError):
        HoloDiffOp(1, {(0,): Poly.var(1, 0, conjugate=True)})


def test_degree_shifts():
    ops = printed_operators(params(1, -4))
    assert ops["H"].is_degree_preserving()
    assert ops["N^1"].degree_shifts() == {1}
    assert ops["N^1b"].degree_shifts() == {-1}


# section operators -----------------------------------------------------------


def test_zero_field_gives_zero_operator():
    p = params(2, -4)
    D = covariant_derivative(PolyVectorField.zero(p), build_connection_form(p))
    assert D.is_zero()


def test_prequantize_constant_is_identity():
    p = params(2, 4, Fraction(1, 2))
    P = prequantize(AFrac.one(p))
    assert P == SectionOp.multiplication(AFrac.one(p))


@pytest.mark.parametrize("n,k", [(1, -4), (2, 4)])
def test_prequantization_homomorphism(n, k):
    out = homomorphism_check(params(n, k, Fraction(1, 3)), prequantum=True)
    assert out["holds"], out["failures"]


def test_restrict_holomorphic_rejects_antiholomorphic_terms():
    p = params(1, -4)
    op = SectionOp.multiplication(AFrac.zbar(p, 0))
    with pytest.raises(HolomorphicClosureError):
        op.restrict_holomorphic()


# quantization -----------------------------------------------------------------


@pytest.mark.parametrize("n,k", GRID)
def test_quantize_matches_closed_forms(n, k):
    p = params(n, k, Fraction(1, 3))
    printed = printed_operators(p)
    assert quantize_observable(hamiltonian(p)) == printed["H"]
    for a in range(n):
        assert quantize_observable(n_holo(p, a)) == printed[f"N^{a + 1}"]
        assert quantize_observable(n_anti(p, a)) == printed[f"N^{a + 1}b"]
    assert all(row["match"] for row in operator_table(p))


def test_flat_limit():
    p = params(2, 0, Fraction(1, 2))
    QH = quantize_observable(hamiltonian(p))
    z = [Poly.var(2, a) for a in range(2)]
    expected = HoloDiffOp(2, {(1, 0): z[0].scale(p.hbar), (0, 1): z[1].scale(p.hbar),
                              (0, 0): Poly.const(2, p.hbar)})
    assert QH == expected
    assert quantize_observable(n_holo(p, 1)) == HoloDiffOp.multiplication(z[1])


def test_quantize_rejects_non_preserving():
    p = params(1, -4)
    m = build_metric(p)
    f = AFrac.z(p, 0) + AFrac.zbar(p, 0)
    cert = check_preservation(f, m, build_symplectic_form(m))
    with pytest.raises(NotPolarizationPreserving):
        quantize(f, cert)


def test_quantize_is_linear():
    p = params(2, -4, Fraction(1, 3))
    fam = observable_family(p)
    for f, g in zip(fam, fam[1:]):
        combo = f.value * 2 + g.value * Fraction(-1, 3)
        assert quantize_observable(combo) == quantize_observable(f) * 2 + quantize_observable(g) * Fraction(-1, 3)


@pytest.mark.parametrize("n,k", [(1, -4), (1, 0), (1, 4), (2, -4), (2, 0), (2, 4)])
def test_homomorphism_single_constant(n, k):
    p = params(n, k, Fraction(1, 3))
    out = homomorphism_check(p)
    assert out["holds"], out["failures"]
    assert out["constant"] == GaussRat(0, -p.hbar)


def test_calibrated_constant():
    assert calibrate_constant(params(1, -4, Fraction(1, 2))) == GaussRat(0, Fraction(-1, 2))


# matrices and spectra ------------------------------------------------------------


def test_hamiltonian_matrix_diagonal():
    QH = quantize_observable(hamiltonian(params(1, -4)))
    M = to_matrix(QH, 3)
    assert np.allclose(M.to_numpy(), np.diag([0.5, 1.5, 2.5, 3.5]))
    assert M.truncated_columns == []
    Z = to_matrix(HoloDiffOp(1), 3).to_numpy()
    assert not Z.any()


def test_truncation_zone_reported():
    QN = quantize_observable(n_holo(params(1, -4, Fraction(1, 3)), 0))
    M = to_matrix(QN, 4)
    assert M.truncated_columns == [4]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_oscillator_spectrum(n):
    hbar = Fraction(1, 3)
    QH = quantize_observable(hamiltonian(params(n, -4, hbar)))
    entries = spectrum(QH, 6)
    assert [e.degree for e in entries] == list(range(7))
    for e in entries:
        assert e.exact
        assert e.value == GaussRat(hbar * (e.degree + Fraction(n, 2)))
        assert e.multiplicity == oscillator_multiplicity(n, e.degree)


def test_non_degree_preserving_spectrum_falls_back_to_numeric():
    z = Poly.var(1, 0)
    # (z + 1) d is upper triangular on the monomials with diagonal entries l
    P = HoloDiffOp(1, {(1,): z + Poly.const(1, 1)})
    entries = spectrum(P, 4)
    assert all(not e.exact for e in entries)
    assert sorted(round(e.value.real if isinstance(e.value, complex) else e.value) for e in entries) == [0, 1, 2, 3, 4]
