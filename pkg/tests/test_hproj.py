import math
import random
from fractions import Fraction

import numpy as np
import pytest

from conftest import params
from kahlerquant.geometry import build_metric
from kahlerquant.hproj import (
    PhiField,
    SampledCurve,
    b_equation_report,
    b_equation_residual,
    classify_4d,
    classify_pencil,
    flat_metric,
    flatness_certificate,
    hplanarity_residual,
    make_pair,
    perturbed_metric,
    residual_is_zero,
    scaled_metric,
)
from kahlerquant.symcore import AFrac

TIMES = np.linspace(-1.0, 1.0, 21)


# H-planar curves ----------------------------------------------------------------


def test_straight_line_is_planar_in_flat_space():
    m = build_metric(params(2, 0))
    z0, w = np.array([0.1 + 0.2j, -0.3j]), np.array([1.0, 0.5 - 0.5j])
    fit = hplanarity_residual(SampledCurve.from_function(lambda t: z0 + w * t, TIMES), m)
    assert fit.planar and fit.max_residual < 1e-9
    assert np.allclose(fit.a, 0, atol=1e-6) and np.allclose(fit.b, 0, atol=1e-6)


@pytest.mark.parametrize("theta", [0.0, 0.7, 2.0])
def test_disk_diameter(theta):
    m = build_metric(params(1, -4))
    curve = SampledCurve.from_function(lambda t: [math.tanh(t) * complex(math.cos(theta), math.sin(theta))], TIMES)
    assert hplanarity_residual(curve, m).max_residual < 1e-6


def test_circle_in_one_dimension():
    m = build_metric(params(1, -4))
    curve = SampledCurve.from_function(lambda t: [0.5 * complex(math.cos(t), math.sin(t))], TIMES)
    assert hplanarity_residual(curve, m).max_residual < 1e-6


def test_complex_line_geodesic_and_control():
    m = build_metric(params(2, -4))
    u = np.array([0.6, 0.8j])
    geo = SampledCurve.from_function(lambda t: math.tanh(t) * u, TIMES)
    assert hplanarity_residual(geo, m).planar
    ctrl = SampledCurve.from_function(lambda t: [math.tanh(t) * 0.5, 0.3 * t], TIMES)
    assert hplanarity_residual(ctrl, m).max_residual > 1e-3


def test_curve_csv_roundtrip_and_stationary_points():
    t = np.linspace(0, 1, 41)
    rows = ["t,re1,im1"] + [f"{x},{0.2 + 0.3 * x},{0.1 * x}" for x in t]
    curve = SampledCurve.from_csv("\n".join(rows))
    fit = hplanarity_residual(curve, build_metric(params(1, 0)))
    assert fit.planar
    still = SampledCurve(t[:3], np.zeros(3), np.zeros(3), np.zeros(3))
    assert hplanarity_residual(still, build_metric(params(1, 0))).undefined_samples == [0, 1, 2]
    with pytest.raises(ValueError):
        SampledCurve.from_csv("0,1\n1,2\n2,3")
    with pytest.raises(ValueError):
        SampledCurve.from_samples([0, 1], [0, 1])
    with pytest.raises(ValueError):
        SampledCurve([1, 0, 2], np.zeros(3), np.zeros(3), np.zeros(3))


# flatness ---------------------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("k", [-4, -1, 0, 1, 4])
def test_flatness_certificate(n, k):
    p = params(n, k)
    phi, flat = flatness_certificate(build_metric(p))
    assert flat
    for b in range(n):
        assert phi[b] == AFrac.zbar(p, b) * (-p.c) / AFrac.A(p)
        if k == 0:
            assert phi[b].is_zero()


@pytest.mark.parametrize("n", [2, 3])
def test_perturbed_metric_not_flat(n):
    cert = flatness_certificate(perturbed_metric(params(n, -4)))
    assert not cert.flat and cert.residual_nonzero > 0 and cert.phi is None


# b-equation -------------------------------------------------------------------


@pytest.mark.parametrize("n,k", [(1, -4), (2, 4), (3, -4)])
def test_metricity_case(n, k):
    g = build_metric(params(n, k))
    pair = make_pair(g, g)
    for a in range(n):
        for b in range(n):
            assert pair.b[a][b] == g.g_lower[a][b]
    for variant in ("printed", "sign_corrected", "symmetrized"):
        assert residual_is_zero(b_equation_residual(pair, variant))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_flat_pair_with_half_log_a(n):
    p = params(n, -4)
    pair = make_pair(build_metric(p), flat_metric(p), PhiField.log_a(p, Fraction(1, 2)))
    assert residual_is_zero(b_equation_residual(pair, "sign_corrected"))
    assert not residual_is_zero(b_equation_residual(pair, "printed"))


def test_flat_pair_zero_phi_is_not_a_solution_in_dim_two():
    p = params(2, -4)
    pair = make_pair(build_metric(p), flat_metric(p))
    rep = b_equation_report(pair, points=[[0.3, 0.1j], [0.2 - 0.1j, 0.4]])
    assert not rep["printed"]["exact_zero"]
    assert rep["printed"]["max_abs_at_samples"] > 1e-3


def test_residual_conjugation_equivariance():
    """Conjugating b, g and phi conjugates each residual entry.

    The inputs have real rational coefficients, so conjugating them amounts to
    swapping z and zbar; the residual must then satisfy R(z) = conj(R(zbar)).
    """
    p = params(2, -4)
    pair = make_pair(build_metric(p), flat_metric(p), PhiField.log_a(p, 1))
    R = b_equation_residual(pair, "printed")
    rng = random.Random(3)
    for _ in range(5):
        z = [complex(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4)) for _ in range(2)]
        zc = [v.conjugate() for v in z]
        for a in range(2):
            for b in range(2):
                for c in range(2):
                    assert abs(R[a][b][c].eval(z) - R[a][b][c].eval(zc).conjugate()) < 1e-12


def test_phi_field_constraints():
    p = params(1, -4)
    with pytest.raises(ValueError):
        PhiField.log_a(p, Fraction(1, 3))
    assert PhiField.log_a(p, 1).exp2 == AFrac.A(p) * AFrac.A(p)
    assert PhiField.constant(p, 4).exp2 == AFrac.const(p, 4)


# classification -------------------------------------------------------------------


def test_rescaling_pencil():
    g = np.array([[2.0, 0.5j], [-0.5j, 1.0]])
    cls = classify_pencil(3 * g, g)
    assert cls.case_tag == "rescaling" and cls.multiplicities == [2]
    assert abs(cls.roots[0] - 3) < 1e-12


def test_pencil_rejects_non_hermitian():
    with pytest.raises(ValueError):
        classify_pencil(np.array([[1, 1], [0, 1]]), np.eye(2))


def test_flat_pair_generic_case():
    p = params(2, -4)
    pair = make_pair(build_metric(p), flat_metric(p))
    cls = classify_4d(pair, [0.5, 0])
    assert cls.case_tag == "generic"
    assert np.allclose(cls.roots, [4 / 3, 16 / 9])


def test_scaled_pair_is_rescaling_everywhere():
    p = params(2, -4)
    g = build_metric(p)
    pair = make_pair(g, scaled_metric(g, 3))
    for pt in ([0, 0], [0.5, 0], [0.1 + 0.2j, -0.3j]):
        cls = classify_4d(pair, pt)
        assert cls.case_tag == "rescaling"
        assert abs(cls.roots[0] - 1 / 3) < 1e-12


def test_classification_needs_dimension_two():
    p = params(1, -4)
    with pytest.raises(ValueError):
        classify_4d(make_pair(build_metric(p), flat_metric(p)), [0.1])


def test_pencil_roots_real_and_scale_invariant():
    rng = np.random.default_rng(0)
    for _ in range(100):
        X = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        Y = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        b = X + X.conj().T
        g = Y @ Y.conj().T + 0.1 * np.eye(2)
        base = classify_pencil(b, g)
        assert all(isinstance(r, float) for r in base.roots)
        scaled = classify_pencil(2.5 * b, 2.5 * g)
        assert scaled.case_tag == base.case_tag
        assert np.allclose(scaled.roots, base.roots)
