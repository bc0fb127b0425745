"""
Kähler structure of the constant holomorphic curvature chart.

Conventions (fixed once, used everywhere):

* ``g_lower[a][b] = g_{a bbar} = (A delta_ab - (k/4) zbar^a z^b) / A^2``.
* ``g_upper`` is the plain matrix inverse, ``g_lower @ g_upper = I``; in index
  notation ``g_upper[b][a] = g^{a bbar}``.
* ``christoffel[a][b][c] = Gamma^a_{bc} = g^{a sbar} d_b g_{c sbar}``.
* ``omega_lower = i * g_lower`` and ``omega_upper = -i * g_upper`` (its inverse).
* The Kähler potential ``(4/k) ln A`` is never materialised; only its
  holomorphic gradient ``zbar^a / A`` is.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from .params import ModelParams
from .symcore import AFrac, GaussRat, I, a_poly, is_identity, mat_inverse, mat_mul

__all__ = [
    "ModelParams",
    "HermitianMetric",
    "ConnectionForm",
    "SymplecticForm",
    "CurvatureReport",
    "build_metric",
    "metric_from_lower",
    "christoffel_symbols",
    "closed_form_inverse",
    "potential_gradient",
    "potential_value",
    "build_symplectic_form",
    "build_connection_form",
    "connection_differential",
    "check_curvature_equals_form",
    "curvature_tensor",
    "verify_constant_curvature",
    "is_kahler",
    "is_closed",
]


@dataclass(frozen=True)
class HermitianMetric:
    params: ModelParams
    g_lower: list
    g_upper: Optional[list] = None
    christoffel: Optional[list] = None

    @property
    def n(self) -> int:
        return self.params.n

    def upper(self, a: int, b: int) -> AFrac:
        """``g^{a bbar}`` with the contraction ``g^{a sbar} g_{c sbar} = delta^a_c``."""
        return self.g_upper[b][a]

    def eval_lower(self, point: Sequence[complex]) -> np.ndarray:
        n = self.n
        return np.array([[self.g_lower[a][b].eval(point) for b in range(n)] for a in range(n)])

    def eval_christoffel(self, point: Sequence[complex]) -> np.ndarray:
        n = self.n
        out = np.zeros((n, n, n), dtype=complex)
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    out[a, b, c] = self.christoffel[a][b][c].eval(point)
        return out


@dataclass(frozen=True)
class SymplecticForm:
    """``omega_{a bbar}`` and its inverse, plus the calibrated field orientation.

    ``orientation`` multiplies the coordinate formula
    ``omega^{mu nubar} (d_nubar f d_mu - d_mu f d_nubar)`` so that the
    Hamiltonian field of ``H`` comes out as ``i (z d - zbar dbar)``.
    """

    params: ModelParams
    omega_lower: list
    omega_upper: list
    orientation: int = -1

    def upper(self, mu: int, nu: int) -> AFrac:
        """``omega^{mu nubar}``."""
        return self.omega_upper[nu][mu]


@dataclass(frozen=True)
class ConnectionForm:
    """Coefficients of ``alpha = -i d_a Phi dz^a`` (no ``dzbar`` part)."""

    params: ModelParams
    alpha_components: list

    def replace_component(self, index: int, value: AFrac) -> "ConnectionForm":
        comps = list(self.alpha_components)
        comps[index] = value
        return ConnectionForm(self.params, comps)


@dataclass
class CurvatureReport:
    params: ModelParams
    convention_c: Optional[Fraction]
    verified: bool
    exact_residual_zero: bool
    samples: int
    failures: List[str] = field(default_factory=list)
    gaussian_curvature_check: Optional[float] = None

    def to_dict(self):
        return {
            "convention_c": None if self.convention_c is None else str(self.convention_c),
            "verified": self.verified,
            "exact_residual_zero": self.exact_residual_zero,
            "samples": self.samples,
            "failures": self.failures,
        }


def _delta(a, b):
    return 1 if a == b else 0


def build_lower(params: ModelParams) -> list:
    n, c = params.n, params.c
    A = AFrac.A(params)
    Ainv2 = A ** -2
    z = [AFrac.z(params, i) for i in range(n)]
    zb = [AFrac.zbar(params, i) for i in range(n)]
    return [[(A * _delta(a, b) - zb[a] * z[b] * c) * Ainv2 for b in range(n)] for a in range(n)]


def closed_form_inverse(params: ModelParams) -> list:
    """Rank-one (Sherman-Morrison) inverse ``A (delta + (k/4) zbar^i z^j)``.

    Indexed like ``g_upper``: ``result[i][j] = g^{j ibar}``.
    """
    n, c = params.n, params.c
    A = AFrac.A(params)
    z = [AFrac.z(params, i) for i in range(n)]
    zb = [AFrac.zbar(params, i) for i in range(n)]
    return [[A * (zb[i] * z[j] * c + _delta(i, j)) for j in range(n)] for i in range(n)]


def christoffel_symbols(params: ModelParams, g_lower: list, g_upper: list) -> list:
    n = params.n
    dg = [[[g_lower[c][s].diff(b) for s in range(n)] for c in range(n)] for b in range(n)]
    out = []
    for a in range(n):
        block = []
        for b in range(n):
            row = []
            for c in range(n):
                acc = AFrac.zero(params)
                for s in range(n):
                    acc = acc + g_upper[s][a] * dg[b][c][s]
                row.append(acc)
            block.append(row)
        out.append(block)
    return out


def metric_from_lower(params: ModelParams, g_lower: list, with_inverse: bool = True) -> HermitianMetric:
    """Wrap an arbitrary Hermitian ``g_lower``; inverse only when it stays in the ring."""
    if not with_inverse:
        return HermitianMetric(params, g_lower)
    g_upper = mat_inverse(g_lower)
    return HermitianMetric(params, g_lower, g_upper, christoffel_symbols(params, g_lower, g_upper))


def build_metric(params: ModelParams) -> HermitianMetric:
    g_lower = build_lower(params)
    return metric_from_lower(params, g_lower)


def is_kahler(g_lower: list) -> bool:
    """``d_c g_{a bbar} == d_a g_{c bbar}`` (and the conjugate condition follows by Hermiticity)."""
    n = len(g_lower)
    for a in range(n):
        for b in range(n):
            if g_lower[a][b].conjugate() != g_lower[b][a]:
                return False
            for c in range(n):
                if g_lower[a][b].diff(c) != g_lower[c][b].diff(a):
                    return False
    return True


# ---------------------------------------------------------------------------
# symplectic and connection forms
# ---------------------------------------------------------------------------


def build_symplectic_form(metric: HermitianMetric) -> SymplecticForm:
    n = metric.n
    lower = [[metric.g_lower[a][b] * I for b in range(n)] for a in range(n)]
    upper = [[metric.g_upper[a][b] * (-I) for b in range(n)] for a in range(n)]
    return SymplecticForm(metric.params, lower, upper, orientation=_calibrate_orientation(metric.params, upper))


def _calibrate_orientation(params: ModelParams, omega_upper: list) -> int:
    """Pick the sign that turns the coordinate formula for V(H) into i(z d - zbar dbar).

    The comparison is done on the flat-limit part at a single rational point,
    which is enough to fix a global sign; observables re-verify it exactly.
    """
    n = params.n
    z = [AFrac.z(params, i) for i in range(n)]
    zb = [AFrac.zbar(params, i) for i in range(n)]
    H = sum((z[v] * zb[v] for v in range(n)), AFrac.zero(params)) / AFrac.A(params)
    # holomorphic coefficient of the raw (printed) formula, component 0
    raw = AFrac.zero(params)
    for nu in range(n):
        raw = raw + omega_upper[nu][0] * H.diff(nu, conjugate=True)
    target = z[0] * I
    if raw == target:
        return 1
    if raw == -target:
        return -1
    raise ArithmeticError("symplectic form does not reproduce V(H) up to sign")


def potential_gradient(params: ModelParams) -> List[AFrac]:
    """``d_a Phi = zbar^a / A`` (also the flat limit ``zbar^a`` when k = 0)."""
    A = AFrac.A(params)
    return [AFrac.zbar(params, a) / A for a in range(params.n)]


def potential_value(params: ModelParams, point: Sequence[complex]) -> float:
    """Numeric Kähler potential ``(4/k) ln A`` (``sum |z|^2`` at k = 0)."""
    s = float(sum(abs(complex(v)) ** 2 for v in point))
    if params.k == 0:
        return s
    A = 1.0 + float(params.c) * s
    if A <= 0:
        from .symcore import DomainError

        raise DomainError(f"A={A:.3g} <= 0 at {tuple(point)}")
    return float(4 / params.k) * np.log(A)


def build_connection_form(params: ModelParams) -> ConnectionForm:
    return ConnectionForm(params, [d * (-I) for d in potential_gradient(params)])


def connection_differential(conn: ConnectionForm):
    """Exterior derivative of a ``(1,0)``-form ``a_mu dz^mu``.

    Returns ``(two_zero, one_one)``: ``two_zero[nu][mu]`` is the coefficient of
    ``dz^nu ^ dz^mu`` (antisymmetrised, so only nu < mu matter) and
    ``one_one[a][b]`` the coefficient of ``dz^a ^ dzbar^b``.
    """
    n = conn.params.n
    a = conn.alpha_components
    two_zero = [[a[mu].diff(nu) - a[nu].diff(mu) for mu in range(n)] for nu in range(n)]
    one_one = [[-a[al].diff(b, conjugate=True) for b in range(n)] for al in range(n)]
    return two_zero, one_one


def check_curvature_equals_form(conn: ConnectionForm, form: SymplecticForm) -> bool:
    """True iff ``d alpha == omega`` coefficientwise (curvature equals omega / h)."""
    n = conn.params.n
    two_zero, one_one = connection_differential(conn)
    for nu in range(n):
        for mu in range(n):
            if not two_zero[nu][mu].is_zero():
                return False
            if one_one[nu][mu] != form.omega_lower[nu][mu]:
                return False
    return True


def is_closed(form: SymplecticForm) -> bool:
    """``d omega = 0`` for ``omega_{a bbar} dz^a ^ dzbar^b``."""
    n = form.params.n
    w = form.omega_lower
    for a in range(n):
        for b in range(n):
            for c in range(n):
                if w[a][b].diff(c) != w[c][b].diff(a):
                    return False
                if w[a][b].diff(c, conjugate=True) != w[a][c].diff(b, conjugate=True):
                    return False
    return True


# ---------------------------------------------------------------------------
# curvature
# ---------------------------------------------------------------------------


def curvature_tensor(metric: HermitianMetric) -> list:
    """``R[a][b][c][d] = R_{a bbar c dbar} = -g_{s bbar} d_dbar Gamma^s_{c a}``."""
    n, G, g = metric.n, metric.christoffel, metric.g_lower
    dG = [[[[G[s][c][a].diff(d, conjugate=True) for d in range(n)] for a in range(n)] for c in range(n)] for s in range(n)]
    out = [[[[None] * n for _ in range(n)] for _ in range(n)] for _ in range(n)]
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    acc = AFrac.zero(metric.params)
                    for s in range(n):
                        acc = acc - g[s][b] * dG[s][c][a][d]
                    out[a][b][c][d] = acc
    return out


def _model_tensor(metric: HermitianMetric, a, b, c, d) -> AFrac:
    g = metric.g_lower
    return (g[a][b] * g[c][d] + g[a][d] * g[c][b]) * metric.params.c


def _random_interior_point(params: ModelParams, rng: random.Random) -> List[GaussRat]:
    n = params.n
    bound = Fraction(1, 2 * n) if params.k >= 0 else Fraction(1, 2 * n) / max(1, abs(params.c))
    pts = []
    for _ in range(n):
        re = Fraction(rng.randint(-8, 8), 16) * bound * 2
        im = Fraction(rng.randint(-8, 8), 16) * bound * 2
        pts.append(GaussRat(re, im))
    return pts


def _calibration_constant() -> Fraction:
    """Fix the sign/factor convention on the n=1, k=-4 disk.

    The exact ratio ``R_{1 1bar 1 1bar} / ((k/4)(2 g^2))`` is compared with a
    finite-difference Gaussian curvature of the conformal factor, which must be
    ``K = R / g^2`` in this normalisation.
    """
    p = ModelParams(1, -4)
    m = build_metric(p)
    R = curvature_tensor(m)[0][0][0][0]
    ratio = R / _model_tensor(m, 0, 0, 0, 0)
    if not ratio.is_constant():
        raise ArithmeticError("curvature of the disk is not a constant multiple of the model tensor")
    c = ratio.num.constant_term()
    if c.im or c.re not in (1, -1, 2, -2):
        raise ArithmeticError(f"calibration constant {c} outside the admissible set")
    # independent oracle: K = -Laplacian(ln lambda) / lambda^2 for ds^2 = lambda^2 |dz|^2
    x0, y0, h = 0.21, -0.13, 1e-3

    def ln_lam(x, y):
        return 0.5 * np.log(2.0 / (1 - x * x - y * y) ** 2)

    lap = (ln_lam(x0 + h, y0) + ln_lam(x0 - h, y0) + ln_lam(x0, y0 + h) + ln_lam(x0, y0 - h)
           - 4 * ln_lam(x0, y0)) / h ** 2
    K = -lap / np.exp(2 * ln_lam(x0, y0))
    pt = [complex(x0, y0)]
    R_over_g2 = (R / m.g_lower[0][0] ** 2).eval(pt).real
    if abs(K - R_over_g2) > 1e-4 * abs(K):
        raise ArithmeticError(f"Gaussian curvature oracle {K} disagrees with R/g^2 = {R_over_g2}")
    return c.re


def verify_constant_curvature(metric: HermitianMetric, samples: int = 5, seed: int = 0) -> CurvatureReport:
    params, n = metric.params, metric.n
    R = curvature_tensor(metric)
    if params.k == 0:
        zero = all(R[a][b][c][d].is_zero() for a in range(n) for b in range(n) for c in range(n) for d in range(n))
        return CurvatureReport(params, _calibration_constant(), zero, zero, 0,
                               [] if zero else ["flat metric has nonzero curvature"])
    conv = _calibration_constant()
    failures = []
    exact_zero = True
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    res = R[a][b][c][d] - _model_tensor(metric, a, b, c, d) * conv
                    if not res.is_zero():
                        exact_zero = False
                        failures.append(f"R[{a}{b}{c}{d}] - model = {res}")
    rng = random.Random(seed)
    for _ in range(samples):
        pt = _random_interior_point(params, rng)
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    for d in range(n):
                        lhs = R[a][b][c][d].eval_exact(pt)
                        rhs = _model_tensor(metric, a, b, c, d).eval_exact(pt) * conv
                        if lhs != rhs:
                            failures.append(f"pointwise mismatch at {[str(p) for p in pt]}, indices {(a, b, c, d)}")
    return CurvatureReport(params, conv, exact_zero and not failures, exact_zero, samples, failures)


def metric_report(params: ModelParams, samples: int = 3, seed: int = 0) -> dict:
    m = build_metric(params)
    form = build_symplectic_form(m)
    conn = build_connection_form(params)
    curv = verify_constant_curvature(m, samples=samples, seed=seed)
    n = params.n
    return {
        "params": {"n": n, "k": str(params.k), "hbar": str(params.hbar)},
        "g_lower": [[str(m.g_lower[a][b]) for b in range(n)] for a in range(n)],
        "g_upper": [[str(m.g_upper[a][b]) for b in range(n)] for a in range(n)],
        "christoffel": [[[str(m.christoffel[a][b][c]) for c in range(n)] for b in range(n)] for a in range(n)],
        "inverse_is_exact": is_identity(mat_mul(m.g_lower, m.g_upper)),
        "curvature_equals_form": check_curvature_equals_form(conn, form),
        "curvature": curv.to_dict(),
    }
