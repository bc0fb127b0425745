"""
H-projective machinery: H-planarity of sampled curves, an exact
H-projective-flatness certificate, the ``b``-tensor equation relating two
Kähler metrics, and the classification of the ``(b - lambda g)`` pencil in
complex dimension two.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .geometry import HermitianMetric, build_metric, metric_from_lower
from .params import ModelParams
from .symcore import AFrac, NotDivisible, mat_det

__all__ = [
    "SampledCurve",
    "CurveFit",
    "hplanarity_residual",
    "flatness_certificate",
    "FlatnessCertificate",
    "PhiField",
    "HprojPair",
    "make_pair",
    "flat_metric",
    "scaled_metric",
    "perturbed_metric",
    "b_equation_residual",
    "b_equation_report",
    "LambdaClassification",
    "classify_4d",
    "classify_pencil",
]


# ---------------------------------------------------------------------------
# curves
# ---------------------------------------------------------------------------


@dataclass
class SampledCurve:
    """Samples ``z(t_i)`` with velocities and accelerations (complex n-vectors)."""

    times: np.ndarray
    points: np.ndarray
    velocities: np.ndarray
    accelerations: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must be strictly increasing")
        for name in ("points", "velocities", "accelerations"):
            arr = np.asarray(getattr(self, name), dtype=complex)
            if arr.ndim == 1:
                arr = arr[:, None]
            setattr(self, name, arr)

    @property
    def n(self) -> int:
        return self.points.shape[1]

    @classmethod
    def from_function(cls, func: Callable[[float], Sequence[complex]], times: Sequence[float],
                      step: float = 1e-3) -> "SampledCurve":
        """Central differences of an analytic curve with step ``step``."""
        pts, vel, acc = [], [], []
        for t in times:
            z0 = np.asarray(func(t), dtype=complex)
            zp = np.asarray(func(t + step), dtype=complex)
            zm = np.asarray(func(t - step), dtype=complex)
            pts.append(z0)
            vel.append((zp - zm) / (2 * step))
            acc.append((zp - 2 * z0 + zm) / step ** 2)
        return cls(np.asarray(times), np.asarray(pts), np.asarray(vel), np.asarray(acc))

    @classmethod
    def from_samples(cls, times: Sequence[float], points) -> "SampledCurve":
        """Derivatives by second-order finite differences on the (possibly uneven) grid."""
        t = np.asarray(times, dtype=float)
        z = np.asarray(points, dtype=complex)
        if z.ndim == 1:
            z = z[:, None]
        if len(t) < 3:
            raise ValueError("need at least three samples")
        vel = np.gradient(z, t, axis=0, edge_order=2)
        acc = np.gradient(vel, t, axis=0, edge_order=2)
        return cls(t, z, vel, acc)

    @classmethod
    def from_csv(cls, text: str) -> "SampledCurve":
        """Rows ``t, Re z1, Im z1, ..., Re zn, Im zn``; a non-numeric header row is skipped."""
        rows = []
        for row in csv.reader(io.StringIO(text)):
            if not row or not "".join(row).strip():
                continue
            try:
                rows.append([float(x) for x in row])
            except ValueError:
                if rows:
                    raise
        data = np.asarray(rows)
        if data.shape[1] < 3 or (data.shape[1] - 1) % 2:
            raise ValueError("curve CSV needs t followed by (Re, Im) pairs")
        z = data[:, 1::2] + 1j * data[:, 2::2]
        return cls.from_samples(data[:, 0], z)


@dataclass
class CurveFit:
    residuals: np.ndarray
    a: np.ndarray
    b: np.ndarray
    tol: float

    @property
    def max_residual(self) -> float:
        finite = self.residuals[np.isfinite(self.residuals)]
        return float(finite.max()) if finite.size else math.nan

    @property
    def undefined_samples(self) -> List[int]:
        return [int(i) for i in np.flatnonzero(~np.isfinite(self.residuals))]

    @property
    def planar(self) -> bool:
        return self.max_residual < self.tol

    def to_dict(self):
        return {"max_residual": self.max_residual, "planar": self.planar, "tol": self.tol,
                "samples": int(len(self.residuals)), "undefined_samples": self.undefined_samples}


def hplanarity_residual(curve: SampledCurve, metric: HermitianMetric, tol: float = 1e-6) -> CurveFit:
    """Fit ``nabla_chi chi = a chi + b J chi`` at each sample and return the g-norm of the misfit.

    On holomorphic components ``J`` is multiplication by ``i``, so the fit is
    a single complex coefficient ``a + i b``.
    """
    if curve.n != metric.n:
        raise ValueError("curve and metric dimensions differ")
    N = len(curve.times)
    res, fa, fb = np.full(N, np.nan), np.full(N, np.nan), np.full(N, np.nan)
    for i in range(N):
        z, v, acc = curve.points[i], curve.velocities[i], curve.accelerations[i]
        G = metric.eval_lower(z)
        Gam = metric.eval_christoffel(z)
        cov = acc + np.einsum("abc,b,c->a", Gam, v, v)
        vv = (v @ G @ v.conj()).real
        if vv <= 1e-24:
            continue
        lam = (cov @ G @ v.conj()) / vv
        r = cov - lam * v
        res[i] = math.sqrt(max((r @ G @ r.conj()).real, 0.0))
        fa[i], fb[i] = lam.real, lam.imag
    return CurveFit(res, fa, fb, tol)


# ---------------------------------------------------------------------------
# flatness
# ---------------------------------------------------------------------------


def flat_metric(params: ModelParams) -> HermitianMetric:
    """``g_{a bbar} = delta_ab``, expressed in the A-fraction ring of ``params``."""
    n = params.n
    lower = [[AFrac.const(params, int(a == b)) for b in range(n)] for a in range(n)]
    return metric_from_lower(params, lower)


def scaled_metric(metric: HermitianMetric, mu) -> HermitianMetric:
    n = metric.n
    lower = [[metric.g_lower[a][b] * mu for b in range(n)] for a in range(n)]
    return metric_from_lower(metric.params, lower)


def perturbed_metric(params: ModelParams, eps=Fraction(1, 10)) -> HermitianMetric:
    """Adds ``eps * z1^2 zbar1^2`` to ``g_{1 1bar}``; still Kähler, no longer of constant curvature."""
    base = build_metric(params)
    lower = [row[:] for row in base.g_lower]
    z, zb = AFrac.z(params, 0), AFrac.zbar(params, 0)
    lower[0][0] = lower[0][0] + z * z * zb * zb * eps
    return metric_from_lower(params, lower, with_inverse=False)


@dataclass
class FlatnessCertificate:
    phi: Optional[List[AFrac]]
    flat: bool
    residual_nonzero: int = 0

    def __iter__(self):
        yield self.phi
        yield self.flat


def flatness_certificate(metric: HermitianMetric) -> FlatnessCertificate:
    """Decide whether ``Gamma^a_{bc} = phi_b delta^a_c + phi_c delta^a_b`` for some ``phi``.

    Lowering with ``g`` turns the condition into
    ``d_b g_{c sbar} = phi_b g_{c sbar} + phi_c g_{b sbar}``; its trace forces
    ``phi_b = d_b ln det g / (n+1)``.  The test is run division-free:
    ``(n+1) det d_b g_{c sbar} - d_b det g_{c sbar} - d_c det g_{b sbar} = 0``.
    """
    n = metric.n
    g = metric.g_lower
    det = mat_det(g)
    ddet = [det.diff(b) for b in range(n)]
    bad = 0
    for b in range(n):
        for c in range(n):
            for s in range(n):
                r = g[c][s].diff(b) * det * (n + 1) - ddet[b] * g[c][s] - ddet[c] * g[b][s]
                if not r.is_zero():
                    bad += 1
    if bad:
        return FlatnessCertificate(None, False, bad)
    try:
        inv = det.inverse()
    except NotDivisible:
        return FlatnessCertificate(None, True, 0)
    phi = [ddet[b] * inv * Fraction(1, n + 1) for b in range(n)]
    return FlatnessCertificate(phi, True, 0)


# ---------------------------------------------------------------------------
# pairs of metrics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhiField:
    """``phi`` through its holomorphic gradient and ``exp(2 phi)``."""

    grad: Tuple[AFrac, ...]
    exp2: AFrac
    label: str = "phi"

    @classmethod
    def zero(cls, params: ModelParams) -> "PhiField":
        return cls(tuple(AFrac.zero(params) for _ in range(params.n)), AFrac.one(params), "0")

    @classmethod
    def log_a(cls, params: ModelParams, s) -> "PhiField":
        """``phi = s ln A``; needs ``2 s`` integral so that ``exp(2 phi) = A^{2 s}`` is an A-fraction."""
        s = Fraction(s)
        if (2 * s).denominator != 1:
            raise ValueError("exact mode needs 2*s to be an integer")
        A = AFrac.A(params)
        grad = tuple(A.diff(a) * A.inverse() * s for a in range(params.n))
        return cls(grad, A ** int(2 * s), f"{s} ln A")

    @classmethod
    def constant(cls, params: ModelParams, exp2) -> "PhiField":
        """Constant ``phi`` given through ``exp(2 phi)``."""
        return cls(tuple(AFrac.zero(params) for _ in range(params.n)), AFrac.const(params, exp2), "const")


@dataclass
class HprojPair:
    g: HermitianMetric
    g_prime: HermitianMetric
    phi: PhiField
    b: list

    @property
    def n(self) -> int:
        return self.g.n


def make_pair(g: HermitianMetric, g_prime: HermitianMetric, phi: Optional[PhiField] = None) -> HprojPair:
    """``b_{a bbar} = exp(2 phi) g'^{mubar nu} g_{mubar a} g_{nu bbar}``, i.e. ``e^{2phi} G G'^{-1} G``."""
    if g_prime.g_upper is None:
        raise ValueError("g_prime needs an exact inverse")
    n = g.n
    phi = phi or PhiField.zero(g.params)
    G, U = g.g_lower, g_prime.g_upper
    b = []
    for a in range(n):
        row = []
        for bb in range(n):
            acc = AFrac.zero(g.params)
            for mu in range(n):
                for nu in range(n):
                    acc = acc + G[a][mu] * U[mu][nu] * G[nu][bb]
            row.append(acc * phi.exp2)
        b.append(row)
    return HprojPair(g, g_prime, phi, b)


def phi_prime(pair: HprojPair) -> List[AFrac]:
    """``phi'_a = d_mu phi e^{2phi} g'^{mu nubar} g_{a nubar}``."""
    n = pair.n
    G, U = pair.g.g_lower, pair.g_prime.g_upper
    out = []
    for a in range(n):
        acc = AFrac.zero(pair.g.params)
        for mu in range(n):
            if pair.phi.grad[mu].is_zero():
                continue
            for nu in range(n):
                acc = acc + pair.phi.grad[mu] * pair.g_prime.upper(mu, nu) * G[a][nu]
        out.append(acc * pair.phi.exp2)
    return out


def b_covariant(pair: HprojPair) -> list:
    """``b_{a bbar; c} = d_c b_{a bbar} - Gamma^r_{c a} b_{r bbar}`` (mixed Christoffels vanish)."""
    n = pair.n
    Gam = pair.g.christoffel
    b = pair.b
    out = [[[None] * n for _ in range(n)] for _ in range(n)]
    for a in range(n):
        for bb in range(n):
            for c in range(n):
                acc = b[a][bb].diff(c)
                for r in range(n):
                    acc = acc - Gam[r][c][a] * b[r][bb]
                out[a][bb][c] = acc
    return out


VARIANTS = ("printed", "sign_corrected", "symmetrized")


def b_equation_residual(pair: HprojPair, variant: str = "printed") -> list:
    """Residual tensor ``R[a][b][c]`` of the b-equation.

    ``printed``:        ``b_{a bbar;c} - 2 phi'_a g_{bbar c}``
    ``sign_corrected``: ``b_{a bbar;c} + 2 phi'_a g_{bbar c}``
    ``symmetrized``:    ``b_{a bbar;c} - (phi'_a g_{c bbar} + phi'_c g_{a bbar})``
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    n = pair.n
    G = pair.g.g_lower
    cov = b_covariant(pair)
    pp = phi_prime(pair)
    out = [[[None] * n for _ in range(n)] for _ in range(n)]
    for a in range(n):
        for bb in range(n):
            for c in range(n):
                if variant == "printed":
                    rhs = pp[a] * G[c][bb] * 2
                elif variant == "sign_corrected":
                    rhs = pp[a] * G[c][bb] * (-2)
                else:
                    rhs = pp[a] * G[c][bb] + pp[c] * G[a][bb]
                out[a][bb][c] = cov[a][bb][c] - rhs
    return out


def residual_is_zero(R: list) -> bool:
    return all(x.is_zero() for plane in R for row in plane for x in row)


def residual_max(R: list, points: Sequence[Sequence[complex]]) -> float:
    return max(abs(x.eval(p)) for p in points for plane in R for row in plane for x in row)


def b_equation_report(pair: HprojPair, points: Sequence[Sequence[complex]] = ()) -> dict:
    out = {}
    for v in VARIANTS:
        R = b_equation_residual(pair, v)
        entry = {"exact_zero": residual_is_zero(R)}
        if points:
            entry["max_abs_at_samples"] = residual_max(R, points)
        out[v] = entry
    return out


# ---------------------------------------------------------------------------
# lambda roots in complex dimension two
# ---------------------------------------------------------------------------


@dataclass
class LambdaClassification:
    roots: List[float]
    multiplicities: List[int]
    case_tag: str

    def to_dict(self):
        return {"roots": self.roots, "multiplicities": self.multiplicities, "case": self.case_tag}


def classify_pencil(b: np.ndarray, g: np.ndarray, tol: float = 1e-9) -> LambdaClassification:
    """Roots of ``det(b - lambda g) = 0`` for Hermitian ``b`` and positive-definite ``g``."""
    b = np.asarray(b, dtype=complex)
    g = np.asarray(g, dtype=complex)
    scale = max(np.abs(b).max(), np.abs(g).max(), 1.0)
    if np.abs(b - b.conj().T).max() > tol * scale or np.abs(g - g.conj().T).max() > tol * scale:
        raise ValueError("classification needs Hermitian b and g")
    roots = scipy.linalg.eigh(b, g, eigvals_only=True)
    groups: List[List[float]] = []
    for r in sorted(roots):
        if groups and abs(r - groups[-1][0]) <= tol * max(1.0, abs(r)):
            groups[-1].append(r)
        else:
            groups.append([r])
    values = [float(np.mean(x)) for x in groups]
    mult = [len(x) for x in groups]
    if any(abs(v) <= tol for v in values):
        tag = "degenerate"
    elif len(values) == 1:
        tag = "rescaling"
    else:
        tag = "generic"
    return LambdaClassification(values, mult, tag)


def classify_4d(pair: HprojPair, point: Sequence[complex], tol: float = 1e-9) -> LambdaClassification:
    if pair.n != 2:
        raise ValueError("classification is defined for complex dimension 2")
    b = np.array([[pair.b[a][c].eval(point) for c in range(2)] for a in range(2)])
    g = pair.g.eval_lower(point)
    return classify_pencil(b, g, tol)
