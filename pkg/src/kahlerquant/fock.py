"""
Representation space: holomorphic monomials with the weighted inner product
``(psi1, psi2) = int psi1 conj(psi2) exp(-Phi / hbar) omega^n``.

For ``k != 0`` the weight is a power of ``A``: ``exp(-Phi/hbar) det g = A^p``
with ``p = -4/(k hbar) - (n+1)`` (``paper_literal``).  The
``adjoint_corrected`` mode uses ``p = -4/(k hbar) - (n+1)/2``, the exponent for
which ``hbar d_a`` and the quantized ``N^a`` become mutually adjoint.  At
``k = 0`` both modes use the Gaussian ``exp(-|z|^2 / hbar)``.
"""

from __future__ import annotations

import itertools
import math
import random
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from .geometry import ConnectionForm, potential_value
from .params import ModelParams
from .quantize import quantize_observable, to_matrix
from .observables import n_anti, n_holo
from .symcore import DomainError

__all__ = [
    "FockBasis",
    "FockMeasure",
    "GramReport",
    "AdjointReport",
    "QuadratureError",
    "DivergentIntegral",
    "quadrature",
    "norm_oracle",
    "monomial_norm",
    "monomial_norms",
    "total_mass",
    "adjointness_check",
    "hermitian_invariance_check",
]

PAPER_LITERAL = "paper_literal"
ADJOINT_CORRECTED = "adjoint_corrected"
MODES = (PAPER_LITERAL, ADJOINT_CORRECTED)


class QuadratureError(ArithmeticError):
    pass


class DivergentIntegral(DomainError):
    pass


# ---------------------------------------------------------------------------
# basis
# ---------------------------------------------------------------------------


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


class FockBasis:
    """Monomials ``z^m`` with ``|m| <= L`` in graded lexicographic order."""

    def __init__(self, n: int, L: int, params: Optional[ModelParams] = None):
        if L < 0:
            raise ValueError("cutoff must be non-negative")
        self.n, self.L, self.params = n, L, params
        self.monomials: List[Tuple[int, ...]] = [m for l in range(L + 1) for m in _compositions(l, n)]
        self._index = {m: i for i, m in enumerate(self.monomials)}
        self._slices = {}
        for i, m in enumerate(self.monomials):
            self._slices.setdefault(sum(m), []).append(i)

    def __len__(self):
        return len(self.monomials)

    def __iter__(self):
        return iter(self.monomials)

    def index(self, m) -> int:
        return self._index[tuple(m)]

    def degree(self, i: int) -> int:
        return sum(self.monomials[i])

    def degree_slice(self, l: int) -> List[int]:
        return list(self._slices.get(l, []))

    def label(self, i: int) -> str:
        m = self.monomials[i]
        parts = [f"z{v + 1}^{e}" if e > 1 else f"z{v + 1}" for v, e in enumerate(m) if e]
        return "*".join(parts) or "1"


# ---------------------------------------------------------------------------
# measure
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FockMeasure:
    """Radial weight ``w(s)``, ``s = sum |z^v|^2``, on the chart domain.

    ``offset`` shifts the power of ``A`` in both the volume weight and the
    fiber density; it exists for negative controls.
    """

    params: ModelParams
    mode: str = PAPER_LITERAL
    offset: Fraction = Fraction(0)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown measure mode {self.mode!r}; expected one of {MODES}")
        object.__setattr__(self, "offset", Fraction(self.offset))

    @property
    def exponent(self) -> Optional[Fraction]:
        """Power ``p`` of ``A`` in the weight (None at k = 0)."""
        P = self.params
        if P.k == 0:
            return None
        base = -4 / (P.k * P.hbar)
        shift = Fraction(P.n + 1) if self.mode == PAPER_LITERAL else Fraction(P.n + 1, 2)
        return base - shift + self.offset

    @property
    def radius_squared(self) -> float:
        """Upper limit of ``s``; ``inf`` unless k < 0."""
        if self.params.k < 0:
            return float(-1 / self.params.c)
        return math.inf

    @property
    def radius(self) -> float:
        return math.sqrt(self.radius_squared)

    def weight(self, s):
        P = self.params
        if P.k == 0:
            return np.exp(-np.asarray(s, dtype=float) / float(P.hbar))
        A = 1.0 + float(P.c) * np.asarray(s, dtype=float)
        return np.power(np.maximum(A, 0.0), float(self.exponent))

    def fiber_density(self, point: Sequence[complex]) -> float:
        """``<mu0, mu0> = exp(-Phi / hbar)``, times ``A^offset``."""
        return math.exp(self.log_fiber_density(point))

    def log_fiber_density(self, point: Sequence[complex]) -> float:
        P = self.params
        val = -potential_value(P, point) / float(P.hbar)
        if self.offset:
            s = sum(abs(complex(v)) ** 2 for v in point)
            val += float(self.offset) * math.log(1.0 + float(P.c) * s)
        return val

    def describe(self) -> dict:
        P = self.params
        return {
            "mode": self.mode,
            "weight": "exp(-|z|^2/hbar)" if P.k == 0 else f"A^({self.exponent})",
            "domain": "C^n" if P.k >= 0 else f"ball |z| < {self.radius:.12g}",
        }


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------


def quadrature(f: Callable[[float], float], a: float, b: float, tol: float = 1e-11) -> Tuple[float, float]:
    """Adaptive Gauss-Kronrod integral ``int_a^b f``; returns ``(value, error estimate)``.

    The subdivision limit is raised in stages.  A stage that warns is still
    accepted when its value agrees with the previous stage to ``tol``
    (relative); otherwise a :class:`QuadratureError` reports the last two
    refinement values.
    """
    history = []
    for limit in (100, 400, 1600):
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                val, err = integrate.quad(f, a, b, epsabs=tol * 1e-3, epsrel=tol, limit=limit)
                return val, err
            except integrate.IntegrationWarning:
                pass
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err = integrate.quad(f, a, b, epsabs=tol * 1e-3, epsrel=tol, limit=limit)
        if history and abs(val - history[-1]) <= tol * max(abs(val), abs(history[-1])):
            return val, max(err, abs(val - history[-1]))
        history.append(val)
    raise QuadratureError(f"quadrature did not converge; last refinements {history[-2]!r}, {history[-1]!r}")


def _s_max(measure: FockMeasure, degree: int) -> float:
    """Finite integration limit for ``s``; on C^n it cuts where the tail is negligible."""
    P = measure.params
    if P.k < 0:
        return measure.radius_squared
    if P.k == 0:
        h = float(P.hbar)
        return h * (degree + P.n + 60 + 12 * math.sqrt(degree + P.n + 1))
    return math.inf


def _check_integrable(m: Sequence[int], measure: FockMeasure):
    P = measure.params
    p = measure.exponent
    deg = sum(m)
    if P.k < 0 and p <= -1:
        raise DivergentIntegral(f"weight A^{p} is not integrable at the boundary (need p > -1; lower hbar)")
    if P.k > 0 and deg + P.n + p >= 0:
        raise DivergentIntegral(
            f"|z^{tuple(m)}|^2 A^{p} diverges at infinity (need |m| + n + p < 0; degree {deg} too high)")


def monomial_norm(m: Sequence[int], measure: FockMeasure, tol: float = 1e-11) -> float:
    """``||z^m||^2`` by quadrature in polar coordinates.

    One radial integral for n = 1, a nested pair for n = 2; for n >= 3 the
    angular and simplex directions are integrated out analytically and a
    single radial integral remains.
    """
    m = tuple(m)
    P = measure.params
    _check_integrable(m, measure)
    n = P.n
    smax = _s_max(measure, sum(m))
    rmax = math.sqrt(smax)
    w = measure.weight
    if n == 1:
        val, _ = quadrature(lambda r: r ** (2 * m[0] + 1) * w(r * r), 0.0, rmax, tol)
        return 2 * math.pi * val
    if n == 2:
        def inner(r1):
            top = math.sqrt(max(smax - r1 * r1, 0.0)) if math.isfinite(smax) else math.inf
            v, _ = quadrature(lambda r2: r2 ** (2 * m[1] + 1) * w(r1 * r1 + r2 * r2), 0.0, top, tol)
            return r1 ** (2 * m[0] + 1) * v

        val, _ = quadrature(inner, 0.0, rmax, tol)
        return (2 * math.pi) ** 2 * val
    deg = sum(m)
    pref = math.pi ** n * math.prod(math.factorial(x) for x in m) / math.factorial(deg + n - 1)
    val, _ = quadrature(lambda s: s ** (deg + n - 1) * w(s), 0.0, smax, tol)
    return pref * val


def norm_oracle(m: Sequence[int], measure: FockMeasure) -> Tuple[Fraction, float]:
    """Closed form ``||z^m||^2 = pi^n * R`` with ``R`` rational; returns ``(R, float value)``.

    Gamma/Beta ratios telescope to rational products for every rational exponent.
    """
    P = measure.params
    _check_integrable(m, measure)
    n, deg = P.n, sum(m)
    mfac = math.prod(math.factorial(x) for x in m)
    if P.k == 0:
        R = Fraction(mfac) * P.hbar ** (deg + n)
    else:
        p = measure.exponent
        c = abs(P.c)
        prod = Fraction(1)
        for j in range(1, deg + n + 1):
            prod *= (p + j) if P.k < 0 else (-p - j)
        R = Fraction(mfac) / prod / c ** (deg + n)
    return R, math.pi ** n * float(R)


def total_mass(measure: FockMeasure, tol: float = 1e-11) -> float:
    return monomial_norm((0,) * measure.params.n, measure, tol)


@dataclass
class GramReport:
    labels: List[str]
    norms: List[float]
    exact: List[Optional[str]]
    oracle_rel_error: float
    off_diagonal_max: float
    adjointness_residual: Optional[float] = None

    def to_dict(self):
        return {
            "norms": [{"monomial": l, "value": v, "exact": e} for l, v, e in zip(self.labels, self.norms, self.exact)],
            "oracle_rel_error": self.oracle_rel_error,
            "off_diagonal_max": self.off_diagonal_max,
            "adjointness_residual": self.adjointness_residual,
        }


def _angular_factor(diff: Sequence[int], points: int = 64) -> complex:
    """Trapezoid value of ``prod_v int_0^{2pi} exp(i d_v theta) dtheta``."""
    theta = np.linspace(0.0, 2 * math.pi, points, endpoint=False)
    out = 1.0 + 0j
    for d in diff:
        out *= (2 * math.pi / points) * np.exp(1j * d * theta).sum()
    return out


def _pair_radial(a, b, measure: FockMeasure, tol: float) -> float:
    """Radial part of ``<z^a, z^b>`` for n = 1."""
    smax = _s_max(measure, a[0] + b[0])
    w = measure.weight
    e = float(a[0] + b[0] + 1)
    return quadrature(lambda r: r ** e * w(r * r), 0.0, math.sqrt(smax), tol)[0]


def monomial_norms(basis: FockBasis, measure: FockMeasure, tol: float = 1e-11,
                   off_diagonal: bool = True) -> GramReport:
    norms, exact, rel = [], [], 0.0
    for m in basis.monomials:
        v = monomial_norm(m, measure, tol)
        if v <= 0:
            raise ArithmeticError(f"non-positive norm {v} for z^{m}")
        R, ov = norm_oracle(m, measure)
        norms.append(v)
        exact.append(f"pi^{measure.params.n} * {R}")
        rel = max(rel, abs(v - ov) / ov)
    off = 0.0
    if off_diagonal:
        # n = 1 integrates the radial factor; for n >= 2 it is bounded by
        # Cauchy-Schwarz, |radial| <= sqrt(N_a N_b) / (2 pi)^n.
        n = measure.params.n
        for i, j in itertools.combinations(range(len(basis)), 2):
            a, b = basis.monomials[i], basis.monomials[j]
            ang = abs(_angular_factor([x - y for x, y in zip(a, b)]))
            scale = math.sqrt(norms[i] * norms[j])
            if n == 1:
                off = max(off, ang * abs(_pair_radial(a, b, measure, tol)) / scale)
            else:
                off = max(off, ang / (2 * math.pi) ** n)
    labels = [basis.label(i) for i in range(len(basis))]
    return GramReport(labels, norms, exact, rel, off)


# ---------------------------------------------------------------------------
# adjointness of the quantized (N^a, N^abar) pair
# ---------------------------------------------------------------------------


@dataclass
class AdjointReport:
    mode: str
    index: int
    max_abs_deviation: float
    max_rel_deviation: float
    raising_gap: float
    gap_spread: float
    predicted_gap: float
    entries: List[dict] = field(default_factory=list)

    def to_dict(self):
        return {
            "mode": self.mode,
            "index": self.index + 1,
            "max_abs_deviation": self.max_abs_deviation,
            "max_rel_deviation": self.max_rel_deviation,
            "raising_gap": self.raising_gap,
            "gap_spread": self.gap_spread,
            "predicted_gap": self.predicted_gap,
        }


def predicted_gap(measure: FockMeasure) -> Fraction:
    """``Q N^a - (Q N^abar)^dagger`` on raising entries, from the norm oracle."""
    P = measure.params
    if P.k == 0:
        return Fraction(0)
    target = -4 / (P.k * P.hbar) - Fraction(P.n + 1, 2)
    return -P.hbar * P.c * (target - measure.exponent)


def adjointness_check(basis: FockBasis, measure: FockMeasure, index: int = 0, tol: float = 1e-11,
                      norms: Optional[Sequence[float]] = None) -> AdjointReport:
    """Compare ``(Q N^abar)^dagger`` in the weighted basis with ``Q N^a``.

    Only columns of degree <= L-1 are compared, since the truncated raising
    operator loses the top degree.
    """
    P = measure.params
    if norms is None:
        norms = [monomial_norm(m, measure, tol) for m in basis.monomials]
    G = np.asarray(norms, dtype=float)
    low = to_matrix(quantize_observable(n_anti(P, index)), basis.L).to_numpy()
    raise_ = to_matrix(quantize_observable(n_holo(P, index)), basis.L).to_numpy()
    adj = (low.conj().T * G[None, :]) / G[:, None]
    cols = [j for j in range(len(basis)) if basis.degree(j) <= basis.L - 1]
    dev = np.abs(adj[:, cols] - raise_[:, cols])
    ref = np.abs(raise_[:, cols])
    mask = ref > 0
    rel = float((dev[mask] / ref[mask]).max()) if mask.any() else 0.0
    gaps, entries = [], []
    for j in cols:
        m = list(basis.monomials[j])
        m[index] += 1
        i = basis.index(m)
        g = (raise_[i, j] - adj[i, j]).real
        gaps.append(g)
        entries.append({"from": basis.label(j), "to": basis.label(i), "quantized": raise_[i, j].real,
                        "adjoint": adj[i, j].real})
    gaps = np.asarray(gaps)
    return AdjointReport(measure.mode, index, float(dev.max()), rel, float(gaps.mean()),
                         float(gaps.max() - gaps.min()), float(predicted_gap(measure)), entries)


# ---------------------------------------------------------------------------
# invariance of the Hermitian structure
# ---------------------------------------------------------------------------


def _alpha_value(conn: ConnectionForm, point, vec) -> complex:
    return sum(comp.eval(point) * vec[a] for a, comp in enumerate(conn.alpha_components))


def random_interior_point(params: ModelParams, rng: random.Random, fraction: float = 0.8) -> List[complex]:
    n = params.n
    if params.k < 0:
        R = 2 / math.sqrt(-float(params.k))
    else:
        R = 1.0
    while True:
        pt = [complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(n)]
        norm = math.sqrt(sum(abs(v) ** 2 for v in pt))
        if 0 < norm <= 1:
            return [v * fraction * R for v in pt]


def hermitian_invariance_check(conn: ConnectionForm, measure: FockMeasure, samples: int = 20, seed: int = 0,
                               step: float = 1e-4, points: Optional[Sequence[Sequence[complex]]] = None) -> float:
    """Max residual of ``X ln h = 2 Re(-i hbar^{-1} alpha(X))`` for ``h = <mu0, mu0>``.

    ``X = a^v d_v + conj(a^v) d_vbar`` is a real direction; ``X ln h`` is taken
    by a fourth-order central difference along ``z + t a``.  The residual is
    relative to ``X h / h``, i.e. to the density itself.
    """
    P = conn.params
    rng = random.Random(seed)
    hbar = float(P.hbar)
    if points is None:
        points = [random_interior_point(P, rng) for _ in range(samples)]
    worst = 0.0
    for pt in points:
        vec = [complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(P.n)]

        def f(t):
            return measure.log_fiber_density([z + t * a for z, a in zip(pt, vec)])

        fd = (8 * (f(step) - f(-step)) - (f(2 * step) - f(-2 * step))) / (12 * step)
        exact = 2 * (-1j / hbar * _alpha_value(conn, pt, vec)).real
        worst = max(worst, abs(fd - exact))
    return worst
