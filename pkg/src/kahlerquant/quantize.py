"""
Quantum layer: covariant derivatives, prequantization and the Kähler-polarized
quantizer, acting on holomorphic wave functions.

A polarized section is ``psi(z) * mu0`` with the trivializing section ``mu0``
covariantly constant along the polarization, so in the trivialization every
quantized observable becomes a differential operator in ``z`` with holomorphic
polynomial coefficients (:class:`HoloDiffOp`).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .geometry import ConnectionForm, SymplecticForm, build_connection_form, build_metric, build_symplectic_form
from .observables import (
    NotPolarizationPreserving,
    Observable,
    PolyVectorField,
    PreservationCertificate,
    check_preservation,
    hamiltonian,
    hamiltonian_field,
    lie_bracket,
    n_anti,
    n_holo,
    observable_family,
    poisson,
)
from .params import ModelParams
from .symcore import AFrac, GaussRat, I, Poly, ZERO, format_poly, parse_poly

__all__ = [
    "HoloDiffOp",
    "SectionOp",
    "OperatorMatrix",
    "HolomorphicClosureError",
    "covariant_derivative",
    "prequantize",
    "quantize",
    "quantize_observable",
    "op_commutator",
    "to_matrix",
    "spectrum",
    "SpectrumEntry",
    "printed_operators",
    "operator_table",
    "calibrate_constant",
]

MultiIndex = Tuple[int, ...]


class HolomorphicClosureError(ArithmeticError):
    """Raised when an assembled operator fails to act within holomorphic polynomials."""


# ---------------------------------------------------------------------------
# holomorphic differential operators
# ---------------------------------------------------------------------------


def _holo_exponent(e: MultiIndex, n: int) -> MultiIndex:
    return tuple(e) + (0,) * n


class HoloDiffOp:
    """``sum_m c_m(z) d^m`` with holomorphic polynomial coefficients."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Optional[Dict[MultiIndex, Poly]] = None):
        self.n = n
        clean = {}
        for m, p in (terms or {}).items():
            m = tuple(m)
            if len(m) != n:
                raise ValueError(f"derivative multi-index {m} has wrong length")
            if not p.is_holomorphic():
                raise ValueError(f"coefficient {p} is not holomorphic")
            if not p.is_zero():
                clean[m] = clean[m] + p if m in clean else p
        self.terms = {m: p for m, p in clean.items() if not p.is_zero()}

    @classmethod
    def multiplication(cls, p: Poly) -> "HoloDiffOp":
        return cls(p.n, {(0,) * p.n: p})

    @classmethod
    def identity(cls, n: int) -> "HoloDiffOp":
        return cls.multiplication(Poly.const(n, 1))

    @classmethod
    def derivative(cls, n: int, index: int) -> "HoloDiffOp":
        m = [0] * n
        m[index] = 1
        return cls(n, {tuple(m): Poly.const(n, 1)})

    @property
    def order(self) -> int:
        return max((sum(m) for m in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def degree_shifts(self) -> set:
        """Set of ``deg(monomial coefficient) - |m|`` over all terms."""
        out = set()
        for m, p in self.terms.items():
            for e in p.terms:
                out.add(sum(e) - sum(m))
        return out

    def is_degree_preserving(self) -> bool:
        return self.degree_shifts() <= {0}

    def apply(self, psi: Poly) -> Poly:
        if not psi.is_holomorphic():
            raise ValueError("HoloDiffOp acts on holomorphic polynomials only")
        acc = Poly(self.n)
        for m, p in self.terms.items():
            d = psi
            for v, k in enumerate(m):
                for _ in range(k):
                    d = d.diff(v)
                    if d.is_zero():
                        break
            if not d.is_zero():
                acc = acc + p * d
        return acc

    def compose(self, other: "HoloDiffOp") -> "HoloDiffOp":
        """``self o other`` via the general Leibniz rule."""
        out: Dict[MultiIndex, Poly] = {}
        for m, a in self.terms.items():
            for q, b in other.terms.items():
                for j in itertools.product(*(range(k + 1) for k in m)):
                    coef = 1
                    db = b
                    for v in range(self.n):
                        coef *= comb(m[v], j[v])
                        for _ in range(j[v]):
                            db = db.diff(v)
                    if db.is_zero():
                        continue
                    key = tuple(m[v] - j[v] + q[v] for v in range(self.n))
                    term = (a * db).scale(coef)
                    out[key] = out[key] + term if key in out else term
        return HoloDiffOp(self.n, out)

    __matmul__ = compose

    def __add__(self, other: "HoloDiffOp") -> "HoloDiffOp":
        out = dict(self.terms)
        for m, p in other.terms.items():
            out[m] = out[m] + p if m in out else p
        return HoloDiffOp(self.n, out)

    def __neg__(self):
        return HoloDiffOp(self.n, {m: -p for m, p in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "HoloDiffOp":
        return HoloDiffOp(self.n, {m: p.scale(s) for m, p in self.terms.items()})

    def __mul__(self, s):
        return self.scale(s)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, HoloDiffOp):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items(), key=lambda kv: kv[0])))

    def __str__(self):
        return format_diffop(self)

    def __repr__(self):
        return f"HoloDiffOp({format_diffop(self)})"


def format_diffop(P: HoloDiffOp) -> str:
    """Textual form ``d[m1,...,mn]: <poly>; ...`` with highest derivative first."""
    if P.is_zero():
        return "0"
    keys = sorted(P.terms, key=lambda m: (-sum(m), tuple(-x for x in m)))
    return "; ".join(f"d[{','.join(map(str, m))}]: {format_poly(P.terms[m])}" for m in keys)


def parse_diffop(text: str, n: int) -> HoloDiffOp:
    text = text.strip()
    if text == "0":
        return HoloDiffOp(n)
    terms = {}
    for chunk in text.split(";"):
        head, _, body = chunk.strip().partition(":")
        if not head.startswith("d[") or not head.endswith("]"):
            raise ValueError(f"malformed operator term {chunk!r}")
        m = tuple(int(x) for x in head[2:-1].split(","))
        terms[m] = parse_poly(body.strip(), n)
    return HoloDiffOp(n, terms)


def op_commutator(P: HoloDiffOp, Q: HoloDiffOp) -> HoloDiffOp:
    return P.compose(Q) - Q.compose(P)


# ---------------------------------------------------------------------------
# first-order operators on trivialized sections
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SectionOp:
    """``c^mu d_mu + c^mubar d_mubar + c0`` acting on functions on the chart."""

    field: PolyVectorField
    c0: AFrac

    @property
    def params(self) -> ModelParams:
        return self.field.params

    @classmethod
    def multiplication(cls, f: AFrac) -> "SectionOp":
        return cls(PolyVectorField.zero(f.params), f)

    def apply(self, phi: AFrac) -> AFrac:
        return self.field.apply(phi) + self.c0 * phi

    def __add__(self, other: "SectionOp") -> "SectionOp":
        return SectionOp(self.field + other.field, self.c0 + other.c0)

    def __neg__(self):
        return SectionOp(-self.field, -self.c0)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, s):
        return SectionOp(self.field * s, self.c0 * s)

    __rmul__ = __mul__

    def commutator(self, other: "SectionOp") -> "SectionOp":
        return SectionOp(lie_bracket(self.field, other.field),
                         self.field.apply(other.c0) - other.field.apply(self.c0))

    def is_zero(self) -> bool:
        return self.field.is_zero() and self.c0.is_zero()

    def __eq__(self, other):
        if not isinstance(other, SectionOp):
            return NotImplemented
        return self.field == other.field and self.c0 == other.c0

    def __hash__(self):
        return hash((self.field, self.c0))

    def restrict_holomorphic(self) -> HoloDiffOp:
        """The action on holomorphic ``psi``: antiholomorphic derivatives drop out.

        Raises :class:`HolomorphicClosureError` if a surviving coefficient is not
        a holomorphic polynomial.
        """
        n = self.params.n
        terms = {}
        comps = [(tuple(int(v == a) for v in range(n)), self.field.holo[a]) for a in range(n)]
        comps.append(((0,) * n, self.c0))
        for m, coef in comps:
            if coef.is_zero():
                continue
            if coef.apow != 0 or not coef.num.is_holomorphic():
                raise HolomorphicClosureError(f"coefficient of d{list(m)} is {coef}, not a holomorphic polynomial")
            terms[m] = coef.num
        return HoloDiffOp(n, terms)

    def __str__(self):
        return f"[{self.field}] + ({self.c0})"


def connection_value(conn: ConnectionForm, X: PolyVectorField) -> AFrac:
    """``alpha(X)``; the connection form has no ``dzbar`` part."""
    acc = AFrac.zero(conn.params)
    for a, comp in enumerate(conn.alpha_components):
        if not X.holo[a].is_zero():
            acc = acc + comp * X.holo[a]
    return acc


def covariant_derivative(X: PolyVectorField, conn: ConnectionForm) -> SectionOp:
    """``D_X phi = X phi - i hbar^{-1} alpha(X) phi``."""
    hbar = conn.params.hbar
    return SectionOp(X, connection_value(conn, X) * (GaussRat(0, -1 / hbar)))


@dataclass
class _Context:
    params: ModelParams
    metric: object
    form: SymplecticForm
    conn: ConnectionForm


_CTX: Dict[ModelParams, _Context] = {}


def _context(params: ModelParams) -> _Context:
    ctx = _CTX.get(params)
    if ctx is None:
        metric = build_metric(params)
        form = build_symplectic_form(metric)
        ctx = _Context(params, metric, form, build_connection_form(params))
        _CTX[params] = ctx
    return ctx


def _value(f) -> AFrac:
    return f.value if isinstance(f, Observable) else f


def prequantize(f, form: Optional[SymplecticForm] = None, conn: Optional[ConnectionForm] = None) -> SectionOp:
    """``f - i hbar D_{V(f)}``, i.e. ``-i hbar V(f) - alpha(V(f)) + f``."""
    f = _value(f)
    ctx = _context(f.params)
    form = form or ctx.form
    conn = conn or ctx.conn
    hbar = f.params.hbar
    Vf = hamiltonian_field(f, form)
    D = covariant_derivative(Vf, conn)
    return SectionOp.multiplication(f) + D * GaussRat(0, -hbar)


def quantize(f, cert: PreservationCertificate, form: Optional[SymplecticForm] = None,
             conn: Optional[ConnectionForm] = None) -> HoloDiffOp:
    """``-i hbar D_{V(f)} + f - (i hbar / 2) a[f]`` restricted to holomorphic wave functions."""
    if not cert.preserved:
        raise NotPolarizationPreserving("observable is not polarization-preserving")
    f = _value(f)
    hbar = f.params.hbar
    op = prequantize(f, form, conn) + SectionOp.multiplication(cert.a_trace * GaussRat(0, -hbar / 2))
    return op.restrict_holomorphic()


def quantize_observable(f) -> HoloDiffOp:
    """Convenience wrapper: certify preservation, then quantize."""
    f = _value(f)
    ctx = _context(f.params)
    cert = check_preservation(f, ctx.metric, ctx.form)
    return quantize(f, cert, ctx.form, ctx.conn)


def printed_operators(params: ModelParams) -> Dict[str, HoloDiffOp]:
    """Closed-form operators for H, N^a and N^abar as displayed in the source."""
    n, hbar, k, c = params.n, params.hbar, params.k, params.c
    z = [Poly.var(n, a) for a in range(n)]
    out = {}
    terms = {tuple(int(v == a) for v in range(n)): z[a].scale(hbar) for a in range(n)}
    terms[(0,) * n] = Poly.const(n, hbar * Fraction(n, 2))
    out["H"] = HoloDiffOp(n, terms)
    for a in range(n):
        terms = {tuple(int(v == b) for v in range(n)): (z[a] * z[b]).scale(-hbar * c) for b in range(n)}
        terms[(0,) * n] = z[a].scale(1 - hbar * k * (n + 1) / 8)
        out[f"N^{a + 1}"] = HoloDiffOp(n, terms)
        out[f"N^{a + 1}b"] = HoloDiffOp.derivative(n, a).scale(hbar)
    return out


def operator_table(params: ModelParams) -> List[dict]:
    """Derived vs printed operators for H, N^a, N^abar."""
    printed = printed_operators(params)
    rows = []
    family = [hamiltonian(params)] + [n_holo(params, a) for a in range(params.n)] + \
             [n_anti(params, a) for a in range(params.n)]
    for obs in family:
        Q = quantize_observable(obs)
        P = printed[obs.label]
        rows.append({"observable": obs.label, "derived": format_diffop(Q), "printed": format_diffop(P),
                     "match": Q == P})
    return rows


def calibrate_constant(params: ModelParams) -> GaussRat:
    """The constant ``c`` in ``[Qf, Qg] = c Q{f,g}``, read off from ``f = N^1bar, g = H``."""
    ctx = _context(params)
    f, g = n_anti(params, 0), hamiltonian(params)
    lhs = op_commutator(quantize_observable(f), quantize_observable(g))
    rhs = quantize_observable(poisson(f, g, ctx.form))
    for m, p in rhs.terms.items():
        for e, coef in p.terms.items():
            lp = lhs.terms.get(m)
            val = lp.terms.get(e, ZERO) if lp is not None else ZERO
            return val / coef
    raise ArithmeticError("calibration pair has a vanishing bracket")


# ---------------------------------------------------------------------------
# matrices and spectra
# ---------------------------------------------------------------------------


@dataclass
class OperatorMatrix:
    basis: object
    entries: List[List[GaussRat]]
    truncated_columns: List[int] = field(default_factory=list)

    def to_numpy(self) -> np.ndarray:
        return np.array([[complex(x) for x in row] for row in self.entries], dtype=complex)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    @property
    def size(self) -> int:
        return len(self.entries)


def to_matrix(P: HoloDiffOp, L: int) -> OperatorMatrix:
    """Exact matrix on the monomials of degree <= L; column j is the image of basis j.

    Columns whose image has components of degree > L are listed in
    ``truncated_columns`` (the truncation zone); those components are dropped.
    """
    from .fock import FockBasis

    basis = FockBasis(P.n, L)
    N = len(basis)
    entries = [[ZERO] * N for _ in range(N)]
    truncated = []
    for j, m in enumerate(basis.monomials):
        img = P.apply(Poly.monomial(P.n, m))
        cut = False
        for e, coef in img.terms.items():
            holo = e[: P.n]
            if sum(holo) > L:
                cut = True
                continue
            entries[basis.index(holo)][j] = coef
        if cut:
            truncated.append(j)
    return OperatorMatrix(basis, entries, truncated)


@dataclass(frozen=True)
class SpectrumEntry:
    value: object
    multiplicity: int
    degree: Optional[int] = None
    exact: bool = True

    def to_dict(self):
        from .symcore import format_gaussrat

        if self.exact:
            v = self.value
            exact = str(v.re) if v.im == 0 else format_gaussrat(v)
            return {"degree": self.degree, "value_exact": exact, "value": float(v.re) if v.im == 0 else complex(v),
                    "multiplicity": self.multiplicity}
        return {"degree": self.degree, "value": self.value, "multiplicity": self.multiplicity}


def _is_triangular(block) -> bool:
    m = len(block)
    upper = all(not block[i][j] for i in range(m) for j in range(i))
    lower = all(not block[i][j] for i in range(m) for j in range(i + 1, m))
    return upper or lower


def spectrum(P: HoloDiffOp, L: int, residual_tol: float = 1e-8) -> List[SpectrumEntry]:
    """Eigenvalues with multiplicity on the degree <= L truncation.

    Degree-preserving operators are split into per-degree blocks; triangular
    blocks give exact eigenvalues from the diagonal.  Anything else falls back
    to a numeric eigensolver on the block (or, for degree-shifting operators,
    on the matrix with the truncation zone removed).
    """
    M = to_matrix(P, L)
    basis = M.basis
    out: List[SpectrumEntry] = []
    if P.is_degree_preserving():
        for l in range(L + 1):
            idx = basis.degree_slice(l)
            block = [[M.entries[i][j] for j in idx] for i in idx]
            if _is_triangular(block):
                counts: Dict[GaussRat, int] = {}
                for i in range(len(idx)):
                    counts[block[i][i]] = counts.get(block[i][i], 0) + 1
                for v in sorted(counts, key=lambda g: (g.re, g.im)):
                    out.append(SpectrumEntry(v, counts[v], l, True))
            else:
                out.extend(_numeric_eigs(np.array([[complex(x) for x in r] for r in block]), l, residual_tol))
        return out
    keep = [j for j in range(M.size) if j not in set(M.truncated_columns)]
    A = M.to_numpy()[np.ix_(keep, keep)]
    return _numeric_eigs(A, None, residual_tol)


def _numeric_eigs(A: np.ndarray, degree, tol: float) -> List[SpectrumEntry]:
    if A.size == 0:
        return []
    vals, vecs = np.linalg.eig(A)
    res = np.linalg.norm(A @ vecs - vecs * vals, axis=0)
    if np.any(res > tol * max(1.0, np.abs(vals).max())):
        raise ArithmeticError(f"non-normal truncated matrix: eigen-residual {res.max():.3g}")
    groups: List[List[complex]] = []
    for v in sorted(vals, key=lambda x: (round(x.real, 9), round(x.imag, 9))):
        if groups and abs(groups[-1][0] - v) < 1e-9 * max(1.0, abs(v)):
            groups[-1].append(v)
        else:
            groups.append([v])
    out = []
    for g in groups:
        v = complex(np.mean(g))
        out.append(SpectrumEntry(v.real if abs(v.imag) < 1e-12 else v, len(g), degree, False))
    return out


def oscillator_multiplicity(n: int, l: int) -> int:
    return comb(l + n - 1, n - 1)


def homomorphism_check(params: ModelParams, prequantum: bool = False) -> dict:
    """Check ``[Qf, Qg] = c Q{f,g}`` (or the prequantum analogue) on all family pairs."""
    ctx = _context(params)
    c = calibrate_constant(params)
    fam = observable_family(params)
    failures = []
    count = 0
    if prequantum:
        ops = [prequantize(f, ctx.form, ctx.conn) for f in fam]
    else:
        ops = [quantize_observable(f) for f in fam]
    for i, j in itertools.combinations_with_replacement(range(len(fam)), 2):
        pb = poisson(fam[i], fam[j], ctx.form)
        if prequantum:
            lhs = ops[i].commutator(ops[j])
            rhs = prequantize(pb, ctx.form, ctx.conn) * c
        else:
            lhs = op_commutator(ops[i], ops[j])
            rhs = quantize_observable(pb).scale(c)
        count += 1
        if lhs != rhs:
            failures.append(f"[{fam[i].label},{fam[j].label}]")
    return {"constant": c, "pairs": count, "failures": failures, "holds": not failures}
