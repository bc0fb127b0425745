"""
Classical layer: observables, Hamiltonian vector fields, Poisson brackets,
polarization preservation and the bracket tables of the deformed oscillator.

With the calibrated orientation of :class:`~kahlerquant.geometry.SymplecticForm`
the Hamiltonian field acts as ``V(f) g = {f, g}``, so ``f -> V(f)`` is a Lie
algebra homomorphism: ``[V(f), V(g)] = V({f, g})``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .geometry import HermitianMetric, SymplecticForm, build_metric, build_symplectic_form
from .params import ModelParams
from .symcore import AFrac, GaussRat, I, Poly, ZERO

__all__ = [
    "Observable",
    "PolyVectorField",
    "PreservationCertificate",
    "NotPolarizationPreserving",
    "hamiltonian",
    "n_holo",
    "n_anti",
    "h_mixed",
    "observable_family",
    "hamiltonian_field",
    "poisson",
    "general_solution",
    "check_preservation",
    "lie_bracket",
    "printed_fields",
    "verify_algebra",
    "AlgebraReport",
]


class NotPolarizationPreserving(ValueError):
    pass


@dataclass(frozen=True)
class Observable:
    value: AFrac
    label: Optional[str] = None

    @property
    def params(self) -> ModelParams:
        return self.value.params

    def is_real(self) -> bool:
        return self.value.is_real()

    def __add__(self, other):
        return Observable(self.value + _val(other))

    def __sub__(self, other):
        return Observable(self.value - _val(other))

    def __mul__(self, s):
        return Observable(self.value * _val(s))

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, Observable):
            return self.value == other.value
        if isinstance(other, AFrac):
            return self.value == other
        return NotImplemented

    def __hash__(self):
        return hash(self.value)

    def __str__(self):
        return f"{self.label or 'f'} = {self.value}"


def _val(x):
    return x.value if isinstance(x, Observable) else x


def hamiltonian(params: ModelParams) -> Observable:
    n = params.n
    s = sum((AFrac.z(params, v) * AFrac.zbar(params, v) for v in range(n)), AFrac.zero(params))
    return Observable(s / AFrac.A(params), "H")


def n_holo(params: ModelParams, a: int) -> Observable:
    return Observable(AFrac.z(params, a) / AFrac.A(params), f"N^{a + 1}")


def n_anti(params: ModelParams, a: int) -> Observable:
    return Observable(AFrac.zbar(params, a) / AFrac.A(params), f"N^{a + 1}b")


def h_mixed(params: ModelParams, a: int, b: int) -> Observable:
    """``H^{a bbar} = z^a zbar^b / A``."""
    return Observable(AFrac.z(params, a) * AFrac.zbar(params, b) / AFrac.A(params), f"H^{a + 1}{b + 1}b")


def observable_family(params: ModelParams) -> List[Observable]:
    n = params.n
    fam = [hamiltonian(params)]
    fam += [n_holo(params, a) for a in range(n)]
    fam += [n_anti(params, a) for a in range(n)]
    fam += [h_mixed(params, a, b) for a in range(n) for b in range(n)]
    return fam


# ---------------------------------------------------------------------------
# vector fields
# ---------------------------------------------------------------------------


class PolyVectorField:
    """``sum_a holo[a] d_a + anti[a] d_abar`` with A-fraction coefficients."""

    __slots__ = ("params", "holo", "anti")

    def __init__(self, params: ModelParams, holo: Sequence[AFrac], anti: Sequence[AFrac]):
        if len(holo) != params.n or len(anti) != params.n:
            raise ValueError("vector field needs n holomorphic and n antiholomorphic components")
        self.params = params
        self.holo = tuple(holo)
        self.anti = tuple(anti)

    @classmethod
    def zero(cls, params: ModelParams) -> "PolyVectorField":
        z = AFrac.zero(params)
        return cls(params, [z] * params.n, [z] * params.n)

    @classmethod
    def coordinate(cls, params: ModelParams, index: int, conjugate: bool = False) -> "PolyVectorField":
        n = params.n
        comps = [AFrac.zero(params)] * (2 * n)
        comps[index + (n if conjugate else 0)] = AFrac.one(params)
        return cls(params, comps[:n], comps[n:])

    def components(self) -> Tuple[AFrac, ...]:
        return self.holo + self.anti

    def apply(self, f: AFrac) -> AFrac:
        """Directional derivative ``X f``."""
        if isinstance(f, Observable):
            f = f.value
        acc = AFrac.zero(self.params)
        for a in range(self.params.n):
            if not self.holo[a].is_zero():
                acc = acc + self.holo[a] * f.diff(a)
            if not self.anti[a].is_zero():
                acc = acc + self.anti[a] * f.diff(a, conjugate=True)
        return acc

    def __add__(self, other: "PolyVectorField") -> "PolyVectorField":
        return PolyVectorField(self.params, [x + y for x, y in zip(self.holo, other.holo)],
                               [x + y for x, y in zip(self.anti, other.anti)])

    def __neg__(self):
        return PolyVectorField(self.params, [-x for x in self.holo], [-x for x in self.anti])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, s):
        return PolyVectorField(self.params, [x * s for x in self.holo], [x * s for x in self.anti])

    __rmul__ = __mul__

    def conjugate(self) -> "PolyVectorField":
        return PolyVectorField(self.params, [x.conjugate() for x in self.anti], [x.conjugate() for x in self.holo])

    def is_zero(self) -> bool:
        return all(x.is_zero() for x in self.components())

    def __eq__(self, other):
        if not isinstance(other, PolyVectorField):
            return NotImplemented
        return self.params == other.params and self.components() == other.components()

    def __hash__(self):
        return hash(self.components())

    def eval(self, point) -> Tuple[complex, ...]:
        return tuple(x.eval(point) for x in self.components())

    def __str__(self):
        n = self.params.n
        parts = []
        for a in range(n):
            if not self.holo[a].is_zero():
                parts.append(f"{self.holo[a]} d{a + 1}")
        for a in range(n):
            if not self.anti[a].is_zero():
                parts.append(f"{self.anti[a]} db{a + 1}")
        return " + ".join(parts) if parts else "0"

    __repr__ = __str__


def lie_bracket(X: PolyVectorField, Y: PolyVectorField) -> PolyVectorField:
    comps = [X.apply(y) - Y.apply(x) for x, y in zip(X.components(), Y.components())]
    n = X.params.n
    return PolyVectorField(X.params, comps[:n], comps[n:])


def _as_value(f) -> AFrac:
    return f.value if isinstance(f, Observable) else f


def hamiltonian_field(f, form: SymplecticForm) -> PolyVectorField:
    """``V(f) = o * omega^{mu nubar} (d_nubar f d_mu - d_mu f d_nubar)`` with calibrated o."""
    f = _as_value(f)
    params, n = form.params, form.params.n
    o = form.orientation
    df = [f.diff(a) for a in range(n)]
    dfb = [f.diff(a, conjugate=True) for a in range(n)]
    holo, anti = [], []
    for mu in range(n):
        acc = AFrac.zero(params)
        for nu in range(n):
            if not dfb[nu].is_zero():
                acc = acc + form.upper(mu, nu) * dfb[nu]
        holo.append(acc * o)
    for nu in range(n):
        acc = AFrac.zero(params)
        for mu in range(n):
            if not df[mu].is_zero():
                acc = acc + form.upper(mu, nu) * df[mu]
        anti.append(acc * (-o))
    return PolyVectorField(params, holo, anti)


def poisson(f, g, form: SymplecticForm) -> Observable:
    """``{f, g} = omega^{a bbar} (d_a f d_bbar g - d_bbar f d_a g)``."""
    f, g = _as_value(f), _as_value(g)
    params, n = form.params, form.params.n
    acc = AFrac.zero(params)
    for a in range(n):
        fa, ga = f.diff(a), g.diff(a)
        for b in range(n):
            term = fa * g.diff(b, conjugate=True) - f.diff(b, conjugate=True) * ga
            if not term.is_zero():
                acc = acc + form.upper(a, b) * term
    return Observable(acc)


# ---------------------------------------------------------------------------
# polarization
# ---------------------------------------------------------------------------


def general_solution(u: Sequence[Poly], v: Poly, params: ModelParams) -> Observable:
    """``(sum_a u_a(z) zbar^a + v(z)) / A``; ``u`` and ``v`` must be holomorphic."""
    n = params.n
    if len(u) != n:
        raise ValueError(f"need {n} coefficient polynomials, got {len(u)}")
    for p in list(u) + [v]:
        if not p.is_holomorphic():
            raise ValueError(f"non-holomorphic input {p}")
    W = AFrac(v, 0, params)
    for a in range(n):
        W = W + AFrac(u[a], 0, params) * AFrac.zbar(params, a)
    return Observable(W / AFrac.A(params))


@dataclass
class PreservationCertificate:
    residual: list
    preserved: bool
    _a_matrix: Optional[list] = None
    _a_trace: Optional[AFrac] = None

    @property
    def a_matrix(self) -> list:
        """``a_matrix[alpha][mu] = a[f]^alpha_mu``."""
        if not self.preserved:
            raise NotPolarizationPreserving("observable is not polarization-preserving")
        return self._a_matrix

    @property
    def a_trace(self) -> AFrac:
        if not self.preserved:
            raise NotPolarizationPreserving("observable is not polarization-preserving")
        return self._a_trace


def polarization_fields(form: SymplecticForm) -> List[PolyVectorField]:
    """The spanning fields ``V(z^alpha)`` (purely antiholomorphic)."""
    params = form.params
    return [hamiltonian_field(AFrac.z(params, a), form) for a in range(params.n)]


def polarization_residual(f, metric: HermitianMetric) -> list:
    """Covariant Hessian along the polarization: ``nabla_mubar nabla_nubar f``."""
    f = _as_value(f)
    n = metric.n
    G = metric.christoffel
    dfb = [f.diff(r, conjugate=True) for r in range(n)]
    out = []
    for mu in range(n):
        row = []
        for nu in range(n):
            acc = dfb[nu].diff(mu, conjugate=True)
            for r in range(n):
                acc = acc - G[r][mu][nu].conjugate() * dfb[r]
            row.append(acc)
        out.append(row)
    return out


def check_preservation(f, metric: HermitianMetric, form: Optional[SymplecticForm] = None) -> PreservationCertificate:
    f = _as_value(f)
    form = form or build_symplectic_form(metric)
    n = metric.n
    residual = polarization_residual(f, metric)
    preserved = all(x.is_zero() for row in residual for x in row)
    if not preserved:
        return PreservationCertificate(residual, False)
    Vf = hamiltonian_field(f, form)
    pol = polarization_fields(form)
    a_matrix = []
    for al in range(n):
        br = lie_bracket(Vf, pol[al])
        if not all(x.is_zero() for x in br.holo):
            raise ArithmeticError("zero residual but [V(f), V(z^a)] leaves the polarization")
        row = []
        for mu in range(n):
            acc = AFrac.zero(metric.params)
            for nu in range(n):
                acc = acc + br.anti[nu] * form.omega_lower[mu][nu]
            row.append(acc)
        recon = PolyVectorField.zero(metric.params)
        for mu in range(n):
            recon = recon + pol[mu] * row[mu]
        if recon != br:
            raise ArithmeticError("a[f] coefficients do not reproduce the bracket")
        a_matrix.append(row)
    trace = sum((a_matrix[a][a] for a in range(n)), AFrac.zero(metric.params))
    return PreservationCertificate(residual, True, a_matrix, trace)


# ---------------------------------------------------------------------------
# bracket tables
# ---------------------------------------------------------------------------


def printed_fields(params: ModelParams) -> Dict[str, object]:
    """The vector fields exactly as written in closed form (not via V(f))."""
    n, c = params.n, params.c
    z = [AFrac.z(params, a) for a in range(n)]
    zb = [AFrac.zbar(params, a) for a in range(n)]
    zero = AFrac.zero(params)
    one = AFrac.one(params)
    T = PolyVectorField(params, [x * I for x in z], [x * (-I) for x in zb])
    Ta, Tab, Tmix = [], [], {}
    for a in range(n):
        holo = [z[a] * z[v] * c * (-I) for v in range(n)]
        anti = [(one if v == a else zero) * (-I) for v in range(n)]
        Ta.append(PolyVectorField(params, holo, anti))
        holo = [(one if v == a else zero) * I for v in range(n)]
        anti = [zb[a] * zb[v] * c * I for v in range(n)]
        Tab.append(PolyVectorField(params, holo, anti))
    for a in range(n):
        for b in range(n):
            holo = [(z[a] if v == b else zero) * I for v in range(n)]
            anti = [(zb[b] if v == a else zero) * (-I) for v in range(n)]
            Tmix[(a, b)] = PolyVectorField(params, holo, anti)
    return {"T": T, "Ta": Ta, "Tab": Tab, "Tmix": Tmix}


def computed_fields(params: ModelParams, form: Optional[SymplecticForm] = None) -> Dict[str, object]:
    form = form or build_symplectic_form(build_metric(params))
    n = params.n
    return {
        "T": hamiltonian_field(hamiltonian(params), form),
        "Ta": [hamiltonian_field(n_holo(params, a), form) for a in range(n)],
        "Tab": [hamiltonian_field(n_anti(params, a), form) for a in range(n)],
        "Tmix": {(a, b): hamiltonian_field(h_mixed(params, a, b), form) for a in range(n) for b in range(n)},
    }


@dataclass
class Relation:
    name: str
    family: str
    instances: int = 0
    failures: List[str] = field(default_factory=list)
    negated_failures: int = 0

    @property
    def holds(self) -> bool:
        return not self.failures

    @property
    def holds_with_opposite_sign(self) -> bool:
        return self.instances > 0 and self.negated_failures == 0

    def record(self, label: str, lhs, rhs):
        self.instances += 1
        if lhs != rhs:
            self.failures.append(f"{label}: computed {lhs} != printed {rhs}")
        if lhs != -rhs:
            self.negated_failures += 1

    def to_dict(self):
        d = {"name": self.name, "family": self.family, "holds": self.holds, "instances": self.instances}
        if not self.holds:
            d["holds_with_opposite_sign"] = self.holds_with_opposite_sign
            d["first_failure"] = self.failures[0]
        return d


@dataclass
class AlgebraReport:
    params: ModelParams
    relations: List[Relation]
    dimension_computed: int
    dimension_complex: int
    dimension_paper_claim: int
    depth_reached: int

    def relation(self, name: str) -> Relation:
        for r in self.relations:
            if r.name == name:
                return r
        raise KeyError(name)

    def failed(self) -> List[Relation]:
        return [r for r in self.relations if not r.holds]

    def to_dict(self):
        return {
            "params": {"n": self.params.n, "k": str(self.params.k), "hbar": str(self.params.hbar)},
            "relations": [r.to_dict() for r in self.relations],
            "dimension_computed": self.dimension_computed,
            "dimension_complex": self.dimension_complex,
            "dimension_paper_claim": self.dimension_paper_claim,
            "closure_depth": self.depth_reached,
        }


def _d(a, b):
    return 1 if a == b else 0


def field_relations(params: ModelParams, F: Dict[str, object]) -> List[Relation]:
    """The closed-form bracket table of the T-fields, plus ``T = sum T^{a abar}``."""
    n, c = params.n, params.c
    T, Ta, Tab, Tm = F["T"], F["Ta"], F["Tab"], F["Tmix"]
    Z = PolyVectorField.zero(params)
    br = lie_bracket
    idx = range(n)

    rels = []

    r = Relation("[T^a,T^b] = 0", "brackets")
    for a, b in itertools.product(idx, idx):
        r.record(f"a={a + 1},b={b + 1}", br(Ta[a], Ta[b]), Z)
    rels.append(r)

    r = Relation("[T^a,T^bbar] = i(k/4)(delta T + T^{a bbar})", "brackets")
    for a, b in itertools.product(idx, idx):
        rhs = (T * _d(a, b) + Tm[(a, b)]) * (I * c)
        r.record(f"a={a + 1},b={b + 1}", br(Ta[a], Tab[b]), rhs)
    rels.append(r)

    r = Relation("[T^a,T] = -i T^a", "brackets")
    for a in idx:
        r.record(f"a={a + 1}", br(Ta[a], T), Ta[a] * (-I))
    rels.append(r)

    r = Relation("[T^abar,T] = -i T^abar", "brackets")
    for a in idx:
        r.record(f"a={a + 1}", br(Tab[a], T), Tab[a] * (-I))
    rels.append(r)

    r = Relation("[T^a,T^{b cbar}] = i delta^a_c T^b", "brackets")
    for a, b, g in itertools.product(idx, idx, idx):
        r.record(f"a={a + 1},b={b + 1},c={g + 1}", br(Ta[a], Tm[(b, g)]), Ta[b] * (I * _d(a, g)))
    rels.append(r)

    r = Relation("[T^abar,T^{b cbar}] = -i delta^a_b T^cbar", "brackets")
    for a, b, g in itertools.product(idx, idx, idx):
        r.record(f"a={a + 1},b={b + 1},c={g + 1}", br(Tab[a], Tm[(b, g)]), Tab[g] * (-I * _d(a, b)))
    rels.append(r)

    r = Relation("[T^{a bbar},T^{c dbar}] = i(delta^c_b T^{a dbar} - delta^d_a T^{c bbar})", "brackets")
    for a, b, g, v in itertools.product(idx, idx, idx, idx):
        rhs = (Tm[(a, v)] * _d(g, b) - Tm[(g, b)] * _d(v, a)) * I
        r.record(f"a={a + 1},b={b + 1},c={g + 1},d={v + 1}", br(Tm[(a, b)], Tm[(g, v)]), rhs)
    rels.append(r)

    r = Relation("T = sum_a T^{a abar}", "brackets")
    total = Z
    for a in idx:
        total = total + Tm[(a, a)]
    r.record("sum", total, T)
    rels.append(r)
    return rels


def oscillator_relations(params: ModelParams, F: Dict[str, object]) -> List[Relation]:
    """The osc(n) relations, checked inside the span of the T-fields."""
    n = params.n
    T, Ta, Tab = F["T"], F["Ta"], F["Tab"]
    Z = PolyVectorField.zero(params)
    idx = range(n)
    rels = []
    r = Relation("[T^a,T^bbar] = [T^a,T^b] = [T^abar,T^bbar] = 0", "oscillator")
    for a, b in itertools.product(idx, idx):
        r.record(f"ab a={a + 1},b={b + 1}", lie_bracket(Ta[a], Tab[b]), Z)
        r.record(f"aa a={a + 1},b={b + 1}", lie_bracket(Ta[a], Ta[b]), Z)
        r.record(f"bb a={a + 1},b={b + 1}", lie_bracket(Tab[a], Tab[b]), Z)
    rels.append(r)
    r = Relation("[T^a,T] = -i T^a", "oscillator")
    for a in idx:
        r.record(f"a={a + 1}", lie_bracket(Ta[a], T), Ta[a] * (-I))
    rels.append(r)
    r = Relation("[T^abar,T] = i T^abar", "oscillator")
    for a in idx:
        r.record(f"a={a + 1}", lie_bracket(Tab[a], T), Tab[a] * I)
    rels.append(r)
    return rels


def contraction_relations(params: ModelParams, F: Dict[str, object]) -> List[Relation]:
    """The contracted (k = 0) bracket table in its closed form."""
    if params.k != 0:
        raise ValueError("the contracted table is only defined at k = 0")
    n = params.n
    Ta, Tab, Tm = F["Ta"], F["Tab"], F["Tmix"]
    Z = PolyVectorField.zero(params)
    idx = range(n)
    br = lie_bracket
    rels = []
    r = Relation("[T^a,T^b] = 0", "contraction")
    for a, b in itertools.product(idx, idx):
        r.record(f"a={a + 1},b={b + 1}", br(Ta[a], Ta[b]), Z)
    rels.append(r)
    r = Relation("[T^a,T^bbar] = 0", "contraction")
    for a, b in itertools.product(idx, idx):
        r.record(f"a={a + 1},b={b + 1}", br(Ta[a], Tab[b]), Z)
    rels.append(r)
    r = Relation("[T^a,T^{b cbar}] = i delta^a_c T^b", "contraction")
    for a, b, g in itertools.product(idx, idx, idx):
        r.record(f"a={a + 1},b={b + 1},c={g + 1}", br(Ta[a], Tm[(b, g)]), Ta[b] * (I * _d(a, g)))
    rels.append(r)
    r = Relation("[T^abar,T^{b cbar}] = -i delta^a_b T^cbar", "contraction")
    for a, b, g in itertools.product(idx, idx, idx):
        r.record(f"a={a + 1},b={b + 1},c={g + 1}", br(Tab[a], Tm[(b, g)]), Tab[g] * (-I * _d(a, b)))
    rels.append(r)
    r = Relation("[T^{a bbar},T^{c dbar}] = i(delta^a_d T^{c bbar} - delta^c_b T^{a dbar})", "contraction")
    for a, b, g, v in itertools.product(idx, idx, idx, idx):
        rhs = (Tm[(g, b)] * _d(a, v) - Tm[(a, v)] * _d(g, b)) * I
        r.record(f"a={a + 1},b={b + 1},c={g + 1},d={v + 1}", br(Tm[(a, b)], Tm[(g, v)]), rhs)
    rels.append(r)
    return rels


def poisson_relations(params: ModelParams, form: SymplecticForm) -> List[Relation]:
    """The printed Poisson table of ``H``, ``N^a``, ``N^abar`` and ``N^{a bbar} = H^{a bbar}``."""
    n, c = params.n, params.c
    H = hamiltonian(params).value
    N = [n_holo(params, a).value for a in range(n)]
    Nb = [n_anti(params, a).value for a in range(n)]
    M = {(a, b): h_mixed(params, a, b).value for a in range(n) for b in range(n)}
    zero = AFrac.zero(params)
    idx = range(n)

    def pb(f, g):
        return poisson(f, g, form).value

    rels = []
    r = Relation("{N^a,N^b} = 0", "poisson")
    for a, b in itertools.product(idx, idx):
        r.record(f"a={a + 1},b={b + 1}", pb(N[a], N[b]), zero)
    rels.append(r)
    r = Relation("{N^a,N^bbar} = i(k/4)(delta H + N^{a bbar}) - i delta", "poisson")
    for a, b in itertools.product(idx, idx):
        rhs = (H * _d(a, b) + M[(a, b)]) * (I * c) - AFrac.const(params, I * _d(a, b))
        r.record(f"a={a + 1},b={b + 1}", pb(N[a], Nb[b]), rhs)
    rels.append(r)
    r = Relation("{N^a,N^{b cbar}} = i delta^a_c N^b", "poisson")
    for a, b, g in itertools.product(idx, idx, idx):
        r.record(f"a={a + 1},b={b + 1},c={g + 1}", pb(N[a], M[(b, g)]), N[b] * (I * _d(a, g)))
    rels.append(r)
    r = Relation("{N^abar,N^{b cbar}} = -i delta^a_b N^cbar", "poisson")
    for a, b, g in itertools.product(idx, idx, idx):
        r.record(f"a={a + 1},b={b + 1},c={g + 1}", pb(Nb[a], M[(b, g)]), Nb[g] * (-I * _d(a, b)))
    rels.append(r)
    r = Relation("{N^{a bbar},N^{c dbar}} = i(delta^a_d N^{c bbar} - delta^c_b N^{a dbar})", "poisson")
    for a, b, g, v in itertools.product(idx, idx, idx, idx):
        rhs = (M[(g, b)] * _d(a, v) - M[(a, v)] * _d(g, b)) * I
        r.record(f"a={a + 1},b={b + 1},c={g + 1},d={v + 1}", pb(M[(a, b)], M[(g, v)]), rhs)
    rels.append(r)
    return rels


# -- algebra dimension -------------------------------------------------------------


def _field_vector(X: PolyVectorField, apow: int) -> Dict[tuple, GaussRat]:
    from .symcore import a_power

    vec = {}
    for slot, comp in enumerate(X.components()):
        if comp.is_zero():
            continue
        num = comp.num * a_power(X.params, apow - comp.apow) if apow > comp.apow else comp.num
        for e, coef in num.terms.items():
            vec[(slot, e)] = coef
    return vec


def _rank(vectors: List[Dict[tuple, object]], zero) -> Tuple[int, List[int]]:
    """Exact row rank by Gaussian elimination; returns the rank and pivot row indices."""
    basis: List[Tuple[tuple, Dict[tuple, object]]] = []
    kept = []
    for idx, v in enumerate(vectors):
        w = dict(v)
        for key, b in basis:
            coef = w.get(key)
            if coef:
                for k2, val in b.items():
                    nv = w.get(k2, zero) - coef * val
                    if nv:
                        w[k2] = nv
                    else:
                        w.pop(k2, None)
        if w:
            key = min(w)
            inv = 1 / w[key] if not isinstance(w[key], GaussRat) else w[key].inverse()
            w = {k2: val * inv for k2, val in w.items()}
            # keep basis fully reduced against the new pivot
            new_basis = []
            for k0, b in basis:
                coef = b.get(key)
                if coef:
                    b = dict(b)
                    for k2, val in w.items():
                        nv = b.get(k2, zero) - coef * val
                        if nv:
                            b[k2] = nv
                        else:
                            b.pop(k2, None)
                new_basis.append((k0, b))
            basis = new_basis + [(key, w)]
            kept.append(idx)
    return len(basis), kept


def generated_algebra(params: ModelParams, form: SymplecticForm, max_depth: int = 4):
    """Close ``{T^a, T^abar, T^{a bbar}}`` under brackets; returns (basis fields, depth used)."""
    F = computed_fields(params, form)
    n = params.n
    gens = list(F["Ta"]) + list(F["Tab"]) + [F["Tmix"][(a, b)] for a in range(n) for b in range(n)]

    def vectors(fields):
        apow = max((c.apow for X in fields for c in X.components()), default=0)
        return [_field_vector(X, apow) for X in fields]

    _, kept = _rank(vectors(gens), ZERO)
    basis = [gens[i] for i in kept]
    depth = 0
    for depth in range(1, max_depth + 1):
        new = [lie_bracket(X, Y) for i, X in enumerate(basis) for Y in basis[i + 1:]]
        candidates = basis + [X for X in new if not X.is_zero()]
        _, kept = _rank(vectors(candidates), ZERO)
        grown = [candidates[i] for i in kept]
        if len(grown) == len(basis):
            break
        basis = grown
    return basis, depth


def real_dimension(fields: List[PolyVectorField]) -> int:
    """Rank over R of the real span of the real and imaginary parts of ``fields``."""
    reals = []
    for X in fields:
        Xb = X.conjugate()
        reals.append((X + Xb) * Fraction(1, 2))
        reals.append((X - Xb) * (GaussRat(0, Fraction(-1, 2))))
    apow = max((c.apow for X in reals for c in X.components()), default=0)
    vecs = []
    for X in reals:
        v = {}
        for (slot, e), coef in _field_vector(X, apow).items():
            if coef.re:
                v[(slot, e, 0)] = coef.re
            if coef.im:
                v[(slot, e, 1)] = coef.im
        vecs.append(v)
    rank, _ = _rank(vecs, Fraction(0))
    return rank


def verify_algebra(params: ModelParams, max_depth: int = 4) -> AlgebraReport:
    metric = build_metric(params)
    form = build_symplectic_form(metric)
    F = computed_fields(params, form)
    P = printed_fields(params)
    rels = []
    fields_rel = Relation("V(H), V(N^a), V(N^abar), V(H^{a bbar}) match the closed-form fields", "fields")
    fields_rel.record("T", F["T"], P["T"])
    for a in range(params.n):
        fields_rel.record(f"T^{a + 1}", F["Ta"][a], P["Ta"][a])
        fields_rel.record(f"T^{a + 1}bar", F["Tab"][a], P["Tab"][a])
    for key in F["Tmix"]:
        fields_rel.record(f"T^{key}", F["Tmix"][key], P["Tmix"][key])
    rels.append(fields_rel)
    rels += field_relations(params, F)
    rels += poisson_relations(params, form)
    if params.k == 0:
        rels += contraction_relations(params, F)
        rels += oscillator_relations(params, F)
    basis, depth = generated_algebra(params, form, max_depth)
    n = params.n
    return AlgebraReport(params, rels, real_dimension(basis), len(basis), n * (n + 4), depth)


def disk_observables_crosscheck(params: ModelParams) -> Dict[str, bool]:
    """For n = 1, k = -4 compare ``(1+z zbar)/(1-z zbar)``, ``z/(1-z zbar)`` and its conjugate with the family.

    The first is the affine image ``1 + 2H`` of ``H``; the other two coincide
    with ``N^1`` and ``N^1bar``.
    """
    if params.n != 1 or params.k != -4:
        raise ValueError("the disk observables live on n = 1, k = -4")
    z, zb = AFrac.z(params, 0), AFrac.zbar(params, 0)
    one = AFrac.one(params)
    denom = (one - z * zb).inverse()
    H = hamiltonian(params).value
    return {
        "Htilde = 1 + 2H": (one + z * zb) * denom == one + H * 2,
        "N = N^1": z * denom == n_holo(params, 0).value,
        "Nbar = N^1bar": zb * denom == n_anti(params, 0).value,
    }
