import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import GRID, holo_polys, params
from kahlerquant.geometry import build_metric, build_symplectic_form
from kahlerquant.observables import (
    NotPolarizationPreserving,
    Observable,
    PolyVectorField,
    check_preservation,
    computed_fields,
    disk_observables_crosscheck,
    general_solution,
    hamiltonian,
    hamiltonian_field,
    h_mixed,
    lie_bracket,
    n_anti,
    n_holo,
    observable_family,
    poisson,
    polarization_residual,
    printed_fields,
    verify_algebra,
)
from kahlerquant.symcore import AFrac, I, Poly


def setup(n, k):
    p = params(n, k)
    m = build_metric(p)
    return p, m, build_symplectic_form(m)


@pytest.mark.parametrize("n,k", GRID)
def test_hamiltonian_fields_match_closed_forms(n, k):
    p, _, w = setup(n, k)
    F, P = computed_fields(p, w), printed_fields(p)
    assert F["T"] == P["T"]
    for a in range(n):
        assert F["Ta"][a] == P["Ta"][a]
        assert F["Tab"][a] == P["Tab"][a]
    for key in F["Tmix"]:
        assert F["Tmix"][key] == P["Tmix"][key]


@pytest.mark.parametrize("n,k", [(1, -4), (2, 4), (2, 0)])
def test_field_of_bracket_is_bracket_of_fields(n, k):
    p, _, w = setup(n, k)
    fam = observable_family(p)
    for f, g in itertools.combinations(fam, 2):
        Vf, Vg = hamiltonian_field(f, w), hamiltonian_field(g, w)
        assert hamiltonian_field(poisson(f, g, w), w) == lie_bracket(Vf, Vg)
        assert Vf.apply(g.value) == poisson(f, g, w).value


@pytest.mark.parametrize("n,k", [(1, -4), (2, 4)])
def test_poisson_antisymmetry_and_jacobi(n, k):
    p, _, w = setup(n, k)
    fam = observable_family(p)
    for f in fam:
        assert poisson(f, f, w).value.is_zero()
    for f, g, h in itertools.combinations(fam, 3):
        pb = lambda x, y: poisson(x, y, w)
        total = pb(f, pb(g, h)).value + pb(g, pb(h, f)).value + pb(h, pb(f, g)).value
        assert total.is_zero()
        assert pb(f, g).value == -pb(g, f).value


@pytest.mark.parametrize("n,k", GRID)
def test_family_real_structure(n, k):
    p, _, _ = setup(n, k)
    assert hamiltonian(p).is_real()
    for a in range(n):
        assert n_holo(p, a).value.conjugate() == n_anti(p, a).value
        assert h_mixed(p, a, a).is_real()


def test_general_solution_examples():
    p = params(2, -4)
    z = [Poly.var(2, a) for a in range(2)]
    zero, one = Poly(2), Poly.const(2, 1)
    assert general_solution(z, zero, p) == hamiltonian(p)
    assert general_solution([zero, zero], z[1], p) == n_holo(p, 1)
    assert general_solution([zero, one], zero, p) == n_anti(p, 1)
    with pytest.raises(ValueError):
        general_solution([Poly.var(2, 0, conjugate=True), zero], zero, p)
    with pytest.raises(ValueError):
        general_solution([zero], zero, p)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([(1, -4), (2, -4), (2, 4), (2, 0)]), st.data())
def test_general_solution_always_preserved(nk, data):
    n, k = nk
    p, m, w = setup(n, k)
    u = [data.draw(holo_polys(n=n)) for _ in range(n)]
    v = data.draw(holo_polys(n=n))
    cert = check_preservation(general_solution(u, v, p), m, w)
    assert cert.preserved
    assert all(r.is_zero() for row in cert.residual for r in row)


@pytest.mark.parametrize("n,k", GRID)
def test_a_matrix_values(n, k):
    p, m, w = setup(n, k)
    cert = check_preservation(hamiltonian(p), m, w)
    assert cert.a_trace == AFrac.const(p, I * n)
    for a in range(n):
        cert = check_preservation(n_holo(p, a), m, w)
        assert cert.a_trace == AFrac.z(p, a) * (-I * p.c * (n + 1))
        cert = check_preservation(n_anti(p, a), m, w)
        assert cert.a_trace.is_zero()


def test_a_matrix_entries_n2():
    p, m, w = setup(2, -4)
    A = check_preservation(n_holo(p, 0), m, w).a_matrix
    z1, z2 = AFrac.z(p, 0), AFrac.z(p, 1)
    assert A[0][0] == z1 * 2 * I and A[0][1].is_zero()
    assert A[1][0] == z2 * I and A[1][1] == z1 * I


def test_non_member_not_preserved():
    p, m, w = setup(1, -4)
    f = AFrac.z(p, 0) + AFrac.zbar(p, 0)
    cert = check_preservation(f, m, w)
    assert not cert.preserved
    assert any(not r.is_zero() for row in cert.residual for r in row)
    with pytest.raises(NotPolarizationPreserving):
        cert.a_trace
    # polynomial zbar^2 fails even in the flat case
    q, mq, wq = setup(1, 0)
    assert not check_preservation(AFrac.zbar(q, 0) * AFrac.zbar(q, 0), mq, wq).preserved


@pytest.mark.parametrize("n,k", GRID)
def test_family_has_zero_polarization_residual(n, k):
    p, m, _ = setup(n, k)
    for f in observable_family(p):
        assert all(r.is_zero() for row in polarization_residual(f, m) for r in row)


def test_vector_field_arithmetic():
    p = params(2, 4)
    X = PolyVectorField.coordinate(p, 0)
    Y = PolyVectorField.coordinate(p, 1, conjugate=True)
    assert lie_bracket(X, Y).is_zero()
    assert (X + Y - Y) == X
    assert X.apply(AFrac.z(p, 0)) == AFrac.one(p)
    assert Y.apply(AFrac.z(p, 1)).is_zero()


@pytest.mark.parametrize("n,k", [(1, -4), (2, 0), (3, 4)])
def test_algebra_report_structure(n, k):
    rep = verify_algebra(params(n, k))
    assert rep.dimension_paper_claim == n * (n + 4)
    # the generated algebra closes after one round of brackets
    assert rep.depth_reached == 1
    assert rep.dimension_computed == n * (n + 2)
    assert rep.relation("T = sum_a T^{a abar}").holds
    assert rep.relation("[T^a,T^b] = 0").holds
    assert rep.relation("{N^a,N^b} = 0").holds
    d = rep.to_dict()
    assert d["dimension_computed"] == rep.dimension_computed
    assert len(d["relations"]) == len(rep.relations)
    if k == 0:
        assert rep.relation("[T^abar,T] = i T^abar").holds


def test_opposite_sign_lines_are_exact_negations():
    """The lines that disagree with the closed-form table hold exactly with the sign flipped."""
    rep = verify_algebra(params(2, -4))
    failed = rep.failed()
    assert failed
    assert all(r.holds_with_opposite_sign for r in failed)


def test_disk_observables():
    assert all(disk_observables_crosscheck(params(1, -4)).values())
    with pytest.raises(ValueError):
        disk_observables_crosscheck(params(2, -4))


def test_observable_arithmetic():
    p = params(1, -4)
    H = hamiltonian(p)
    assert (H + H) == H * 2
    assert (H - H).value.is_zero()
    assert isinstance(H * 3, Observable)
