from fractions import Fraction

from hypothesis import strategies as st

from kahlerquant.params import ModelParams
from kahlerquant.symcore import AFrac, GaussRat, Poly

GRID = [(n, k) for n in (1, 2, 3) for k in (-4, 0, 4)]

small_frac = st.fractions(min_value=-3, max_value=3, max_denominator=4)
gauss = st.builds(GaussRat, small_frac, small_frac)


@st.composite
def polys(draw, n=2, max_terms=3, max_exp=2):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        e = tuple(draw(st.integers(0, max_exp)) for _ in range(2 * n))
        terms[e] = draw(gauss)
    return Poly(n, terms)


@st.composite
def holo_polys(draw, n=2, max_terms=3, max_deg=3):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        e = tuple(draw(st.integers(0, max_deg)) for _ in range(n)) + (0,) * n
        terms[e] = draw(gauss)
    return Poly(n, terms)


@st.composite
def afracs(draw, params, max_apow=2):
    return AFrac(draw(polys(n=params.n)), draw(st.integers(0, max_apow)), params)


def params(n, k, hbar=1):
    return ModelParams(n, Fraction(k), Fraction(hbar))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=lambda s: int(s.split()[0][1:])):
        terminalreporter.write_line(line)
