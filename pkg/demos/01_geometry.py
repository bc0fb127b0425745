"""Metric, symplectic form and prequantum connection of the unit-curvature disk and ball."""

from fractions import Fraction

from kahlerquant.geometry import (build_connection_form, build_metric, build_symplectic_form,
                                  check_curvature_equals_form, verify_constant_curvature)
from kahlerquant.params import ModelParams

for n, k in [(1, -4), (2, 4)]:
    P = ModelParams(n, Fraction(k))
    m = build_metric(P)
    print(f"n={n} k={k}")
    print("  g_11bar     =", m.g_lower[0][0])
    print("  g^11bar     =", m.g_upper[0][0])
    print("  Gamma^1_11  =", m.christoffel[0][0][0])
    form = build_symplectic_form(m)
    conn = build_connection_form(P)
    print("  alpha_1     =", conn.alpha_components[0])
    print("  d alpha = omega:", check_curvature_equals_form(conn, form))
    rep = verify_constant_curvature(m, samples=3)
    print("  constant holomorphic curvature:", rep.verified, "convention c =", rep.convention_c)
