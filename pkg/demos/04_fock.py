"""Monomial norms on the disk and the adjointness gap of the (N, Nbar) pair in both measure modes."""

import math
from fractions import Fraction

from kahlerquant.fock import ADJOINT_CORRECTED, PAPER_LITERAL, FockBasis, FockMeasure, adjointness_check
from kahlerquant.fock import monomial_norm, norm_oracle
from kahlerquant.params import ModelParams

P = ModelParams(1, Fraction(-4), Fraction(1, 3))
for mode in (PAPER_LITERAL, ADJOINT_CORRECTED):
    meas = FockMeasure(P, mode)
    print(f"{mode}: weight {meas.describe()['weight']}")
    for l in range(4):
        R, exact = norm_oracle((l,), meas)
        print(f"  ||z^{l}||^2 = pi * {R}  quadrature {monomial_norm((l,), meas):.12g}  oracle {exact:.12g}")
    rep = adjointness_check(FockBasis(1, 10), meas)
    print(f"  max |(Q Nbar)^+ - Q N| = {rep.max_abs_deviation:.3g}, raising gap {rep.raising_gap:.12g}"
          f" (predicted {rep.predicted_gap:.12g})")
print("Gaussian check at k=0:", monomial_norm((3,), FockMeasure(ModelParams(1))), "vs", 6 * math.pi)
