"""Hamiltonian fields of the observable family and their bracket table.

Prints which closed-form relations hold exactly, which hold only with the
opposite sign, and the real dimension of the generated Lie algebra.
"""

import sys
from fractions import Fraction

from kahlerquant.observables import verify_algebra
from kahlerquant.params import ModelParams

n = int(sys.argv[1]) if len(sys.argv) > 1 else 2
for k in (-4, 0, 4):
    rep = verify_algebra(ModelParams(n, Fraction(k)))
    print(f"n={n} k={k}")
    for r in rep.relations:
        status = "holds" if r.holds else ("opposite sign" if r.holds_with_opposite_sign else "FAILS")
        print(f"  [{r.family:11s}] {status:13s} {r.name}")
    print(f"  real dimension {rep.dimension_computed} (claimed {rep.dimension_paper_claim}),"
          f" closure after {rep.depth_reached} round(s)")
