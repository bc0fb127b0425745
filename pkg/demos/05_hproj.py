"""H-projective flatness, the b-tensor equation and the two-dimensional pencil classification."""

import math
from fractions import Fraction

import numpy as np

from kahlerquant.geometry import build_metric
from kahlerquant.hproj import (PhiField, SampledCurve, b_equation_report, classify_4d, flat_metric,
                               flatness_certificate, hplanarity_residual, make_pair, perturbed_metric)
from kahlerquant.params import ModelParams

P = ModelParams(2, Fraction(-4))
g = build_metric(P)
phi, flat = flatness_certificate(g)
print("flat:", flat, " phi_1 =", phi[0])
print("perturbed metric flat:", flatness_certificate(perturbed_metric(P)).flat)

for label, field in (("0", PhiField.zero(P)), ("1/2 ln A", PhiField.log_a(P, Fraction(1, 2)))):
    rep = b_equation_report(make_pair(g, flat_metric(P), field))
    print(f"b-equation with phi = {label}:", {v: r["exact_zero"] for v, r in rep.items()})

print("pencil at (1/2, 0):", classify_4d(make_pair(g, flat_metric(P)), [0.5, 0]).to_dict())

t = np.linspace(-1, 1, 21)
u = np.array([0.6, 0.8j])
geo = SampledCurve.from_function(lambda s: math.tanh(s) * u, t)
bent = SampledCurve.from_function(lambda s: [0.5 * math.tanh(s), 0.3 * s], t)
print("complex-line geodesic residual:", hplanarity_residual(geo, g).max_residual)
print("bent curve residual:", hplanarity_residual(bent, g).max_residual)
