"""Quantized operators of H, N^1 and N^1bar, the commutator constant and the spectrum of Q H."""

from fractions import Fraction

from kahlerquant.observables import hamiltonian
from kahlerquant.params import ModelParams
from kahlerquant.quantize import calibrate_constant, homomorphism_check, operator_table, quantize_observable
from kahlerquant.quantize import spectrum

P = ModelParams(2, Fraction(-4), Fraction(1, 3))
for row in operator_table(P):
    print(f"Q {row['observable']:5s} = {row['derived']}   matches closed form: {row['match']}")
print("commutator constant:", calibrate_constant(P))
out = homomorphism_check(P)
print(f"[Qf, Qg] = c Q{{f,g}} on {out['pairs']} pairs: {out['holds']}")
for e in spectrum(quantize_observable(hamiltonian(P)), 5):
    print(f"  degree {e.degree}: E = {e.value.re}  multiplicity {e.multiplicity}")
