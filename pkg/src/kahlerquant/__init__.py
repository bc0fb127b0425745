"""Geometric quantization of the constant-holomorphic-curvature Kähler spaces.

Exact A-fraction arithmetic (``symcore``), the Kähler geometry of the model
(``geometry``), classical observables and their brackets (``observables``),
the Kähler-polarized quantizer (``quantize``), weighted Fock spaces
(``fock``) and H-projective diagnostics (``hproj``).
"""

from .params import ModelParams
from .symcore import AFrac, GaussRat, Poly, I

__all__ = ["ModelParams", "AFrac", "GaussRat", "Poly", "I"]
__version__ = "0.1.0"
