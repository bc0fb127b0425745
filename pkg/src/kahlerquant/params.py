"""Model parameters shared by every layer of the package."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Rational = Union[int, Fraction, str]


def as_fraction(value: Rational) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to an exact Fraction.

    Floats are rejected on purpose: every identity in the package is decided
    exactly and a binary float would silently leak rounding into ``k`` or ``hbar``.
    """
    if isinstance(value, float):
        raise TypeError(f"refusing inexact float {value!r}; pass a Fraction or 'p/q' string")
    return Fraction(value)


@dataclass(frozen=True)
class ModelParams:
    """Complex dimension ``n``, holomorphic curvature ``k`` and Planck scale ``hbar``.

    The space is the constant-curvature Kähler chart with
    ``A = 1 + (k/4) * sum_v z^v zbar^v``.
    """

    n: int
    k: Fraction = Fraction(0)
    hbar: Fraction = Fraction(1)

    def __post_init__(self):
        if not isinstance(self.n, int) or isinstance(self.n, bool) or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "k", as_fraction(self.k))
        object.__setattr__(self, "hbar", as_fraction(self.hbar))
        if self.hbar <= 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")

    @property
    def c(self) -> Fraction:
        """The recurring coefficient k/4."""
        return self.k / 4

    @property
    def planck_h(self) -> float:
        from math import pi

        return 2 * pi * float(self.hbar)

    def replace(self, **changes) -> "ModelParams":
        fields = {"n": self.n, "k": self.k, "hbar": self.hbar}
        fields.update(changes)
        return ModelParams(**fields)

    def __str__(self):
        return f"ModelParams(n={self.n}, k={self.k}, hbar={self.hbar})"
