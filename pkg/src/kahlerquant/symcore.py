"""
Exact arithmetic kernel.

Three layers, each immutable:

* :class:`GaussRat` -- Gaussian rationals ``p/q + (p'/q') i`` on top of
  :class:`fractions.Fraction`.
* :class:`Poly` -- sparse polynomials in ``z^1..z^n, zbar^1..zbar^n`` with
  GaussRat coefficients.  Exponents are stored as one tuple of length ``2n``,
  holomorphic exponents first.
* :class:`AFrac` -- ``P / A^m`` with ``A = 1 + (k/4) sum z^v zbar^v``.  Every
  metric component, observable and bracket of the model lives in this ring,
  so equality is a decidable zero test.

Coordinate indices are 0-based throughout the Python API; the textual
serialization uses ``z1..zn`` / ``zb1..zbn``.

Example
-------
>>> from kahlerquant import ModelParams
>>> from kahlerquant.symcore import AFrac
>>> p = ModelParams(n=1, k=-4)
>>> H = AFrac.z(p, 0) * AFrac.zbar(p, 0) / AFrac.A(p)
>>> str(H)
'(1 * z1 * zb1)/A^1'
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, Iterator, Optional, Sequence, Tuple, Union

from .params import ModelParams

Exponent = Tuple[int, ...]


class DomainError(ValueError):
    """Raised when a point lies on or outside the boundary ``A = 0``."""


class ParamsMismatch(ValueError):
    """Raised when two A-fractions built for different models are combined."""


class NotDivisible(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# Gaussian rationals
# ---------------------------------------------------------------------------


class GaussRat:
    __slots__ = ("re", "im")

    def __init__(self, re: Union[int, Fraction, str] = 0, im: Union[int, Fraction, str] = 0):
        self.re = re if type(re) is Fraction else Fraction(re)
        self.im = im if type(im) is Fraction else Fraction(im)

    @classmethod
    def coerce(cls, value) -> "GaussRat":
        if type(value) is GaussRat:
            return value
        if isinstance(value, (int, Fraction)):
            return cls(value, 0)
        if isinstance(value, complex):
            raise TypeError("complex floats are inexact; build a GaussRat explicitly")
        if isinstance(value, str):
            return parse_gaussrat(value)
        raise TypeError(f"cannot coerce {type(value).__name__} to GaussRat")

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        if type(other) is GaussRat:
            return self.re == other.re and self.im == other.im
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __neg__(self):
        return GaussRat(-self.re, -self.im)

    def __add__(self, other):
        if type(other) is not GaussRat:
            if isinstance(other, (int, Fraction)):
                return GaussRat(self.re + other, self.im)
            return NotImplemented
        return GaussRat(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        if type(other) is not GaussRat:
            if isinstance(other, (int, Fraction)):
                return GaussRat(self.re - other, self.im)
            return NotImplemented
        return GaussRat(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if type(other) is not GaussRat:
            if isinstance(other, (int, Fraction)):
                return GaussRat(self.re * other, self.im * other)
            return NotImplemented
        a, b, c, d = self.re, self.im, other.re, other.im
        if not b:
            return GaussRat(a * c, a * d)
        if not d:
            return GaussRat(a * c, b * c)
        return GaussRat(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def inverse(self) -> "GaussRat":
        norm = self.re * self.re + self.im * self.im
        if not norm:
            raise ZeroDivisionError("GaussRat division by zero")
        return GaussRat(self.re / norm, -self.im / norm)

    def __truediv__(self, other):
        other = GaussRat.coerce(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return GaussRat.coerce(other) * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out, base = GaussRat(1), self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def conjugate(self) -> "GaussRat":
        return GaussRat(self.re, -self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def is_real(self) -> bool:
        return self.im == 0

    def __repr__(self):
        return f"GaussRat({format_gaussrat(self)!r})"

    def __str__(self):
        return format_gaussrat(self)


I = GaussRat(0, 1)
ONE = GaussRat(1)
ZERO = GaussRat(0)


def format_gaussrat(x: GaussRat) -> str:
    if not x.im:
        return str(x.re)
    im = "" if abs(x.im) == 1 else str(abs(x.im))
    if not x.re:
        return ("-" if x.im < 0 else "") + f"{im}i"
    sign = "-" if x.im < 0 else "+"
    return f"{x.re}{sign}{im}i"


_RAT = r"[+-]?\d+(?:/\d+)?"
_GAUSS_RE = re.compile(rf"^(?P<re>{_RAT})?(?:(?P<im>[+-]|[+-]?\d+(?:/\d+)?|{_RAT})?i)?$")


def parse_gaussrat(text: str) -> GaussRat:
    """Inverse of :func:`format_gaussrat` (``"3"``, ``"1/2-3/4i"``, ``"-i"``)."""
    s = text.strip().replace(" ", "")
    if not s:
        raise ValueError("empty Gaussian rational")
    if not s.endswith("i"):
        return GaussRat(Fraction(s))
    body = s[:-1]
    # split at the last sign that is not the leading one
    cut = max(body.rfind("+", 1), body.rfind("-", 1))
    if cut > 0 and body[cut - 1] not in "/":
        re_part, im_part = body[:cut], body[cut:]
    else:
        re_part, im_part = "0", body
    if im_part in ("", "+"):
        im_val = Fraction(1)
    elif im_part == "-":
        im_val = Fraction(-1)
    else:
        im_val = Fraction(im_part)
    return GaussRat(Fraction(re_part), im_val)


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------


def _deg_key(e: Exponent):
    return (sum(e), e)


class Poly:
    """Sparse polynomial in ``z^1..z^n, zbar^1..zbar^n`` (no zero coefficients)."""

    __slots__ = ("n", "terms", "_hash")

    def __init__(self, n: int, terms: Optional[Dict[Exponent, GaussRat]] = None, _clean: bool = False):
        self.n = n
        if terms is None:
            terms = {}
        elif not _clean:
            terms = {e: GaussRat.coerce(c) for e, c in terms.items()}
            terms = {e: c for e, c in terms.items() if c}
            for e in terms:
                if len(e) != 2 * n or any(x < 0 for x in e):
                    raise ValueError(f"bad exponent {e} for n={n}")
        self.terms = terms
        self._hash = None

    # construction helpers ---------------------------------------------------

    @classmethod
    def const(cls, n: int, value) -> "Poly":
        v = GaussRat.coerce(value)
        return cls(n, {(0,) * (2 * n): v} if v else {}, _clean=True)

    @classmethod
    def var(cls, n: int, index: int, conjugate: bool = False) -> "Poly":
        e = [0] * (2 * n)
        e[index + (n if conjugate else 0)] = 1
        return cls(n, {tuple(e): ONE}, _clean=True)

    @classmethod
    def monomial(cls, n: int, holo: Sequence[int], anti: Sequence[int] = None, coeff=1) -> "Poly":
        anti = anti if anti is not None else (0,) * n
        return cls(n, {tuple(holo) + tuple(anti): GaussRat.coerce(coeff)})

    # predicates ---------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not any(next(iter(self.terms))))

    def constant_term(self) -> GaussRat:
        return self.terms.get((0,) * (2 * self.n), ZERO)

    def is_holomorphic(self) -> bool:
        n = self.n
        return all(not any(e[n:]) for e in self.terms)

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def holo_degree(self) -> int:
        n = self.n
        return max((sum(e[:n]) for e in self.terms), default=-1)

    # ring operations ------------------------------------------------------------

    def _check(self, other: "Poly"):
        if other.n != self.n:
            raise ParamsMismatch(f"polynomials in {self.n} and {other.n} variables")

    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(self.n, other)
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e)
            if s is None:
                out[e] = c
            else:
                s = s + c
                if s:
                    out[e] = s
                else:
                    del out[e]
        return Poly(self.n, out, _clean=True)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.n, {e: -c for e, c in self.terms.items()}, _clean=True)

    def __sub__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(self.n, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, s) -> "Poly":
        s = GaussRat.coerce(s)
        if not s:
            return Poly(self.n)
        return Poly(self.n, {e: c * s for e, c in self.terms.items()}, _clean=True)

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(other)
        self._check(other)
        if len(self.terms) < len(other.terms):
            a, b = self.terms, other.terms
        else:
            a, b = other.terms, self.terms
        out: Dict[Exponent, GaussRat] = {}
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                prod = ca * cb
                s = out.get(e)
                out[e] = prod if s is None else s + prod
        return Poly(self.n, {e: c for e, c in out.items() if c}, _clean=True)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "Poly":
        if e < 0:
            raise ValueError("negative power of a polynomial")
        out, base = Poly.const(self.n, 1), self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.n == other.n and self.terms == other.terms
        if isinstance(other, (int, Fraction, GaussRat)):
            return self == Poly.const(self.n, other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, frozenset(self.terms.items())))
        return self._hash

    # calculus and involutions ------------------------------------------------------

    def diff(self, index: int, conjugate: bool = False) -> "Poly":
        slot = index + (self.n if conjugate else 0)
        out = {}
        for e, c in self.terms.items():
            p = e[slot]
            if p:
                e2 = list(e)
                e2[slot] = p - 1
                out[tuple(e2)] = c * p
        return Poly(self.n, out, _clean=True)

    def conjugate(self) -> "Poly":
        n = self.n
        return Poly(self.n, {e[n:] + e[:n]: c.conjugate() for e, c in self.terms.items()}, _clean=True)

    # division -------------------------------------------------------------------

    def leading(self) -> Tuple[Exponent, GaussRat]:
        e = max(self.terms, key=_deg_key)
        return e, self.terms[e]

    def divmod(self, divisor: "Poly") -> Tuple["Poly", "Poly"]:
        """Multivariate division by a single polynomial in graded-lex order.

        A single polynomial is trivially a Groebner basis of its ideal, so the
        remainder vanishes exactly when ``divisor`` divides ``self``.
        """
        self._check(divisor)
        if divisor.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        le, lc = divisor.leading()
        lc_inv = lc.inverse()
        rest = dict(self.terms)
        quot: Dict[Exponent, GaussRat] = {}
        rem: Dict[Exponent, GaussRat] = {}
        dterms = list(divisor.terms.items())
        while rest:
            e = max(rest, key=_deg_key)
            c = rest.pop(e)
            if all(x >= y for x, y in zip(e, le)):
                qe = tuple(x - y for x, y in zip(e, le))
                qc = c * lc_inv
                quot[qe] = quot.get(qe, ZERO) + qc
                for de, dc in dterms:
                    if de == le:
                        continue
                    te = tuple(x + y for x, y in zip(qe, de))
                    v = rest.get(te, ZERO) - qc * dc
                    if v:
                        rest[te] = v
                    else:
                        rest.pop(te, None)
            else:
                rem[e] = c
        return (Poly(self.n, {e: c for e, c in quot.items() if c}, _clean=True),
                Poly(self.n, rem, _clean=True))

    def exact_div(self, divisor: "Poly") -> "Poly":
        q, r = self.divmod(divisor)
        if not r.is_zero():
            raise NotDivisible("polynomial is not divisible")
        return q

    # evaluation ----------------------------------------------------------------------

    def eval(self, point: Sequence[complex]) -> complex:
        n = self.n
        zs = [complex(v) for v in point]
        vals = zs + [v.conjugate() for v in zs]
        maxp = [0] * (2 * n)
        for e in self.terms:
            for i, p in enumerate(e):
                if p > maxp[i]:
                    maxp[i] = p
        powers = []
        for i in range(2 * n):
            row = [1.0 + 0j]
            for _ in range(maxp[i]):
                row.append(row[-1] * vals[i])
            powers.append(row)
        total = 0j
        for e, c in self.terms.items():
            t = complex(c)
            for i, p in enumerate(e):
                if p:
                    t *= powers[i][p]
            total += t
        return total

    def eval_exact(self, point: Sequence[GaussRat]) -> GaussRat:
        pts = [GaussRat.coerce(v) for v in point]
        vals = pts + [v.conjugate() for v in pts]
        total = ZERO
        for e, c in self.terms.items():
            t = c
            for i, p in enumerate(e):
                if p:
                    t = t * vals[i] ** p
            total = total + t
        return total

    def holo_substitute_zero_anti(self) -> "Poly":
        """Keep only the terms free of ``zbar``."""
        n = self.n
        return Poly(n, {e: c for e, c in self.terms.items() if not any(e[n:])}, _clean=True)

    # text -----------------------------------------------------------------------------

    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"Poly({format_poly(self)!r})"


def format_poly(p: Poly) -> str:
    if p.is_zero():
        return "0"
    n = p.n
    parts = []
    for e in sorted(p.terms, key=_deg_key, reverse=True):
        factors = [format_gaussrat(p.terms[e])]
        for i in range(n):
            if e[i]:
                factors.append(f"z{i + 1}" + (f"^{e[i]}" if e[i] > 1 else ""))
        for i in range(n):
            if e[n + i]:
                factors.append(f"zb{i + 1}" + (f"^{e[n + i]}" if e[n + i] > 1 else ""))
        parts.append(" * ".join(factors))
    return " + ".join(parts)


_FACTOR = re.compile(r"^(zb|z)(\d+)(?:\^(\d+))?$")


def parse_poly(text: str, n: int) -> Poly:
    text = text.strip()
    if text == "0":
        return Poly(n)
    terms: Dict[Exponent, GaussRat] = {}
    for chunk in text.split(" + "):
        factors = [f.strip() for f in chunk.split(" * ")]
        coeff = parse_gaussrat(factors[0])
        e = [0] * (2 * n)
        for f in factors[1:]:
            m = _FACTOR.match(f)
            if not m:
                raise ValueError(f"cannot parse factor {f!r}")
            idx = int(m.group(2)) - 1
            if not 0 <= idx < n:
                raise ValueError(f"variable index out of range in {f!r}")
            slot = idx + (n if m.group(1) == "zb" else 0)
            e[slot] += int(m.group(3) or 1)
        key = tuple(e)
        terms[key] = terms.get(key, ZERO) + coeff
    return Poly(n, terms)


# ---------------------------------------------------------------------------
# A-fractions
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def a_poly(params: ModelParams) -> Poly:
    n = params.n
    terms = {(0,) * (2 * n): ONE}
    c = params.c
    if c:
        for v in range(n):
            e = [0] * (2 * n)
            e[v] = e[n + v] = 1
            terms[tuple(e)] = GaussRat(c)
    return Poly(n, terms, _clean=True)


@lru_cache(maxsize=None)
def a_power(params: ModelParams, m: int) -> Poly:
    if m == 0:
        return Poly.const(params.n, 1)
    return a_power(params, m - 1) * a_poly(params)


class AFrac:
    """Exact ``num / A^apow`` kept in canonical form (A never divides num)."""

    __slots__ = ("num", "apow", "params")

    def __init__(self, num: Poly, apow: int, params: ModelParams, canonical: bool = False):
        if num.n != params.n:
            raise ParamsMismatch("numerator variable count differs from params.n")
        if apow < 0:
            num = num * a_power(params, -apow)
            apow = 0
        if not canonical:
            num, apow = _canonicalize(num, apow, params)
        self.num = num
        self.apow = apow
        self.params = params

    # constructors ------------------------------------------------------------------

    @classmethod
    def const(cls, params: ModelParams, value) -> "AFrac":
        return cls(Poly.const(params.n, value), 0, params, canonical=True)

    @classmethod
    def zero(cls, params: ModelParams) -> "AFrac":
        return cls(Poly(params.n), 0, params, canonical=True)

    @classmethod
    def one(cls, params: ModelParams) -> "AFrac":
        return cls.const(params, 1)

    @classmethod
    def z(cls, params: ModelParams, index: int) -> "AFrac":
        return cls(Poly.var(params.n, index), 0, params, canonical=True)

    @classmethod
    def zbar(cls, params: ModelParams, index: int) -> "AFrac":
        return cls(Poly.var(params.n, index, conjugate=True), 0, params, canonical=True)

    @classmethod
    def A(cls, params: ModelParams) -> "AFrac":
        return cls(a_poly(params), 0, params, canonical=True)

    @classmethod
    def from_poly(cls, params: ModelParams, poly: Poly, apow: int = 0) -> "AFrac":
        return cls(poly, apow, params)

    # coercion ---------------------------------------------------------------------

    def _lift(self, other) -> "AFrac":
        if isinstance(other, AFrac):
            if other.params != self.params:
                raise ParamsMismatch(f"{self.params} vs {other.params}")
            return other
        if isinstance(other, Poly):
            return AFrac(other, 0, self.params)
        return AFrac.const(self.params, other)

    # predicates --------------------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.apow == 0 and self.num.is_constant()

    def is_holomorphic_poly(self) -> bool:
        return self.apow == 0 and self.num.is_holomorphic()

    def is_real(self) -> bool:
        return self.conjugate() == self

    # arithmetic ------------------------------------------------------------------------

    def __add__(self, other):
        other = self._lift(other)
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        m = max(self.apow, other.apow)
        a = self.num if self.apow == m else self.num * a_power(self.params, m - self.apow)
        b = other.num if other.apow == m else other.num * a_power(self.params, m - other.apow)
        return AFrac(a + b, m, self.params)

    __radd__ = __add__

    def __neg__(self):
        return AFrac(-self.num, self.apow, self.params, canonical=True)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, GaussRat)):
            s = GaussRat.coerce(other)
            if not s:
                return AFrac.zero(self.params)
            return AFrac(self.num.scale(s), self.apow, self.params, canonical=True)
        other = self._lift(other)
        return AFrac(self.num * other.num, self.apow + other.apow, self.params)

    __rmul__ = __mul__

    def __truediv__(self, other):
        """Division by scalars, by powers of A, or by a constant-numerator A-fraction."""
        if isinstance(other, (int, Fraction, GaussRat)):
            return self * GaussRat.coerce(other).inverse()
        return self * self._lift(other).inverse()

    def inverse(self) -> "AFrac":
        """Inverse when it stays in the ring: numerator must be ``c * A^j``."""
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero A-fraction")
        if self.num.is_constant():
            inv = self.num.constant_term().inverse()
            return AFrac(a_power(self.params, self.apow).scale(inv), 0, self.params)
        # a numerator c * A^j only survives canonicalization when apow == 0
        if self.apow == 0 and self.params.k != 0:
            j = 0
            num = self.num
            A = a_poly(self.params)
            while not num.is_constant():
                q, r = num.divmod(A)
                if not r.is_zero():
                    raise NotDivisible(f"{self} has no inverse among A-fractions")
                num, j = q, j + 1
            return AFrac(Poly.const(self.params.n, num.constant_term().inverse()), j, self.params)
        raise NotDivisible(f"{self} has no inverse among A-fractions")

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return AFrac(self.num ** e, self.apow * e, self.params)

    def __eq__(self, other):
        if isinstance(other, AFrac):
            return self.params == other.params and self.apow == other.apow and self.num == other.num
        if isinstance(other, (int, Fraction, GaussRat)):
            return self.apow == 0 and self.num == Poly.const(self.params.n, other)
        return NotImplemented

    def __hash__(self):
        return hash((self.num, self.apow, self.params))

    # calculus and involutions -------------------------------------------------------

    def diff(self, index: int, conjugate: bool = False) -> "AFrac":
        """Partial derivative by quotient rule: d(P/A^m) = (dP*A - m*P*dA)/A^(m+1)."""
        dP = self.num.diff(index, conjugate)
        m = self.apow
        if m == 0:
            return AFrac(dP, 0, self.params)
        A = a_poly(self.params)
        dA = A.diff(index, conjugate)
        return AFrac(dP * A - (self.num * dA).scale(m), m + 1, self.params)

    def conjugate(self) -> "AFrac":
        return AFrac(self.num.conjugate(), self.apow, self.params, canonical=True)

    def real_part(self) -> "AFrac":
        return (self + self.conjugate()) * Fraction(1, 2)

    # evaluation --------------------------------------------------------------------------

    def a_value(self, point: Sequence[complex]) -> complex:
        return a_poly(self.params).eval(point)

    def eval(self, point: Sequence[complex]) -> complex:
        if len(point) != self.params.n:
            raise ValueError(f"expected a point in C^{self.params.n}")
        A = a_poly(self.params).eval(point)
        if self.params.k < 0 and A.real <= 1e-14:
            raise DomainError(f"point {tuple(point)} is not inside the domain (A={A.real:.3g})")
        val = self.num.eval(point)
        return val / A ** self.apow if self.apow else val

    def eval_exact(self, point: Sequence[GaussRat]) -> GaussRat:
        A = a_poly(self.params).eval_exact(point)
        if not A or (self.params.k < 0 and A.re <= 0):
            raise DomainError(f"point is not inside the domain (A={A})")
        val = self.num.eval_exact(point)
        return val / A ** self.apow if self.apow else val

    # text ---------------------------------------------------------------------------------

    def __str__(self):
        return f"({format_poly(self.num)})/A^{self.apow}"

    def __repr__(self):
        return f"AFrac({self})"


def _canonicalize(num: Poly, apow: int, params: ModelParams) -> Tuple[Poly, int]:
    if num.is_zero():
        return num, 0
    if params.k == 0:
        return num, 0
    A = a_poly(params)
    while apow > 0:
        q, r = num.divmod(A)
        if not r.is_zero():
            break
        num, apow = q, apow - 1
    return num, apow


def canonicalize(a: AFrac) -> AFrac:
    num, apow = _canonicalize(a.num, a.apow, a.params)
    return AFrac(num, apow, a.params, canonical=True)


_AFRAC_RE = re.compile(r"^\((?P<num>.*)\)/A\^(?P<m>\d+)$")


def parse_afrac(text: str, params: ModelParams) -> AFrac:
    m = _AFRAC_RE.match(text.strip())
    if not m:
        raise ValueError(f"not an A-fraction string: {text!r}")
    return AFrac(parse_poly(m.group("num"), params.n), int(m.group("m")), params)


# functional aliases matching the operation names used in reports ---------------------


def add(a: AFrac, b: AFrac) -> AFrac:
    return a + b


def mul(a: AFrac, b: AFrac) -> AFrac:
    return a * b


def ddz(a: AFrac, index: int, conjugate: bool = False) -> AFrac:
    return a.diff(index, conjugate)


def evaluate(a: AFrac, point: Sequence[complex]) -> complex:
    return a.eval(point)


# small matrix helpers over the A-fraction ring ----------------------------------------


Matrix = list  # list of lists of AFrac


def mat_mul(X: Matrix, Y: Matrix) -> Matrix:
    rows, inner, cols = len(X), len(Y), len(Y[0])
    out = []
    for i in range(rows):
        row = []
        for j in range(cols):
            acc = X[i][0] * Y[0][j]
            for t in range(1, inner):
                acc = acc + X[i][t] * Y[t][j]
            row.append(acc)
        out.append(row)
    return out


def mat_det(X: Matrix) -> AFrac:
    """Determinant by cofactor expansion; sizes here never exceed 3 or 4."""
    size = len(X)
    if size == 1:
        return X[0][0]
    if size == 2:
        return X[0][0] * X[1][1] - X[0][1] * X[1][0]
    total = None
    for j in range(size):
        minor = [row[:j] + row[j + 1:] for row in X[1:]]
        term = X[0][j] * mat_det(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total


def mat_inverse(X: Matrix) -> Matrix:
    """Exact inverse via the adjugate; the determinant must be invertible in the ring."""
    size = len(X)
    det_inv = mat_det(X).inverse()
    if size == 1:
        return [[det_inv]]
    out = [[None] * size for _ in range(size)]
    for i in range(size):
        for j in range(size):
            minor = [row[:j] + row[j + 1:] for r, row in enumerate(X) if r != i]
            cof = mat_det(minor)
            if (i + j) % 2:
                cof = -cof
            out[j][i] = cof * det_inv
    return out


def is_identity(X: Matrix) -> bool:
    return all((X[i][j] == (1 if i == j else 0)) for i in range(len(X)) for j in range(len(X)))


def iter_nonzero(entries: Iterable[AFrac]) -> Iterator[AFrac]:
    return (e for e in entries if not e.is_zero())
