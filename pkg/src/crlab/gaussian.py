"""Exact Gaussian rationals, i.e. complex numbers with rational parts.

Values are stored as three integers ``(re_num, im_num, den)`` sharing one
positive denominator, reduced so that ``gcd(re_num, im_num, den) == 1``.
This is considerably faster than a pair of :class:`fractions.Fraction`.
"""

from __future__ import annotations

import numbers
from fractions import Fraction
from math import gcd

__all__ = ["GaussianRational", "as_gaussian", "I", "ZERO", "ONE"]


def _make(re_num: int, im_num: int, den: int) -> "GaussianRational":
    if den < 0:
        re_num, im_num, den = -re_num, -im_num, -den
    g = gcd(re_num, im_num, den)
    if g != 1:
        re_num //= g
        im_num //= g
        den //= g
    obj = object.__new__(GaussianRational)
    obj._a = re_num
    obj._b = im_num
    obj._d = den
    return obj


class GaussianRational:
    """An exact element of Q(i).

    >>> GaussianRational(1, 2) * GaussianRational(0, 1)
    GaussianRational('-2')
    """

    __slots__ = ("_a", "_b", "_d")

    def __new__(cls, re=0, im=0):
        re = _to_fraction(re)
        im = _to_fraction(im)
        den = re.denominator * im.denominator // gcd(re.denominator, im.denominator)
        return _make(re.numerator * (den // re.denominator),
                     im.numerator * (den // im.denominator), den)

    @property
    def re(self) -> Fraction:
        return Fraction(self._a, self._d)

    @property
    def im(self) -> Fraction:
        return Fraction(self._b, self._d)

    real = re
    imag = im

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (complex, float)):
            return complex(self) + other
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        d1, d2 = self._d, other._d
        if d1 == d2:
            return _make(self._a + other._a, self._b + other._b, d1)
        return _make(self._a * d2 + other._a * d1, self._b * d2 + other._b * d1, d1 * d2)

    __radd__ = __add__

    def __neg__(self):
        return _make(-self._a, -self._b, self._d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, (complex, float)):
            return complex(self) - other
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        if isinstance(other, (complex, float)):
            return other - complex(self)
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (complex, float)):
            return complex(self) * other
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b, c, e = self._a, self._b, other._a, other._b
        return _make(a * c - b * e, a * e + b * c, self._d * other._d)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (complex, float)):
            return complex(self) / other
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        if isinstance(other, (complex, float)):
            return other / complex(self)
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def inverse(self) -> "GaussianRational":
        a, b, d = self._a, self._b, self._d
        norm = a * a + b * b
        if norm == 0:
            raise ZeroDivisionError("GaussianRational division by zero")
        # (a + bi)/d inverted: d (a - bi) / (a^2 + b^2)
        return _make(d * a, -d * b, norm)

    def conjugate(self) -> "GaussianRational":
        return _make(self._a, -self._b, self._d)

    def norm2(self) -> Fraction:
        """|x|^2 as an exact rational."""
        return Fraction(self._a * self._a + self._b * self._b, self._d * self._d)

    # predicates -------------------------------------------------------------

    def __bool__(self) -> bool:
        return self._a != 0 or self._b != 0

    def is_real(self) -> bool:
        return self._b == 0

    def __eq__(self, other) -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._a == other._a and self._b == other._b and self._d == other._d

    def __hash__(self) -> int:
        if self._b == 0:
            return hash(Fraction(self._a, self._d))
        return hash((self._a, self._b, self._d))

    # conversions ------------------------------------------------------------

    def __complex__(self) -> complex:
        return complex(self._a / self._d, self._b / self._d)

    def __float__(self) -> float:
        if self._b:
            raise TypeError("cannot convert non-real GaussianRational to float")
        return self._a / self._d

    def __repr__(self) -> str:
        return f"GaussianRational('{self}')"

    def __str__(self) -> str:
        re, im = self.re, self.im
        if im == 0:
            return str(re)
        if re == 0:
            return _imag_str(im)
        sign = "-" if im < 0 else "+"
        return f"{re} {sign} {_imag_str(abs(im))}"

    def to_json(self):
        """Exact JSON form: ``{"re": "a/b", "im": "c/d"}``."""
        return {"re": str(self.re), "im": str(self.im)}


def _imag_str(x: Fraction) -> str:
    if x == 1:
        return "i"
    if x == -1:
        return "-i"
    if x.denominator == 1:
        return f"{x.numerator}*i"
    return f"{x.numerator}/{x.denominator}*i"


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, numbers.Rational):
        return Fraction(x.numerator, x.denominator)
    raise TypeError(f"cannot make an exact rational from {x!r}")


def _coerce(x):
    # floats/complex are handled by _mixed before reaching here
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, int):
        return _make(x, 0, 1)
    if isinstance(x, Fraction):
        return _make(x.numerator, 0, x.denominator)
    return NotImplemented


def as_gaussian(x) -> GaussianRational:
    """Coerce ints, Fractions, strings like ``"3/5"`` or exact complex pairs."""
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (int, Fraction, str)):
        return GaussianRational(x)
    if isinstance(x, dict):
        return GaussianRational(x.get("re", 0), x.get("im", 0))
    if isinstance(x, (tuple, list)) and len(x) == 2:
        return GaussianRational(x[0], x[1])
    raise TypeError(f"cannot coerce {x!r} to GaussianRational")


ZERO = _make(0, 0, 1)
ONE = _make(1, 0, 1)
I = _make(0, 1, 1)
