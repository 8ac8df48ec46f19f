"""Exact Gaussian-rational scalars: a + b*i with rational a, b.

Every coefficient in the package lives in this field; no floating point
enters any computation path.  Values are immutable and hashable.
"""

from __future__ import annotations

import re as _re
from fractions import Fraction
from typing import Union

from .errors import ParseError

_RatLike = Union[int, Fraction]
_GRLike = Union["GaussianRational", int, Fraction, str]


class GaussianRational:
    """An exact complex number with rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re: _RatLike = 0, im: _RatLike = 0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    # -- constructors -------------------------------------------------

    @staticmethod
    def coerce(value: _GRLike) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Fraction)):
            return GaussianRational(value)
        if isinstance(value, str):
            return parse_scalar(value)
        raise TypeError(f"cannot coerce {type(value).__name__} to GaussianRational")

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other: _GRLike) -> "GaussianRational":
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other: _GRLike) -> "GaussianRational":
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other: _GRLike) -> "GaussianRational":
        return GaussianRational.coerce(other) - self

    def __mul__(self, other: _GRLike) -> "GaussianRational":
        o = GaussianRational.coerce(other)
        return GaussianRational(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other: _GRLike) -> "GaussianRational":
        o = GaussianRational.coerce(other)
        d = o.re * o.re + o.im * o.im
        if d == 0:
            raise ZeroDivisionError("division by zero GaussianRational")
        return GaussianRational(
            (self.re * o.re + self.im * o.im) / d,
            (self.im * o.re - self.re * o.im) / d,
        )

    def __rtruediv__(self, other: _GRLike) -> "GaussianRational":
        return GaussianRational.coerce(other) / self

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm2(self) -> Fraction:
        """|z|^2 = re^2 + im^2 as an exact rational."""
        return self.re * self.re + self.im * self.im

    def inverse(self) -> "GaussianRational":
        return GaussianRational(1) / self

    # -- predicates / hashing -------------------------------------------

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_real(self) -> bool:
        return self.im == 0

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction, str, GaussianRational)):
            o = GaussianRational.coerce(other)
            return self.re == o.re and self.im == o.im
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    # bit size of the stored fractions; used for pivot selection
    def bit_size(self) -> int:
        return (
            self.re.numerator.bit_length()
            + self.re.denominator.bit_length()
            + self.im.numerator.bit_length()
            + self.im.denominator.bit_length()
        )

    # -- printing -------------------------------------------------------

    def __str__(self) -> str:
        return format_scalar(self)

    def __repr__(self) -> str:
        return f"GaussianRational({self.re!r}, {self.im!r})"

    def to_complex(self) -> complex:
        """Float approximation; only for test oracles and display."""
        return complex(float(self.re), float(self.im))


GR = GaussianRational
ZERO = GR(0)
ONE = GR(1)
I = GR(0, 1)


def _format_fraction(f: Fraction) -> str:
    if f.denominator == 1:
        return str(f.numerator)
    return f"{f.numerator}/{f.denominator}"


def format_scalar(z: GaussianRational) -> str:
    """Canonical text form: lowest terms, no spaces, e.g. "-1/2+3/4i"."""
    if z.im == 0:
        return _format_fraction(z.re)
    im_abs = _format_fraction(abs(z.im)) + "i"
    sign = "+" if z.im > 0 else "-"
    if z.re == 0:
        return ("" if z.im > 0 else "-") + im_abs
    return _format_fraction(z.re) + sign + im_abs


_RAT = r"(?:\d+(?:/\d+)?)"
_SCALAR_RE = _re.compile(
    rf"^(?P<sign1>[+-]?)(?:"
    rf"(?P<re>{_RAT})(?:(?P<sign2>[+-])(?P<im>{_RAT})?i)?"
    rf"|(?P<im_only>{_RAT})?i"
    rf")$"
)


def parse_scalar(text: str) -> GaussianRational:
    """Parse "p/q", "p/q+r/si", "i", "-i", "3i", "1/2-3/4i"."""
    s = text.strip().replace(" ", "")
    if not s:
        raise ParseError("empty scalar literal")
    m = _SCALAR_RE.match(s)
    if m is None:
        raise ParseError(f"bad scalar literal {text!r}")
    sign1 = -1 if m.group("sign1") == "-" else 1
    if m.group("im_only") is not None or (m.group("re") is None and s.rstrip("i") in ("", "+", "-")):
        frac = m.group("im_only")
        return GaussianRational(0, sign1 * Fraction(frac if frac else 1))
    re_part = sign1 * Fraction(m.group("re"))
    if m.group("sign2") is None:
        return GaussianRational(re_part)
    sign2 = -1 if m.group("sign2") == "-" else 1
    im_frac = m.group("im")
    im_part = sign2 * Fraction(im_frac if im_frac else 1)
    return GaussianRational(re_part, im_part)
