"""Exact scalars: rationals (:class:`fractions.Fraction`) and complex rationals.

Real values are always kept as ``Fraction``; a :class:`ComplexRational` only
appears when the imaginary part is nonzero.  Use :func:`make` to build a
scalar from parts so that this normalisation holds everywhere.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Union

Exact = Union[Fraction, "ComplexRational"]


class ComplexRational:
    __slots__ = ("re", "im")

    def __init__(self, re: Fraction, im: Fraction):
        self.re = Fraction(re)
        self.im = Fraction(im)

    # arithmetic -----------------------------------------------------------
    @staticmethod
    def _parts(x):
        if isinstance(x, ComplexRational):
            return x.re, x.im
        if isinstance(x, (int, Fraction)):
            return Fraction(x), Fraction(0)
        return None

    def __add__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return make(self.re + p[0], self.im + p[1])

    __radd__ = __add__

    def __sub__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return make(self.re - p[0], self.im - p[1])

    def __rsub__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return make(p[0] - self.re, p[1] - self.im)

    def __mul__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        a, b = self.re, self.im
        c, d = p
        return make(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        c, d = p
        den = c * c + d * d
        if den == 0:
            raise ZeroDivisionError("complex rational division by zero")
        a, b = self.re, self.im
        return make((a * c + b * d) / den, (b * c - a * d) / den)

    def __rtruediv__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return ComplexRational(*p) / self

    def __neg__(self):
        return ComplexRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return 1 / (self ** (-n))
        out: Exact = Fraction(1)
        base: Exact = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self):
        return ComplexRational(self.re, -self.im)

    # comparison / hashing -------------------------------------------------
    def __eq__(self, other):
        p = self._parts(other)
        if p is None:
            if isinstance(other, complex):
                return complex(self) == other
            return NotImplemented
        return self.re == p[0] and self.im == p[1]

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"ComplexRational({self.re!s}, {self.im!s})"

    def __str__(self):
        return format_exact(self)


def make(re, im=0) -> Exact:
    """Build an exact scalar, collapsing to ``Fraction`` when ``im == 0``."""
    im = Fraction(im)
    if im == 0:
        return Fraction(re)
    return ComplexRational(Fraction(re), im)


def to_exact(x) -> Exact:
    """Coerce int / Fraction / ComplexRational / decimal string to an exact scalar.

    Floats are refused: every exact quantity must enter the library as a
    rational.  Use ``Fraction(float)`` explicitly if that is really intended.
    """
    if isinstance(x, ComplexRational):
        return make(x.re, x.im)
    if isinstance(x, bool):
        return Fraction(int(x))
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        return parse_exact(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact scalar")


def conj(x: Exact) -> Exact:
    if isinstance(x, ComplexRational):
        return x.conjugate()
    return x


def is_real(x: Exact) -> bool:
    return not isinstance(x, ComplexRational)


def real_part(x: Exact) -> Fraction:
    return x.re if isinstance(x, ComplexRational) else Fraction(x)


def imag_part(x: Exact) -> Fraction:
    return x.im if isinstance(x, ComplexRational) else Fraction(0)


def abs2(x: Exact) -> Fraction:
    """|x|^2, exact."""
    if isinstance(x, ComplexRational):
        return x.re * x.re + x.im * x.im
    return Fraction(x) * Fraction(x)


def sqrt_upper(q: Fraction, bits: int = 96) -> tuple[Fraction, bool]:
    """Return ``(r, exact)`` with ``r >= sqrt(q)``; ``exact`` when r is the square root."""
    q = Fraction(q)
    if q < 0:
        raise ValueError("negative input")
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd), True
    scale = 1 << bits
    # ceil(sqrt(q) * scale) / scale
    target = (n * scale * scale + d - 1) // d
    r = math.isqrt(target)
    if r * r < target:
        r += 1
    return Fraction(r, scale), False


def modulus(x: Exact) -> tuple[Fraction, bool]:
    """|x| as an exact rational when possible, else a tight rational upper bound."""
    if isinstance(x, ComplexRational):
        return sqrt_upper(abs2(x))
    return abs(Fraction(x)), True


def to_complex(x) -> complex:
    if isinstance(x, ComplexRational):
        return complex(x)
    return complex(float(x))


# formatting / parsing -------------------------------------------------------

def _fmt_q(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_exact(x: Exact) -> str:
    """``p/q`` for rationals, ``a+bi`` / ``a-bi`` for complex rationals."""
    if isinstance(x, ComplexRational):
        im = x.im
        sign = "-" if im < 0 else "+"
        if x.re == 0:
            return f"{'-' if im < 0 else ''}{_fmt_q(abs(im))}i"
        return f"{_fmt_q(x.re)}{sign}{_fmt_q(abs(im))}i"
    return _fmt_q(Fraction(x))


_RAT = r"[+-]?\d+(?:/\d+|\.\d+)?"
_COMPLEX_RE = re.compile(rf"^\s*(?P<re>{_RAT})?\s*(?:(?P<im>[+-]\s*(?:\d+(?:/\d+|\.\d+)?)?)i)?\s*$")


def parse_exact(text: str) -> Exact:
    """Parse ``3``, ``-1/2``, ``0.25``, ``1/2+1/3i``, ``-2i``, ``i``."""
    s = text.strip().replace(" ", "")
    if not s:
        raise ValueError("empty scalar")
    m = _COMPLEX_RE.match(s)
    if m is None or (m.group("re") is None and m.group("im") is None):
        # pure imaginary with no explicit sign, e.g. "1/3i" or "i"
        if s.endswith("i"):
            body = s[:-1]
            return make(0, Fraction(body) if body not in ("", "+", "-") else Fraction(f"{body}1"))
        raise ValueError(f"cannot parse exact scalar {text!r}")
    re_part = Fraction(m.group("re")) if m.group("re") else Fraction(0)
    im_txt = m.group("im")
    if im_txt is None:
        if m.group("re") is not None and s.endswith("i"):
            # "3i": the regex matched "3" as the real part
            return make(0, re_part)
        return re_part
    im_txt = im_txt.replace(" ", "")
    if im_txt in ("+", "-"):
        im_txt += "1"
    return make(re_part, Fraction(im_txt))
