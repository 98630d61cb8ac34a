"""Double-double (compensated) arithmetic.

The degenerate-Hopf certification rectangle is ~5e-8 wide against
coordinates of size ~70, and the certified functions nearly cancel there,
so plain doubles can flip signs near the edges.  Values are (hi, lo) pairs
with hi + lo the represented number and |lo| <= ulp(hi)/2.
"""
from __future__ import annotations

import math

__all__ = ["DD", "dd", "two_sum", "two_prod"]

_SPLIT = 134217729.0  # 2^27 + 1


def two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _quick_two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    return s, b - (s - a)


def _split(a: float) -> tuple[float, float]:
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


if hasattr(math, "fma"):
    def two_prod(a: float, b: float) -> tuple[float, float]:
        p = a * b
        return p, math.fma(a, b, -p)
else:
    def two_prod(a: float, b: float) -> tuple[float, float]:
        p = a * b
        ahi, alo = _split(a)
        bhi, blo = _split(b)
        return p, ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo


class DD:
    """Immutable double-double number."""

    __slots__ = ("hi", "lo")

    def __init__(self, hi: float, lo: float = 0.0):
        self.hi = float(hi)
        self.lo = float(lo)

    def __float__(self):
        return self.hi + self.lo

    def __repr__(self):
        return f"DD({self.hi!r}, {self.lo!r})"

    def __neg__(self):
        return DD(-self.hi, -self.lo)

    def __add__(self, other):
        o = other if isinstance(other, DD) else DD(other)
        s, e = two_sum(self.hi, o.hi)
        t, f = two_sum(self.lo, o.lo)
        e += t
        s, e = _quick_two_sum(s, e)
        e += f
        hi, lo = _quick_two_sum(s, e)
        return DD(hi, lo)

    __radd__ = __add__

    def __sub__(self, other):
        o = other if isinstance(other, DD) else DD(other)
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = other if isinstance(other, DD) else DD(other)
        p, e = two_prod(self.hi, o.hi)
        e += self.hi * o.lo + self.lo * o.hi
        hi, lo = _quick_two_sum(p, e)
        return DD(hi, lo)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = other if isinstance(other, DD) else DD(other)
        q1 = self.hi / o.hi
        r = self - o * DD(q1)
        q2 = r.hi / o.hi
        r = r - o * DD(q2)
        q3 = r.hi / o.hi
        s, e = _quick_two_sum(q1, q2)
        e += q3
        hi, lo = _quick_two_sum(s, e)
        return DD(hi, lo)

    def __rtruediv__(self, other):
        return DD(other) / self

    def __lt__(self, other):
        o = other if isinstance(other, DD) else DD(other)
        return self.hi < o.hi or (self.hi == o.hi and self.lo < o.lo)

    def __gt__(self, other):
        o = other if isinstance(other, DD) else DD(other)
        return self.hi > o.hi or (self.hi == o.hi and self.lo > o.lo)

    def __abs__(self):
        return -self if self.hi < 0 else self

    @property
    def sign(self) -> int:
        v = self.hi if self.hi != 0.0 else self.lo
        return (v > 0) - (v < 0)


def dd(x) -> DD:
    return x if isinstance(x, DD) else DD(x)
