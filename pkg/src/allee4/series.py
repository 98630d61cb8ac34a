"""Dense truncated univariate power series.

All analytic derivatives in this package (response/growth functions,
normal-form coefficient pipelines, the potential involution) are computed
through this small arithmetic kernel rather than hand-coded derivative
formulas, so there is a single source of truth; closed-form spot checks
live in the test suite.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TruncatedSeries",
    "series_mul",
    "series_compose",
    "series_reciprocal",
    "involution_solve",
    "OrderMismatchError",
    "CompositionDomainError",
    "DegenerateMinimumError",
]

DEFAULT_ORDER = 8


class OrderMismatchError(ValueError):
    """Binary operation on series with different truncation orders."""


class CompositionDomainError(ValueError):
    """Inner series of a composition has a nonzero constant term."""


class DegenerateMinimumError(ValueError):
    """Potential does not have a nondegenerate minimum at the origin."""


@dataclass(frozen=True)
class TruncatedSeries:
    """Polynomial c0 + c1 x + ... + cN x^N; arithmetic truncates at degree N."""

    coeffs: np.ndarray
    order: int = field(default=DEFAULT_ORDER)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 1 or len(c) != self.order + 1:
            raise ValueError(f"need {self.order + 1} coefficients, got shape {c.shape}")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_coeffs(cls, coeffs, order: int | None = None) -> "TruncatedSeries":
        c = np.atleast_1d(np.asarray(coeffs, dtype=float))
        n = len(c) - 1 if order is None else order
        out = np.zeros(n + 1)
        out[: min(len(c), n + 1)] = c[: n + 1]
        return cls(out, n)

    @classmethod
    def variable(cls, order: int = DEFAULT_ORDER) -> "TruncatedSeries":
        c = np.zeros(order + 1)
        c[1] = 1.0
        return cls(c, order)

    @classmethod
    def constant(cls, value: float, order: int = DEFAULT_ORDER) -> "TruncatedSeries":
        c = np.zeros(order + 1)
        c[0] = value
        return cls(c, order)

    def __add__(self, other):
        if isinstance(other, TruncatedSeries):
            self._check(other)
            return TruncatedSeries(self.coeffs + other.coeffs, self.order)
        c = self.coeffs.copy()
        c[0] += other
        return TruncatedSeries(c, self.order)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, TruncatedSeries):
            self._check(other)
            return TruncatedSeries(self.coeffs - other.coeffs, self.order)
        c = self.coeffs.copy()
        c[0] -= other
        return TruncatedSeries(c, self.order)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return TruncatedSeries(-self.coeffs, self.order)

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return series_mul(self, other)
        return TruncatedSeries(self.coeffs * float(other), self.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, TruncatedSeries):
            return series_mul(self, series_reciprocal(other))
        return TruncatedSeries(self.coeffs / float(other), self.order)

    def __rtruediv__(self, other):
        return series_reciprocal(self) * float(other)

    def __call__(self, x: float) -> float:
        # Horner evaluation of the truncated polynomial
        acc = 0.0
        for c in self.coeffs[::-1]:
            acc = acc * x + c
        return acc

    def _check(self, other: "TruncatedSeries"):
        if self.order != other.order:
            raise OrderMismatchError(f"orders differ: {self.order} != {other.order}")

    def derivative_at_origin(self, k: int) -> float:
        """k-th derivative at the expansion point, i.e. k! * coeffs[k]."""
        if k > self.order:
            raise ValueError(f"derivative order {k} exceeds truncation {self.order}")
        return float(self.coeffs[k]) * _fact(k)

    def integrate(self) -> "TruncatedSeries":
        """Antiderivative with zero constant term (degree N+1 term dropped)."""
        c = np.zeros(self.order + 1)
        k = np.arange(1, self.order + 1)
        c[1:] = self.coeffs[:-1] / k
        return TruncatedSeries(c, self.order)

    def differentiate(self) -> "TruncatedSeries":
        c = np.zeros(self.order + 1)
        k = np.arange(1, self.order + 1)
        c[:-1] = self.coeffs[1:] * k
        return TruncatedSeries(c, self.order)

    def truncate(self, order: int) -> "TruncatedSeries":
        if order <= self.order:
            return TruncatedSeries(self.coeffs[: order + 1].copy(), order)
        c = np.zeros(order + 1)
        c[: self.order + 1] = self.coeffs
        return TruncatedSeries(c, order)


def _fact(k: int) -> int:
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


def series_mul(f: TruncatedSeries, g: TruncatedSeries) -> TruncatedSeries:
    """Cauchy product truncated to the common order."""
    f._check(g)
    full = np.convolve(f.coeffs, g.coeffs)
    return TruncatedSeries(full[: f.order + 1], f.order)


def series_reciprocal(f: TruncatedSeries) -> TruncatedSeries:
    """1/f for f with nonzero constant term."""
    f0 = f.coeffs[0]
    if f0 == 0.0:
        raise ZeroDivisionError("series has zero constant term")
    n = f.order
    r = np.zeros(n + 1)
    r[0] = 1.0 / f0
    for k in range(1, n + 1):
        r[k] = -np.dot(f.coeffs[1 : k + 1], r[k - 1 :: -1][: k]) / f0
    return TruncatedSeries(r, n)


def series_compose(f: TruncatedSeries, g: TruncatedSeries) -> TruncatedSeries:
    """f(g(x)) truncated; requires g(0) = 0 so truncation is exact."""
    f._check(g)
    g0 = g.coeffs[0]
    scale = max(1.0, float(np.max(np.abs(g.coeffs))))
    if abs(g0) > 1e-13 * scale:
        raise CompositionDomainError(f"inner constant term {g0!r} is not zero")
    if g0 != 0.0:
        g = TruncatedSeries(np.concatenate(([0.0], g.coeffs[1:])), g.order)
    # Horner on series
    acc = TruncatedSeries.constant(f.coeffs[-1], f.order)
    for c in f.coeffs[-2::-1]:
        acc = series_mul(acc, g) + c
    return acc


def involution_solve(H: TruncatedSeries) -> TruncatedSeries:
    """Solve H(theta(x)) = H(x) for the involution theta(x) = -x + O(x^2).

    Requires H(0) = H'(0) = 0 and H''(0) > 0.  The degree-(k+1) coefficient
    of H(theta) - H is linear in theta_k with slope -2 H_2, so the expansion
    is solved coefficient by coefficient.
    """
    n = H.order
    c = H.coeffs
    scale = max(1.0, float(np.max(np.abs(c))))
    if abs(c[0]) > 1e-13 * scale or abs(c[1]) > 1e-13 * scale:
        raise DegenerateMinimumError("H must vanish to second order at 0")
    H2 = c[2]
    if H2 <= 0.0:
        raise DegenerateMinimumError(f"H''(0)/2 = {H2!r} is not positive")

    theta = np.zeros(n + 1)
    theta[1] = -1.0
    th = TruncatedSeries(theta, n)
    for k in range(2, n):
        resid = series_compose(H, th) - H
        th_c = th.coeffs.copy()
        th_c[k] += resid.coeffs[k + 1] / (2.0 * H2)
        th = TruncatedSeries(th_c, n)
    return th
