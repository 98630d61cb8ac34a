"""Scaled predator-prey model with Holling type IV response and Allee effect.

    x' = p(x) (G(x) - y),      p(x) = x / (a x^2 + b x + 1)
    y' = y (p(x) - d),         G(x) = (x - A)(K - x)(a x^2 + b x + 1)

Equilibria, linearization, stability classification and the parameter-region
map in the (d, A) plane.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .series import TruncatedSeries, series_mul, series_reciprocal

__all__ = [
    "ModelParams",
    "ParamError",
    "scale_params",
    "eval_pG",
    "h_roots",
    "equilibria",
    "region",
    "trap_bound",
    "EquilibriumReport",
    "StabilityClass",
    "Stability",
    "Region",
    "RegionLabel",
    "TOL_HYP",
    "TOL_COAL",
]

TOL_HYP = 1e-9    # |Re lambda| below TOL_HYP * spectral radius => nonhyperbolic
TOL_COAL = 1e-10  # relative tolerance on (d_m - d)/d_m for root coalescence
TOL_MEMBER = 1e-12  # open-interval membership tolerance for interior equilibria


class ParamError(ValueError):
    """Model parameter constraint violated."""


@dataclass(frozen=True)
class ModelParams:
    """Scaled parameters.  K, a, d > 0, b > -2 sqrt(a), -K < A < K."""

    K: float
    A: float
    a: float
    b: float
    d: float

    def __post_init__(self):
        if not (self.K > 0):
            raise ParamError(f"K must be positive, got {self.K}")
        if not (self.a > 0):
            raise ParamError(f"a must be positive, got {self.a}")
        if not (self.d > 0):
            raise ParamError(f"d must be positive, got {self.d}")
        if not (self.b > -2.0 * math.sqrt(self.a)):
            raise ParamError(f"b must exceed -2 sqrt(a) = {-2*math.sqrt(self.a)}, got {self.b}")
        if not (-self.K < self.A < self.K):
            raise ParamError(f"A must lie in (-K, K) = ({-self.K}, {self.K}), got {self.A}")

    @property
    def ell(self) -> float:
        """K sqrt(a), the shape parameter controlling the degenerate cases."""
        return self.K * math.sqrt(self.a)

    @property
    def d_m(self) -> float:
        """Death rate at which the interior equilibria coalesce."""
        return 1.0 / (self.b + 2.0 * math.sqrt(self.a))

    @property
    def x_peak(self) -> float:
        """Argmax of the response function, 1/sqrt(a)."""
        return 1.0 / math.sqrt(self.a)

    def p(self, x: float) -> float:
        return x / (self.a * x * x + self.b * x + 1.0)

    def G(self, x: float) -> float:
        return (x - self.A) * (self.K - x) * (self.a * x * x + self.b * x + 1.0)

    def rhs(self, x: float, y: float) -> tuple[float, float]:
        q = self.a * x * x + self.b * x + 1.0
        p = x / q
        return p * ((x - self.A) * (self.K - x) * q - y), y * (p - self.d)

    def jacobian(self, x: float, y: float) -> np.ndarray:
        """Variational matrix, derivatives taken through series arithmetic."""
        ps, Gs = eval_pG(self, x, 2)
        p, p1 = ps.coeffs[0], ps.coeffs[1]
        G, G1 = Gs.coeffs[0], Gs.coeffs[1]
        return np.array([
            [p1 * (G - y) + p * G1, -p],
            [p1 * y, p - self.d],
        ])


def scale_params(r, K0, A0, a0, b0, c, d0, m) -> ModelParams:
    """Map the raw 8-parameter model onto the five scaled parameters."""
    if min(r, K0, m, c, d0, a0) <= 0:
        raise ParamError("r, K, m, c, d, a must all be positive")
    if not (b0 > -2.0 * math.sqrt(a0)):
        raise ParamError("b must exceed -2 sqrt(a)")
    if not (-K0 < A0 < K0):
        raise ParamError("A must lie in (-K, K)")
    s = m * c / r
    return ModelParams(
        K=s * K0,
        A=s * A0,
        a=s * s * a0,
        b=s * b0,
        d=d0 / (m * m * c * c / r),
    )


def eval_pG(params: ModelParams, x0: float, order: int) -> tuple[TruncatedSeries, TruncatedSeries]:
    """Taylor expansions of p and G about x0 to the requested order."""
    a, b = params.a, params.b
    # q(x0 + t) = q(x0) + q'(x0) t + a t^2
    q = TruncatedSeries.from_coeffs(
        [a * x0 * x0 + b * x0 + 1.0, 2.0 * a * x0 + b, a], order)
    xs = TruncatedSeries.from_coeffs([x0, 1.0], order)
    p = series_mul(xs, series_reciprocal(q))
    # (x0 + t - A) (K - x0 - t) q
    lin1 = TruncatedSeries.from_coeffs([x0 - params.A, 1.0], order)
    lin2 = TruncatedSeries.from_coeffs([params.K - x0, -1.0], order)
    G = series_mul(series_mul(lin1, lin2), q)
    return p, G


def h_roots(params: ModelParams) -> tuple[float, float] | None:
    """Positive roots alpha <= beta of a d x^2 + (b d - 1) x + d = 0.

    Returns the coalesced pair at 1/sqrt(a) when d is within TOL_COAL of
    d_m, None when d > d_m.  The smaller root is recovered from the product
    alpha*beta = 1/a to avoid cancellation.
    """
    d, a, b = params.d, params.a, params.b
    d_m = params.d_m
    if abs(d_m - d) <= TOL_COAL * d_m:
        return params.x_peak, params.x_peak
    if d > d_m:
        return None
    B = b * d - 1.0
    disc = B * B - 4.0 * a * d * d
    if disc < 0.0:  # roundoff just below coalescence
        disc = 0.0
    # B < 0 whenever real roots exist, so the stable root is the larger one
    qq = (-B + math.sqrt(disc)) / 2.0
    beta = qq / (a * d)
    alpha = d / qq
    return alpha, beta


class Stability(str, Enum):
    STABLE_NODE = "StableNode"
    UNSTABLE_NODE = "UnstableNode"
    SADDLE = "Saddle"
    STABLE_FOCUS = "StableFocus"
    UNSTABLE_FOCUS = "UnstableFocus"
    NONHYPERBOLIC = "NonHyperbolic"


@dataclass(frozen=True)
class StabilityClass:
    kind: Stability
    detail: str | None = None  # ZeroTrace | ZeroEigenvalue | DoubleZero

    @property
    def attracting(self) -> bool:
        return self.kind in (Stability.STABLE_NODE, Stability.STABLE_FOCUS)

    @property
    def repelling(self) -> bool:
        return self.kind in (Stability.UNSTABLE_NODE, Stability.UNSTABLE_FOCUS)


@dataclass(frozen=True)
class EquilibriumReport:
    kind: str                      # E0 | EA | EK | Ealpha | Ebeta | Coalesced
    location: tuple[float, float]
    eigenvalues: tuple[complex, complex]
    stability: StabilityClass


def classify_eigenvalues(lam1: complex, lam2: complex) -> StabilityClass:
    rho = max(abs(lam1), abs(lam2))
    if rho == 0.0:
        return StabilityClass(Stability.NONHYPERBOLIC, "DoubleZero")
    re1, re2 = lam1.real, lam2.real
    small1 = abs(re1) <= TOL_HYP * rho
    small2 = abs(re2) <= TOL_HYP * rho
    complex_pair = abs(lam1.imag) > TOL_HYP * rho
    if complex_pair:
        if small1:
            return StabilityClass(Stability.NONHYPERBOLIC, "ZeroTrace")
        return StabilityClass(Stability.STABLE_FOCUS if re1 < 0 else Stability.UNSTABLE_FOCUS)
    if small1 and small2:
        return StabilityClass(Stability.NONHYPERBOLIC, "DoubleZero")
    if small1 or small2:
        return StabilityClass(Stability.NONHYPERBOLIC, "ZeroEigenvalue")
    if re1 * re2 < 0:
        return StabilityClass(Stability.SADDLE)
    if re1 < 0:
        return StabilityClass(Stability.STABLE_NODE)
    return StabilityClass(Stability.UNSTABLE_NODE)


def _report_at(params: ModelParams, kind: str, x: float, y: float) -> EquilibriumReport:
    V = params.jacobian(x, y)
    lam = np.linalg.eigvals(V)
    lam = sorted(lam, key=lambda z: (z.real, z.imag))
    return EquilibriumReport(kind, (x, y), (complex(lam[0]), complex(lam[1])),
                             classify_eigenvalues(lam[0], lam[1]))


def equilibria(params: ModelParams) -> list[EquilibriumReport]:
    """All equilibria in the closed nonnegative cone with classification."""
    out = [_report_at(params, "E0", 0.0, 0.0)]
    if params.A > 0.0:
        out.append(_report_at(params, "EA", params.A, 0.0))
    out.append(_report_at(params, "EK", params.K, 0.0))
    roots = h_roots(params)
    if roots is not None:
        alpha, beta = roots
        lo = max(0.0, params.A)
        coalesced = alpha == beta
        for kind, x in (("Ealpha", alpha), ("Ebeta", beta)):
            if coalesced and kind == "Ebeta":
                continue
            if lo + TOL_MEMBER * params.K < x < params.K - TOL_MEMBER * params.K:
                out.append(_report_at(params, "Coalesced" if coalesced else kind,
                                      x, params.G(x)))
    return out


class Region(str, Enum):
    V0_1 = "V0_1"
    V0_2 = "V0_2"
    V0_3 = "V0_3"
    V0_4 = "V0_4"
    V_ALPHA = "Valpha"
    V_BETA = "Vbeta"
    V_ALPHA_BETA = "ValphaBeta"
    BOUNDARY = "Boundary"


@dataclass(frozen=True)
class RegionLabel:
    region: Region
    detail: str | None = None


def region(params: ModelParams) -> RegionLabel:
    """Existence region of the interior equilibria in the (d, A) plane.

    V0_4 is the sub-region beyond the fold curve d = d_m where the roots
    are complex; the remaining labels follow the ordering of alpha, beta
    against max(0, A) and K.
    """
    d, A, K = params.d, params.A, params.K
    d_m = params.d_m
    rel = lambda u, v: abs(u - v) <= 1e-9 * max(1.0, abs(u), abs(v))
    if abs(d_m - d) <= TOL_COAL * d_m:
        return RegionLabel(Region.BOUNDARY, "saddle_node_alpha_beta")
    if A > 0.0 and A < params.x_peak and rel(d, params.p(A)):
        return RegionLabel(Region.BOUNDARY, "transcritical_EA_Ealpha")
    if A > params.x_peak and rel(d, params.p(A)):
        return RegionLabel(Region.BOUNDARY, "transcritical_EA_Ebeta")
    if rel(d, params.p(K)):
        which = "Ealpha" if K < params.x_peak else "Ebeta"
        return RegionLabel(Region.BOUNDARY, f"transcritical_EK_{which}")
    if A == 0.0:
        return RegionLabel(Region.BOUNDARY, "transcritical_E0_EA")
    roots = h_roots(params)
    if roots is None:
        return RegionLabel(Region.V0_4)
    alpha, beta = roots
    if A > 0.0:
        if beta < A:
            return RegionLabel(Region.V0_2)
        if alpha > K:
            return RegionLabel(Region.V0_3)
        if alpha < A:
            if beta > K:
                return RegionLabel(Region.V0_1)
            return RegionLabel(Region.V_BETA)
        if beta > K:
            return RegionLabel(Region.V_ALPHA)
        return RegionLabel(Region.V_ALPHA_BETA)
    # weak Allee: only the ordering against K matters
    if alpha > K:
        return RegionLabel(Region.V0_3)
    if beta > K:
        return RegionLabel(Region.V_ALPHA)
    return RegionLabel(Region.V_ALPHA_BETA)


def trap_bound(params: ModelParams, n_grid: int = 1024) -> float:
    """Smallest M (up to grid refinement) with p(x)G(x) < d y on x+y=N >= M.

    The inflow through the line x + y = N is p(x)G(x) - d(N - x), so
    M = sup_{0 <= x <= K} [x + p(x)G(x)/d] plus a safety margin; beyond K
    the product pG is negative.
    """
    d = params.d
    f = lambda x: x + params.p(x) * params.G(x) / d
    xs = np.linspace(0.0, params.K, n_grid)
    vals = np.array([f(x) for x in xs])
    i = int(np.argmax(vals))
    lo = xs[max(i - 1, 0)]
    hi = xs[min(i + 1, n_grid - 1)]
    # golden-section refinement of the maximizer
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - gr * (hi - lo)
    e = lo + gr * (hi - lo)
    fc, fe = f(c), f(e)
    for _ in range(200):
        if hi - lo < 1e-12 * max(1.0, hi):
            break
        if fc < fe:
            lo, c, fc = c, e, fe
            e = lo + gr * (hi - lo)
            fe = f(e)
        else:
            hi, e, fe = e, c, fc
            c = hi - gr * (hi - lo)
            fc = f(c)
    m = max(vals[i], f(0.5 * (lo + hi)), params.K)
    return m * (1.0 + 1e-9) + 1e-9
