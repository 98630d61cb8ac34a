"""Degenerate Hopf machinery at the interior equilibrium.

The model converts to a Lienard system whose potential involution yields
the return-map coefficients B1..B7; the codimension-3 point is certified
inside a tiny parameter rectangle with compensated arithmetic and located
by nested bisection.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from .ddreal import DD, dd
from .model import ModelParams, eval_pG, h_roots
from .series import (TruncatedSeries, involution_solve, series_compose,
                     series_reciprocal)

__all__ = [
    "LienardData",
    "FocusReport",
    "Hopf3Report",
    "ConsistencyError",
    "CertificationError",
    "lienard_convert",
    "focus_quantities",
    "mu_closed_forms",
    "hopf_locus_b",
    "b5_expression",
    "hopf3_search",
    "hopf3_continue_in_A",
    "HOPF3_A_DEFAULT",
    "RECT_K",
    "RECT_ALPHA",
]

HOPF3_A_DEFAULT = 0.00025573
RECT_K = (71.75583310, 71.75583315)
RECT_ALPHA = (24.53545865, 24.53545867)
B_ZERO_RTOL = 1e-9
DUAL_PATH_RTOL = 1e-8


class ConsistencyError(RuntimeError):
    """The two independent coefficient routes disagree."""


class CertificationError(RuntimeError):
    """An edge sign condition of the rectangle certificate failed."""


@dataclass(frozen=True)
class LienardData:
    alpha: float
    phi_series: TruncatedSeries   # G(alpha)(e^y - 1)
    F_series: TruncatedSeries     # G(alpha - x) - G(alpha)
    g_series: TruncatedSeries     # d / p(alpha - x) - 1
    H_series: TruncatedSeries     # integral of g
    at_hopf: bool                 # F'(0) ~ 0, i.e. G'(alpha) ~ 0


def _flip_odd(s: TruncatedSeries) -> TruncatedSeries:
    c = s.coeffs.copy()
    c[1::2] *= -1.0
    return TruncatedSeries(c, s.order)


def lienard_convert(params: ModelParams, order: int = 8) -> LienardData:
    """Series data of the Lienard form about the interior equilibrium."""
    roots = h_roots(params)
    if roots is None:
        raise ValueError("no interior equilibrium: d > d_m")
    alpha = roots[0]
    if not (max(0.0, params.A) < alpha < params.K):
        raise ValueError("E_alpha is not in the positive cone")
    ps, Gs = eval_pG(params, alpha, order)
    Ga = Gs.coeffs[0]
    if not Ga > 0:
        raise ConsistencyError(f"G(alpha) = {Ga!r} must be positive at an interior point")
    # F(x) = G(alpha - x) - G(alpha)
    F = _flip_odd(Gs) - Ga
    # g(x) = d / p(alpha - x) - 1; the constant is p(alpha)/d - 1 = O(roundoff)
    g = params.d * series_reciprocal(_flip_odd(ps)) - 1.0
    g0 = g.coeffs[0]
    if abs(g0) > 1e-10:
        raise ConsistencyError(f"p(alpha) - d residual {g0!r} too large")
    gc = g.coeffs.copy()
    gc[0] = 0.0
    g = TruncatedSeries(gc, order)
    if not g.coeffs[1] > 0:
        raise ConsistencyError(f"g'(0) = {g.coeffs[1]!r} not positive (alpha beyond the response peak?)")
    H = g.integrate()
    phi_c = np.zeros(order + 1)
    fact = 1.0
    for k in range(1, order + 1):
        fact *= k
        phi_c[k] = Ga / fact
    phi = TruncatedSeries(phi_c, order)
    at_hopf = abs(F.coeffs[1]) <= 1e-9 * max(1.0, float(np.max(np.abs(F.coeffs))))
    return LienardData(alpha=alpha, phi_series=phi, F_series=F, g_series=g,
                       H_series=H, at_hopf=at_hopf)


def mu_closed_forms(a: float, alpha: float) -> tuple[float, float, float, float, float]:
    """Involution coefficients mu2..mu6 of the model potential."""
    mu2 = -2.0 / (3.0 * alpha * (1.0 - a * alpha * alpha))
    mu3 = -mu2 ** 2
    mu4 = mu2 * (2.0 * mu2 ** 2 + 3.0 * mu2 / (2.0 * alpha) + 3.0 / (5.0 * alpha ** 2))
    mu5 = -mu2 ** 2 * (4.0 * mu2 ** 2 + 9.0 * mu2 / (2.0 * alpha) + 9.0 / (5.0 * alpha ** 2))
    mu6 = mu2 * (9.0 * mu2 ** 4 + 57.0 * mu2 ** 3 / (4.0 * alpha)
                 + 177.0 * mu2 ** 2 / (20.0 * alpha ** 2)
                 + 12.0 * mu2 / (5.0 * alpha ** 3) + 3.0 / (7.0 * alpha ** 4))
    return mu2, mu3, mu4, mu5, mu6


def _b_closed_cascade(params: ModelParams, alpha: float) -> dict[int, float]:
    """Closed forms for B_i; B3/B4 assume B1 = 0, B5/B6 assume B1 = B3 = 0,
    B7 assumes B1 = B3 = B5 = 0 (each is exact on its locus)."""
    a = params.a
    _, Gs = eval_pG(params, alpha, 4)
    G1 = Gs.derivative_at_origin(1)
    G2 = Gs.derivative_at_origin(2)
    G3 = Gs.derivative_at_origin(3)
    mu2 = mu_closed_forms(a, alpha)[0]
    al2 = alpha * alpha
    out = {
        1: 2.0 * G1,
        2: -mu2 * G1,
        3: (G3 - 3.0 * mu2 * G2) / 3.0,
        4: -mu2 / 2.0 * (G3 - 3.0 * mu2 * G2),
        5: -((5.0 * mu2 * alpha + 2.0) * G3 - 40.0 * a * mu2 * al2) / (10.0 * al2),
        6: mu2 / (4.0 * al2) * ((5.0 * mu2 * alpha + 2.0) * G3 - 40.0 * a * mu2 * al2),
        7: -96.0 * a * (6.0 * a * a * al2 * al2 + 23.0 * a * al2 + 6.0)
           / (630.0 * alpha ** 3 * (1.0 - a * al2) ** 2 * (2.0 + 3.0 * a * al2)),
    }
    return out


@dataclass(frozen=True)
class FocusReport:
    alpha: float
    mu: tuple[float, ...]            # closed forms mu2..mu6
    mu_series: tuple[float, ...]     # involution-solved theta2..theta6
    B: tuple[float, ...]             # series route B1..B7 (the authoritative one)
    B_closed: dict[int, float]       # cascade closed forms (exact on their loci)
    mu_discrepancy: float
    B_discrepancy: float             # over the indices comparable at these params
    order: int                       # weak-focus order (0: hyperbolic focus)
    codim: int                       # 0..3
    stability_of_focus: int          # sign of the first nonvanishing odd B
    zero_tol: float


def focus_quantities(params: ModelParams, order: int = 8,
                     check: bool = True) -> FocusReport:
    """Dual-route focus quantities and the Hopf codimension at E_alpha."""
    ld = lienard_convert(params, order)
    theta = involution_solve(ld.H_series)
    Bser = series_compose(ld.F_series, theta) - ld.F_series
    B = tuple(float(Bser.coeffs[i]) for i in range(1, 8))
    mu_s = tuple(float(theta.coeffs[i]) for i in range(2, 7))
    mu_c = mu_closed_forms(params.a, ld.alpha)
    Bc = _b_closed_cascade(params, ld.alpha)

    def rel(u, v):
        m = max(abs(u), abs(v))
        return abs(u - v) / m if m > 0 else 0.0

    mu_disc = max(rel(u, v) for u, v in zip(mu_c, mu_s))
    tolB = B_ZERO_RTOL * max(1.0, max(abs(v) for v in B))
    comparable = [1, 2]
    if abs(B[0]) <= tolB:
        comparable += [3, 4]
        if abs(B[2]) <= tolB:
            comparable += [5, 6]
            if abs(B[4]) <= tolB:
                comparable += [7]
    B_disc = max(rel(B[i - 1], Bc[i]) if max(abs(B[i - 1]), abs(Bc[i])) > tolB else 0.0
                 for i in comparable)
    if check:
        if mu_disc > DUAL_PATH_RTOL:
            raise ConsistencyError(f"mu routes disagree: rel {mu_disc:g}")
        if B_disc > DUAL_PATH_RTOL:
            raise ConsistencyError(f"B routes disagree: rel {B_disc:g}")

    odd = [B[0], B[2], B[4], B[6]]
    k = 0
    while k < 3 and abs(odd[k]) <= tolB:
        k += 1
    codim = k if k < 3 or abs(odd[3]) > tolB else 3
    stab = (odd[k] > 0) - (odd[k] < 0)
    return FocusReport(alpha=ld.alpha, mu=mu_c, mu_series=mu_s, B=B, B_closed=Bc,
                       mu_discrepancy=mu_disc, B_discrepancy=B_disc,
                       order=k, codim=codim, stability_of_focus=stab,
                       zero_tol=tolB)


def hopf_locus_b(K: float, alpha: float, a: float) -> float:
    """b making the fifth return-map coefficient expression vanish (A = 0).

    Derived from (5 mu2 alpha + 2) G''' = 40 a mu2 alpha^2 with
    G(x) = x(K - x)(a x^2 + b x + 1); the caller must check b > -2 sqrt(a).
    """
    aa = a * alpha * alpha
    return a * (9.0 * a * K * alpha * alpha - 36.0 * a * alpha ** 3
                + 6.0 * K - 44.0 * alpha) / (3.0 * (3.0 * aa + 2.0))


def b5_expression(a: float, K: float, alpha: float, b: float) -> float:
    """The closed-form fifth coefficient as a function of (K, alpha, b), A = 0."""
    mu2 = -2.0 / (3.0 * alpha * (1.0 - a * alpha * alpha))
    G3 = -24.0 * a * alpha + 6.0 * (a * K - b)
    return -((5.0 * mu2 * alpha + 2.0) * G3 - 40.0 * a * mu2 * alpha * alpha) \
        / (10.0 * alpha * alpha)


def _C1_dd(K: DD, al: DD, a: float) -> DD:
    ad = dd(a)
    a2 = ad * ad
    K2 = K * K
    al2 = al * al
    al3 = al2 * al
    al4 = al2 * al2
    al5 = al4 * al
    t2 = (K2 * al3 * 18.0) + (K * al4 * -72.0) + (al5 * 72.0)
    t1 = (K2 * al * 12.0) + (K * al2 * -79.0) + (al3 * 90.0)
    t0 = (K * 6.0) + (al * -12.0)
    num = a2 * t2 + ad * t1 + t0
    den = ad * al2 * 9.0 + 6.0
    return num / den


def _C2_dd(K: DD, al: DD, a: float) -> DD:
    ad = dd(a)
    a2 = ad * ad
    K2 = K * K
    al2 = al * al
    al3 = al2 * al
    al4 = al2 * al2
    t2 = (K2 * al2 * 18.0) + (K * al3 * -72.0) + (al4 * 48.0)
    t1 = (K2 * 12.0) + (K * al * -88.0) + (al2 * 234.0)
    num = a2 * t2 + ad * t1 - 12.0
    den = ad * al2 * 9.0 + 6.0
    return num / den


# Shear coefficient of the auxiliary function used for the Miranda pairing:
# the zero sets of C1 and C2 both run nearly parallel to the K axis through
# the rectangle, so C2 alone is not sign-definite on the K edges; C2 - SHEAR*C1
# is, and (C1, C2 - SHEAR*C1) has the same zero set as (C1, C2).
MIRANDA_SHEAR = -1.0 / 22.0


def _F2_dd(K: DD, al: DD, a: float) -> DD:
    return _C2_dd(K, al, a) - dd(MIRANDA_SHEAR) * _C1_dd(K, al, a)


@dataclass
class Hopf3Report:
    a: float
    K_star: float
    alpha_star: float
    b_star: float
    d_star: float
    residual_C1: float
    residual_C2: float
    edge_scale_C1: float
    edge_scale_C2: float
    J_value: float
    B7: float
    certified: bool
    edge_margins: dict[str, float]
    c2_K_edge_table_holds: bool       # the quoted C2/K-edge sign table, evaluated
    K_dd: tuple[float, float] = field(default=(0.0, 0.0), repr=False)
    alpha_dd: tuple[float, float] = field(default=(0.0, 0.0), repr=False)


def _edge_extrema(f, a: float, edge: str, rect_K, rect_a, n: int) -> tuple[float, float]:
    Klo, Khi = rect_K
    alo, ahi = rect_a
    lo, hi = math.inf, -math.inf
    for i in range(n):
        t = i / (n - 1)
        if edge == "Klo":
            v = float(f(dd(Klo), dd(alo) + dd(t * (ahi - alo)), a))
        elif edge == "Khi":
            v = float(f(dd(Khi), dd(alo) + dd(t * (ahi - alo)), a))
        elif edge == "alo":
            v = float(f(dd(Klo) + dd(t * (Khi - Klo)), dd(alo), a))
        else:
            v = float(f(dd(Klo) + dd(t * (Khi - Klo)), dd(ahi), a))
        lo = min(lo, v)
        hi = max(hi, v)
    return lo, hi


def hopf3_search(a: float = HOPF3_A_DEFAULT,
                 rect_K: tuple[float, float] = RECT_K,
                 rect_alpha: tuple[float, float] = RECT_ALPHA,
                 n_edge: int = 101) -> Hopf3Report:
    """Certify and locate the codimension-3 Hopf root in the rectangle.

    Certified sign conditions (all in double-double arithmetic):
      * C1 > 0 on the lower alpha edge, C1 < 0 on the upper alpha edge;
      * the sheared companion C2 - SHEAR*C1 < 0 on the left K edge and
        > 0 on the right K edge.
    Together these are a Miranda certificate for a zero of (C1, C2) inside.
    The quoted certificate table asserts C2 itself is sign-definite on the
    K edges; that is false by ~1.5e-9 at the corners (both zero curves run
    nearly parallel to the K axis), so it is evaluated and reported, not
    certified.
    """
    margins: dict[str, float] = {}
    lo, hi = _edge_extrema(_C1_dd, a, "alo", rect_K, rect_alpha, n_edge)
    margins["C1>0 on alpha_lo"] = lo
    ok1 = lo > 0
    lo2, hi2 = _edge_extrema(_C1_dd, a, "ahi", rect_K, rect_alpha, n_edge)
    margins["C1<0 on alpha_hi"] = -hi2
    ok2 = hi2 < 0
    lo3, hi3 = _edge_extrema(_F2_dd, a, "Klo", rect_K, rect_alpha, n_edge)
    margins["F2<0 on K_lo"] = -hi3
    ok3 = hi3 < 0
    lo4, hi4 = _edge_extrema(_F2_dd, a, "Khi", rect_K, rect_alpha, n_edge)
    margins["F2>0 on K_hi"] = lo4
    ok4 = lo4 > 0
    certified = ok1 and ok2 and ok3 and ok4
    if not certified:
        raise CertificationError(f"rectangle edge signs failed: {margins}")

    # the quoted K-edge table for C2, evaluated for the record
    c2klo = _edge_extrema(_C2_dd, a, "Klo", rect_K, rect_alpha, n_edge)
    c2khi = _edge_extrema(_C2_dd, a, "Khi", rect_K, rect_alpha, n_edge)
    quoted_ok = (c2klo[0] > 0) and (c2khi[1] < 0)
    margins["quoted C2>0 on K_lo (min)"] = c2klo[0]
    margins["quoted C2<0 on K_hi (max)"] = c2khi[1]

    edge_scale_C1 = max(abs(margins["C1>0 on alpha_lo"]), abs(hi),
                        abs(lo2), abs(hi2))
    c2a = _edge_extrema(_C2_dd, a, "alo", rect_K, rect_alpha, n_edge)
    c2b = _edge_extrema(_C2_dd, a, "ahi", rect_K, rect_alpha, n_edge)
    edge_scale_C2 = max(abs(v) for v in (*c2klo, *c2khi, *c2a, *c2b))

    # nested double-double bisection: C1 over alpha inside, F2 over K outside
    alo, ahi = rect_alpha
    Klo, Khi = rect_K

    def alpha_hat(K: DD) -> DD:
        lo_, hi_ = dd(alo), dd(ahi)
        for _ in range(160):
            mid = (lo_ + hi_) * 0.5
            if _C1_dd(K, mid, a).sign > 0:
                lo_ = mid
            else:
                hi_ = mid
        return (lo_ + hi_) * 0.5

    loK, hiK = dd(Klo), dd(Khi)
    for _ in range(160):
        mid = (loK + hiK) * 0.5
        if _F2_dd(mid, alpha_hat(mid), a).sign < 0:
            loK = mid
        else:
            hiK = mid
    Ks = (loK + hiK) * 0.5
    als = alpha_hat(Ks)
    r1 = float(_C1_dd(Ks, als, a))
    r2 = float(_C2_dd(Ks, als, a))

    bs = hopf_locus_b(float(Ks), float(als), a)
    ds = float(als) / (a * float(als) ** 2 + bs * float(als) + 1.0)
    J = _hopf3_jacobian(a, float(Ks), float(als), bs)
    al = float(als)
    B7 = -96.0 * a * (6.0 * a * a * al ** 4 + 23.0 * a * al * al + 6.0) \
        / (630.0 * al ** 3 * (1.0 - a * al * al) ** 2 * (2.0 + 3.0 * a * al * al))
    return Hopf3Report(a=a, K_star=float(Ks), alpha_star=float(als), b_star=bs,
                       d_star=ds, residual_C1=r1, residual_C2=r2,
                       edge_scale_C1=edge_scale_C1, edge_scale_C2=edge_scale_C2,
                       J_value=J, B7=B7, certified=certified,
                       edge_margins=margins,
                       c2_K_edge_table_holds=quoted_ok,
                       K_dd=(Ks.hi, Ks.lo), alpha_dd=(als.hi, als.lo))


def _B135_mp(a, K, al, b, A=0):
    """High-precision (B1, B3, B5) closed forms at d = p(alpha)."""
    a = mp.mpf(a)
    mu2 = -2 / (3 * al * (1 - a * al ** 2))
    G = lambda x: (x - A) * (K - x) * (a * x * x + b * x + 1)
    G1 = mp.diff(G, al, 1)
    G2 = mp.diff(G, al, 2)
    G3 = mp.diff(G, al, 3)
    return mp.matrix([2 * G1,
                      (G3 - 3 * mu2 * G2) / 3,
                      -((5 * mu2 * al + 2) * G3 - 40 * a * mu2 * al ** 2) / (10 * al ** 2)])


def _hopf3_jacobian(a: float, K: float, al: float, b: float) -> float:
    """det d(B1,B3,B5)/d(K, alpha, b) at b = b(K, alpha), A = 0."""
    with mp.workdps(40):
        x = [mp.mpf(K), mp.mpf(al), mp.mpf(b)]
        h = mp.mpf("1e-18")
        J = mp.matrix(3, 3)
        for j in range(3):
            xp = list(x)
            xm = list(x)
            xp[j] += h
            xm[j] -= h
            Fp = _B135_mp(a, *xp)
            Fm = _B135_mp(a, *xm)
            for i in range(3):
                J[i, j] = (Fp[i] - Fm[i]) / (2 * h)
        return float(mp.det(J))


def hopf3_continue_in_A(a: float, A_target: float,
                        start: tuple[float, float, float],
                        step: float = 1e-3,
                        targets: tuple[float, float, float] = (0.0, 0.0, 0.0),
                        ) -> tuple[float, float, float]:
    """Predictor-corrector continuation of the (B1,B3,B5) = targets root in A.

    Steps |dA| <= step from A = 0, correcting (K, alpha, b) by Newton at
    each A (d is implied by d = p(alpha)).  Returns (K, alpha, b) at
    A_target.
    """
    K, al, b = start
    nA = max(1, int(math.ceil(abs(A_target) / step)))
    with mp.workdps(40):
        tgt = mp.matrix([mp.mpf(t) for t in targets])
        x = mp.matrix([mp.mpf(K), mp.mpf(al), mp.mpf(b)])
        for i in range(1, nA + 1):
            A = mp.mpf(A_target) * i / nA
            for _ in range(50):
                F = _B135_mp(a, x[0], x[1], x[2], A) - tgt
                h = mp.mpf("1e-18")
                J = mp.matrix(3, 3)
                for j in range(3):
                    xp = mp.matrix(x)
                    xm = mp.matrix(x)
                    xp[j] += h
                    xm[j] -= h
                    Fp = _B135_mp(a, xp[0], xp[1], xp[2], A)
                    Fm = _B135_mp(a, xm[0], xm[1], xm[2], A)
                    for r in range(3):
                        J[r, j] = (Fp[r] - Fm[r]) / (2 * h)
                dx = mp.lu_solve(J, F)
                x = x - dx
                if mp.norm(dx) < mp.mpf("1e-30"):
                    break
        return float(x[0]), float(x[1]), float(x[2])
