"""Nilpotent singularities of the interior equilibrium: the cusp of order
2/3 with its three-parameter unfolding, the fold/transcritical surfaces,
and the nilpotent-saddle coefficients at the triple collision A = K.

Everything is parameterized by ell = K sqrt(a); the cusp exists for
1 < ell < sqrt(3) at the critical triple (d_m, A*, b*).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, eval_pG

__all__ = [
    "BTReport",
    "UnfoldingReport",
    "NSReport",
    "bt_point",
    "cusp_coeffs",
    "unfolding_map",
    "codim1_surfaces",
    "ns_coeffs",
    "NotACuspError",
    "signed_root_pow",
]

GAMMA4_ELL = math.sqrt((47.0 - math.sqrt(1705.0)) / 42.0)  # zero of 21 l^4 - 47 l^2 + 6
GAMMA2_ELL = (-3.0 + math.sqrt(21.0)) / 6.0  # below this, gamma2 < 0 for every admissible b


class NotACuspError(ValueError):
    """Parameters do not put the interior equilibrium at a nilpotent point."""


def signed_root_pow(x: float, num: int, den: int) -> float:
    """x**(num/den) through the real den-th root (den odd), so the result is
    sign(x)**num * |x|**(num/den)."""
    s = -1.0 if x < 0 else 1.0
    return (s ** num) * abs(x) ** (num / den)


def _signed_pow_literal(x: float, num: int, den: int) -> float:
    """sign(x) * |x|**(num/den): the convention the fold-determinant
    reference formula is quoted in (differs from the real root for even
    num)."""
    s = -1.0 if x < 0 else 1.0
    return s * abs(x) ** (num / den)


@dataclass(frozen=True)
class BTReport:
    a: float
    K: float
    ell: float
    d_m: float
    A_star: float
    b_star: float
    feasible: bool                    # 1 < ell < sqrt(3)
    delta1: float | None = None       # u^2 coefficient of the quadratic normal form
    delta2: float | None = None       # uv coefficient; 0 exactly at b = b*
    order: int | None = None          # 2 or 3
    zeta: float | None = None         # cubic-cusp coefficient, closed form in ell
    zeta_pipeline: float | None = None  # independent route through the raw
                                        # Taylor coefficients, gauge-matched


def bt_point(a: float, K: float) -> BTReport:
    """Critical parameter triple (d_m, A*, b*) of the double-zero point."""
    if a <= 0 or K <= 0:
        raise ValueError("a and K must be positive")
    sa = math.sqrt(a)
    ell = K * sa
    if abs(ell - 2.0) < 1e-12:
        raise NotACuspError("K = 2/sqrt(a): the degenerate point is not a cusp")
    d_m = (ell * ell - 3.0 * ell + 3.0) / (sa * (ell - 1.0) ** 2)
    A_star = (2.0 * ell - 3.0) / (sa * (ell - 2.0))
    b_star = -sa * (ell * ell - 4.0 * ell + 5.0) / (ell * ell - 3.0 * ell + 3.0)
    return BTReport(a=a, K=K, ell=ell, d_m=d_m, A_star=A_star, b_star=b_star,
                    feasible=1.0 < ell < math.sqrt(3.0))


def zeta_closed_form(a: float, ell: float) -> float:
    quart = ((3.0 * ell - 22.0) * ell + 62.0) * ell * ell - 78.0 * ell + 39.0
    return (-a ** 3.5 * (ell - 2.0) ** 2 * quart
            / ((ell * ell - 3.0 * ell + 3.0) ** 6 * (ell - 1.0)))


def cusp_coeffs(params: ModelParams) -> BTReport:
    """Normal-form coefficients at the nilpotent interior point.

    delta2 != 0: order 2.  delta2 = 0 (b = b*): order 3, and the cubic
    coefficient zeta is computed both from the ell closed form and through
    the raw coefficient pipeline; the pipeline value carries the gauge
    weight (ell-1)^5 relative to the closed form and is rescaled before it
    is reported.
    """
    a, K = params.a, params.K
    sa = math.sqrt(a)
    alpha = params.x_peak
    ps, Gs = eval_pG(params, alpha, 4)
    p0 = ps.coeffs[0]
    p1 = ps.derivative_at_origin(1)
    p2 = ps.derivative_at_origin(2)
    p3 = ps.derivative_at_origin(3)
    p4 = ps.derivative_at_origin(4)
    G0 = Gs.coeffs[0]
    G1 = Gs.derivative_at_origin(1)
    G2 = Gs.derivative_at_origin(2)
    G3 = Gs.derivative_at_origin(3)
    G4 = Gs.derivative_at_origin(4)

    tol = 1e-9
    if abs(p1) > tol * (abs(p0) * sa + abs(p2) / sa):
        raise NotACuspError(f"p'(alpha) = {p1!r} is not zero: d != d_m")
    if abs(G1) > tol * (abs(G0) * sa + abs(G2) / sa + abs(G3) / a):
        raise NotACuspError(f"G'(alpha) = {G1!r} is not zero: A != A*")

    base = bt_point(a, K)
    delta1 = -p0 * G0 * p2 / 2.0
    delta2 = p0 * G2
    if abs(G2) > tol * abs(G3) / sa:
        return BTReport(**{**base.__dict__, "delta1": delta1, "delta2": delta2,
                           "order": 2})
    # order 3: cubic coefficient, two routes
    ell = base.ell
    zc = zeta_closed_form(a, ell)
    k30 = p0 * G3 / 6.0
    k40 = p0 * G4 / 24.0
    m20 = -p0 * p2 * G0 / 2.0
    m30 = -p0 * p3 * G0 / 6.0
    m21 = p2 / 2.0
    m31 = p3 / 6.0
    zraw = (4.0 * k40 * m20 + m20 * m31 - 3.0 * k30 * m30 - m30 * m21) / m20 ** 4
    zp = zraw / (ell - 1.0) ** 5
    return BTReport(**{**base.__dict__, "delta1": delta1, "delta2": delta2,
                       "order": 3 if zc != 0 else None, "zeta": zc,
                       "zeta_pipeline": zp})


@dataclass(frozen=True)
class UnfoldingReport:
    a: float
    K: float
    ell: float
    rho: float
    sigma: float
    eta_linear: np.ndarray            # d(eta1,eta2,eta3)/d(eps1,eps2,eps3) at 0
    det_eta: float
    det_eta_closed: float             # -2 (ell-1)^2 rho^(4/5) / (a^2 sigma^2),
                                      # rho^(4/5) taken as sign(rho)|rho|^(4/5)
    eta_linear_fd: np.ndarray | None = None
    fd_max_rel_err: float | None = None


def _rho_sigma(a: float, ell: float) -> tuple[float, float]:
    sa = math.sqrt(a)
    sigma = (ell * ell - 3.0 * ell + 3.0) / ((ell - 1.0) * math.sqrt(a * (2.0 - ell)))
    quart = ((3.0 * ell - 22.0) * ell + 62.0) * ell * ell - 78.0 * ell + 39.0
    rho = -quart * sa / ((ell - 1.0) ** 2 * (2.0 - ell) * sigma)
    return rho, sigma


def _eta_matrix_closed(a: float, ell: float) -> tuple[np.ndarray, float, float]:
    rho, sigma = _rho_sigma(a, ell)
    sa = math.sqrt(a)
    q = ell * ell - 3.0 * ell + 3.0
    r4 = signed_root_pow(rho, 4, 5)
    r1 = signed_root_pow(rho, 1, 5)
    rm1 = signed_root_pow(rho, -1, 5)
    e4 = (ell - 1.0) ** 4
    M = np.array([
        [r4 / a ** 1.5, 0.0, r4 * e4 / (sa * q * q)],
        [-3.0 * r1 * (ell * ell - 4.0 * ell + 5.0) / (a ** 1.5 * (2.0 - ell) * sigma),
         -r1 * (2.0 - ell) / (sa * sigma),
         -3.0 * r1 * (ell * ell - 4.0 * ell + 5.0) * e4 / (sa * q * q * (2.0 - ell) * sigma)],
        [rm1 * (((ell - 6.0) * ell + 18.0) * ell * ell - 30.0 * ell + 21.0)
         / (2.0 * a * (2.0 - ell) * (ell - 1.0) ** 2 * sigma),
         -rm1 * (5.0 * ell - 9.0) * (2.0 - ell) / (2.0 * (ell - 1.0) * sigma),
         -rm1 * 3.0 * (ell * ell - 4.0 * ell + 5.0) * e4 / (2.0 * (2.0 - ell) * q * q * sigma)],
    ])
    return M, rho, sigma


def unfolding_chain_eta(a: float, K: float, eps: tuple[float, float, float]) -> np.ndarray:
    """Normal-form parameters (eta1, eta2, eta3) of the perturbed system.

    The full reduction chain: exact quartic Taylor data of the perturbed
    field at the unperturbed double-zero point, then the sequence of
    near-identity transformations down to the three-parameter normal form.
    Used as the independent finite-difference check of the closed-form
    linearization.
    """
    base = bt_point(a, K)
    ell = base.ell
    sa = math.sqrt(a)
    xbar = 1.0 / sa
    ybar = (ell - 1.0) ** 4 / (a * (2.0 - ell) * (ell * ell - 3.0 * ell + 3.0))
    pert = ModelParams(K=K, A=base.A_star + eps[1], a=a,
                       b=base.b_star + eps[0], d=base.d_m + eps[2])
    ps, Gs = eval_pG(pert, xbar, 4)
    pc = ps.coeffs
    Gc = Gs.coeffs
    d = pert.d

    # translated Taylor data: x' = p (G - ybar) - p y1,  y' = (ybar + y1)(p - d)
    gm = Gc.copy()
    gm[0] -= ybar
    k = np.convolve(pc, gm)[:5]
    k01, k11, k21, k31 = (-pc[i] for i in range(4))
    m = np.empty(5)
    for i in range(5):
        m[i] = ybar * (pc[i] - (d if i == 0 else 0.0))
    m01, m11, m21, m31 = (pc[i] - (d if i == 0 else 0.0) for i in range(4))
    k00, k10, k20, k30, k40 = k
    m00, m10, m20, m30, m40 = m

    # first reduction: y2 = x1'
    a00 = k01 * m00 - k00 * m01
    a10 = k01 * m10 - k10 * m01
    a01 = k10 + m01
    a20 = k01 * m20 + k21 * m00 - k00 * m21 - k20 * m01
    a30 = k01 * m30 + k21 * m10 + k31 * m00 - k00 * m31 - k10 * m21 - k30 * m01
    a40 = k01 * m40 - k10 * m31 - k20 * m21 + k21 * m20 + k31 * m10 - k40 * m01
    a11 = 2.0 * (k01 * k20 - k00 * k21) / k01
    a21 = (3.0 * k01 * k30 + k01 * m21 - 3.0 * k00 * k31 - 2.0 * k10 * k21) / k01
    a31 = (2.0 * k00 * k21 ** 2 + 4.0 * k40 * k01 ** 2 + m31 * k01 ** 2
           - 3.0 * k01 * k10 * k31 - 2.0 * k01 * k20 * k21) / k01 ** 2
    a12 = 2.0 * k21 / k01
    a22 = 3.0 * k31 / k01

    # remove the quadratic-in-velocity terms
    b00, b10, b01, b11, b21 = a00, a10, a01, a11, a21
    b20 = a20 - a00 * a12 / 2.0
    b30 = (3.0 * a30 - a00 * a22 - a10 * a12) / 3.0
    b40 = (12.0 * a40 - 2.0 * a00 * a12 ** 2 - 3.0 * a10 * a22 - 2.0 * a12 * a20) / 12.0
    b31 = (6.0 * a31 + a11 * a12) / 6.0

    # absorb the cubic/quartic potential terms into the quadratic one
    c00, c01 = b00, b01
    c10 = (2.0 * b10 * b20 - b00 * b30) / (2.0 * b20)
    c11 = (2.0 * b11 * b20 - b01 * b30) / (2.0 * b20)
    c20 = (80.0 * b20 ** 3 + 45.0 * b00 * b30 ** 2 - 48.0 * b00 * b20 * b40
           - 60.0 * b10 * b20 * b30) / (80.0 * b20 ** 2)
    c21 = (80.0 * b20 ** 2 * b21 + 45.0 * b01 * b30 ** 2 - 48.0 * b01 * b20 * b40
           - 60.0 * b11 * b20 * b30) / (80.0 * b20 ** 2)
    c31 = (336.0 * b01 * b20 * b30 * b40 - 175.0 * b01 * b30 ** 3
           - 192.0 * b11 * b20 ** 2 * b40 + 210.0 * b11 * b20 * b30 ** 2
           + 240.0 * b20 ** 3 * b31 - 240.0 * b20 ** 2 * b21 * b30) / (240.0 * b20 ** 3)

    # shift out the linear term, normalize the quadratic one
    s = c10 / (2.0 * c20)
    sq = math.sqrt(c20)
    d00 = (c00 - c10 ** 2 / (4.0 * c20)) / c20
    d01 = (c01 - c11 * s + c21 * s * s - c31 * s ** 3) / sq
    d11 = (c11 - 2.0 * c21 * s + 3.0 * c31 * s * s) / sq
    d21 = (c21 - 3.0 * c31 * s) / sq
    d31 = c31 / sq

    xi00 = d00
    xi01 = d01 - d00 * d21
    xi11 = d11
    xi31 = d31

    eta1 = signed_root_pow(xi31, 4, 5) * xi00
    eta2 = -signed_root_pow(xi31, 1, 5) * xi01
    eta3 = -signed_root_pow(xi31, -1, 5) * xi11
    return np.array([eta1, eta2, eta3])


def unfolding_map(a: float, K: float, fd_step: float | None = None) -> UnfoldingReport:
    """Linear part of the map (eps1, eps2, eps3) -> (eta1, eta2, eta3).

    Closed forms; with fd_step, the full reduction chain is differenced
    centrally as an independent validation.
    """
    base = bt_point(a, K)
    if not base.feasible:
        raise NotACuspError(f"ell = {base.ell} outside (1, sqrt(3))")
    M, rho, sigma = _eta_matrix_closed(a, base.ell)
    det = float(np.linalg.det(M))
    det_closed = (-2.0 * (base.ell - 1.0) ** 2 * _signed_pow_literal(rho, 4, 5)
                  / (a * a * sigma * sigma))
    fd = None
    err = None
    if fd_step is not None:
        h = fd_step
        fd = np.empty((3, 3))
        for j in range(3):
            ep = [0.0, 0.0, 0.0]
            em = [0.0, 0.0, 0.0]
            ep[j] = h
            em[j] = -h
            fd[:, j] = (unfolding_chain_eta(a, K, tuple(ep))
                        - unfolding_chain_eta(a, K, tuple(em))) / (2.0 * h)
        err = float(np.max(np.abs(fd - M)) / np.max(np.abs(M)))
    return UnfoldingReport(a=a, K=K, ell=base.ell, rho=rho, sigma=sigma,
                           eta_linear=M, det_eta=det, det_eta_closed=det_closed,
                           eta_linear_fd=fd, fd_max_rel_err=err)


def bt_sn_surface_eps1(a: float, ell: float, eps3: float) -> float:
    """Exact fold surface near the cusp in the unfolding parameters."""
    sa = math.sqrt(a)
    q = ell * ell - 3.0 * ell + 3.0
    return -a * (ell - 1.0) ** 4 * eps3 / (sa * (ell - 1.0) ** 2 * q * eps3 + q * q)


def codim1_surfaces(params: ModelParams) -> list[tuple[str, float]]:
    """Signed residuals against the fold/transcritical surfaces."""
    out = []
    if params.A > 0:
        out.append(("transcritical_EA", params.d - params.p(params.A)))
    out.append(("transcritical_EK", params.d - params.p(params.K)))
    out.append(("saddle_node_alpha_beta", params.d - params.d_m))
    base = bt_point(params.a, params.K)
    if base.feasible:
        eps1 = params.b - base.b_star
        eps3 = params.d - base.d_m
        out.append(("bt_saddle_node_eps",
                    eps1 - bt_sn_surface_eps1(params.a, base.ell, eps3)))
    return out


@dataclass(frozen=True)
class NSReport:
    a: float
    K: float
    b: float
    ell: float
    point_type: str                   # "saddle" (ell < 1) or "elliptic" (ell > 1)
    d: float | None = None            # p(K), the collision death rate
    gamma1: float | None = None
    gamma2: float | None = None
    b_ns: float | None = None
    gamma3: float | None = None
    gamma4: float | None = None
    codim: int | None = None


def ns_coeffs(a: float, K: float, b: float) -> NSReport:
    """Normal-form coefficients of the multiplicity-3 collision at A = K.

    For ell < 1 the point is a nilpotent saddle with gamma1 < 0; gamma2
    vanishes on b = b_ns, where gamma3/gamma4 decide the codimension
    (3 unless ell hits the gamma4 root).  For ell > 1 the collision is the
    elliptic case and only the marker is returned.
    """
    if a <= 0 or K <= 0:
        raise ValueError("a and K must be positive")
    sa = math.sqrt(a)
    if not (b > -2.0 * sa):
        raise ValueError(f"b must exceed -2 sqrt(a) = {-2 * sa}")
    ell = K * sa
    if ell >= 1.0 - 1e-12:
        return NSReport(a=a, K=K, b=b, ell=ell, point_type="elliptic")
    l2 = ell * ell
    d = K / (a * K * K + b * K + 1.0)
    base = l2 + K * b + 1.0
    gamma1 = K * base * base / (l2 - 1.0)
    gamma2 = base * (K * (3.0 * l2 - 5.0) * b + 6.0 * l2 * l2 - 8.0 * l2 - 2.0) \
        / (2.0 * K * (l2 - 1.0) ** 2)
    b_ns = 2.0 * (3.0 * l2 * l2 - 4.0 * l2 - 1.0) / (K * (5.0 - 3.0 * l2))
    gamma3 = gamma4 = None
    codim = None
    scale2 = abs(base) * (abs(K * (3.0 * l2 - 5.0) * b) + abs(6.0 * l2 * l2 - 8.0 * l2 - 2.0)) \
        / (2.0 * K * (l2 - 1.0) ** 2)
    if abs(gamma2) > 1e-9 * max(scale2, 1e-300):
        codim = 2
    else:
        gamma3 = 27.0 * (6.0 * l2 * l2 - 13.0 * l2 + 3.0) * (l2 - 1.0) ** 4 \
            / (K * K * (3.0 * l2 - 5.0) ** 4)
        gamma4 = 81.0 * (21.0 * l2 * l2 - 47.0 * l2 + 6.0) * (l2 - 1.0) ** 6 \
            / (K ** 3 * (3.0 * l2 - 5.0) ** 6)
        if abs(ell - GAMMA4_ELL) > 1e-9:
            codim = 3
    return NSReport(a=a, K=K, b=b, ell=ell, point_type="saddle", d=d,
                    gamma1=gamma1, gamma2=gamma2, b_ns=b_ns,
                    gamma3=gamma3, gamma4=gamma4, codim=codim)
