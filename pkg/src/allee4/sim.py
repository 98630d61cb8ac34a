"""Trajectory integration, return maps, limit-cycle detection, separatrices
and connecting-orbit gaps for the scaled model."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _rk
from .model import ModelParams, equilibria, h_roots, trap_bound

__all__ = [
    "Trajectory",
    "Section",
    "Cycle",
    "CycleReport",
    "ReturnResult",
    "integrate",
    "return_map",
    "find_cycles",
    "no_cycle_certificate",
    "existence_check",
    "separatrices",
    "connection_gap",
    "SeparatrixSet",
]

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12
T_MAX_RETURN = 1e6

_STATUS_NAMES = {
    _rk.TIME_LIMIT: "TimeLimit",
    _rk.CONVERGED: "ConvergedToEquilibrium",
    _rk.LEFT_DOMAIN: "LeftDomain",
    _rk.SECTION_LIMIT: "SectionEventLimit",
    _rk.NO_RETURN_FLOOR: "LeftDomain",     # predator collapse below floor
    _rk.STEP_BUDGET: "TimeLimit",
    _rk.STIFFNESS: "Stiffness",
}

_EMPTY_PROX = (np.empty((0, 2)), np.empty(0))


@dataclass
class Trajectory:
    samples: np.ndarray          # rows (t, x, y)
    termination: str             # TimeLimit | ConvergedToEquilibrium | LeftDomain | SectionEventLimit
    converged_to: tuple[float, float] | None = None

    @property
    def t(self):
        return self.samples[:, 0]

    @property
    def x(self):
        return self.samples[:, 1]

    @property
    def y(self):
        return self.samples[:, 2]


@dataclass(frozen=True)
class Section:
    """Horizontal ray {y = G(alpha), x > alpha}; upward crossings only.

    The flow crosses the ray with dy/dt > 0 exactly for x between alpha and
    beta, so fixing the upward orientation deduplicates returns.
    """
    alpha: float
    y_level: float

    @classmethod
    def at_interior_equilibrium(cls, params: ModelParams) -> "Section":
        roots = h_roots(params)
        if roots is None:
            raise ValueError("no interior equilibrium: d exceeds d_m")
        alpha = roots[0]
        lo = max(0.0, params.A)
        if not (lo < alpha < params.K):
            raise ValueError("E_alpha is not in the positive cone")
        return cls(alpha, params.G(alpha))


def _prox_targets(params: ModelParams, radius_scale: float = 1e-8,
                  include_interior: bool = False):
    """Attracting equilibria, used to cut off converging orbits early.

    Return-map runs exclude the interior equilibrium: orbits spiralling
    into a stable focus still cross the section, and that crossing is the
    return value.
    """
    pts, r2 = [], []
    for e in equilibria(params):
        if not e.stability.attracting:
            continue
        if not include_interior and e.kind not in ("E0", "EK", "EA"):
            continue
        x, y = e.location
        r = radius_scale * (1.0 + abs(x) + abs(y))
        pts.append((x, y))
        r2.append(r * r)
    if not pts:
        return _EMPTY_PROX
    return np.array(pts), np.array(r2)


def _core(params: ModelParams, x0, y0, t_end, tol, atol=DEFAULT_ATOL, tdir=1.0,
          store=False, max_samples=1, sec=None, sec_hits=1, line=None, line_dir=0,
          prox=_EMPTY_PROX, speed_tol=1e-14, y_floor=1e-30, cap=1e9):
    return _rk.integrate_core(
        params.K, params.A, params.a, params.b, params.d,
        x0, y0, 0.0, t_end, tol, atol, tdir,
        store, max_samples,
        sec is not None, 0.0 if sec is None else sec, sec_hits,
        line is not None, 0.0 if line is None else line, line_dir,
        prox[0], prox[1],
        speed_tol, y_floor, cap, 200_000_000)


def integrate(params: ModelParams, x0: float, y0: float, t_end: float,
              tol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
              store: bool = True, max_samples: int = 4_000_000,
              stop_at_equilibria: bool = True) -> Trajectory:
    """Adaptive 5(4) solve of the model from (x0, y0) on [0, t_end]."""
    if x0 < 0 or y0 < 0:
        raise ValueError("initial state must lie in the nonnegative cone")
    prox = _prox_targets(params, 1e-7, include_interior=True) if stop_at_equilibria else _EMPTY_PROX
    cap = trap_bound(params)
    st, t, z, samples, ns, hits, nh, which = _core(
        params, x0, y0, t_end, tol, atol,
        store=store, max_samples=max_samples, prox=prox,
        speed_tol=max(1e-13, 20.0 * tol), y_floor=-1.0,
        cap=max(10.0 * cap, x0 + y0 + 10.0))
    conv = None
    if st == _rk.CONVERGED:
        conv = (float(z[0]), float(z[1])) if which < 0 else \
            (float(prox[0][which, 0]), float(prox[0][which, 1]))
    return Trajectory(samples=samples.copy(), termination=_STATUS_NAMES[st], converged_to=conv)


@dataclass(frozen=True)
class ReturnResult:
    ok: bool
    P: float = math.nan            # first-return section coordinate
    T: float = math.nan            # return time
    reason: str = ""               # NoReturn reason when not ok
    final: tuple[float, float] | None = None   # state where the run stopped


def return_map(params: ModelParams, section: Section, s: float,
               tol: float = DEFAULT_RTOL, t_max: float = T_MAX_RETURN) -> ReturnResult:
    """First-return map on the section; NoReturn when the orbit escapes."""
    if s <= 0:
        raise ValueError("section coordinate must be positive")
    st, t, z, samples, ns, hits, nh, which = _core(
        params, section.alpha + s, section.y_level, t_max, tol,
        sec=section.y_level, sec_hits=1, prox=_prox_targets(params))
    if st == _rk.SECTION_LIMIT and nh >= 1:
        return ReturnResult(True, float(hits[0, 1] - section.alpha), float(hits[0, 0]))
    return ReturnResult(False, reason=_STATUS_NAMES[st],
                        final=(float(z[0]), float(z[1])))


def section_crossings(params: ModelParams, x0: float, y0: float, n: int = 20,
                      tol: float = DEFAULT_RTOL, t_max: float = T_MAX_RETURN,
                      section: Section | None = None) -> tuple[np.ndarray, str]:
    """Successive upward-crossing coordinates of the orbit through (x0, y0)."""
    if section is None:
        section = Section.at_interior_equilibrium(params)
    st, t, z, samples, ns, hits, nh, which = _core(
        params, x0, y0, t_max, tol,
        sec=section.y_level, sec_hits=n, prox=_prox_targets(params))
    return hits[:nh, 1] - section.alpha, _STATUS_NAMES[st]


@dataclass(frozen=True)
class Cycle:
    s: float                      # section coordinate of the fixed point
    period: float
    x_range: tuple[float, float]
    y_range: tuple[float, float]
    stability: str                # Stable | Unstable | SemiStable
    floquet: float                # |P'(s*)| central-difference estimate
    residual: float               # |P(s*) - s*| achieved by the bisection
    near_tangent: bool = False    # |P'(s*) - 1| < 1e-4: multiplier too close
                                  # to 1 for the label to be a certified claim


@dataclass
class CycleReport:
    cycles: list[Cycle]
    count: int
    section: Section
    strip: tuple[float, float]    # admissible x-band [r1, r2] for closed orbits
    no_return_windows: list[tuple[float, float]] = field(default_factory=list)

    @property
    def stabilities(self) -> list[str]:
        return [c.stability for c in self.cycles]


def _displacement(params, section, s, tol):
    r = return_map(params, section, s, tol=tol)
    if not r.ok:
        if r.reason == "ConvergedToEquilibrium" and r.final is not None:
            # convergence to the interior point without re-crossing the
            # section (a stable node, or a focus whose next crossing is
            # below resolution): honestly inward.  Convergence anywhere
            # else (a boundary attractor) is a NoReturn exclusion.
            dx = r.final[0] - section.alpha
            dy = r.final[1] - section.y_level
            if math.hypot(dx, dy) < 0.5 * s:
                return -s
        return math.nan
    return r.P - s


def _cycle_geometry(params, section, s, period, tol):
    """One revolution from the fixed point, sampled for min/max bounds."""
    st, t, z, samples, ns, hits, nh, which = _core(
        params, section.alpha + s, section.y_level, period * 1.0001, tol,
        store=True, max_samples=3_000_000)
    xs, ys = samples[:, 1], samples[:, 2]
    return (float(xs.min()), float(xs.max())), (float(ys.min()), float(ys.max()))


def find_cycles(params: ModelParams, s_min: float | None = None,
                s_max: float | None = None, n_seed: int = 200,
                tol: float = DEFAULT_RTOL, refine_small: bool = True) -> CycleReport:
    """Bracket and bisect the fixed points of the first-return map.

    Seeds are log-spaced on (s_min, s_max); windows where |D| dips without a
    sign change get 10x local resolution (tightly nested cycles produce
    exactly that signature).  Stability comes from the displacement signs on
    the two bracket sides; SemiStable flags near-tangent brackets.
    """
    section = Section.at_interior_equilibrium(params)
    alpha = section.alpha
    beta = h_roots(params)[1]
    r1 = max(0.0, params.A)
    r2 = min(beta, params.K)
    span = r2 - alpha
    if s_min is None:
        s_min = 1e-4 * span
    if s_max is None:
        s_max = 0.999 * span

    cache: dict[float, float] = {}

    def D(s):
        if s not in cache:
            cache[s] = _displacement(params, section, s, tol)
        return cache[s]

    seeds = list(np.geomspace(s_min, s_max, n_seed))
    for s in seeds:
        D(s)

    if refine_small:
        finite = [(s, cache[s]) for s in seeds if math.isfinite(cache[s])]
        extra = []
        for i in range(1, len(finite) - 1):
            s0, d0 = finite[i - 1]
            s1, d1 = finite[i]
            s2, d2 = finite[i + 1]
            if abs(d1) < abs(d0) and abs(d1) < abs(d2) and d0 * d2 > 0:
                extra.extend(np.linspace(s0, s2, 22)[1:-1])
        for s in extra:
            seeds.append(float(s))
            D(float(s))
    seeds = sorted(set(seeds))

    brackets = []
    no_return = []
    prev = None
    prev_nr = None
    for s in seeds:
        d = cache[s]
        if not math.isfinite(d):
            if no_return and no_return[-1][1] == prev_nr:
                no_return[-1] = (no_return[-1][0], s)
            else:
                no_return.append((s, s))
            prev_nr = s
            prev = None          # no bracketing across a NoReturn window
            continue
        if prev is not None and prev[1] * d < 0:
            brackets.append((prev[0], s, prev[1], d))
        prev = (s, d)

    cycles = []
    for s_lo, s_hi, d_lo, d_hi in brackets:
        lo, hi, dlo, dhi = s_lo, s_hi, d_lo, d_hi
        resid = min(abs(dlo), abs(dhi))
        best = lo if abs(dlo) < abs(dhi) else hi
        for _ in range(200):
            if hi - lo <= 1e-13 * max(1.0, alpha):
                break
            mid = 0.5 * (lo + hi)
            dm = D(mid)
            if not math.isfinite(dm):
                break
            if abs(dm) < resid:
                resid, best = abs(dm), mid
            if resid <= 1e-10 * best:
                break
            if (dm > 0) == (dlo > 0):
                lo, dlo = mid, dm
            else:
                hi, dhi = mid, dm
        s_star = best
        rr = return_map(params, section, s_star, tol=tol)
        period = rr.T if rr.ok else math.nan
        if d_lo > 0 and d_hi < 0:
            stab = "Stable"
        elif d_lo < 0 and d_hi > 0:
            stab = "Unstable"
        else:
            stab = "SemiStable"
        h = max(1e-6 * s_star, hi - lo)
        rp = return_map(params, section, s_star + h, tol=tol)
        rm = return_map(params, section, s_star - h, tol=tol)
        floq = abs((rp.P - rm.P) / (2 * h)) if (rp.ok and rm.ok) else math.nan
        tangent = math.isfinite(floq) and abs(floq - 1.0) < 1e-4
        if rr.ok:
            xr, yr = _cycle_geometry(params, section, s_star, period, tol)
        else:
            xr = yr = (math.nan, math.nan)
        cycles.append(Cycle(s_star, period, xr, yr, stab, floq, resid, tangent))

    merged: list[Cycle] = []
    for c in sorted(cycles, key=lambda c: c.s):
        if merged and abs(c.s - merged[-1].s) < 1e-6 * alpha:
            continue
        merged.append(c)
    return CycleReport(cycles=merged, count=len(merged), section=section,
                       strip=(r1, r2), no_return_windows=no_return)


def _gprime(params: ModelParams, x: float) -> float:
    K, A, a, b = params.K, params.A, params.a, params.b
    c3 = -4.0 * a
    c2 = 3.0 * (a * (A + K) - b)
    c1 = 2.0 * (b * (A + K) - 1.0 - a * A * K)
    c0 = (A + K) - b * A * K
    return ((c3 * x + c2) * x + c1) * x + c0


def _min_gprime(params: ModelParams, lo: float, hi: float) -> float:
    """Minimum of G' on [lo, hi] via the critical points of the cubic G'."""
    K, A, a, b = params.K, params.A, params.a, params.b
    qa = -12.0 * a
    qb = 6.0 * (a * (A + K) - b)
    qc = 2.0 * (b * (A + K) - 1.0 - a * A * K)
    cand = [lo, hi]
    disc = qb * qb - 4.0 * qa * qc
    if disc >= 0:
        rt = math.sqrt(disc)
        for r in ((-qb + rt) / (2 * qa), (-qb - rt) / (2 * qa)):
            if lo < r < hi:
                cand.append(r)
    return min(_gprime(params, x) for x in cand)


def no_cycle_certificate(params: ModelParams) -> str | None:
    """Closed-orbit exclusion: threshold beyond the response peak, death
    rate below p(A), or positive growth slope across the whole root band."""
    xp = params.x_peak
    if params.A >= xp:
        return "A >= 1/sqrt(a)"
    if 0 < params.d < params.p(params.A):
        return "d < p(A) with A < 1/sqrt(a)"
    roots = h_roots(params)
    if roots is None:
        return None
    beta = roots[1]
    r1 = max(0.0, params.A)
    if r1 < beta and _min_gprime(params, r1, beta) > 0.0:
        return "Dulac: G' > 0 on (r1, beta)"
    return None


def existence_check(params: ModelParams) -> bool:
    """Poincare-Bendixson existence: weak threshold, K inside the root band,
    repelling interior equilibrium; find_cycles must then return >= 1."""
    if params.A > 0:
        return False
    roots = h_roots(params)
    if roots is None:
        return False
    alpha, beta = roots
    if not (alpha < params.K < beta):
        return False
    return _gprime(params, alpha) > 0


def _integrate_reversed(params: ModelParams, x0, y0, t_span, tol) -> Trajectory:
    cap = 10.0 * trap_bound(params)
    st, t, z, samples, ns, hits, nh, which = _core(
        params, x0, y0, t_span, tol, tdir=-1.0,
        store=True, max_samples=3_000_000, y_floor=-1.0, cap=cap,
        speed_tol=max(1e-13, 20.0 * tol))
    return Trajectory(samples=samples.copy(), termination=_STATUS_NAMES[st])


@dataclass
class SeparatrixSet:
    equilibrium: str
    location: tuple[float, float]
    unstable: list[Trajectory]
    stable: list[Trajectory]
    axis_branches: list[str]     # labels like "unstable+ on x-axis"


def separatrices(params: ModelParams, which: str, seed: float = 1e-7,
                 t_span: float = 200.0, tol: float = DEFAULT_RTOL) -> SeparatrixSet:
    """Four saddle branches of EA, EK or Ebeta, seeded along eigenvectors.

    Unstable branches run forward from +-seed displacements, stable
    branches run in reversed time; axis-aligned branches are labeled.
    """
    eq = {e.kind: e for e in equilibria(params)}
    if which not in ("EA", "EK", "Ebeta"):
        raise ValueError(f"unknown saddle name {which!r}")
    if which not in eq:
        raise ValueError(f"{which} does not exist at these parameters")
    rep = eq[which]
    if rep.stability.kind.value != "Saddle":
        raise ValueError(f"{which} is not a saddle here (it is {rep.stability.kind.value})")
    x, y = rep.location
    V = params.jacobian(x, y)
    lam, vecs = np.linalg.eig(V)
    lam = lam.real
    order = np.argsort(lam)           # [stable, unstable]
    scale = seed * (1.0 + abs(x) + abs(y))
    unstable, stable, labels = [], [], []
    for role, col, fwd in (("unstable", order[1], True), ("stable", order[0], False)):
        v = vecs[:, col].real
        v = v / np.linalg.norm(v)
        for sign in (+1.0, -1.0):
            tag = f"{role}{'+' if sign > 0 else '-'}"
            xs, ys = x + sign * scale * v[0], y + sign * scale * v[1]
            if xs < -1e-12 or ys < -1e-12:
                labels.append(f"{tag} leaves the cone")
                continue
            xs, ys = max(xs, 0.0), max(ys, 0.0)
            if fwd:
                unstable.append(integrate(params, xs, ys, t_span, tol=tol))
            else:
                stable.append(_integrate_reversed(params, xs, ys, t_span, tol))
            if abs(v[1]) < 1e-9:
                labels.append(f"{tag} on x-axis")
            elif abs(v[0]) < 1e-9:
                labels.append(f"{tag} on y-axis")
    return SeparatrixSet(which, (x, y), unstable, stable, labels)


def connection_gap(params: ModelParams, sigma_x: float,
                   kind: str = "heteroclinic", tol: float = DEFAULT_RTOL,
                   t_span: float = 500.0) -> float | None:
    """Signed vertical gap between invariant manifolds on the line x = sigma_x.

    heteroclinic: y of W^u(E_K) minus y of W^s(E_A) at their first crossings
    of the test line.  homoclinic_beta: W^u(E_beta) against W^s(E_beta).
    Returns None when either manifold misses the line (NoIntersection).
    """
    if kind == "heteroclinic":
        up = _manifold_crossing(params, "EK", False, sigma_x, tol, t_span)
        dn = _manifold_crossing(params, "EA", True, sigma_x, tol, t_span)
    elif kind == "homoclinic_beta":
        up = _manifold_crossing(params, "Ebeta", False, sigma_x, tol, t_span)
        dn = _manifold_crossing(params, "Ebeta", True, sigma_x, tol, t_span)
    else:
        raise ValueError(f"unknown connection kind {kind!r}")
    if up is None or dn is None:
        return None
    return up - dn


def _manifold_crossing(params: ModelParams, which: str, stable: bool,
                       sigma_x: float, tol: float, t_span: float) -> float | None:
    """First crossing height of the interior saddle branch with x = sigma_x."""
    eq = {e.kind: e for e in equilibria(params)}
    if which not in eq or eq[which].stability.kind.value != "Saddle":
        return None
    x, y = eq[which].location
    V = params.jacobian(x, y)
    lam, vecs = np.linalg.eig(V)
    lam = lam.real
    idx = int(np.argmin(lam)) if stable else int(np.argmax(lam))
    v = vecs[:, idx].real
    v = v / np.linalg.norm(v)
    scale = 1e-7 * (1.0 + abs(x) + abs(y))
    for sign in (+1.0, -1.0):
        xs, ys = x + sign * scale * v[0], y + sign * scale * v[1]
        if ys <= 1e-15 or xs <= 0:
            continue  # interior branch only
        st, t, z, samples, ns, hits, nh, which_p = _core(
            params, xs, ys, t_span, tol, tdir=(-1.0 if stable else 1.0),
            line=sigma_x, line_dir=0,
            prox=_prox_targets(params) if not stable else _EMPTY_PROX,
            cap=10.0 * trap_bound(params))
        if st == _rk.SECTION_LIMIT and nh >= 1:
            return float(hits[0, 2])
    return None
