"""Adaptive Dormand-Prince 5(4) integrator, compiled with numba.

One monolithic driver with optional terminal conditions:

  * upward crossings of the horizontal section y = y_sec (collected, with
    the crossing time/abscissa located on the quartic dense-output
    interpolant; a crossing is only accepted on a strict sign change so a
    seed sitting exactly on the section does not retrigger at t0),
  * crossings of the vertical line x = x_line (for connection gaps),
  * equilibrium convergence (max-norm speed below speed_tol * (1+|z|)),
  * predator floor y < y_floor,
  * time limit / step budget.

The tableau and the dense-output matrix are the standard Dormand-Prince
pair (identical to the coefficients used by scipy's RK45); agreement with
scipy is pinned in the test suite.
"""
from __future__ import annotations

import numpy as np
from numba import njit

# termination codes
TIME_LIMIT = 0
CONVERGED = 1
LEFT_DOMAIN = 2
SECTION_LIMIT = 3
NO_RETURN_FLOOR = 4
STEP_BUDGET = 5
STIFFNESS = 6

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = np.array([
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [1 / 5, 0.0, 0.0, 0.0, 0.0],
    [3 / 40, 9 / 40, 0.0, 0.0, 0.0],
    [44 / 45, -56 / 15, 32 / 9, 0.0, 0.0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0.0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
])
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])


@njit(cache=True, nogil=True, inline="always")
def _f(K, A, a, b, d, tdir, x, y, out):
    # tdir = -1 integrates the time-reversed field (stable manifolds)
    q = a * x * x + b * x + 1.0
    p = x / q
    out[0] = tdir * p * ((x - A) * (K - x) * q - y)
    out[1] = tdir * y * (p - d)


@njit(cache=True, nogil=True)
def _dense_eval(z0, h, Q, theta):
    # quartic interpolant: z(theta) = z0 + h * Q @ [th, th^2, th^3, th^4]
    th2 = theta * theta
    x = z0[0] + h * (Q[0, 0] * theta + Q[0, 1] * th2 + Q[0, 2] * th2 * theta + Q[0, 3] * th2 * th2)
    y = z0[1] + h * (Q[1, 0] * theta + Q[1, 1] * th2 + Q[1, 2] * th2 * theta + Q[1, 3] * th2 * th2)
    return x, y


@njit(cache=True, nogil=True)
def _locate_root(z0, h, Q, target, comp, lo, hi, glo):
    # bisection for component comp crossing `target` on the dense interpolant
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        xm, ym = _dense_eval(z0, h, Q, mid)
        gm = (ym if comp == 1 else xm) - target
        if (gm > 0.0) == (glo > 0.0):
            lo = mid
            glo = gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


@njit(cache=True, nogil=True)
def integrate_core(K, A, a, b, d,
                   x0, y0, t0, t_end, rtol, atol,
                   tdir,
                   store, max_samples,
                   sec_on, sec_y, sec_max_hits,
                   line_on, line_x, line_dir,
                   prox_xy, prox_r2,
                   speed_tol, y_floor, domain_cap, max_steps):
    """Returns (status, t_final, z_final, samples, n_samples, hits, n_hits, which).

    samples rows: (t, x, y); hits rows: (t, x, y) for section up-crossings
    or x-line crossings, whichever is enabled (section takes priority).
    `which` is the index of the proximity target that fired (-1 otherwise);
    prox_xy is an (m, 2) array of points, prox_r2 the squared radii.
    """
    AM = _A
    BM = _B
    EM = _E
    PM = _P
    CM = _C

    z = np.empty(2)
    z[0] = x0
    z[1] = y0
    t = t0
    kstages = np.empty((7, 2))
    ftmp = np.empty(2)
    znew = np.empty(2)
    zstage = np.empty(2)

    samples = np.empty((max_samples if store else 1, 3))
    n_samples = 0
    if store:
        samples[0, 0] = t
        samples[0, 1] = z[0]
        samples[0, 2] = z[1]
        n_samples = 1

    hits = np.empty((max(sec_max_hits, 8), 3))
    n_hits = 0

    _f(K, A, a, b, d, tdir, z[0], z[1], ftmp)
    k1 = np.empty(2)
    k1[0] = ftmp[0]
    k1[1] = ftmp[1]

    # initial step heuristic
    scale0 = atol + rtol * max(abs(z[0]), abs(z[1]))
    f_norm = max(abs(k1[0]), abs(k1[1]))
    if f_norm > 0.0:
        h = 0.01 * scale0 / f_norm
    else:
        h = 1e-6
    if h > abs(t_end - t0):
        h = abs(t_end - t0)

    status = TIME_LIMIT
    which = -1
    steps = 0
    err_exp = -0.2

    while t < t_end:
        if steps >= max_steps:
            status = STEP_BUDGET
            break
        steps += 1
        if h < 1e-14 * max(1.0, abs(t)):
            status = STIFFNESS
            break
        if t + h > t_end:
            h = t_end - t

        # stages (FSAL: k1 already holds f(t, z))
        kstages[0, 0] = k1[0]
        kstages[0, 1] = k1[1]
        for s in range(1, 6):
            zstage[0] = z[0]
            zstage[1] = z[1]
            for j in range(s):
                zstage[0] += h * AM[s, j] * kstages[j, 0]
                zstage[1] += h * AM[s, j] * kstages[j, 1]
            _f(K, A, a, b, d, tdir, zstage[0], zstage[1], ftmp)
            kstages[s, 0] = ftmp[0]
            kstages[s, 1] = ftmp[1]
        znew[0] = z[0]
        znew[1] = z[1]
        for j in range(6):
            znew[0] += h * BM[j] * kstages[j, 0]
            znew[1] += h * BM[j] * kstages[j, 1]
        _f(K, A, a, b, d, tdir, znew[0], znew[1], ftmp)
        kstages[6, 0] = ftmp[0]
        kstages[6, 1] = ftmp[1]

        # embedded error estimate
        err0 = 0.0
        err1 = 0.0
        for j in range(7):
            err0 += EM[j] * kstages[j, 0]
            err1 += EM[j] * kstages[j, 1]
        sc0 = atol + rtol * max(abs(z[0]), abs(znew[0]))
        sc1 = atol + rtol * max(abs(z[1]), abs(znew[1]))
        e0 = h * err0 / sc0
        e1 = h * err1 / sc1
        err = np.sqrt(0.5 * (e0 * e0 + e1 * e1))

        if err > 1.0:
            fac = max(0.2, 0.9 * err ** err_exp)
            h *= fac
            continue

        # accepted
        t_new = t + h
        # dense-output matrix Q = kstages^T @ P
        Q = np.zeros((2, 4))
        for c in range(4):
            q0 = 0.0
            q1 = 0.0
            for j in range(7):
                q0 += kstages[j, 0] * PM[j, c]
                q1 += kstages[j, 1] * PM[j, c]
            Q[0, c] = q0
            Q[1, c] = q1

        terminate = False

        if sec_on:
            g0 = z[1] - sec_y
            g1 = znew[1] - sec_y
            if g0 < 0.0 and g1 >= 0.0:  # strict upward crossing
                theta = _locate_root(z, h, Q, sec_y, 1, 0.0, 1.0, g0)
                xh, yh = _dense_eval(z, h, Q, theta)
                hits[n_hits, 0] = t + theta * h
                hits[n_hits, 1] = xh
                hits[n_hits, 2] = yh
                n_hits += 1
                if n_hits >= sec_max_hits:
                    status = SECTION_LIMIT
                    terminate = True

        if line_on and not terminate:
            g0 = z[0] - line_x
            g1 = znew[0] - line_x
            crossed = False
            if line_dir > 0:
                crossed = g0 < 0.0 and g1 >= 0.0
            elif line_dir < 0:
                crossed = g0 > 0.0 and g1 <= 0.0
            else:
                crossed = (g0 < 0.0 and g1 >= 0.0) or (g0 > 0.0 and g1 <= 0.0)
            if crossed:
                theta = _locate_root(z, h, Q, line_x, 0, 0.0, 1.0, g0)
                xh, yh = _dense_eval(z, h, Q, theta)
                hits[n_hits, 0] = t + theta * h
                hits[n_hits, 1] = xh
                hits[n_hits, 2] = yh
                n_hits += 1
                status = SECTION_LIMIT
                terminate = True

        if not terminate and znew[1] < y_floor:
            status = NO_RETURN_FLOOR
            terminate = True

        if not terminate and (znew[0] + znew[1] > domain_cap or znew[0] < -1e-9 or znew[1] < -1e-9):
            status = LEFT_DOMAIN
            terminate = True

        if not terminate:
            for m in range(prox_xy.shape[0]):
                dx = znew[0] - prox_xy[m, 0]
                dy = znew[1] - prox_xy[m, 1]
                if dx * dx + dy * dy <= prox_r2[m]:
                    status = CONVERGED
                    which = m
                    terminate = True
                    break

        if not terminate:
            spd = max(abs(kstages[6, 0]), abs(kstages[6, 1]))
            if spd <= speed_tol * (1.0 + max(abs(znew[0]), abs(znew[1]))):
                status = CONVERGED
                terminate = True

        z[0] = znew[0]
        z[1] = znew[1]
        t = t_new
        k1[0] = kstages[6, 0]
        k1[1] = kstages[6, 1]

        if store and n_samples < max_samples:
            samples[n_samples, 0] = t
            samples[n_samples, 1] = z[0]
            samples[n_samples, 2] = z[1]
            n_samples += 1

        if terminate:
            break

        if err > 0.0:
            fac = min(10.0, 0.9 * err ** err_exp)
        else:
            fac = 10.0
        h *= fac

    return status, t, z.copy(), samples[:n_samples], n_samples, hits[:n_hits], n_hits, which
