import math

import numpy as np
import pytest

from allee4.model import ModelParams, h_roots, trap_bound
from allee4.sim import (Section, connection_gap, existence_check, find_cycles,
                        integrate, no_cycle_certificate, return_map,
                        section_crossings, separatrices, _gprime)

def test_equilibrium_is_stationary(fig5a):
    tr = integrate(fig5a, 0.0, 0.0, 5.0, stop_at_equilibria=False)
    assert np.max(np.abs(tr.samples[:, 1])) < 1e-12
    assert np.max(np.abs(tr.samples[:, 2])) < 1e-12


def test_axis_dynamics_monotone_to_K(fig5a):
    # prey-only: between threshold and capacity the population climbs to K
    tr = integrate(fig5a, 11.0, 0.0, 50.0, stop_at_equilibria=False)
    xs = tr.samples[:, 1]
    # monotone up to roundoff jitter once the state parks at K
    assert np.all(np.diff(xs) > -1e-9 * fig5a.K)
    assert abs(xs[-1] - fig5a.K) < 1e-6
    assert np.max(np.abs(tr.samples[:, 2])) == 0.0


def test_positive_cone_invariance(fig5a, rng):
    for _ in range(5):
        x0, y0 = rng.uniform(0.5, 15.0), rng.uniform(0.5, 45.0)
        tr = integrate(fig5a, x0, y0, 20.0)
        assert tr.samples[:, 1].min() > -1e-9
        assert tr.samples[:, 2].min() > -1e-9


def test_trap_region_absorbs(fig5a):
    M = trap_bound(fig5a)
    tr = integrate(fig5a, 12.0, M * 0.9, 50.0, stop_at_equilibria=False)
    s = tr.samples[:, 1] + tr.samples[:, 2]
    # after the transient the orbit stays under the trap line
    tail = s[len(s) // 3:]
    assert np.all(tail <= M * (1 + 1e-9))


def test_red_orbit_converges_to_interior(fig5a):
    tr = integrate(fig5a, 11.0, 35.0, 2000.0)
    assert tr.termination == "ConvergedToEquilibrium"
    alpha = h_roots(fig5a)[0]
    assert abs(tr.converged_to[0] - alpha) < 1e-4
    assert abs(tr.converged_to[1] - fig5a.G(alpha)) < 1e-3


def test_integrator_matches_scipy_reference(fig5a):
    scipy = pytest.importorskip("scipy.integrate")

    def rhs(t, z):
        return fig5a.rhs(z[0], z[1])

    sol = scipy.solve_ivp(rhs, (0.0, 1.0), (11.0, 35.0), method="RK45",
                          rtol=1e-11, atol=1e-13, dense_output=True)
    tr = integrate(fig5a, 11.0, 35.0, 1.0, tol=1e-11, atol=1e-13,
                   stop_at_equilibria=False)
    zs = sol.sol(tr.samples[:, 0])
    err = np.max(np.abs(zs.T - tr.samples[:, 1:]))
    assert err < 1e-6


def test_return_map_fixed_point_property(fig5a):
    rep = find_cycles(fig5a, n_seed=60)
    sec = rep.section
    for c in rep.cycles:
        r = return_map(fig5a, sec, c.s)
        assert r.ok
        assert abs(r.P - c.s) < 1e-9


def test_return_map_directions(fig5a):
    # inward spiral below the inner cycle, outward between the cycles
    sec = Section.at_interior_equilibrium(fig5a)
    r_in = return_map(fig5a, sec, 1.0)
    assert r_in.ok and r_in.P < 1.0
    r_out = return_map(fig5a, sec, 3.5)
    assert r_out.ok and r_out.P > 3.5


def test_fig5a_two_cycles(fig5a):
    rep = find_cycles(fig5a)
    assert rep.count == 2
    assert rep.stabilities == ["Unstable", "Stable"]
    inner, outer = rep.cycles
    assert inner.floquet > 1.0 and outer.floquet < 1.0
    # strip bound: max(0, A) <= x <= min(beta, K)
    r1, r2 = rep.strip
    for c in rep.cycles:
        assert c.x_range[0] >= r1 - 1e-8
        assert c.x_range[1] <= r2 + 1e-8
    # strictly nested
    assert inner.x_range[0] > outer.x_range[0]
    assert inner.x_range[1] < outer.x_range[1]


def test_quoted_orbit_trends(fig5a):
    s_blue, st = section_crossings(fig5a, 11.0, 40.0, n=12)
    assert st == "SectionEventLimit" and s_blue[-1] < s_blue[0]      # inward
    s_green, _ = section_crossings(fig5a, 11.0, 36.0, n=12)
    assert s_green[-1] > s_green[0]                                   # outward
    s_red, _ = section_crossings(fig5a, 11.0, 35.0, n=12)
    assert s_red[-1] < s_red[0]                                       # inward


def test_three_cycle_demonstration(three_cycle_params):
    rep = find_cycles(three_cycle_params, tol=1e-11, n_seed=300)
    assert rep.count == 3
    assert rep.stabilities == ["Stable", "Unstable", "Stable"]
    alpha = h_roots(three_cycle_params)[0]
    assert _gprime(three_cycle_params, alpha) > 0    # repelling interior point
    s = [c.s for c in rep.cycles]
    assert s == sorted(s)


def test_no_cycle_certificates_direct():
    # (a) threshold at/beyond the response peak
    a = 0.01
    p = ModelParams(K=16.0, A=1.2 / math.sqrt(a), a=a, b=0.0, d=1.0)
    assert no_cycle_certificate(p) == "A >= 1/sqrt(a)"
    # (b) death rate below p(A)
    p2 = ModelParams(K=16.0, A=5.0, a=a, b=0.0, d=0.5 * (5.0 / (a * 25 + 1)))
    assert no_cycle_certificate(p2) == "d < p(A) with A < 1/sqrt(a)"
    # fig5a: no certificate applies (there are cycles)
    p3 = ModelParams(K=20.0, A=2.0, a=0.004905, b=-0.10891, d=24.28)
    assert no_cycle_certificate(p3) is None


def test_dulac_certificate_example():
    # weak threshold, capacity far past the response peak, d close to the
    # fold: the growth slope stays positive across the whole root band
    p = ModelParams(K=10.7, A=-6.729, a=0.11288, b=0.33511, d=0.88539)
    assert no_cycle_certificate(p) == "Dulac: G' > 0 on (r1, beta)"
    r = h_roots(p)
    assert r is not None and 0 < r[0] < p.K   # the interior point exists
    rep = find_cycles(p, n_seed=40)
    assert rep.count == 0


def test_existence_check_fig5b(fig5b):
    assert existence_check(fig5b)
    rep = find_cycles(fig5b, n_seed=80)
    assert rep.count >= 1


def test_existence_check_guards(fig5a):
    assert not existence_check(fig5a)   # A > 0
    p = ModelParams(K=10.0, A=-0.5, a=0.01, b=0.0, d=4.8)
    r = h_roots(p)
    if r is not None and _gprime(p, r[0]) < 0:
        assert not existence_check(p)


def test_separatrices_EK_axis_branch(fig5a):
    # E_K is a saddle here; its stable manifold contains the x-axis
    ss = separatrices(fig5a, "EK")
    assert any("on x-axis" in lab for lab in ss.axis_branches)
    assert len(ss.unstable) + len(ss.stable) >= 3
    # axis-contained stable branches stay on the axis
    for tr in ss.stable:
        if np.max(np.abs(tr.samples[:, 2])) < 1e-9:
            assert np.all(tr.samples[:, 2] >= -1e-12)


def test_separatrices_rejects_non_saddle(fig5a):
    with pytest.raises(ValueError):
        separatrices(fig5a, "E0" if False else "Ebeta")  # Ebeta absent here


def test_separatrix_seed_robustness(fig5a):
    s1 = separatrices(fig5a, "EK", seed=1e-7, t_span=1.0)
    s2 = separatrices(fig5a, "EK", seed=5e-8, t_span=1.0)
    # compare the interior unstable branches after the same integration time
    b1 = [t for t in s1.unstable if np.max(t.samples[:, 2]) > 1e-6]
    b2 = [t for t in s2.unstable if np.max(t.samples[:, 2]) > 1e-6]
    assert b1 and b2
    e1, e2 = b1[0].samples[-1, 1:], b2[0].samples[-1, 1:]
    assert np.max(np.abs(e1 - e2)) < 1e-4


def _ns_regime_params(eps_d, eps_A):
    # strong-threshold collision neighborhood: A near K, d near p(K)
    a, K = 0.0064, 10.0           # ell = 0.8
    b = -0.05
    pK = K / (a * K * K + b * K + 1.0)
    return ModelParams(K=K, A=K * (1.0 - eps_A), a=a, b=b, d=pK * (1.0 - eps_d))


def _sigma_between_A_and_alpha(p):
    r = h_roots(p)
    return 0.5 * (p.A + r[0]) if r is not None else None


def _collision_family(f, eps_A=0.02):
    # d interpolated across (p(A), p(K)) so the interior point sweeps (A, K)
    a, K, b = 0.0064, 10.0, -0.05
    A = K * (1.0 - eps_A)
    pofx = lambda x: x / (a * x * x + b * x + 1.0)
    d = pofx(A) + f * (pofx(K) - pofx(A))
    return ModelParams(K=K, A=A, a=a, b=b, d=d)


def test_connection_gap_scan():
    # the gap exists throughout the repelling regime of the collision
    # neighborhood, is continuous along the scan (empirical Lipschitz
    # bound), and shrinks toward the connection as the Hopf curve nears
    fs = np.linspace(0.10, 0.50, 9)
    gaps = []
    for f in fs:
        p = _collision_family(f)
        g = connection_gap(p, sigma_x=_sigma_between_A_and_alpha(p), t_span=8000.0)
        gaps.append(g)
    vals = [(f, g) for f, g in zip(fs, gaps) if g is not None]
    assert len(vals) >= 7
    gs = [g for _, g in vals]
    ffs = [f for f, _ in vals]
    diffs = [abs(gs[i + 1] - gs[i]) / (ffs[i + 1] - ffs[i]) for i in range(len(gs) - 1)]
    assert max(diffs) < 1.0          # empirical Lipschitz record for this family
    assert gs[-1] < gs[0]            # monotone shrink toward the connection


def test_connection_gap_region_I_no_cycle():
    # wide-open gap (upper manifold well above the lower one): the
    # extinction basin fills the cone and no cycle exists
    p = _collision_family(0.15)
    g = connection_gap(p, sigma_x=_sigma_between_A_and_alpha(p), t_span=8000.0)
    assert g is not None and g > 0
    assert find_cycles(p, n_seed=50).count == 0


def test_open_gap_means_no_cycle():
    # positive gap: the upper connection from E_K passes above W^s(E_A),
    # the annulus leaks into the extinction basin, and no cycle exists
    for f in (0.15, 0.45):
        p = _collision_family(f)
        g = connection_gap(p, sigma_x=_sigma_between_A_and_alpha(p), t_span=8000.0)
        assert g is not None and g > 0
        assert find_cycles(p, n_seed=60).count == 0


def test_negative_gap_with_stable_cycle(fig5a):
    # negative gap: the upper connection dives below W^s(E_A), the region
    # between the manifolds traps the flow, and a stable cycle lives inside
    g = connection_gap(fig5a, sigma_x=7.0, t_span=500.0)
    assert g is not None and g < 0
    rep = find_cycles(fig5a, n_seed=80)
    assert any(c.stability == "Stable" for c in rep.cycles)
    # the test line must actually meet both manifolds: off to the left of
    # the cycle region the stable manifold misses it
    assert connection_gap(fig5a, sigma_x=4.0, t_span=500.0) is None


def test_homoclinic_beta_gap_evaluates():
    # both Ebeta branches cross a segment between the interior roots, so
    # the self-connection gap is well defined on this V_alphabeta set
    p = ModelParams(K=3.72284, A=0.550162, a=0.258544, b=-0.219455, d=1.09592)
    r = h_roots(p)
    g = connection_gap(p, sigma_x=0.5 * (r[0] + r[1]), kind="homoclinic_beta",
                       t_span=4000.0)
    assert g is not None and math.isfinite(g)
    with pytest.raises(ValueError):
        connection_gap(p, sigma_x=2.0, kind="nonsense")


def test_cycle_count_invariant_under_refinement(fig5a, fig5b):
    base = find_cycles(fig5a, n_seed=100)
    finer = find_cycles(fig5a, n_seed=200, tol=5e-11)
    assert base.count == finer.count == 2
    b1 = find_cycles(fig5b, n_seed=100)
    b2 = find_cycles(fig5b, n_seed=200, tol=5e-11)
    assert b1.count == b2.count


def test_y_axis_invariance(fig5a):
    tr = integrate(fig5a, 0.0, 7.0, 10.0, stop_at_equilibria=False)
    assert np.max(np.abs(tr.samples[:, 1])) < 1e-11
    # predators decay without prey
    assert tr.samples[-1, 2] < 1e-3


def test_innermost_cycle_stability_tracks_Gprime(fig5a, three_cycle_params):
    # attracting interior point (G' < 0): the innermost cycle is unstable;
    # repelling interior point (G' > 0): it is stable
    rep_a = find_cycles(fig5a, n_seed=100)
    assert _gprime(fig5a, rep_a.section.alpha) < 0
    assert rep_a.cycles[0].stability == "Unstable"
    rep_b = find_cycles(three_cycle_params, n_seed=200, tol=1e-11)
    assert _gprime(three_cycle_params, rep_b.section.alpha) > 0
    assert rep_b.cycles[0].stability == "Stable"


def test_stability_labels_agree_with_floquet(fig5a):
    # side-sign labels match the multiplier whenever it is resolved
    for c in find_cycles(fig5a, n_seed=100).cycles:
        if math.isfinite(c.floquet) and abs(c.floquet - 1.0) > 1e-4:
            assert (c.floquet > 1.0) == (c.stability == "Unstable")
            assert not c.near_tangent
