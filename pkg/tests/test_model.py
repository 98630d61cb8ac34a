import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from allee4.model import (ModelParams, ParamError, Region, Stability,
                          classify_eigenvalues, equilibria, eval_pG, h_roots,
                          region, scale_params, trap_bound)

from conftest import FIG5A_ALPHA, FIG5A_BETA


def test_param_validation():
    with pytest.raises(ParamError):
        ModelParams(K=-1, A=0.1, a=1, b=0, d=1)
    with pytest.raises(ParamError):
        ModelParams(K=2, A=0.1, a=0.2, b=-1.0, d=1)   # b <= -2 sqrt(a) = -0.894
    with pytest.raises(ParamError):
        ModelParams(K=2, A=3, a=1, b=0, d=1)
    ModelParams(K=2, A=-1.9, a=1, b=0, d=1)


def test_scale_params_identity():
    p = scale_params(1, 4, 1, 0.2, -0.1, 1, 2.5, 1)
    assert (p.K, p.A, p.a, p.b, p.d) == (4, 1, 0.2, -0.1, 2.5)


def test_scale_params_derived():
    # s = mc/r = 1/2 at (r, m, c) = (2, 1, 1), so K0 = 4 maps to K = 2
    p = scale_params(2, 4, 1, 0.2, -0.1, 1, 2.5, 1)
    assert math.isclose(p.K, 2.0)
    assert math.isclose(p.A, 0.5)
    assert math.isclose(p.a, 0.05)
    assert math.isclose(p.b, -0.05)
    assert math.isclose(p.d, 2.5 / 0.5)


@given(st.floats(0.1, 5), st.floats(0.5, 20), st.floats(0.1, 4), st.floats(0.01, 2),
       st.floats(0.1, 5), st.floats(0.1, 5), st.floats(-0.99, 0.99), st.floats(-0.9, 3))
@settings(max_examples=100, deadline=None)
def test_scale_params_preserves_invariants(r, K0, m, a0, c, d0, Afrac, bfrac):
    A0 = Afrac * K0
    b0 = bfrac * 2 * math.sqrt(a0) - 2 * math.sqrt(a0) * (bfrac <= -1)
    if not b0 > -2 * math.sqrt(a0):
        b0 = -1.9 * math.sqrt(a0)
    p = scale_params(r, K0, A0, a0, b0, c, d0, m)
    assert p.K > 0 and p.a > 0 and p.d > 0
    assert p.b > -2 * math.sqrt(p.a)
    assert -p.K < p.A < p.K


def test_eval_pG_roots_of_G(fig5a):
    assert abs(fig5a.G(fig5a.A)) < 1e-12
    assert abs(fig5a.G(fig5a.K)) < 1e-12


def test_p_peak_value(fig5a):
    # response maximum at 1/sqrt(a) equals d_m
    xp = fig5a.x_peak
    assert math.isclose(fig5a.p(xp), fig5a.d_m, rel_tol=1e-12)


def test_eval_pG_derivatives_match_finite_differences(fig5a, rng):
    for x0 in rng.uniform(0.5, 18.0, 6):
        ps, Gs = eval_pG(fig5a, x0, 4)
        for f, s in ((fig5a.p, ps), (fig5a.G, Gs)):
            h = 1e-5
            d1 = (f(x0 + h) - f(x0 - h)) / (2 * h)
            assert math.isclose(s.derivative_at_origin(1), d1, rel_tol=1e-6, abs_tol=1e-8)
            # second difference needs a wider step: the cancellation noise
            # at h = 1e-5 is ~|f| eps / h^2 ~ 5e-5 absolute here
            h = 1e-4
            d2 = (f(x0 + h) - 2 * f(x0) + f(x0 - h)) / h ** 2
            assert math.isclose(s.derivative_at_origin(2), d2, rel_tol=1e-4, abs_tol=1e-5)


def test_h_roots_against_extended_precision_oracle(fig5a):
    r = h_roots(fig5a)
    assert r is not None
    alpha, beta = r
    with mp.workdps(50):
        a, b, d = map(mp.mpf, ("0.004905", "-0.10891", "24.28"))
        B = b * d - 1
        disc = B * B - 4 * a * d * d
        q = (-B + mp.sqrt(disc)) / 2
        assert abs(alpha - float(d / q)) < 1e-12 * float(d / q)
        assert abs(beta - float(q / (a * d))) < 1e-12 * float(q / (a * d))
    assert math.isclose(alpha, FIG5A_ALPHA, rel_tol=1e-12)
    assert math.isclose(beta, FIG5A_BETA, rel_tol=1e-12)


def test_h_roots_coalesced_and_absent():
    base = dict(K=20.0, A=2.0, a=0.004905, b=-0.10891)
    d_m = 1.0 / (base["b"] + 2 * math.sqrt(base["a"]))
    p = ModelParams(d=d_m, **base)
    r = h_roots(p)
    assert r[0] == r[1] == p.x_peak
    p2 = ModelParams(d=1.02 * d_m, **base)
    assert h_roots(p2) is None


@given(st.floats(0.001, 2), st.floats(-0.8, 0.95), st.floats(0.05, 0.95))
@settings(max_examples=150, deadline=None)
def test_vieta_invariants(a, bfrac, dfrac):
    b = bfrac * 2 * math.sqrt(a)
    d_m = 1.0 / (b + 2 * math.sqrt(a))
    d = dfrac * d_m
    p = ModelParams(K=10.0, A=1.0, a=a, b=b, d=d)
    r = h_roots(p)
    assert r is not None
    alpha, beta = r
    assert math.isclose(alpha * beta, 1.0 / a, rel_tol=1e-12)
    assert math.isclose(alpha + beta, (1.0 - b * d) / (a * d), rel_tol=1e-12)
    assert math.isclose(p.p(alpha), d, rel_tol=1e-10)
    assert math.isclose(p.p(beta), d, rel_tol=1e-10)


def test_interior_trace_det_formulas(fig5a):
    r = h_roots(fig5a)
    alpha = r[0]
    V = fig5a.jacobian(alpha, fig5a.G(alpha))
    ps, Gs = eval_pG(fig5a, alpha, 2)
    p0 = ps.coeffs[0]
    p1 = ps.derivative_at_origin(1)
    G0 = Gs.coeffs[0]
    G1 = Gs.derivative_at_origin(1)
    assert math.isclose(np.trace(V), p0 * G1, rel_tol=1e-10)
    assert math.isclose(np.linalg.det(V), p0 * p1 * G0, rel_tol=1e-10)
    # the fully reduced determinant expression
    x = alpha
    det2 = x * (1 - fig5a.a * x * x) * (fig5a.K - x) * (x - fig5a.A) \
        / (fig5a.a * x * x + fig5a.b * x + 1) ** 2
    assert math.isclose(np.linalg.det(V), det2, rel_tol=1e-10)


def test_boundary_eigenvalue_formulas(fig5a):
    eqs = {e.kind: e for e in equilibria(fig5a)}
    for kind, xv in (("EA", fig5a.A), ("EK", fig5a.K)):
        lam = sorted((l.real for l in eqs[kind].eigenvalues))
        want = sorted((fig5a.p(xv) * _gprime(fig5a, xv), fig5a.p(xv) - fig5a.d))
        assert np.allclose(lam, want, rtol=1e-10)
    # E0 carries -AK and -d (p'(0) G(0) and p(0) - d)
    lam0 = sorted(l.real for l in eqs["E0"].eigenvalues)
    assert np.allclose(lam0, sorted((-fig5a.A * fig5a.K, -fig5a.d)), rtol=1e-12)


def _gprime(p, x):
    h = 1e-6 * max(1.0, abs(x))
    return (p.G(x + h) - p.G(x - h)) / (2 * h)


def test_fig5a_equilibria_classification(fig5a):
    eqs = {e.kind: e for e in equilibria(fig5a)}
    assert eqs["E0"].stability.kind == Stability.STABLE_NODE
    assert eqs["EA"].stability.kind == Stability.SADDLE
    assert eqs["EK"].stability.kind == Stability.SADDLE
    assert eqs["Ealpha"].stability.kind == Stability.STABLE_FOCUS
    assert "Ebeta" not in eqs        # beta = 20.798 > K
    assert region(fig5a).region == Region.V_ALPHA


def test_weak_allee_E0_saddle():
    p = ModelParams(K=10.0, A=-1.0, a=0.01, b=0.0, d=2.0)
    eqs = {e.kind: e for e in equilibria(p)}
    assert "EA" not in eqs
    assert eqs["E0"].stability.kind == Stability.SADDLE


def test_ebeta_always_saddle(rng):
    n = 0
    while n < 25:
        a = 10 ** rng.uniform(-3, 0)
        b = rng.uniform(-0.9, 2.0) * 2 * math.sqrt(a)
        d = rng.uniform(0.1, 0.92) / (b + 2 * math.sqrt(a))
        K = rng.uniform(0.5, 3.0) / math.sqrt(a)
        A = rng.uniform(-0.5, 0.5) * K
        try:
            p = ModelParams(K=K, A=A, a=a, b=b, d=d)
        except ParamError:
            continue
        eqs = {e.kind: e for e in equilibria(p)}
        if "Ebeta" in eqs:
            assert eqs["Ebeta"].stability.kind == Stability.SADDLE
            n += 1


def test_region_examples(fig5a):
    assert region(fig5a).region == Region.V_ALPHA
    # beyond the fold with weak threshold and K below both roots
    p = ModelParams(K=5.0, A=-1.0, a=0.01, b=0.0, d=0.9 / (0.0 + 2 * 0.1))
    r = h_roots(p)
    assert r is not None and p.K < r[0]
    assert region(p).region == Region.V0_3
    # transcritical boundary at d = p(K)
    p2 = ModelParams(K=20.0, A=2.0, a=0.004905, b=-0.10891,
                     d=ModelParams(K=20.0, A=2.0, a=0.004905, b=-0.10891, d=1.0).p(20.0))
    lab = region(p2)
    assert lab.region == Region.BOUNDARY
    assert "transcritical_EK" in lab.detail


def test_region_v04():
    base = dict(K=20.0, A=2.0, a=0.004905, b=-0.10891)
    d_m = 1.0 / (base["b"] + 2 * math.sqrt(base["a"]))
    assert region(ModelParams(d=1.1 * d_m, **base)).region == Region.V0_4


def test_coalesced_interior_equilibrium():
    base = dict(K=20.0, A=2.0, a=0.004905, b=-0.10891)
    d_m = 1.0 / (base["b"] + 2 * math.sqrt(base["a"]))
    p = ModelParams(d=d_m, **base)
    eqs = {e.kind: e for e in equilibria(p)}
    assert "Coalesced" in eqs
    assert "Ealpha" not in eqs and "Ebeta" not in eqs
    e = eqs["Coalesced"]
    assert math.isclose(e.location[0], p.x_peak, rel_tol=1e-12)
    # the fold point is nonhyperbolic: one eigenvalue vanishes with d = d_m
    assert e.stability.kind == Stability.NONHYPERBOLIC


def test_trap_bound(fig5a):
    M = trap_bound(fig5a)
    assert M > fig5a.K
    # the inflow inequality p G < d y on x + y = N for N >= M, on a grid
    for N in (M, 2 * M):
        xs = np.linspace(0.0, N, 1000)
        flux = np.array([fig5a.p(x) * fig5a.G(x) - fig5a.d * (N - x) for x in xs])
        assert np.all(flux < 0)


def test_axes_invariance_exact(fig5a):
    for y in (0.3, 5.0, 40.0):
        assert fig5a.rhs(0.0, y)[0] == 0.0
    for x in (0.2, 3.0, 19.0):
        assert fig5a.rhs(x, 0.0)[1] == 0.0


def test_classify_nonhyperbolic_paths():
    s = classify_eigenvalues(complex(0.0, 2.0), complex(0.0, -2.0))
    assert s.kind == Stability.NONHYPERBOLIC and s.detail == "ZeroTrace"
    s = classify_eigenvalues(complex(1e-15, 0), complex(-3.0, 0))
    assert s.kind == Stability.NONHYPERBOLIC and s.detail == "ZeroEigenvalue"
    s = classify_eigenvalues(complex(0, 0), complex(0, 0))
    assert s.kind == Stability.NONHYPERBOLIC and s.detail == "DoubleZero"
