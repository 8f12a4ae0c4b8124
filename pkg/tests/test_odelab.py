import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mhdblowup import odelab
from mhdblowup.odelab import BlowupSystemParams, Controls, OrliczParams


def test_upsilon_values():
    assert odelab.upsilon(0.0, 1.5) == 0.0
    assert odelab.upsilon(1.0, 2.0) == pytest.approx(1.0, abs=1e-15)
    assert odelab.upsilon(1e-4, 1.5) / 1e-4 < 1e-3
    assert odelab.upsilon(1e4, 1.5) / 1e4 > 50
    with pytest.raises(odelab.DomainError):
        odelab.upsilon(1.0, 1.0)


def test_upsilon_scalar_and_array_agree():
    x = np.array([1e-5, 1e-3, 0.3, 7.0, 1e5])
    np.testing.assert_allclose(odelab.upsilon(x, 1.5), [odelab.upsilon(float(v), 1.5) for v in x], rtol=1e-14)


@settings(max_examples=100, deadline=None)
@given(st.floats(-1e3, 1e3), st.floats(1.05, 2.0))
def test_upsilon_even(x, g):
    assert odelab.upsilon(x, g) == odelab.upsilon(-x, g)


def test_upsilon_convexity_on_1000_triples():
    rng = np.random.default_rng(0)
    pts = np.sort(rng.uniform(-20, 20, (1000, 3)), axis=1)
    x, y, z = pts.T
    lam = (z - y) / (z - x)
    for g in (1.2, 1.5, 2.0):
        ux, uy, uz = (odelab.upsilon(v, g) for v in (x, y, z))
        assert np.all(uy <= lam * ux + (1 - lam) * uz + 1e-12 * (1 + np.abs(ux) + np.abs(uz)))


def test_growth_exponents():
    a, b = odelab.measured_growth_exponents(1.5)
    assert a == pytest.approx(1.0, abs=1e-3) and b == pytest.approx(0.5, abs=1e-3)


def test_sandwich_constants():
    assert odelab.sandwich_constants(2.0).C_tilde == pytest.approx(1.0, abs=1e-12)
    s3 = odelab.sandwich_constants(3.0)
    oracle, _ = odelab.sandwich_grid_oracle(3.0)
    assert s3.C_tilde > 0 and s3.C_tilde == pytest.approx(oracle, abs=1e-6)
    s15 = odelab.sandwich_constants(1.5)
    assert s15.C_tilde is None and s15.failure_witness > 1e4 and s15.witness_ratio < 1e-2
    with pytest.raises(odelab.DomainError):
        odelab.sandwich_constants(1.0)


def test_sandwich_ratio_is_one_for_gamma_two():
    rho = np.geomspace(1e-6, 1e6, 1001)
    np.testing.assert_allclose(odelab.sandwich_ratio(rho, 2.0), 1.0, rtol=1e-9)
    # gamma = 3: (rho^3 - 1 - 3(rho-1)) / (rho-1)^2 = rho + 2
    np.testing.assert_allclose(odelab.sandwich_ratio(rho, 3.0), rho + 2, rtol=1e-9)


def _order(errs, hs):
    return np.polyfit(np.log(hs), np.log(errs), 1)[0]


def test_integrator_order_on_cosh():
    errs, hs = [], []
    for rtol in (1e-4, 1e-5, 1e-6, 1e-7, 1e-8):
        r = odelab.integrate(lambda t, x, v: x, (1.0, 0.0), Controls(rtol=rtol, horizon=5.0, h0=0.1))
        assert r.terminated_reason == odelab.HORIZON
        errs.append(abs(r.value[-1] - math.cosh(5.0)) / math.cosh(5.0))
        hs.append(5.0 / r.steps)
    assert _order(errs, hs) >= 1.9


def test_integrator_order_with_damping():
    # z'' + 2z' = 3z has the solution e^t for z(0) = z'(0) = 1
    errs, hs = [], []
    for rtol in (1e-4, 1e-5, 1e-6, 1e-7, 1e-8):
        r = odelab.integrate(lambda t, z, v: 3 * z, (1.0, 1.0), Controls(rtol=rtol, horizon=5.0, h0=0.1), damping=2.0)
        errs.append(abs(r.value[-1] - math.exp(5.0)) / math.exp(5.0))
        hs.append(5.0 / r.steps)
    assert _order(errs, hs) >= 1.9


def test_zero_data_and_linear_system():
    r = odelab.integrate_blowup_system(BlowupSystemParams(), 0.0, Controls(horizon=50.0))
    assert r.blowup_time is None and r.terminated_reason == odelab.HORIZON and np.all(r.value == 0.0)
    r = odelab.integrate_blowup_system(BlowupSystemParams(), 0.1, Controls(horizon=30.0), form="x", nonlinear=False)
    assert r.terminated_reason == odelab.HORIZON
    # X'' = X with X(0) = 0.1, X'(0) = 0
    assert r.value[-1] == pytest.approx(0.1 * math.cosh(30.0), rel=1e-7)


def test_n3_blowup_is_threshold_insensitive():
    fn = lambda c: odelab.integrate_blowup_system(BlowupSystemParams(n=3, C=1.0), 0.1, c)
    lo, hi, rel = odelab.threshold_sensitivity(fn)
    assert hi is not None and math.isfinite(hi)
    assert rel < 1e-3


def test_blowup_params_validation():
    with pytest.raises(odelab.ConfigError):
        BlowupSystemParams(C=0.0)
    with pytest.raises(odelab.ConfigError):
        BlowupSystemParams(n=4)
    with pytest.raises(odelab.ConfigError):
        odelab.integrate_blowup_system(BlowupSystemParams(X0=-1.0, Y0=0.5), 0.1)
    with pytest.raises(odelab.ConfigError):
        OrliczParams(gamma=2.5)
    with pytest.raises(odelab.ConfigError):
        OrliczParams(I0=0.0)


def test_z_transform_consistency_blowup_system():
    p = BlowupSystemParams(n=1, C=1.0)
    c = Controls(rtol=1e-12, horizon=8.0)
    z = odelab.integrate_blowup_system(p, 0.05, c, form="z")
    x = odelab.integrate_blowup_system(p, 0.05, c, form="x")
    Xz = np.exp(z.t) * z.value
    Xi = np.interp(z.t, x.t, x.value)
    # compare at the integrator's own nodes of the X run to avoid interpolation error
    Zi = np.interp(x.t, z.t, z.value)
    assert x.value[-1] == pytest.approx(math.exp(8.0) * z.value[-1], rel=1e-8)
    assert np.max(np.abs(Xz - Xi) / np.abs(Xz)) < 1e-2
    assert Zi.shape == x.t.shape


def test_z_transform_consistency_orlicz():
    p = OrliczParams(gamma=1.5, lam=1.0, I0=0.1, damping=2.0)
    c = Controls(rtol=1e-12, horizon=10.0)
    z = odelab.integrate_orlicz_system(p, c, form="z")
    x = odelab.integrate_orlicz_system(p, c, form="x")
    assert x.value[-1] == pytest.approx(math.exp(10.0) * z.value[-1], rel=1e-8)
    with pytest.raises(odelab.ConfigError):
        odelab.integrate_orlicz_system(OrliczParams(damping=1.0), c, form="x")


def test_orlicz_lambda_zero_blows_up_sooner():
    T1 = odelab.integrate_orlicz_system(OrliczParams(lam=1.0, I0=0.2)).blowup_time
    T0 = odelab.integrate_orlicz_system(OrliczParams(lam=0.0, I0=0.2)).blowup_time
    assert T0 is not None and T1 is not None and T0 < T1 / 10


def test_large_data_blows_up_quickly():
    T = odelab.integrate_orlicz_system(OrliczParams(I0=10.0)).blowup_time
    T_small = odelab.integrate_orlicz_system(OrliczParams(I0=1.0)).blowup_time
    assert T is not None and T < T_small and T < 10


def test_sweep_preconditions():
    with pytest.raises(odelab.ConfigError, match="6"):
        odelab.lifespan_sweep_fit("blowup", [0.1, 0.2, 0.3], BlowupSystemParams(n=1))
    with pytest.raises(odelab.ConfigError, match="decade"):
        odelab.lifespan_sweep_fit("blowup", np.linspace(0.05, 0.1, 6), BlowupSystemParams(n=1))
    with pytest.raises(odelab.ConfigError, match="T="):
        odelab.lifespan_sweep_fit("blowup", np.geomspace(0.1, 1.0, 6), BlowupSystemParams(n=1))
    with pytest.raises(odelab.ConfigError):
        odelab.lifespan_sweep_fit("heat", np.geomspace(0.01, 0.1, 6))


def test_n1_sweep_slope_and_monotonicity():
    fit = odelab.lifespan_sweep_fit("blowup", np.geomspace(0.01, 0.1, 6), BlowupSystemParams(n=1))
    assert -1.15 <= fit.slope <= -0.85 and fit.r2 > 0.99
    assert all(a >= b for a, b in zip(fit.lifespans, fit.lifespans[1:]))
    assert "slope" in fit.line()
