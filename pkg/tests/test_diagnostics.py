import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mhdblowup import diagnostics as diag
from mhdblowup import solver, testfn
from mhdblowup.model import EosParams
from mhdblowup.simulate import SimulationConfig, run
from mhdblowup.solver import FieldState, Grid2D, InitialDataSpec, prim_to_cons_array

GRID = Grid2D(24, 48, 2.4, 2.4)


def _state(rho=None, ur=None, uz=None, S=None, b=None, grid=GRID, t=0.0):
    shape = (grid.nz, grid.nr)
    f = lambda v, d: np.broadcast_to(np.asarray(d if v is None else v, dtype=float), shape).copy()
    w = (f(rho, 1.0), f(ur, 0.0), f(uz, 0.0), f(S, 0.0), f(b, 0.0))
    return FieldState(t, grid, prim_to_cons_array(w))


def test_background_functionals_vanish(eos):
    s = _state()
    xy = diag.compute_XY(s)
    assert xy.X == 0.0 and xy.Y == 0.0
    terms = diag.functional_terms(s, eos)
    assert terms["magnetic"] == 0.0 and terms["kinetic"] == 0.0
    ent, sup, mass = diag.check_entropy_support_mass(s, eos, 0.0)
    assert ent.margin == 0.0 and ent.passed and sup.passed and mass.passed
    assert diag.support_radius(s, eos) == 0.0
    assert diag.check_pressure_inequality(s, eos).margin == 0.0
    rep, _ = diag.check_hoelder_bound(s)
    assert rep.lhs == 0.0 and rep.rhs == 0.0 and rep.passed


def test_X_is_the_weighted_midpoint_sum():
    r, z = GRID.rz
    d = 0.01 * solver.bump(GRID.R / 0.5)
    s = _state(rho=1.0 + d)
    F = np.array([testfn.quad_F_oracle([ri, 0.0, zi]) for ri, zi in zip(r.ravel(), z.ravel())]).reshape(r.shape)
    assert diag.compute_XY(s).X == pytest.approx(np.sum(2 * np.pi * r * GRID.dr * GRID.dz * F * d), rel=1e-12)


def test_X_additivity():
    r, z = GRID.rz
    a = 0.02 * solver.bump(np.hypot(r, z - 1.0) / 0.4)
    b = -0.01 * solver.bump(np.hypot(r, z + 1.0) / 0.4)
    Xa = diag.compute_XY(_state(rho=1 + a)).X
    Xb = diag.compute_XY(_state(rho=1 + b)).X
    Xab = diag.compute_XY(_state(rho=1 + a + b)).X
    assert Xab == pytest.approx(Xa + Xb, rel=1e-12, abs=1e-15)


def test_radial_outflow_has_positive_Y():
    r, z = GRID.rz
    assert diag.compute_XY(_state(ur=0.1 * solver.bump(GRID.R / 1.0))).Y > 0


def test_dxdt_residual_errors_and_zero():
    t = np.linspace(0, 1, 11)
    assert np.all(diag.dxdt_residuals(t, np.zeros(11), np.zeros(11)) == 0.0)
    with pytest.raises(diag.SpacingError):
        diag.dxdt_residuals(t[::-1], np.zeros(11), np.zeros(11))
    with pytest.raises(diag.SpacingError):
        diag.dxdt_residuals(np.random.default_rng(0).permutation(t), np.zeros(11), np.zeros(11))
    with pytest.raises(diag.SeriesTooShort):
        diag.dxdt_residuals(t[:2], np.zeros(2), np.zeros(2))


def test_dXY_order_on_synthetic_series_with_floor():
    t = np.linspace(0.0, 2.0, 401)
    X = np.sin(3 * t)
    Y = 3 * np.cos(3 * t) + 1e-4 * np.cos(t)  # the floor mimics a spatial error
    c = diag.dXY_convergence(t, X, Y)
    assert c.order == pytest.approx(2.0, abs=0.02)
    assert c.floor == pytest.approx(1e-4, rel=0.05)


def test_entropy_injection_fails(eos):
    s = _state()
    s.q[3, 5, 5] = -1e-6  # rho S with rho = 1
    ent, _, _ = diag.check_entropy_support_mass(s, eos, 0.0)
    assert ent.verdict == diag.FAIL


@pytest.mark.parametrize("rho,S,sign", [(1.5, 0.0, 0), (1.5, 0.3, 1), (0.6, 0.0, 0)])
def test_pressure_inequality_cases(eos, rho, S, sign):
    rep = diag.check_pressure_inequality(_state(rho=rho, S=S), eos)
    if sign == 0:
        assert rep.margin == pytest.approx(0.0, abs=1e-15)
    else:
        assert rep.margin > 1e-3
    assert rep.passed


def test_pressure_not_applicable_below_two():
    rep = diag.check_pressure_inequality(_state(rho=1.2), EosParams.normalized(1.5))
    assert rep.verdict == diag.NA and rep.passed


def test_pressure_inequality_gamma_three_uses_sandwich_constant():
    eos3 = EosParams.normalized(3.0)
    rng = np.random.default_rng(3)
    rho = rng.uniform(0.05, 5.0, (GRID.nz, GRID.nr))
    assert diag.check_pressure_inequality(_state(rho=rho), eos3).passed


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_magnetic_and_hoelder_nonnegative_on_random_states(seed):
    rng = np.random.default_rng(seed)
    eos = EosParams.normalized(2.0)
    shape = (GRID.nz, GRID.nr)
    mask = rng.random(shape) < 0.3
    s = _state(rho=np.where(mask, rng.uniform(0.2, 3.0, shape), 1.0), b=rng.normal(size=shape), ur=rng.normal(size=shape))
    assert diag.check_magnetic(s, eos).margin >= 0
    assert diag.check_hoelder_bound(s)[0].margin >= 0


def test_ball_ratio_bracket():
    a, b, c = (diag.ball_ratio(t) for t in (1.0, 2.0, 4.0))
    lo, hi = min(a, c), max(a, c)
    assert lo / 10 <= b <= hi * 10
    # ball integral from the grid agrees with the closed form
    g = Grid2D(200, 400, 3.2, 3.2)
    _, ratio = diag.check_hoelder_bound(_state(grid=g, t=2.0))
    assert ratio == pytest.approx(b, rel=2e-2)


def test_calibrate_recovers_coefficients():
    c1, c2 = 3.0, 0.5
    runs = [(dt, h, c1 * dt * dt + c2 * h) for dt, h in ((0.01, 0.02), (0.005, 0.01))]
    budget = diag.calibrate_dY_tolerance(runs, safety=1.0)
    assert budget.coefficients == pytest.approx((c1, c2), rel=1e-10)
    assert budget(0.01, 0.02) == pytest.approx(runs[0][2], rel=1e-10)
    with pytest.raises(diag.SeriesTooShort):
        diag.calibrate_dY_tolerance(runs[:1])


def test_series_checks_and_csv_roundtrip(tmp_path, eos):
    cfg = SimulationConfig(eos=eos, grid=Grid2D(32, 64, 2.4, 2.4), initial=InitialDataSpec(epsilon=0.02), t_end=0.3)
    res = run(cfg)
    checks = diag.series_checks(res.series, eos, cfg.grid.h)
    bad = [c for c in checks if c.verdict == diag.FAIL]
    assert not bad, bad
    p = tmp_path / "d.csv"
    res.series.write_csv(p, diag.FULL_COLUMNS)
    back = diag.DiagnosticsSeries.read_csv(p)
    for col in diag.FULL_COLUMNS:
        assert np.array_equal(back.column(col), res.series.column(col), equal_nan=True)
    header = (tmp_path / "h.csv")
    res.series.write_csv(header)
    assert header.read_text().splitlines()[0] == "t,X,Y,dXdt_residual,mass_pert,int_btheta,support_radius,min_S,max_grad,magnetic_term"


def test_dY1_identity_residual_shrinks_under_refinement(eos):
    worst = []
    for n in (32, 64):
        cfg = SimulationConfig(eos=eos, grid=Grid2D(n, 2 * n, 2.4, 2.4), initial=InitialDataSpec(epsilon=0.02), t_end=0.5)
        res = run(cfg)
        out = diag.magnetic_term_and_dY1(res.series, eos, 0.0)
        assert out.passed
        worst.append(np.abs(out.identity_residual).max())
    assert worst[1] < worst[0] / 1.5
    with pytest.raises(ValueError):
        diag.magnetic_term_and_dY1(res.series, EosParams.normalized(1.5), 0.0)
