"""Acceptance suite: one printed pass/fail line per criterion.

Run alone with ``pytest tests/test_acceptance.py -v``; the summary lines are
repeated at the end of the session.  The solver run on 256x512 takes about
a minute, the 1000-step background check about three.
"""

import math
import time

import numpy as np
import pytest

from mhdblowup import diagnostics as diag
from mhdblowup import odelab, solver, testfn
from mhdblowup.cli import verify_operators
from mhdblowup.crosscheck import REQUIRED_OPERATORS
from mhdblowup.model import EosParams
from mhdblowup.odelab import BlowupSystemParams, Controls, OrliczParams
from mhdblowup.simulate import SimulationConfig, run
from mhdblowup.solver import Grid2D, InitialDataSpec, Numerics

RESULTS: list[str] = []


def report(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def _run(nr: int):
    cfg = SimulationConfig(
        eos=EosParams.normalized(2.0),
        grid=Grid2D(nr, 2 * nr, 3.2, 3.2),
        initial=InitialDataSpec(epsilon=0.02),
        numerics=Numerics(),
        t_end=2.0,
    )
    t0 = time.perf_counter()
    res = run(cfg)
    return cfg, res, time.perf_counter() - t0


@pytest.fixture(scope="module")
def fine_run():
    return _run(256)


@pytest.fixture(scope="module")
def coarse_run():
    return _run(128)


def test_criterion_1_test_function():
    t0 = time.perf_counter()
    worst_quad = 0.0
    for R in (0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0):
        exact = testfn.eval_profile(R).F
        worst_quad = max(worst_quad, abs(testfn.quad_F_oracle(np.array([0.0, 0.0, R])) - exact) / exact)
    R = np.random.default_rng(1).uniform(0.0, 20.0, 1000)
    F, F1, F2 = testfn.profile_arrays(R)
    lap = F2 + 2.0 * F1 / R - F
    ode = float(np.max(np.abs(lap) / np.maximum(1.0, F)))
    positive = bool(np.all(F > 0) and np.all(F2 > 0))
    dt = time.perf_counter() - t0
    ok = worst_quad <= 1e-10 and ode <= 1e-9 and positive and dt < 5.0
    report(1, ok, f"quadrature rel {worst_quad:.2e}, ODE residual {ode:.2e}, F,F''>0 {positive}, {dt:.2f}s")


def test_criterion_2_operator_crosscheck():
    t0 = time.perf_counter()
    checks = verify_operators(seed=0, n_fields=5, n_points=20, hs=(1e-2, 5e-3, 2.5e-3))
    dt = time.perf_counter() - t0
    required = [c for c in checks if c.name in REQUIRED_OPERATORS]
    ok = all(c.verdict == diag.PASS for c in required) and dt < 30.0
    worst = min(c.worst_margin for c in required) + 1.9
    report(2, ok, f"min order over required operators {worst:.3f} (exact ones count as inf), {dt:.1f}s")


def test_criterion_3_conservation(fine_run):
    cfg, res, elapsed = fine_run
    eos, grid, s = cfg.eos, cfg.grid, res.series
    q = np.broadcast_to(solver.background_array(eos)[:, None, None], (5, grid.nz, grid.nr)).copy()
    st = solver.FieldState(0.0, grid, q.copy())
    dt = solver.cfl_dt(st, cfg.numerics.cfl, eos)
    t0 = time.perf_counter()
    for _ in range(1000):
        st = solver.step(st, dt, eos, cfg.numerics)
    bg_time = time.perf_counter() - t0
    bg = float(np.max(np.abs(st.q - q)))
    mass = diag._drift(s.column("mass_pert"))
    bth = diag._drift(s.column("int_btheta"))
    sup = float(np.max(s.column("support_radius") - (s.t + 1.0 + 2.0 * grid.h)))
    ent = float(np.min(s.column("min_S")) - eos.S_bar)
    ok = (
        res.status == solver.STATUS_OK
        and bg <= 1e-13
        and mass <= 1e-10
        and bth <= 1e-10
        and sup <= 0.0
        and ent >= -1e-8
        and elapsed + bg_time < 600.0
    )
    report(3, ok, f"background {bg:.1e}, mass drift {mass:.1e}, B drift {bth:.1e}, support excess {sup:+.3f}, "
                  f"min S - S_bar {ent:.1e}, {elapsed + bg_time:.0f}s")


def test_criterion_4_dXY_order(fine_run):
    _, res, _ = fine_run
    s = res.series
    conv = diag.dXY_convergence(s.t, s.column("X"), s.column("Y"))
    ok = conv.order >= 1.9 and conv.differences[0] > conv.differences[1]
    report(4, ok, f"observed order {conv.order:.3f} (strides {conv.strides}, spatial floor {conv.floor:.2e})")


def test_criterion_5_inequalities(fine_run, coarse_run):
    runs = [coarse_run, fine_run]
    errs = [(r.dt, c.grid.h, float(np.max(np.abs(diag.dY_identity_residual(r.series))))) for c, r, _ in runs]
    budget = diag.calibrate_dY_tolerance(errs)
    dY1 = []
    for (c, r, _), (dt, h, _) in zip(runs, errs):
        tol = budget(dt, h)
        dY1.append((diag.magnetic_term_and_dY1(r.series, c.eos, tol), tol))
    s = fine_run[1].series
    pp = float(np.nanmin(s.column("p_margin")))
    mag = float(np.min(s.column("magnetic_term")))
    hol = float(np.min(s.column("hoelder_margin")))
    ok = pp >= -1e-10 and mag >= 0.0 and hol >= 0.0 and all(d.passed for d, _ in dY1)
    margins = ", ".join(f"{d.worst_margin:+.2e} (tol {tol:.1e})" for d, tol in dY1)
    report(5, ok, f"pp {pp:+.1e}, magnetic min {mag:.2e}, Hoelder min {hol:.2e}, dY1 margins 128/256 {margins}")


def test_criterion_6_sandwich():
    t0 = time.perf_counter()
    c2 = odelab.sandwich_constants(2.0).C_tilde
    r3 = odelab.sandwich_constants(3.0)
    oracle, _ = odelab.sandwich_grid_oracle(3.0)
    w = odelab.sandwich_constants(1.5)
    dt = time.perf_counter() - t0
    ok = (
        abs(c2 - 1.0) <= 1e-12
        and r3.C_tilde > 0
        and abs(r3.C_tilde - oracle) <= 1e-6
        and w.witness_ratio is not None
        and w.witness_ratio < 1e-2
        and dt < 10.0
    )
    report(6, ok, f"C(2)={c2:.15f}, C(3)={r3.C_tilde:.9f} vs grid {oracle:.9f}, "
                  f"gamma=1.5 witness rho={w.failure_witness:.3g} ratio {w.witness_ratio:.2e}, {dt:.1f}s")


SWEEPS = [
    ("blowup", np.geomspace(0.01, 0.1, 8), BlowupSystemParams(n=1), None),
    ("blowup", np.geomspace(0.01, 0.1, 8), BlowupSystemParams(n=2), None),
    ("blowup", np.geomspace(0.1, 1.0, 8), BlowupSystemParams(n=3), None),
    ("orlicz", np.geomspace(0.1, 1.0, 8), None, OrliczParams(gamma=1.5, lam=1.0)),
    ("orlicz", np.geomspace(0.01, 0.1, 8), None, OrliczParams(gamma=1.5, lam=0.0)),
]


@pytest.fixture(scope="module")
def sweeps():
    t0 = time.perf_counter()
    fits = [odelab.lifespan_sweep_fit(sys_, eps, bp, op) for sys_, eps, bp, op in SWEEPS]
    return fits, time.perf_counter() - t0


def test_criterion_7_lifespan_scalings(sweeps):
    fits, elapsed = sweeps
    n1, n2, n3, o1, o0 = fits
    for f in fits:
        print(f.line())
    ok = (
        -1.15 <= n1.slope <= -0.85
        and -2.2 <= n2.slope <= -1.8
        and n3.r2 > 0.99
        and o1.r2 > 0.98
        and o0.r2 > 0.98
        and all(len(f.epsilons) == 8 and max(f.epsilons) / min(f.epsilons) >= 10 * (1 - 1e-12) for f in fits)
        and elapsed < 120.0
    )
    report(7, ok, f"n=1 slope {n1.slope:+.3f}, n=2 slope {n2.slope:+.3f}, n=3 R^2 {n3.r2:.5f}, "
                  f"orlicz l=1 R^2 {o1.r2:.5f}, l=0 R^2 {o0.r2:.5f}, {elapsed:.0f}s")


def test_criterion_8_threshold_robustness(sweeps):
    fits, _ = sweeps
    worst = 0.0
    for (sys_, eps, bp, op), fit in zip(SWEEPS, fits):
        for e, T in zip(fit.epsilons, fit.lifespans):
            low = Controls(threshold=1e6)
            if sys_ == "blowup":
                r = odelab.integrate_blowup_system(bp, e, low)
            else:
                r = odelab.integrate_orlicz_system(odelab._with_eps(op, e), low)
            rel = math.inf if r.blowup_time is None else abs(r.blowup_time - T) / T
            worst = max(worst, rel)
    report(8, worst < 1e-3, f"max relative change of blowup_time between thresholds 1e6 and 1e12: {worst:.2e} over 40 runs")
