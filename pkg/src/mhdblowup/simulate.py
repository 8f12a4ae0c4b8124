"""Time loop: fixed-step integration with diagnostics at a step cadence."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import diagnostics as diag
from .io import write_snapshot
from .model import EosParams
from .solver import (
    STATUS_BLOWUP,
    STATUS_BOUNDARY,
    STATUS_OK,
    FieldState,
    Grid2D,
    InitialDataSpec,
    Numerics,
    boundary_status,
    cfl_dt,
    make_initial_data,
    max_velocity_gradient,
    step,
)

log = logging.getLogger(__name__)

STATUS_CFL = "cfl-exceeded"
#: Courant number above which the unsplit first-order update loses positivity.
STABLE_CFL = 0.5


@dataclass
class SimulationConfig:
    eos: EosParams = field(default_factory=EosParams.normalized)
    grid: Grid2D = field(default_factory=lambda: Grid2D(64, 128, 3.2, 3.2))
    initial: InitialDataSpec = field(default_factory=InitialDataSpec)
    numerics: Numerics = field(default_factory=Numerics)
    t_end: float = 2.0
    cadence: int = 1
    snapshot_times: tuple[float, ...] = ()
    output_dir: Path | None = None
    check_containment: bool = True


@dataclass
class RunResult:
    series: diag.DiagnosticsSeries
    snapshots: list[FieldState]
    final: FieldState
    dt: float
    steps: int
    status: str = STATUS_OK
    initial_meta: dict = field(default_factory=dict)


def run(config: SimulationConfig) -> RunResult:
    """Advance the initial data to ``t_end`` or until a status stops the run.

    The step size is fixed from the initial state so that diagnostic samples
    are uniformly spaced; a state whose signal speed later exceeds the step's
    stability bound stops the run.
    """
    config.numerics.validate()
    if config.cadence < 1:
        raise diag.SpacingError("cadence must be >= 1")
    if config.check_containment:
        config.grid.check_containment(config.t_end)
    eos = config.eos
    state = make_initial_data(config.initial, config.grid, eos)
    dt = cfl_dt(state, config.numerics.cfl, eos)
    # a whole number of cadence blocks keeps the samples uniformly spaced
    blocks = max(1, math.ceil(config.t_end / (dt * config.cadence) - 1e-9))
    n_steps = blocks * config.cadence
    dt = config.t_end / n_steps

    C_tilde = None
    if eos.gamma > 2.0:
        from .odelab import sandwich_constants

        C_tilde = sandwich_constants(eos.gamma).C_tilde

    series = diag.DiagnosticsSeries(h=config.grid.h)
    series.rows.append(diag.sample(state, eos, C_tilde))
    pending = sorted(config.snapshot_times)
    snapshots = []
    outdir = Path(config.output_dir) if config.output_dir else None
    if outdir:
        outdir.mkdir(parents=True, exist_ok=True)

    def take_snapshot(s):
        snapshots.append(s.copy())
        if outdir:
            write_snapshot(outdir / f"snapshot_{len(snapshots) - 1:04d}.bin", s)

    while pending and pending[0] <= state.time + 1e-12:
        pending.pop(0)
        take_snapshot(state)

    status = STATUS_OK
    k = 0
    for k in range(1, n_steps + 1):
        state = step(state, dt, eos, config.numerics)
        state.time = k * dt
        if not np.all(np.isfinite(state.q)):
            status = STATUS_BLOWUP
            log.warning("non-finite values at t=%.6f", state.time)
            break
        if boundary_status(state.q, state.grid, eos) == STATUS_BOUNDARY:
            status = STATUS_BOUNDARY
            log.warning("perturbation reached the outer boundary at t=%.6f", state.time)
            break
        if k % config.cadence == 0:
            row = diag.sample(state, eos, C_tilde)
            series.rows.append(row)
            if row.max_grad > 1.0 / (10.0 * dt):
                status = STATUS_BLOWUP
                log.warning("velocity gradient %.3e exceeds 1/(10 dt) at t=%.6f", row.max_grad, state.time)
                break
            if cfl_dt(state, STABLE_CFL, eos) < dt:
                status = STATUS_CFL
                log.warning("signal speed grew past the fixed step's stability bound at t=%.6f", state.time)
                break
        while pending and pending[0] <= state.time + 1e-12:
            pending.pop(0)
            take_snapshot(state)
    series.fill_dxdt_residuals()
    if outdir:
        series.write_csv(outdir / "diagnostics.csv")
        series.write_csv(outdir / "diagnostics_full.csv", diag.FULL_COLUMNS)
    return RunResult(series, snapshots, state, dt, k, status, dict(state.meta))
