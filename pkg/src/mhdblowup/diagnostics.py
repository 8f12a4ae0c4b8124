"""Blow-up functionals and the identity/inequality checks on discrete states.

With w_i = 2 pi r_i dr dz the midpoint weight of cell i,

    X = sum w F (rho - 1),          Y = sum w rho u . grad F,

and the time derivative of Y is compared against

    dY/dt = K + sum w (p - p_bar) F + (2 mu)^-1 sum w B^2 F_RR,

where K = sum w rho u^T (Hess F) u is the sphere integral of rho (u.w)^2 e^{w.x}.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field, fields
from functools import lru_cache

import numpy as np

from . import testfn
from .model import EosParams
from .solver import SUPPORT_THRESHOLD, FieldState, Grid2D, background_array, max_velocity_gradient

CSV_COLUMNS = (
    "t",
    "X",
    "Y",
    "dXdt_residual",
    "mass_pert",
    "int_btheta",
    "support_radius",
    "min_S",
    "max_grad",
    "magnetic_term",
)

PASS, FAIL, NA = "pass", "fail", "not-applicable"

#: every DiagnosticRow field; written alongside the schema columns so that a
#: report can re-run all checks from disk
FULL_COLUMNS = CSV_COLUMNS + ("Q2", "kinetic", "pressure", "p_margin", "hoelder_margin", "hoelder_ball_ratio")


class SpacingError(ValueError):
    """Samples are not uniformly spaced in time."""


class SeriesTooShort(ValueError):
    pass


@dataclass
class FunctionalSample:
    t: float
    X: float
    Y: float
    quad_rule: str = "midpoint, weight 2*pi*r_i*dr*dz"


@dataclass
class InequalityReport:
    name: str
    t: float
    lhs: float
    rhs: float
    tolerance_used: float = 0.0
    applicable: bool = True
    note: str = ""

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs

    @property
    def verdict(self) -> str:
        if not self.applicable:
            return NA
        return PASS if self.margin >= -self.tolerance_used else FAIL

    @property
    def passed(self) -> bool:
        return self.verdict != FAIL

    def line(self) -> str:
        return (
            f"{self.name:<12s} t={self.t:.6f} lhs={self.lhs:.6e} rhs={self.rhs:.6e} "
            f"margin={self.margin:.3e} tol={self.tolerance_used:.3e} {self.verdict}"
            + (f" ({self.note})" if self.note else "")
        )


@dataclass(frozen=True)
class _Weights:
    w: np.ndarray
    R: np.ndarray
    F: np.ndarray
    F_R: np.ndarray
    F_RR: np.ndarray
    gFr: np.ndarray
    gFz: np.ndarray


@lru_cache(maxsize=8)
def _weights(grid: Grid2D) -> _Weights:
    r, z = grid.rz
    R = grid.R
    F, F_R, F_RR = testfn.profile_arrays(R)
    return _Weights(grid.volume, R, F, F_R, F_RR, F_R * r / R, F_R * z / R)


def _sum(a: np.ndarray) -> float:
    # numpy's pairwise summation is order-deterministic for a given shape
    return float(np.sum(a))


def compute_XY(state: FieldState) -> FunctionalSample:
    W = _weights(state.grid)
    w = state.primitive()
    X = _sum(W.w * W.F * (w.rho - 1.0))
    Y = _sum(W.w * w.rho * (w.ur * W.gFr + w.uz * W.gFz))
    return FunctionalSample(state.time, X, Y)


def functional_terms(state: FieldState, eos: EosParams) -> dict[str, float]:
    """Every integral used by the identity and inequality checks."""
    W = _weights(state.grid)
    r, z = state.grid.rz
    w = state.primitive()
    d = w.rho - 1.0
    p = eos.A * np.power(w.rho, eos.gamma) * np.exp(w.S)
    u_dot_x = (w.ur * r + w.uz * z) / W.R
    u2 = w.ur * w.ur + w.uz * w.uz
    hess_uu = W.F_RR * u_dot_x**2 + (W.F_R / W.R) * (u2 - u_dot_x**2)
    return {
        "X": _sum(W.w * W.F * d),
        "Y": _sum(W.w * w.rho * (w.ur * W.gFr + w.uz * W.gFz)),
        "Q2": _sum(W.w * W.F * d * d),
        "kinetic": _sum(W.w * w.rho * hess_uu),
        "pressure": _sum(W.w * (p - eos.p_bar) * W.F),
        "magnetic": _sum(W.w * w.btheta**2 * W.F_RR) / (2.0 * eos.mu),
    }


def mass_perturbation(state: FieldState) -> float:
    return _sum(state.grid.volume * (state.q[0] - 1.0))


def btheta_integral(state: FieldState) -> float:
    g = state.grid
    return _sum(state.q[4]) * g.dr * g.dz


def support_radius(state: FieldState, eos: EosParams, threshold: float = SUPPORT_THRESHOLD) -> float:
    bg = background_array(eos)[:, None, None]
    dev = np.max(np.abs(state.q - bg), axis=0)
    mask = dev > threshold
    return float(state.grid.R[mask].max()) if np.any(mask) else 0.0


@dataclass
class DiagnosticRow:
    t: float
    X: float
    Y: float
    dXdt_residual: float
    mass_pert: float
    int_btheta: float
    support_radius: float
    min_S: float
    max_grad: float
    magnetic_term: float
    # extra integrals kept in memory for the inequality checks
    Q2: float = 0.0
    kinetic: float = 0.0
    pressure: float = 0.0
    p_margin: float = 0.0
    hoelder_margin: float = 0.0
    hoelder_ball_ratio: float = 0.0


def sample(state: FieldState, eos: EosParams, C_tilde: float | None = None) -> DiagnosticRow:
    terms = functional_terms(state, eos)
    w = state.primitive()
    p_rep = check_pressure_inequality(state, eos, C_tilde)
    h_rep, ball_ratio = check_hoelder_bound(state)
    return DiagnosticRow(
        t=state.time,
        X=terms["X"],
        Y=terms["Y"],
        dXdt_residual=math.nan,
        mass_pert=mass_perturbation(state),
        int_btheta=btheta_integral(state),
        support_radius=support_radius(state, eos),
        min_S=float(np.min(w.S)),
        max_grad=max_velocity_gradient(state.q, state.grid),
        magnetic_term=terms["magnetic"],
        Q2=terms["Q2"],
        kinetic=terms["kinetic"],
        pressure=terms["pressure"],
        p_margin=p_rep.margin if p_rep.applicable else math.nan,
        hoelder_margin=h_rep.margin,
        hoelder_ball_ratio=ball_ratio,
    )


@dataclass
class DiagnosticsSeries:
    rows: list[DiagnosticRow] = field(default_factory=list)
    h: float = math.nan

    def __len__(self):
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    @property
    def t(self) -> np.ndarray:
        return self.column("t")

    def fill_dxdt_residuals(self) -> None:
        if len(self.rows) < 3:
            return
        res = dxdt_residuals(self.t, self.column("X"), self.column("Y"))
        for row, v in zip(self.rows[1:-1], res):
            row.dXdt_residual = float(v)

    def write_csv(self, path, columns: tuple[str, ...] = CSV_COLUMNS) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(columns)
            for row in self.rows:
                d = asdict(row)
                wr.writerow([repr(float(d[c])) for c in columns])

    @classmethod
    def read_csv(cls, path) -> "DiagnosticsSeries":
        names = {f.name for f in fields(DiagnosticRow)}
        out = cls()
        with open(path, newline="") as fh:
            for rec in csv.DictReader(fh):
                out.rows.append(DiagnosticRow(**{k: float(v) for k, v in rec.items() if k in names}))
        return out


# ------------------------------------------------------------------ dX/dt = Y

def _uniform_spacing(t: np.ndarray) -> float:
    t = np.asarray(t, dtype=float)
    if t.size < 3:
        raise SeriesTooShort("need at least 3 samples")
    d = np.diff(t)
    dt = float(np.mean(d))
    if not dt > 0 or np.max(np.abs(d - dt)) > 1e-9 * max(abs(dt), 1.0):
        raise SpacingError("samples must be uniformly spaced and increasing")
    return dt


def dxdt_residuals(t, X, Y) -> np.ndarray:
    """Centred difference of X minus Y at every interior sample."""
    dt = _uniform_spacing(t)
    X = np.asarray(X)
    return (X[2:] - X[:-2]) / (2.0 * dt) - np.asarray(Y)[1:-1]


def check_dXY(samples: list[FunctionalSample], tolerance: float = 0.0) -> InequalityReport:
    """Residual of dX/dt = Y at the middle sample of three (or more) samples."""
    t = np.array([s.t for s in samples])
    res = dxdt_residuals(t, [s.X for s in samples], [s.Y for s in samples])
    k = len(res) // 2
    # equality check: lhs = -|residual|, rhs = 0
    return InequalityReport("dXY", float(t[k + 1]), -abs(float(res[k])), 0.0, tolerance)


@dataclass
class DXYConvergence:
    strides: tuple[int, ...]
    spacings: list[float]
    max_residual: list[float]
    differences: list[float]
    order: float
    floor: float


def dXY_convergence(t, X, Y, strides=(4, 2, 1)) -> DXYConvergence:
    """Observed order of the centred-difference residual as the sample spacing halves.

    The residual is c*dt^2 plus a floor set by the spatial discretisation.
    Differences between successive spacings cancel the floor, so their ratio
    gives the order of the time stencil.
    """
    t = np.asarray(t)
    X = np.asarray(X)
    Y = np.asarray(Y)
    base = _uniform_spacing(t)
    smax = max(strides)
    idx = np.arange(smax, len(t) - smax)
    if idx.size == 0:
        raise SeriesTooShort("series too short for the requested strides")
    res = []
    for s in strides:
        res.append((X[idx + s] - X[idx - s]) / (2 * s * base) - Y[idx])
    diffs = [float(np.max(np.abs(res[i] - res[i + 1]))) for i in range(len(res) - 1)]
    orders = [
        math.log(diffs[i] / diffs[i + 1]) / math.log(strides[i] / strides[i + 1])
        for i in range(len(diffs) - 1)
        if diffs[i + 1] > 0
    ]
    order = min(orders) if orders else math.inf
    ratio = (strides[-2] / strides[-1]) ** 2
    floor = float(np.max(np.abs(res[-1] - (res[-2] - res[-1]) / (ratio - 1.0))))
    return DXYConvergence(
        tuple(strides),
        [s * base for s in strides],
        [float(np.max(np.abs(r))) for r in res],
        diffs,
        order,
        floor,
    )


# ------------------------------------------------------------ inequality checks

def check_entropy_support_mass(
    state: FieldState, eos: EosParams, mass_ref: float, entropy_tol: float = 1e-8, mass_tol: float = 1e-10
) -> tuple[InequalityReport, InequalityReport, InequalityReport]:
    t = state.time
    min_S = float(np.min(state.primitive().S))
    ent = InequalityReport("entropy", t, min_S, eos.S_bar, entropy_tol)
    rad = support_radius(state, eos)
    bound = t + 1.0 + 2.0 * state.grid.h
    sup = InequalityReport("support", t, bound, rad, 0.0, note=f"support radius {rad:.4f}")
    m = mass_perturbation(state)
    scale = abs(mass_ref)
    drift = abs(m - mass_ref) / scale if scale > 0 else abs(m - mass_ref)
    mass = InequalityReport("mass", t, 0.0, drift, mass_tol, note="relative drift")
    return ent, sup, mass


def check_pressure_inequality(state: FieldState, eos: EosParams, C_tilde: float | None = None) -> InequalityReport:
    """min over cells of p - p_bar - (rho - 1) - A e^S_bar C~ (rho - 1)^2.

    For gamma = 2 the constant is 1; for gamma > 2 pass the sandwich constant.
    """
    if eos.gamma < 2.0:
        return InequalityReport("pressure", state.time, 0.0, 0.0, applicable=False, note="gamma < 2")
    if C_tilde is None:
        if eos.gamma != 2.0:
            from .odelab import sandwich_constants

            C_tilde = sandwich_constants(eos.gamma).C_tilde
        else:
            C_tilde = 1.0
    w = state.primitive()
    d = w.rho - 1.0
    p = eos.A * np.power(w.rho, eos.gamma) * np.exp(w.S)
    lhs = p - eos.p_bar - d
    rhs = eos.A_eS * C_tilde * d * d
    k = int(np.argmin(lhs - rhs))
    return InequalityReport("pressure", state.time, float(lhs.flat[k]), float(rhs.flat[k]), 1e-10)


def check_magnetic(state: FieldState, eos: EosParams) -> InequalityReport:
    mag = functional_terms(state, eos)["magnetic"]
    return InequalityReport("magnetic", state.time, mag, 0.0, 0.0)


def check_hoelder_bound(state: FieldState) -> tuple[InequalityReport, float]:
    """Discrete Cauchy-Schwarz X^2 <= (sum w F (rho-1)^2) (sum_ball w F).

    The ball is |x| <= t + 1, enlarged by any cell where rho differs from 1 so
    that the discrete inequality is exact.  Also returns the ratio of the
    ball integral of F to (1 + t) e^t.
    """
    W = _weights(state.grid)
    d = state.q[0] - 1.0
    t = state.time
    ball = W.R <= t + 1.0
    where = ball | (d != 0.0)
    X = _sum(W.w * W.F * d)
    Q2 = _sum(W.w * W.F * d * d)
    FS = _sum(np.where(where, W.w * W.F, 0.0))
    ball_int = _sum(np.where(ball, W.w * W.F, 0.0))
    rep = InequalityReport("hoelder", t, Q2 * FS, X * X, 0.0)
    return rep, ball_int / ((1.0 + t) * math.exp(t))


def ball_ratio(t: float) -> float:
    """Exact int_{|x| <= t+1} F dx / ((1 + t) e^t)."""
    return testfn.ball_integral(t + 1.0) / ((1.0 + t) * math.exp(t))


# ------------------------------------------------------------- dY/dt bound

@dataclass
class DY1Result:
    reports: list[InequalityReport]
    identity_residual: np.ndarray
    magnetic: np.ndarray

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    @property
    def worst_margin(self) -> float:
        return min(r.margin + r.tolerance_used for r in self.reports) if self.reports else math.nan


def dY_identity_residual(series: DiagnosticsSeries) -> np.ndarray:
    """Centred dY/dt minus (kinetic + pressure + magnetic) at interior samples."""
    t = series.t
    dt = _uniform_spacing(t)
    Y = series.column("Y")
    dY = (Y[2:] - Y[:-2]) / (2 * dt)
    rhs = series.column("kinetic") + series.column("pressure") + series.column("magnetic_term")
    return dY - rhs[1:-1]


def calibrate_dY_tolerance(runs: list[tuple[float, float, float]], safety: float = 2.0):
    """Fit err = c1 dt^2 + c2 h to (dt, h, max identity residual) from two runs.

    Returns a function (dt, h) -> tolerance budget (scaled by ``safety``).
    """
    if len(runs) < 2:
        raise SeriesTooShort("need two resolutions to calibrate")
    A = np.array([[dt * dt, h] for dt, h, _ in runs])
    b = np.array([e for _, _, e in runs])
    coef, *_ = np.linalg.lstsq(A, b, rcond=None)
    if np.any(coef < 0):
        # fall back to the single term that explains the data best
        c_h = float(np.max(b / A[:, 1]))
        coef = np.array([0.0, c_h])
    c1, c2 = (float(c) for c in coef)

    def budget(dt: float, h: float) -> float:
        return safety * (c1 * dt * dt + c2 * h)

    budget.coefficients = (c1, c2)
    return budget


def magnetic_term_and_dY1(series: DiagnosticsSeries, eos: EosParams, tolerance: float, C_tilde: float | None = None) -> DY1Result:
    """Y' >= X + A e^S_bar C~ sum w F (rho-1)^2 + magnetic at interior samples."""
    if eos.gamma < 2.0:
        raise ValueError("the dY1 bound is checked for gamma >= 2 only")
    if len(series) < 3:
        raise SeriesTooShort("need at least 3 samples to difference Y")
    if C_tilde is None:
        from .odelab import sandwich_constants

        C_tilde = sandwich_constants(eos.gamma).C_tilde
    t = series.t
    dt = _uniform_spacing(t)
    Y = series.column("Y")
    dY = (Y[2:] - Y[:-2]) / (2 * dt)
    X = series.column("X")[1:-1]
    Q2 = series.column("Q2")[1:-1]
    mag = series.column("magnetic_term")
    rhs = X + eos.A_eS * C_tilde * Q2 + mag[1:-1]
    reps = [InequalityReport("dY1", float(tt), float(l), float(r), tolerance) for tt, l, r in zip(t[1:-1], dY, rhs)]
    return DY1Result(reps, dY_identity_residual(series), mag)


# ------------------------------------------------------------ series checks

@dataclass
class CheckResult:
    family: str
    name: str
    worst_margin: float
    tolerance: float
    verdict: str
    note: str = ""


@dataclass
class Tolerances:
    mass: float = 1e-10
    btheta: float = 1e-10
    entropy: float = 1e-8
    pressure: float = 1e-10
    dXY_order: float = 1.9
    #: absolute dY1 budget; None means twice the largest identity residual
    dY1: float | None = None


def _verdict(margin: float, tol: float) -> str:
    if math.isnan(margin):
        return FAIL
    return PASS if margin >= -tol else FAIL


def _drift(col: np.ndarray) -> float:
    ref = col[0]
    d = float(np.max(np.abs(col - ref)))
    return d / abs(ref) if ref != 0 else d


def series_checks(
    series: DiagnosticsSeries, eos: EosParams, h: float, tol: Tolerances = Tolerances(), C_tilde: float | None = None
) -> list[CheckResult]:
    """Every check that can be decided from a diagnostics series alone."""
    out: list[CheckResult] = []
    t = series.t
    add = out.append

    m = _drift(series.column("mass_pert"))
    add(CheckResult("conservation", "check_mass", -m, tol.mass, _verdict(-m, tol.mass), f"relative drift {m:.3e}"))
    b = _drift(series.column("int_btheta"))
    add(CheckResult("conservation", "check_btheta", -b, tol.btheta, _verdict(-b, tol.btheta), f"relative drift {b:.3e}"))
    sup = float(np.min(t + 1.0 + 2.0 * h - series.column("support_radius")))
    add(CheckResult("conservation", "check_support", sup, 0.0, _verdict(sup, 0.0), "bound t+1+2h minus support radius"))
    ent = float(np.min(series.column("min_S"))) - eos.S_bar
    add(CheckResult("conservation", "check_entropy", ent, tol.entropy, _verdict(ent, tol.entropy), "min S - S_bar"))

    try:
        conv = dXY_convergence(t, series.column("X"), series.column("Y"))
        order = conv.order
        if all(d == 0.0 for d in conv.differences):
            add(CheckResult("identities", "check_dXY", math.inf, tol.dXY_order, PASS, "residual identically zero"))
        else:
            add(CheckResult("identities", "check_dXY", order - tol.dXY_order, 0.0, _verdict(order - tol.dXY_order, 0.0),
                            f"observed order {order:.3f}, spatial floor {conv.floor:.3e}"))
    except (SeriesTooShort, SpacingError) as exc:
        add(CheckResult("identities", "check_dXY", math.nan, 0.0, NA, str(exc)))
    try:
        idr = dY_identity_residual(series)
        worst_id = float(np.max(np.abs(idr))) if idr.size else 0.0
        add(CheckResult("identities", "identity_dY", -worst_id, math.inf, PASS, "max |dY/dt - (kinetic + pressure + magnetic)|"))
    except (SeriesTooShort, SpacingError) as exc:
        worst_id = math.nan
        add(CheckResult("identities", "identity_dY", math.nan, 0.0, NA, str(exc)))

    if eos.gamma >= 2.0:
        pm = float(np.nanmin(series.column("p_margin")))
        add(CheckResult("inequalities", "check_pressure", pm, tol.pressure, _verdict(pm, tol.pressure)))
    else:
        add(CheckResult("inequalities", "check_pressure", math.nan, 0.0, NA, "gamma < 2"))
    mg = float(np.min(series.column("magnetic_term")))
    add(CheckResult("inequalities", "check_magnetic", mg, 0.0, _verdict(mg, 0.0)))
    hm = float(np.min(series.column("hoelder_margin")))
    add(CheckResult("inequalities", "check_hoelder", hm, 0.0, _verdict(hm, 0.0)))
    if eos.gamma >= 2.0 and len(series) >= 3 and not math.isnan(worst_id):
        budget = tol.dY1 if tol.dY1 is not None else 2.0 * worst_id
        res = magnetic_term_and_dY1(series, eos, budget, C_tilde)
        wm = min(r.margin for r in res.reports)
        add(CheckResult("inequalities", "check_dY1", wm, budget, _verdict(wm, budget)))
    else:
        add(CheckResult("inequalities", "check_dY1", math.nan, 0.0, NA, "gamma < 2 or too few samples"))
    return out
