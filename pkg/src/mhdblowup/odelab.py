"""Comparison ODEs, the Orlicz nonlinearity and lifespan scaling fits.

Every differential inequality is integrated as an equality with unit (or
configurable) constants.  Blow-up is declared only after the solution passes
a threshold *and* the adaptive step collapses, so ``blowup_time`` measures
the singularity rather than the threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

BLOWUP, HORIZON, COLLAPSE = "blow-up", "horizon", "step-collapse"


class ConfigError(ValueError):
    pass


class DomainError(ValueError):
    pass


# ----------------------------------------------------------------- Upsilon

def upsilon(x, gamma: float):
    """(|x| + 1)^gamma - 1 - gamma |x|: even, convex, zero at the origin."""
    if not gamma > 1:
        raise DomainError(f"gamma must be > 1, got {gamma}")
    if isinstance(x, (float, int)):
        a = abs(float(x))
        if a < 1e-3:
            return gamma * (gamma - 1) / 2 * a * a * (1 + (gamma - 2) / 3 * a + (gamma - 2) * (gamma - 3) / 12 * a * a)
        return math.expm1(gamma * math.log1p(a)) - gamma * a
    a = np.abs(np.asarray(x, dtype=float))
    # expm1/log1p keep the quadratic behaviour near 0 free of cancellation
    small = a < 1e-3
    out = np.expm1(gamma * np.log1p(a)) - gamma * a
    if np.any(small):
        s = a[small] if np.ndim(a) else a
        series = gamma * (gamma - 1) / 2 * s**2 * (1 + (gamma - 2) / 3 * s + (gamma - 2) * (gamma - 3) / 12 * s**2)
        if np.ndim(a):
            out[small] = series
        else:
            out = series
    return out if np.ndim(out) else float(out)


# ------------------------------------------------------ sandwich constants

def sandwich_ratio(rho, gamma: float):
    """(rho^gamma - 1 - gamma (rho - 1)) / (rho - 1)^2, accurate near rho = 1."""
    rho = np.asarray(rho, dtype=float)
    d = rho - 1.0
    out = np.empty_like(d)
    near = np.abs(d) < 0.5
    # binomial series: sum_{k>=2} C(gamma, k) d^(k-2)
    dn = d[near]
    acc = np.zeros_like(dn)
    coef = [1.0]
    for k in range(1, 64):
        coef.append(coef[-1] * (gamma - k + 1) / k)
    for k in range(63, 1, -1):
        acc = acc * dn + coef[k]
    out[near] = acc
    far = ~near
    df = d[far]
    out[far] = (np.power(rho[far], gamma) - 1.0 - gamma * df) / (df * df)
    return out


@dataclass
class SandwichResult:
    gamma: float
    C_tilde: float | None
    argmin: float | None
    failure_witness: float | None
    witness_ratio: float | None


RHO_MIN = 1e-8
RHO_MAX = 1e6


def _golden(f: Callable[[float], float], a: float, b: float, tol: float = 1e-12) -> float:
    g = (math.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > tol * (1 + abs(a) + abs(b)):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def sandwich_constants(
    gamma: float, rho_min: float = RHO_MIN, rho_max: float = RHO_MAX, witness_level: float = 1e-2, n_coarse: int = 4001
) -> SandwichResult:
    """Infimum over rho in [rho_min, rho_max] of the sandwich ratio.

    For gamma >= 2 the infimum is positive and is refined by golden-section
    search in log rho around the best point of a coarse log grid.  For
    1 < gamma < 2 the ratio decays like rho^(gamma-2); the grid point with
    the smallest ratio is returned as a witness when that ratio is below
    ``witness_level``.
    """
    if not gamma > 1:
        raise DomainError(f"gamma must be > 1, got {gamma}")
    grid = np.geomspace(rho_min, rho_max, n_coarse)
    vals = sandwich_ratio(grid, gamma)
    if gamma < 2:
        # the ratio decays like rho^(gamma-2); report its smallest sampled value
        k = int(np.argmin(vals))
        if not vals[k] < witness_level:
            return SandwichResult(gamma, None, None, None, None)
        return SandwichResult(gamma, None, None, float(grid[k]), float(vals[k]))
    k = int(np.argmin(vals))
    lo = math.log(grid[max(k - 1, 0)])
    hi = math.log(grid[min(k + 1, n_coarse - 1)])
    f = lambda s: float(sandwich_ratio(np.array([math.exp(s)]), gamma)[0])
    s_best = _golden(f, lo, hi)
    cands = [(f(s), s) for s in (s_best, lo, hi)]
    val, s = min(cands)
    return SandwichResult(gamma, val, math.exp(s), None, None)


def sandwich_grid_oracle(gamma: float, n: int = 1_000_000, rho_min: float = RHO_MIN, rho_max: float = RHO_MAX):
    """Brute-force (min ratio, argmin) over a dense log grid."""
    grid = np.geomspace(rho_min, rho_max, n)
    vals = sandwich_ratio(grid, gamma)
    k = int(np.argmin(vals))
    return float(vals[k]), float(grid[k])


# --------------------------------------------------------------- integrator

@dataclass
class Controls:
    """Adaptive step-doubling controls."""

    rtol: float = 1e-10
    atol: float = 1e-300
    threshold: float = 1e12
    step_floor: float = 1e-14
    horizon: float = 1e60
    h0: float = 1e-3
    max_steps: int = 200_000
    record_every: int = 1


@dataclass
class OdeRun:
    t: np.ndarray
    value: np.ndarray
    derivative: np.ndarray
    blowup_time: float | None
    terminated_reason: str
    steps: int = 0
    threshold_crossed_at: float | None = None


Accel = Callable[[float, float, float], float]


def _phi(z: float, kmax: int = 4) -> list[float]:
    """phi_0..phi_kmax at real z, phi_0 = e^z, phi_{k+1}(z) = (phi_k(z) - 1/k!) / z."""
    if abs(z) < 1.0:
        out = []
        for k in range(kmax + 1):
            term, acc, j = 1.0 / math.factorial(k), 0.0, 0
            while abs(term) > 1e-18 * max(abs(acc), 1e-300) or j == 0:
                acc += term
                j += 1
                term *= z / (j + k)
            out.append(acc)
        return out
    out = [math.exp(z)]
    for k in range(kmax):
        out.append((out[-1] - 1.0 / math.factorial(k)) / z)
    return out


def _etdrk4(accel: Accel, t: float, z: float, v: float, h: float, a: float) -> tuple[float, float]:
    """Cox-Matthews exponential RK4 for z' = v, v' = -a v + accel(t, z, v).

    The linear part L = [[0, 1], [0, -a]] is propagated exactly through
    phi_k(hL) = [[1/k!, h phi_{k+1}(-ah)], [0, phi_k(-ah)]], so the scheme
    reproduces the quasi-static balance v ~ accel / a for any step size.
    With a = 0 it reduces to classical RK4.
    """
    e2, q1, q2 = _phi(-a * h / 2, 2)
    E0, E1, E2, E3, E4 = _phi(-a * h, 4)
    hh = h / 2
    g0 = accel(t, z, v)
    za, va = z + hh * q1 * v + hh * hh * q2 * g0, e2 * v + hh * q1 * g0
    ga = accel(t + hh, za, va)
    zb, vb = z + hh * q1 * v + hh * hh * q2 * ga, e2 * v + hh * q1 * ga
    gb = accel(t + hh, zb, vb)
    gc_in = 2 * gb - g0
    zc, vc = za + hh * q1 * va + hh * hh * q2 * gc_in, e2 * va + hh * q1 * gc_in
    gc = accel(t + h, zc, vc)
    gab = ga + gb
    z1 = z + h * E1 * v + h * h * ((E2 - 3 * E3 + 4 * E4) * g0 + 2 * (E3 - 2 * E4) * gab + (4 * E4 - E3) * gc)
    v1 = E0 * v + h * ((E1 - 3 * E2 + 4 * E3) * g0 + 2 * (E2 - 2 * E3) * gab + (4 * E3 - E2) * gc)
    return z1, v1


#: below ``step_floor`` the step may keep shrinking this much further while
#: the threshold has not been reached; only then is it a step collapse.
HARD_FLOOR_FACTOR = 1e-12


def integrate(accel: Accel, y0: Sequence[float], controls: Controls = Controls(), damping: float = 0.0, t0: float = 0.0) -> OdeRun:
    """Integrate value'' + damping value' = accel(t, value, value').

    Each step compares one exponential RK4 step of size h with two of size
    h/2; the difference estimates the local error and the two results are
    combined by Richardson extrapolation.  Treating the damping exactly
    removes the stiffness that otherwise caps the step at O(1) during the
    long quasi-static phase before a late blow-up.

    Blow-up is declared once |value| has passed ``threshold`` and the next
    step falls below ``step_floor * max(1, t)``.  Time is accumulated as a
    compensated sum so that steps far below the spacing of doubles near t
    still advance it; this lets a solution reach the threshold when the
    singularity sits at t ~ 1e17.
    """
    c = controls
    a = float(damping)
    t, t_lo = float(t0), 0.0
    z, v = (float(w) for w in y0)
    h = c.h0
    ts, vs, ds = [t], [z], [v]
    crossed = None
    n = 0

    def done(reason):
        bt = t if reason == BLOWUP else None
        return OdeRun(np.array(ts), np.array(vs), np.array(ds), bt, reason, n, crossed)

    while n < c.max_steps:
        if t >= c.horizon:
            return done(HORIZON)
        h = min(h, c.horizon - t)
        floor = c.step_floor * max(1.0, abs(t))
        if h < floor and (crossed is not None or h < HARD_FLOOR_FACTOR * floor):
            return done(BLOWUP if crossed is not None else COLLAPSE)
        tt = t + t_lo
        try:
            zf, vf = _etdrk4(accel, tt, z, v, h, a)
            zm, vm = _etdrk4(accel, tt, z, v, h / 2, a)
            zh, vh = _etdrk4(accel, tt + h / 2, zm, vm, h / 2, a)
        except (OverflowError, ZeroDivisionError):
            h *= 0.1
            continue
        dz, dv = zh - zf, vh - vf
        sz = c.atol + c.rtol * max(abs(z), abs(zh))
        sv = c.atol + c.rtol * max(abs(v), abs(vh))
        ratio = max(abs(dz) / sz, abs(dv) / sv) / 15.0
        if not math.isfinite(ratio):
            h *= 0.1
            continue
        if ratio <= 1.0:
            # two-sum keeps the low-order bits of t + h
            s_ = t + h
            bp = s_ - t
            t_lo += (t - (s_ - bp)) + (h - bp)
            t = s_
            z, v = zh + dz / 15.0, vh + dv / 15.0
            n += 1
            if crossed is None and abs(z) >= c.threshold:
                crossed = t
            if n % c.record_every == 0:
                ts.append(t)
                vs.append(z)
                ds.append(v)
        fac = 0.9 * ratio ** (-0.2) if ratio > 0 else 4.0
        h *= min(4.0, max(0.1, fac))
    return done(COLLAPSE)


# ------------------------------------------------------- comparison systems

@dataclass(frozen=True)
class BlowupSystemParams:
    """X'' = C X^2 / (e^t (t + R0)^((n-1)/2)) + X, X(0) = eps X0, X'(0) = eps Y0."""

    C: float = 1.0
    n: int = 3
    R0: float = 1.0
    X0: float = 1.0
    Y0: float = 0.0

    def __post_init__(self):
        if not self.C > 0:
            raise ConfigError("C must be > 0")
        if self.n not in (1, 2, 3):
            raise ConfigError("n must be 1, 2 or 3")
        if not self.R0 > 0:
            raise ConfigError("R0 must be > 0")

    @property
    def x0(self) -> float:
        return self.X0 + self.Y0


def integrate_blowup_system(
    p: BlowupSystemParams, epsilon: float, controls: Controls = Controls(), form: str = "z", nonlinear: bool = True
) -> OdeRun:
    """Integrate the equality comparison system.

    ``form="z"`` integrates Z = e^{-t} X, which obeys
    Z'' + 2 Z' = C Z^2 / (t + R0)^((n-1)/2) and carries no exponential
    factor, so very long lifespans stay in floating-point range.  The run's
    value/derivative are then Z and Z'.  ``form="x"`` integrates X directly.
    """
    if epsilon < 0:
        raise ConfigError("epsilon must be >= 0")
    if epsilon > 0 and not p.x0 > 0:
        raise ConfigError("need X(0) + X'(0) = eps x0 > 0")
    X0, X1 = epsilon * p.X0, epsilon * p.Y0
    k = 0.5 * (p.n - 1)
    c = p.C if nonlinear else 0.0
    if form == "z":
        def f(t, z, dz):
            return c * z * z / (t + p.R0) ** k

        return integrate(f, (X0, X1 - X0), controls, damping=2.0)
    if form == "x":
        def f(t, x, dx):
            return x + c * x * x * math.exp(-t) / (t + p.R0) ** k

        return integrate(f, (X0, X1), controls)
    raise ConfigError(f"form must be 'z' or 'x', got {form!r}")


@dataclass(frozen=True)
class OrliczParams:
    """I'' + damping I' = K (1 + t)^(-lambda) Upsilon(I), I(0) = I0, I'(0) = I0p.

    damping = 1 is the comparison inequality; damping = 2 is the equation for
    Z = e^{-t} X.
    """

    gamma: float = 1.5
    lam: float = 1.0
    alpha: float = 1.0
    beta: float = 0.5
    I0: float = 0.1
    I0p: float = 0.0
    damping: float = 1.0
    K: float = 1.0

    def __post_init__(self):
        if not 1 < self.gamma < 2:
            raise ConfigError("Orlicz route needs 1 < gamma < 2")
        if not 0 <= self.lam <= 1:
            raise ConfigError("lambda must lie in [0, 1]")
        if not self.I0 > 0:
            raise ConfigError("I(0) = eps must be > 0")
        if self.I0p < 0:
            raise ConfigError("I'(0) must be >= 0")


def measured_growth_exponents(gamma: float) -> tuple[float, float]:
    """(alpha, beta) read off Upsilon: p^(1+alpha) near 0, p^(1+beta) at infinity."""
    lo = np.array([1e-6, 1e-5])
    hi = np.array([1e8, 1e9])
    a = np.diff(np.log(upsilon(lo, gamma))) / np.diff(np.log(lo))
    b = np.diff(np.log(upsilon(hi, gamma))) / np.diff(np.log(hi))
    return float(a[0]) - 1.0, float(b[0]) - 1.0


def integrate_orlicz_system(p: OrliczParams, controls: Controls = Controls(), form: str = "z") -> OdeRun:
    """Integrate the Orlicz comparison equation.

    ``form="x"`` (only for damping = 2) integrates the untransformed
    X = e^t Z:  X'' = X + K e^t (1 + t)^(-lambda) Upsilon(e^{-t} X).
    """
    g, lam, K, a = p.gamma, p.lam, p.K, p.damping
    if form == "z":
        def f(t, i, di):
            return K * (1.0 + t) ** (-lam) * upsilon(i, g)

        return integrate(f, (p.I0, p.I0p), controls, damping=a)
    if form == "x":
        if a != 2.0:
            raise ConfigError("the untransformed form exists for damping = 2 only")

        def f(t, x, dx):
            e = math.exp(t)
            return x + K * e * (1.0 + t) ** (-lam) * upsilon(x / e, g)

        return integrate(f, (p.I0, p.I0p + p.I0), controls)
    raise ConfigError(f"form must be 'z' or 'x', got {form!r}")


# ---------------------------------------------------------------- scalings

@dataclass
class FitReport:
    label: str
    model: str
    epsilons: list[float]
    lifespans: list[float]
    reasons: list[str]
    slope: float
    intercept: float
    r2: float
    expected_slope: float | None = None

    def line(self) -> str:
        exp = f" expected {self.expected_slope:+.3f}" if self.expected_slope is not None else ""
        return f"lifespan scaling {self.label}: model {self.model}, slope {self.slope:+.4f}{exp}, intercept {self.intercept:+.4f}, R^2 {self.r2:.6f}"


def linear_fit(x, y) -> tuple[float, float, float]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def check_epsilons(eps: Sequence[float]) -> None:
    eps = list(eps)
    if len(eps) < 6:
        raise ConfigError("need at least 6 epsilon values")
    if min(eps) <= 0 or max(eps) / min(eps) < 10.0 * (1 - 1e-12):
        raise ConfigError("epsilon values must be positive and span at least one decade")


def lifespan_sweep_fit(
    system: str,
    epsilons: Sequence[float],
    blowup: BlowupSystemParams | None = None,
    orlicz: OrliczParams | None = None,
    controls: Controls = Controls(),
    min_lifespan: float = 10.0,
) -> FitReport:
    """Run one integration per epsilon and fit the lifespan model for the case."""
    check_epsilons(epsilons)
    eps = sorted(float(e) for e in epsilons)
    runs = []
    if system == "blowup":
        bp = blowup or BlowupSystemParams()
        runs = [integrate_blowup_system(bp, e, controls) for e in eps]
        label = f"n={bp.n}"
        if bp.n == 3:
            model, x, expected = "log T vs 1/eps", [1.0 / e for e in eps], None
        else:
            model, x, expected = "log T vs log eps", [math.log(e) for e in eps], -float(bp.n)
    elif system == "orlicz":
        op = orlicz or OrliczParams()
        runs = [integrate_orlicz_system(_with_eps(op, e), controls) for e in eps]
        label = f"orlicz lambda={op.lam:g} gamma={op.gamma:g}"
        if op.lam == 1.0:
            model, x, expected = "log T vs eps^-alpha", [e ** (-op.alpha) for e in eps], None
        else:
            model, x, expected = "log T vs log eps", [math.log(e) for e in eps], -op.alpha / (1.0 - op.lam)
    else:
        raise ConfigError(f"system must be 'blowup' or 'orlicz', got {system!r}")
    T = []
    for e, r in zip(eps, runs):
        if r.blowup_time is None:
            raise ConfigError(f"no blow-up for eps={e:g} ({r.terminated_reason}); raise the horizon")
        if r.blowup_time <= min_lifespan:
            raise ConfigError(f"eps={e:g} gives T={r.blowup_time:.3g} <= {min_lifespan}; use smaller eps")
        T.append(r.blowup_time)
    slope, intercept, r2 = linear_fit(x, np.log(T))
    return FitReport(label, model, eps, T, [r.terminated_reason for r in runs], slope, intercept, r2, expected)


def _with_eps(op: OrliczParams, eps: float) -> OrliczParams:
    from dataclasses import replace

    return replace(op, I0=eps)


def threshold_sensitivity(run_fn: Callable[[Controls], OdeRun], base: Controls = Controls(), low: float = 1e6, high: float = 1e12):
    """Blow-up times at two thresholds and their relative difference."""
    from dataclasses import replace

    a = run_fn(replace(base, threshold=low))
    b = run_fn(replace(base, threshold=high))
    if a.blowup_time is None or b.blowup_time is None:
        return a.blowup_time, b.blowup_time, math.inf
    return a.blowup_time, b.blowup_time, abs(a.blowup_time - b.blowup_time) / b.blowup_time
