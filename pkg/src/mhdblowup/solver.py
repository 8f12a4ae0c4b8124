"""Finite-volume integrator for the reduced axisymmetric (r, z) MHD system.

Update variables are the planar conserved fields (rho, rho u^r, rho u^z,
rho S, B^theta) stored as an array of shape (5, nz, nr), z-major.  Fluxes are
HLL with the magnetic pressure folded into the normal momentum flux; the
cylindrical geometry enters through explicit 1/r sources.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import testfn
from .model import EosParams, PositivityError, PrimitiveState, RHO_FLOOR

log = logging.getLogger(__name__)

RHO, MR, MZ, RS, BT = range(5)
#: Deviations from the background below this are treated as zero.
SUPPORT_THRESHOLD = 1e-12

STATUS_OK = "ok"
STATUS_BOUNDARY = "support-reached-boundary"
STATUS_BLOWUP = "blow-up-candidate"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Grid2D:
    """Uniform cell-centred mesh on (0, r_max] x [-z_half, z_half]."""

    nr: int
    nz: int
    r_max: float
    z_half: float
    ghost_width: int = 2

    def __post_init__(self):
        if self.nr < 4 or self.nz < 4:
            raise ConfigError("grid needs at least 4 cells per direction")
        if not (self.r_max > 0 and self.z_half > 0):
            raise ConfigError("domain extents must be positive")
        if self.ghost_width < 2:
            raise ConfigError("ghost_width must be >= 2")

    @property
    def dr(self) -> float:
        return self.r_max / self.nr

    @property
    def dz(self) -> float:
        return 2.0 * self.z_half / self.nz

    @property
    def h(self) -> float:
        return max(self.dr, self.dz)

    @cached_property
    def r(self) -> np.ndarray:
        return (np.arange(self.nr) + 0.5) * self.dr

    @cached_property
    def z(self) -> np.ndarray:
        return -self.z_half + (np.arange(self.nz) + 0.5) * self.dz

    @cached_property
    def rz(self):
        """Broadcast (nz, nr) arrays of cell-centre r and z."""
        return np.meshgrid(self.r, self.z)

    @cached_property
    def R(self) -> np.ndarray:
        r, z = self.rz
        return np.hypot(r, z)

    @cached_property
    def volume(self) -> np.ndarray:
        """Midpoint weights 2 pi r dr dz of the axisymmetric volume integral."""
        return 2.0 * math.pi * self.rz[0] * self.dr * self.dz

    def check_containment(self, t_end: float, margin: float = 0.1):
        reach = t_end + 1.0 + margin
        if self.r_max < reach or self.z_half < reach:
            raise ConfigError(
                f"domain (r_max={self.r_max}, z_half={self.z_half}) must reach t_end + 1 + {margin} = {reach}"
            )


@dataclass
class FieldState:
    time: float
    grid: Grid2D
    q: np.ndarray
    meta: dict = field(default_factory=dict)

    def copy(self) -> "FieldState":
        return FieldState(self.time, self.grid, self.q.copy(), dict(self.meta))

    def primitive(self) -> PrimitiveState:
        return cons_to_prim_array(self.q)


def background_array(eos: EosParams) -> np.ndarray:
    return np.array([eos.rho_bar, 0.0, 0.0, eos.rho_bar * eos.S_bar, 0.0])


def cons_to_prim_array(q: np.ndarray) -> PrimitiveState:
    rho = q[RHO]
    if not np.all(rho > RHO_FLOOR):
        if np.any(np.isnan(rho)):
            raise FloatingPointError("NaN density")
        raise PositivityError(f"density at or below floor {RHO_FLOOR:g}")
    inv = 1.0 / rho
    return PrimitiveState(rho, q[MR] * inv, q[MZ] * inv, q[RS] * inv, q[BT])


def prim_to_cons_array(w) -> np.ndarray:
    rho, ur, uz, S, b = w
    return np.stack([rho, rho * ur, rho * uz, rho * S, b])


# ---------------------------------------------------------------- initial data

PROFILES = ("cos2", "cos4")


def bump(s: np.ndarray, profile: str = "cos2") -> np.ndarray:
    """Radial bump of unit height supported in s < 1 (s = R / support_radius)."""
    inside = s < 1.0
    c = np.where(inside, np.cos(0.5 * math.pi * np.minimum(s, 1.0)), 0.0)
    if profile == "cos2":
        return c * c
    if profile == "cos4":
        return c**4
    raise ConfigError(f"unknown profile {profile!r}; choose from {PROFILES}")


@dataclass(frozen=True)
class InitialDataSpec:
    """Background plus epsilon times a bump family.

    rho_0 = a_rho phi, u_0 = (a_ur r, a_uz z) phi / L, S_0 = a_S phi,
    B_0 = a_B r phi / L, with phi the bump in R / L and L the support radius.
    """

    epsilon: float = 0.02
    profile: str = "cos2"
    a_rho: float = 1.0
    a_ur: float = 1.0
    a_uz: float = 1.0
    a_S: float = 1.0
    a_B: float = 1.0
    support_radius: float = 0.25

    def validate(self):
        if not self.epsilon >= 0:
            raise ConfigError("epsilon must be >= 0")
        if not 0 < self.support_radius <= 1.0:
            raise ConfigError("support_radius must lie in (0, 1]")
        if self.a_S < 0:
            raise ConfigError("a_S must be >= 0 so that S(0, x) >= S_bar")
        if self.profile not in PROFILES:
            raise ConfigError(f"unknown profile {self.profile!r}; choose from {PROFILES}")
        if 1.0 + self.epsilon * min(self.a_rho, 0.0) <= RHO_FLOOR:
            raise ConfigError("initial density would not be positive")

    def perturbation(self, r, z):
        """(rho_0, u0^r, u0^z, S_0, B0^theta) before scaling by epsilon."""
        L = self.support_radius
        phi = bump(np.hypot(r, z) / L, self.profile)
        return (
            self.a_rho * phi,
            self.a_ur * r / L * phi,
            self.a_uz * z / L * phi,
            self.a_S * phi,
            self.a_B * r / L * phi,
        )


def blowup_functional(spec: InitialDataSpec, grid: Grid2D) -> tuple[float, float]:
    """Midpoint values of (int rho_0 F dx, int grad F . u_0 dx)."""
    r, z = grid.rz
    F, F_R, _ = testfn.profile_arrays(grid.R)
    rho0, ur0, uz0, _, _ = spec.perturbation(r, z)
    gFr = F_R * r / grid.R
    gFz = F_R * z / grid.R
    w = grid.volume
    return float(np.sum(w * rho0 * F)), float(np.sum(w * (gFr * ur0 + gFz * uz0)))


def make_initial_data(spec: InitialDataSpec, grid: Grid2D, eos: EosParams) -> FieldState:
    spec.validate()
    r, z = grid.rz
    eps = spec.epsilon
    rho0, ur0, uz0, S0, B0 = spec.perturbation(r, z)
    w = (1.0 + eps * rho0, eps * ur0, eps * uz0, eos.S_bar + eps * S0, eps * B0)
    q = prim_to_cons_array(w)
    mass_term, vel_term = blowup_functional(spec, grid)
    hyp = eps * (mass_term + vel_term)
    meta = {
        "int_rho0_F": mass_term,
        "int_gradF_u0": vel_term,
        "blowup_functional": hyp,
        "positive_functional": hyp > 0,
    }
    if eps > 0 and not hyp > 0:
        log.warning(
            "initial data violate the blow-up hypothesis: eps*(int rho0 F + int gradF.u0) = %.3e <= 0", hyp
        )
    return FieldState(0.0, grid, q, meta)


# ------------------------------------------------------------------ time step

def cfl_dt(state: FieldState, cfl: float, eos: EosParams) -> float:
    if not 0.0 < cfl <= 1.0:
        raise ConfigError(f"cfl must lie in (0, 1], got {cfl}")
    from .model import wave_speeds

    w = state.primitive()
    _, _, fast = wave_speeds(w, eos)
    speed = fast + np.hypot(w.ur, w.uz)
    smax = float(np.max(speed))
    if not math.isfinite(smax):
        raise FloatingPointError("non-finite wave speed")
    g = state.grid
    return cfl * min(g.dr, g.dz) / smax


def physical_flux(w, direction: str, eos: EosParams) -> np.ndarray:
    rho, ur, uz, S, b = w
    p = eos.A * np.power(rho, eos.gamma) * np.exp(S)
    P = p + b * b / (2.0 * eos.mu)
    if direction == "r":
        un = ur
        return np.stack([rho * un, rho * ur * un + P, rho * uz * un, rho * S * un, b * un])
    if direction == "z":
        un = uz
        return np.stack([rho * un, rho * ur * un, rho * uz * un + P, rho * S * un, b * un])
    raise ValueError(f"direction must be 'r' or 'z', got {direction!r}")


def _fast(w, eos: EosParams):
    rho, _, _, S, b = w
    cs2 = eos.gamma * eos.A * np.power(rho, eos.gamma - 1.0) * np.exp(S)
    return np.sqrt(cs2 + b * b / (eos.mu * rho))


def hll_flux(left, right, direction: str, eos: EosParams) -> np.ndarray:
    """Two-wave HLL flux between primitive states (arrays broadcast)."""
    left = tuple(np.asarray(v, dtype=float) for v in left)
    right = tuple(np.asarray(v, dtype=float) for v in right)
    FL = physical_flux(left, direction, eos)
    FR = physical_flux(right, direction, eos)
    k = 1 if direction == "r" else 2
    cf = np.maximum(_fast(left, eos), _fast(right, eos))
    sL = np.minimum(left[k], right[k]) - cf
    sR = np.maximum(left[k], right[k]) + cf
    UL = prim_to_cons_array(left)
    UR = prim_to_cons_array(right)
    # sL < 0 < sR always holds for fast > 0, but keep the upwind branches
    mid = (sR * FL - sL * FR + sL * sR * (UR - UL)) / (sR - sL)
    return np.where(sL >= 0, FL, np.where(sR <= 0, FR, mid))


# ------------------------------------------------------------------ boundaries

_ODD = np.array([1.0, -1.0, 1.0, 1.0, -1.0])


def boundary_status(q: np.ndarray, grid: Grid2D, eos: EosParams) -> str:
    """Flag perturbations inside the outermost ghost_width cells."""
    g = grid.ghost_width
    bg = background_array(eos)[:, None, None]
    dev = np.max(np.abs(q - bg), axis=0)
    edge = np.zeros_like(dev, dtype=bool)
    edge[:, -g:] = True
    edge[:g, :] = True
    edge[-g:, :] = True
    return STATUS_BOUNDARY if np.any(dev[edge] > SUPPORT_THRESHOLD) else STATUS_OK


def apply_boundaries(state: FieldState, eos: EosParams) -> tuple[np.ndarray, str]:
    """Return the ghost-padded conserved array and a boundary status.

    Axis: parity reflection (rho, rho u^z, rho S even; rho u^r, B^theta odd).
    Outer r and both z ends: the fixed background state.
    """
    return _pad(state.q, state.grid, eos), boundary_status(state.q, state.grid, eos)


def _pad(q: np.ndarray, grid: Grid2D, eos: EosParams) -> np.ndarray:
    g = grid.ghost_width
    nz, nr = q.shape[1:]
    out = np.empty((5, nz + 2 * g, nr + 2 * g))
    out[:] = background_array(eos)[:, None, None]
    out[:, g:-g, g:-g] = q
    mirror = q[:, :, g - 1 :: -1] if g <= nr else None
    out[:, g:-g, :g] = mirror * _ODD[:, None, None]
    return out


# ------------------------------------------------------------------ operator

def _minmod(a, b):
    return np.where(a * b > 0, np.where(np.abs(a) < np.abs(b), a, b), 0.0)


@dataclass(frozen=True)
class Numerics:
    cfl: float = 0.4
    reconstruction: str = "first"
    integrator: str = "euler"

    def validate(self):
        if not 0 < self.cfl <= 1:
            raise ConfigError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.reconstruction not in ("first", "muscl"):
            raise ConfigError(f"reconstruction must be 'first' or 'muscl', got {self.reconstruction!r}")
        if self.integrator not in ("euler", "heun"):
            raise ConfigError(f"integrator must be 'euler' or 'heun', got {self.integrator!r}")


def _face_states(wp: np.ndarray, axis: int, n: int, g: int, muscl: bool):
    """Left/right primitive states on the n + 1 faces along ``axis``.

    ``wp`` is the padded primitive array (5, NZ, NR); the other axis is
    already restricted to interior cells.
    """
    sl = lambda a, b: (slice(None),) + ((slice(a, b), slice(None)) if axis == 1 else (slice(None), slice(a, b)))
    wl = wp[sl(g - 1, g + n)]
    wr = wp[sl(g, g + n + 1)]
    if not muscl:
        return wl, wr
    dm = wp[sl(g - 1, g + n + 1)] - wp[sl(g - 2, g + n)]
    dp = wp[sl(g, g + n + 2)] - wp[sl(g - 1, g + n + 1)]
    slope = _minmod(dm, dp)
    sl_l = slope[sl(0, n + 1)]
    sl_r = slope[sl(1, n + 2)]
    return wl + 0.5 * sl_l, wr - 0.5 * sl_r


def _upwind_entropy(flux: np.ndarray, wl, wr) -> None:
    # rho S flux = mass flux times the upwind S; keeps min S non-decreasing
    flux[RS] = flux[RHO] * np.where(flux[RHO] >= 0, wl[3], wr[3])


def rhs(q: np.ndarray, grid: Grid2D, eos: EosParams, muscl: bool = False) -> np.ndarray:
    """Semi-discrete right-hand side dq/dt for interior cells."""
    g = grid.ghost_width
    nz, nr = q.shape[1:]
    qp = _pad(q, grid, eos)
    wp = np.stack(cons_to_prim_array(qp))

    # r-faces: shape (5, nz, nr + 1); face 0 is the axis
    wl, wr = _face_states(wp[:, g:-g, :], 2, nr, g, muscl)
    Fr = hll_flux(tuple(wl), tuple(wr), "r", eos)
    _upwind_entropy(Fr, wl, wr)
    Fr[BT, :, 0] = 0.0  # u^r B^theta vanishes on the axis
    # z-faces: shape (5, nz + 1, nr)
    wl, wr = _face_states(wp[:, :, g:-g], 1, nz, g, muscl)
    Fz = hll_flux(tuple(wl), tuple(wr), "z", eos)
    _upwind_entropy(Fz, wl, wr)

    r = grid.r[None, :]
    out = -(Fr[:, :, 1:] - Fr[:, :, :-1]) / grid.dr - (Fz[:, 1:, :] - Fz[:, :-1, :]) / grid.dz

    # Geometric sources.  Mass, z-momentum and entropy use the mean of the two
    # r-face fluxes, so r_i * (flux difference + source) telescopes and the
    # r-weighted totals are conserved exactly.  r-momentum keeps the
    # cell-centred terms of the reduced system:
    #   d_r(B^2/2)/mu + B^2/(mu r)  with the gradient already in the flux,
    # so the remaining source is -rho (u^r)^2 / r - B^2 / (mu r).
    avg = 0.5 * (Fr[:, :, 1:] + Fr[:, :, :-1]) / r
    out[RHO] -= avg[RHO]
    out[MZ] -= avg[MZ]
    out[RS] -= avg[RS]
    w = cons_to_prim_array(q)
    out[MR] -= (w.rho * w.ur * w.ur + w.btheta * w.btheta / eos.mu) / r
    return out


def max_velocity_gradient(q: np.ndarray, grid: Grid2D) -> float:
    w = cons_to_prim_array(q)
    worst = 0.0
    for u in (w.ur, w.uz):
        gz, gr = np.gradient(u, grid.dz, grid.dr)
        worst = max(worst, float(np.max(np.abs(gr))), float(np.max(np.abs(gz))))
    return worst


def step(state: FieldState, dt: float, eos: EosParams, numerics: Numerics = Numerics()) -> FieldState:
    """Advance one step; the result is written to a new buffer."""
    grid = state.grid
    muscl = numerics.reconstruction == "muscl"
    q0 = state.q
    q1 = q0 + dt * rhs(q0, grid, eos, muscl)
    if numerics.integrator == "heun":
        q2 = q1 + dt * rhs(q1, grid, eos, muscl)
        q1 = 0.5 * (q0 + q2)
    return FieldState(state.time + dt, grid, q1, state.meta)
