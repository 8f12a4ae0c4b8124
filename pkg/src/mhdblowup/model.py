"""Equation of state, state conversions and the azimuthal-field Lorentz force.

All functions broadcast over numpy arrays, so the same code serves single
states in tests and whole grids inside the solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

#: Densities at or below this value are treated as a breakdown of the run.
RHO_FLOOR = 1e-12


class PositivityError(ValueError):
    """Density at or below the positivity floor."""


class AxisError(ValueError):
    """A 1/r term was requested on or across the symmetry axis."""


@dataclass(frozen=True)
class EosParams:
    """Polytropic EOS p = A rho^gamma e^S plus the magnetic permeability.

    Use :meth:`normalized` for the default scaling in which the background
    (rho = 1, S = S_bar) has unit sound speed.
    """

    gamma: float = 2.0
    S_bar: float = 0.0
    A: float = 0.5
    mu: float = 1.0
    rho_bar: float = 1.0

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must be > 1, got {self.gamma}")
        if not self.mu > 0.0:
            raise ValueError(f"mu must be > 0, got {self.mu}")
        if not self.A > 0.0:
            raise ValueError(f"A must be > 0, got {self.A}")

    @classmethod
    def normalized(cls, gamma: float = 2.0, S_bar: float = 0.0, mu: float = 1.0) -> "EosParams":
        if not gamma > 1.0:
            raise ValueError(f"gamma must be > 1, got {gamma}")
        return cls(gamma=gamma, S_bar=S_bar, A=1.0 / (gamma * math.exp(S_bar)), mu=mu)

    @property
    def p_bar(self) -> float:
        return self.A * self.rho_bar**self.gamma * math.exp(self.S_bar)

    @property
    def A_eS(self) -> float:
        """A e^{S_bar}, the coefficient in the pressure lower bounds."""
        return self.A * math.exp(self.S_bar)


class PrimitiveState(NamedTuple):
    rho: np.ndarray | float
    ur: np.ndarray | float
    uz: np.ndarray | float
    S: np.ndarray | float
    btheta: np.ndarray | float


class ConservedState(NamedTuple):
    rho: np.ndarray | float
    mr: np.ndarray | float
    mz: np.ndarray | float
    rhoS: np.ndarray | float
    btheta: np.ndarray | float


def background(eos: EosParams) -> PrimitiveState:
    return PrimitiveState(eos.rho_bar, 0.0, 0.0, eos.S_bar, 0.0)


def _check_rho(rho):
    if np.any(~(np.asarray(rho) > RHO_FLOOR)):
        raise PositivityError(f"density at or below floor {RHO_FLOOR:g}")


def pressure(rho, S, eos: EosParams):
    _check_rho(rho)
    return eos.A * np.power(rho, eos.gamma) * np.exp(S)


def dp_drho(rho, S, eos: EosParams):
    return eos.gamma * eos.A * np.power(rho, eos.gamma - 1.0) * np.exp(S)


def d2p_drho2(rho, S, eos: EosParams):
    return eos.gamma * (eos.gamma - 1.0) * eos.A * np.power(rho, eos.gamma - 2.0) * np.exp(S)


def sound_speed(rho, S, eos: EosParams):
    return np.sqrt(dp_drho(rho, S, eos))


def wave_speeds(w: PrimitiveState, eos: EosParams):
    """(sound, alfven, fast) speeds for in-plane propagation with azimuthal B."""
    p = pressure(w.rho, w.S, eos)
    sound = np.sqrt(eos.gamma * p / w.rho)
    alfven = np.abs(w.btheta) / np.sqrt(eos.mu * w.rho)
    fast = np.sqrt(sound * sound + alfven * alfven)
    return sound, alfven, fast


def prim_to_cons(w: PrimitiveState) -> ConservedState:
    _check_rho(w.rho)
    return ConservedState(w.rho, w.rho * w.ur, w.rho * w.uz, w.rho * w.S, w.btheta)


def cons_to_prim(q: ConservedState) -> PrimitiveState:
    _check_rho(q.rho)
    return PrimitiveState(q.rho, q.mr / q.rho, q.mz / q.rho, q.rhoS / q.rho, q.btheta)


def lorentz_force_axisym(btheta, d_r_btheta, d_z_btheta, r, mu):
    """Lorentz term as it enters the momentum equations' left-hand side.

    Returns ``(fr, fz)`` with fr = (B dB/dr + B^2/r)/mu and fz = B dB/dz/mu,
    i.e. minus the (r, z) components of (curl B) x B / mu.
    """
    r = np.asarray(r, dtype=float)
    if np.any(~(r > 0)):
        raise AxisError("Lorentz force needs r > 0 (use cell-centred radii)")
    fr = (btheta * d_r_btheta + btheta * btheta / r) / mu
    fz = btheta * d_z_btheta / mu
    return fr, fz


def lorentz_decomposition(btheta, d_r_btheta, d_z_btheta, r, mu):
    """Same force assembled as grad(B^2/2)/mu + (B^2/r) e_r / mu."""
    grad_half_b2 = (btheta * d_r_btheta, btheta * d_z_btheta)
    hoop = btheta * btheta / r
    return (grad_half_b2[0] + hoop) / mu, grad_half_b2[1] / mu
