"""Spherical-mean test function F(x) = integral over S^2 of exp(w.x).

The closed form is F(R) = 4*pi*sinh(R)/R with R = |x|.  Small radii use a
Taylor series of sinh(R)/R so that F, F_R and F_RR stay accurate at R -> 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

FOUR_PI = 4.0 * math.pi

#: Below this radius the Taylor branch is used.
R_SWITCH = 0.5
#: Degree of the Taylor polynomial of sinh(R)/R used for F itself.
TAYLOR_DEGREE = 12
# F_R and F_RR lose two orders per derivative; carry extra terms for them.
_DERIV_TERMS = 10


class DomainError(ValueError):
    """Raised for negative or non-finite radii."""


class QuadratureConfigError(ValueError):
    """Raised when quadrature node counts are below the usable minimum."""


@dataclass(frozen=True)
class RadialProfile:
    R: float
    F: float
    F_R: float
    F_RR: float


_INV_ODD_FACT = np.array([1.0 / math.factorial(2 * k + 1) for k in range(_DERIV_TERMS + 1)])


def _series(R):
    """sinh(R)/R and its first two derivatives from the even power series."""
    R2 = R * R
    g = np.zeros_like(R)
    for k in range(TAYLOR_DEGREE // 2, -1, -1):
        g = g * R2 + _INV_ODD_FACT[k]
    g1 = np.zeros_like(R)
    g2 = np.zeros_like(R)
    for k in range(_DERIV_TERMS, 0, -1):
        g1 = g1 * R2 + 2 * k * _INV_ODD_FACT[k]
        g2 = g2 * R2 + 2 * k * (2 * k - 1) * _INV_ODD_FACT[k]
    return g, g1 * R, g2


def _closed(R):
    sh = np.sinh(R)
    ch = np.cosh(R)
    g = sh / R
    g1 = ch / R - sh / R**2
    g2 = sh / R - 2.0 * ch / R**2 + 2.0 * sh / R**3
    return g, g1, g2


def profile_arrays(R):
    """Vectorised (F, F_R, F_RR) for an array of radii."""
    R = np.asarray(R, dtype=float)
    if not np.all(np.isfinite(R)) or np.any(R < 0):
        raise DomainError("radius must be finite and nonnegative")
    small = R < R_SWITCH
    F = np.empty_like(R)
    F1 = np.empty_like(R)
    F2 = np.empty_like(R)
    if np.any(small):
        g, g1, g2 = _series(R[small])
        F[small], F1[small], F2[small] = g, g1, g2
    big = ~small
    if np.any(big):
        g, g1, g2 = _closed(R[big])
        F[big], F1[big], F2[big] = g, g1, g2
    return FOUR_PI * F, FOUR_PI * F1, FOUR_PI * F2


def eval_profile(R: float) -> RadialProfile:
    R = float(R)
    if not math.isfinite(R) or R < 0:
        raise DomainError(f"radius must be finite and nonnegative, got {R!r}")
    F, F1, F2 = profile_arrays(np.array([R]))
    return RadialProfile(R, float(F[0]), float(F1[0]), float(F2[0]))


@lru_cache(maxsize=32)
def _sphere_nodes(n_polar: int, n_azimuth: int):
    mu, w_mu = np.polynomial.legendre.leggauss(n_polar)
    phi = 2.0 * math.pi * np.arange(n_azimuth) / n_azimuth
    sin_t = np.sqrt(1.0 - mu**2)
    omega = np.stack(
        [
            np.outer(sin_t, np.cos(phi)).ravel(),
            np.outer(sin_t, np.sin(phi)).ravel(),
            np.repeat(mu, n_azimuth),
        ],
        axis=1,
    )
    weights = np.repeat(w_mu, n_azimuth) * (2.0 * math.pi / n_azimuth)
    return omega, weights


def sphere_quadrature(n_polar: int, n_azimuth: int):
    """Nodes (M, 3) and weights (M,) of the Gauss-Legendre x trapezoid rule on S^2."""
    if n_polar < 2 or n_azimuth < 4:
        raise QuadratureConfigError(
            f"need n_polar >= 2 and n_azimuth >= 4, got {n_polar}, {n_azimuth}"
        )
    return _sphere_nodes(int(n_polar), int(n_azimuth))


def quad_F_oracle(x, n_polar: int = 64, n_azimuth: int = 128) -> float:
    """F(x) by direct quadrature of exp(w.x) over the unit sphere."""
    omega, w = sphere_quadrature(n_polar, n_azimuth)
    x = np.asarray(x, dtype=float)
    return float(np.sum(w * np.exp(omega @ x)))


def quad_gradF_oracle(x, n_polar: int = 64, n_azimuth: int = 128) -> np.ndarray:
    """Vector quadrature of exp(w.x) * w over S^2, which equals grad F(x)."""
    omega, w = sphere_quadrature(n_polar, n_azimuth)
    x = np.asarray(x, dtype=float)
    return (w * np.exp(omega @ x)) @ omega


def grad_F(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("point must be finite")
    R = float(np.linalg.norm(x))
    if R == 0.0:
        return np.zeros(3)
    return eval_profile(R).F_R * x / R


def asymptotic_ratio(R: float) -> float:
    """F(R) (1 + R) exp(-R); decreases from 4*pi at 0 to 2*pi at infinity."""
    if R <= 0:
        raise DomainError("asymptotic ratio needs R > 0")
    # sinh(R) e^{-R} = (1 - e^{-2R}) / 2 avoids overflow for large R.
    if R >= R_SWITCH:
        return 2.0 * math.pi * (-math.expm1(-2.0 * R)) * (1.0 + R) / R
    return eval_profile(R).F * (1.0 + R) * math.exp(-R)


def asymptotic_bracket(r_lo: float = 0.01, r_hi: float = 50.0, n: int = 2000):
    """Scan the ratio on a log grid and return its (min, max)."""
    vals = [asymptotic_ratio(R) for R in np.geomspace(r_lo, r_hi, n)]
    return min(vals), max(vals)


def ball_integral(a: float) -> float:
    """Integral of F over the ball |x| <= a: 16 pi^2 (a cosh a - sinh a)."""
    if a <= 0:
        return 0.0
    if a < 1e-3:
        return 16.0 * math.pi**2 * a**3 / 3.0
    return 16.0 * math.pi**2 * (a * math.cosh(a) - math.sinh(a))
