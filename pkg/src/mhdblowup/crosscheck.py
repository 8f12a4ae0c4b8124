"""Cylindrical operator formulas and a Cartesian finite-difference harness.

An :class:`AxisymField` holds closed-form, theta-independent cylindrical
components of u, B and a scalar p.  :func:`cylindrical_operators` evaluates
grad u, u.grad u, grad p, div u, lap u, curl B, (curl B) x B, u x B and
curl(u x B) from the component derivatives using the cylindrical formulas.
:func:`cartesian_operators` lifts the field to R^3 and evaluates the same
quantities with centred differences, rotated back into (e_r, e_theta, e_z).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

OPERATORS = ("grau", "ugrau", "grap", "divu", "lapu", "curlB", "curlBB", "UB", "curl_uB")
#: Operators used by the acceptance gate; lapu is checked but optional.
REQUIRED_OPERATORS = ("grau", "ugrau", "grap", "divu", "curlB", "curlBB", "UB", "curl_uB")


class CrosscheckError(ValueError):
    pass


@dataclass(frozen=True)
class GaussTerm:
    """a * r^m * exp(-b r^2 - c (z - d)^2)."""

    a: float
    m: int
    b: float
    c: float
    d: float

    def derivs(self, r, z):
        """(f, f_r, f_z, f_rr, f_zz, f_rz)."""
        a, m, b, c = self.a, self.m, self.b, self.c
        zz = z - self.d
        E = math.exp(-b * r * r - c * zz * zz)
        P = r**m
        # r-derivatives of r^m e^{-b r^2}, divided by e^{-b r^2}
        Pr = (m * r ** (m - 1) if m else 0.0) - 2 * b * r ** (m + 1)
        Prr = (m * (m - 1) * r ** (m - 2) if m > 1 else 0.0) - 2 * b * (2 * m + 1) * r**m + 4 * b * b * r ** (m + 2)
        Gz = -2 * c * zz
        Gzz = 4 * c * c * zz * zz - 2 * c
        return np.array([a * P * E, a * Pr * E, a * P * E * Gz, a * Prr * E, a * P * E * Gzz, a * Pr * E * Gz])


@dataclass(frozen=True)
class Component:
    terms: tuple[GaussTerm, ...] = ()

    def derivs(self, r, z):
        out = np.zeros(6)
        for t in self.terms:
            out += t.derivs(r, z)
        return out


@dataclass(frozen=True)
class AxisymField:
    """Theta-independent cylindrical components of u, B and p."""

    ur: Component = field(default_factory=Component)
    ut: Component = field(default_factory=Component)
    uz: Component = field(default_factory=Component)
    Br: Component = field(default_factory=Component)
    Bt: Component = field(default_factory=Component)
    Bz: Component = field(default_factory=Component)
    p: Component = field(default_factory=Component)

    def values(self, r, z):
        return {name: getattr(self, name).derivs(r, z) for name in ("ur", "ut", "uz", "Br", "Bt", "Bz", "p")}

    def cartesian(self, x):
        """(u, B, p) in Cartesian components at the point x."""
        r = math.hypot(x[0], x[1])
        c, s = x[0] / r, x[1] / r
        v = {k: d[0] for k, d in self.values(r, x[2]).items()}
        u = np.array([v["ur"] * c - v["ut"] * s, v["ur"] * s + v["ut"] * c, v["uz"]])
        B = np.array([v["Br"] * c - v["Bt"] * s, v["Br"] * s + v["Bt"] * c, v["Bz"]])
        return u, B, v["p"]


def random_field(rng: np.random.Generator, n_terms: int = 2, ansatz_only: bool = False) -> AxisymField:
    """Random smooth field; ``ansatz_only`` keeps just u^r, u^z, B^theta and p."""

    def comp():
        return Component(
            tuple(
                GaussTerm(
                    a=float(rng.uniform(-1, 1)),
                    m=int(rng.integers(0, 3)),
                    b=float(rng.uniform(0.3, 1.0)),
                    c=float(rng.uniform(0.3, 1.0)),
                    d=float(rng.uniform(-0.5, 0.5)),
                )
                for _ in range(n_terms)
            )
        )

    zero = Component()
    return AxisymField(
        ur=comp(),
        ut=zero if ansatz_only else comp(),
        uz=comp(),
        Br=zero if ansatz_only else comp(),
        Bt=comp(),
        Bz=zero if ansatz_only else comp(),
        p=comp(),
    )


def random_points(rng: np.random.Generator, n: int, r_range=(0.3, 1.5), z_range=(-1.0, 1.0)) -> np.ndarray:
    r = rng.uniform(*r_range, n)
    th = rng.uniform(0, 2 * math.pi, n)
    z = rng.uniform(*z_range, n)
    return np.stack([r * np.cos(th), r * np.sin(th), z], axis=1)


def cylindrical_operators(fld: AxisymField, r: float, z: float) -> dict[str, np.ndarray]:
    """Operators from the cylindrical formulas with all theta-derivatives zero.

    Vectors are (r, theta, z) components; grau is indexed [component, direction].
    """
    v = fld.values(r, z)
    ur, ur_r, ur_z, ur_rr, ur_zz, _ = v["ur"]
    ut, ut_r, ut_z, ut_rr, ut_zz, _ = v["ut"]
    uz, uz_r, uz_z, uz_rr, uz_zz, _ = v["uz"]
    Br, Br_r, Br_z = v["Br"][:3]
    Bt, Bt_r, Bt_z = v["Bt"][:3]
    Bz, Bz_r, Bz_z = v["Bz"][:3]
    p_r, p_z = v["p"][1], v["p"][2]

    grau = np.array(
        [
            [ur_r, -ut / r, ur_z],
            [ut_r, ur / r, ut_z],
            [uz_r, 0.0, uz_z],
        ]
    )
    ugrau = np.array(
        [
            ur * ur_r - ut * ut / r + uz * ur_z,
            ur * ut_r + ut * ur / r + uz * ut_z,
            ur * uz_r + uz * uz_z,
        ]
    )
    grap = np.array([p_r, 0.0, p_z])
    divu = np.array([ur / r + ur_r + uz_z])
    lapu = np.array(
        [
            ur_rr + ur_r / r - ur / r**2 + ur_zz,
            ut_rr + ut_r / r - ut / r**2 + ut_zz,
            uz_rr + uz_r / r + uz_zz,
        ]
    )
    curlB = np.array([-Bt_z, Br_z - Bz_r, Bt_r + Bt / r])
    curlBB = np.array(
        [
            Br_z * Bz - Bz_r * Bz - Bt_r * Bt - Bt * Bt / r,
            Bt_z * Bz + Bt_r * Br + Br * Bt / r,
            -Bt_z * Bt - Br_z * Br + Bz_r * Br,
        ]
    )
    UB = np.array([ut * Bz - uz * Bt, uz * Br - ur * Bz, ur * Bt - ut * Br])
    # u x B components and their (r, z) derivatives by the product rule
    Vth = uz * Br - ur * Bz
    Vth_r = uz_r * Br + uz * Br_r - ur_r * Bz - ur * Bz_r
    Vth_z = uz_z * Br + uz * Br_z - ur_z * Bz - ur * Bz_z
    Vr_z = ut_z * Bz + ut * Bz_z - uz_z * Bt - uz * Bt_z
    Vz_r = ur_r * Bt + ur * Bt_r - ut_r * Br - ut * Br_r
    curl_uB = np.array([-Vth_z, Vr_z - Vz_r, Vth_r + Vth / r])
    return {
        "grau": grau,
        "ugrau": ugrau,
        "grap": grap,
        "divu": divu,
        "lapu": lapu,
        "curlB": curlB,
        "curlBB": curlBB,
        "UB": UB,
        "curl_uB": curl_uB,
    }


def _frame(x):
    r = math.hypot(x[0], x[1])
    c, s = x[0] / r, x[1] / r
    return np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])


def _curl(J):
    return np.array([J[2, 1] - J[1, 2], J[0, 2] - J[2, 0], J[1, 0] - J[0, 1]])


def cartesian_operators(fld: AxisymField, x, h: float) -> dict[str, np.ndarray]:
    """Centred-difference evaluation in Cartesian coordinates, rotated to the cylindrical frame."""
    x = np.asarray(x, dtype=float)
    Q = _frame(x)
    u0, B0, _ = fld.cartesian(x)
    Ju = np.zeros((3, 3))
    JB = np.zeros((3, 3))
    JW = np.zeros((3, 3))
    gp = np.zeros(3)
    lap = -6.0 * u0
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        up, Bp, pp = fld.cartesian(x + e)
        um, Bm, pm = fld.cartesian(x - e)
        Ju[:, j] = (up - um) / (2 * h)
        JB[:, j] = (Bp - Bm) / (2 * h)
        JW[:, j] = (np.cross(up, Bp) - np.cross(um, Bm)) / (2 * h)
        gp[j] = (pp - pm) / (2 * h)
        lap = lap + up + um
    lap = lap / (h * h)
    curlB = _curl(JB)
    return {
        "grau": Q @ Ju @ Q.T,
        "ugrau": Q @ (Ju @ u0),
        "grap": Q @ gp,
        "divu": np.array([np.trace(Ju)]),
        "lapu": Q @ lap,
        "curlB": Q @ curlB,
        "curlBB": Q @ np.cross(curlB, B0),
        "UB": Q @ np.cross(u0, B0),
        "curl_uB": Q @ _curl(JW),
    }


def cartesian_crosscheck(fld: AxisymField, point, h: float) -> dict[str, float]:
    """Max-abs discrepancy per operator between FD and cylindrical formulas."""
    point = np.asarray(point, dtype=float)
    r = math.hypot(point[0], point[1])
    if not r > 10 * h:
        raise CrosscheckError(f"point at r={r:g} is within 10h={10 * h:g} of the axis")
    cyl = cylindrical_operators(fld, r, float(point[2]))
    fd = cartesian_operators(fld, point, h)
    return {k: float(np.max(np.abs(cyl[k] - fd[k]))) for k in OPERATORS}


@dataclass
class OperatorConvergence:
    name: str
    hs: tuple[float, ...]
    discrepancy: list[float]
    orders: list[float]
    scale: float
    exact: bool
    passed: bool


def convergence_study(fld: AxisymField, points, hs=(1e-2, 5e-3, 2.5e-3), min_order: float = 1.9) -> dict[str, OperatorConvergence]:
    """Worst-point discrepancy per operator on an h ladder, with observed orders.

    Operators with no derivatives (u x B) only involve a change of basis; they
    pass when the discrepancy stays at round-off relative to the field scale.
    """
    disc = {k: [] for k in OPERATORS}
    scale = {k: 0.0 for k in OPERATORS}
    for h in hs:
        worst = {k: 0.0 for k in OPERATORS}
        for x in points:
            d = cartesian_crosscheck(fld, x, h)
            for k in OPERATORS:
                worst[k] = max(worst[k], d[k])
        for k in OPERATORS:
            disc[k].append(worst[k])
    for x in points:
        r = math.hypot(x[0], x[1])
        ops = cylindrical_operators(fld, r, float(x[2]))
        for k in OPERATORS:
            scale[k] = max(scale[k], float(np.max(np.abs(ops[k]))))
    out = {}
    for k in OPERATORS:
        d = disc[k]
        exact = all(v <= 1e-13 * max(scale[k], 1.0) for v in d)
        orders = [math.log2(d[i] / d[i + 1]) if d[i + 1] > 0 and d[i] > 0 else math.inf for i in range(len(d) - 1)]
        # a mean ratio over the ladder; hs are assumed to halve
        steps = [math.log(hs[i] / hs[i + 1], 2) for i in range(len(hs) - 1)]
        orders = [o / s if math.isfinite(o) else o for o, s in zip(orders, steps)]
        passed = exact or all(o >= min_order for o in orders)
        out[k] = OperatorConvergence(k, tuple(hs), d, orders, scale[k], exact, passed)
    return out
