"""Command-line entry point: strict TOML configs, scenario dispatch, reports.

Subcommands::

    mhdblowup simulate CONFIG
    mhdblowup ode-sweep CONFIG
    mhdblowup verify {operators,testfn,all} [CONFIG]
    mhdblowup report DIR

Exit codes: 0 all checks pass, 1 a verification failed, 2 configuration
error, 3 runtime or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import platform
import re
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from . import __version__
from . import diagnostics as diag
from . import odelab, testfn
from .crosscheck import OPERATORS, REQUIRED_OPERATORS, convergence_study, random_field, random_points
from .model import EosParams
from .solver import Grid2D, InitialDataSpec, Numerics

log = logging.getLogger("mhdblowup")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3
MODES = ("simulate", "ode-sweep", "verify-operators", "verify-testfn", "verify-all")


class ConfigError(ValueError):
    def __init__(self, message: str, key: str = "", line: int | None = None):
        self.key = key
        self.line = line
        where = f"{key}: " if key else ""
        at = f" (line {line})" if line else ""
        super().__init__(f"{where}{message}{at}")


# ------------------------------------------------------------------ schema
#
# Each entry maps a key to (type, default).  A default of REQUIRED marks a
# mode-specific required key; None means "optional, no value".

REQUIRED = object()
FLOAT_LIST = "float-list"

_EOS = {"gamma": (float, 2.0), "S_bar": (float, 0.0), "mu": (float, 1.0), "A": (float, None)}
_GRID = {"nr": (int, 64), "nz": (int, 128), "r_max": (float, 3.2), "z_half": (float, 3.2)}
_INITIAL = {
    "epsilon": (float, REQUIRED),
    "profile": (str, "cos2"),
    "a_rho": (float, 1.0),
    "a_ur": (float, 1.0),
    "a_uz": (float, 1.0),
    "a_S": (float, 1.0),
    "a_B": (float, 1.0),
    "support_radius": (float, 0.25),
}
_NUMERICS = {
    "cfl": (float, 0.4),
    "t_end": (float, REQUIRED),
    "reconstruction": (str, "first"),
    "integrator": (str, "euler"),
}
_TOLERANCES = {
    "mass": (float, 1e-10),
    "btheta": (float, 1e-10),
    "entropy": (float, 1e-8),
    "pressure": (float, 1e-10),
    "dXY_order": (float, 1.9),
    "dY1": (float, None),
}
_DIAGNOSTICS = {"cadence": (int, 1), "tolerances": _TOLERANCES}
_OUTPUT = {"directory": (str, "out"), "snapshot_times": (FLOAT_LIST, [])}
_ODE = {
    "system": (str, REQUIRED),
    "epsilons": (FLOAT_LIST, REQUIRED),
    "C": (float, 1.0),
    "n": (int, 3),
    "R0": (float, 1.0),
    "X0": (float, 1.0),
    "Y0": (float, 0.0),
    "gamma": (float, 1.5),
    "lambda": (float, 1.0),
    "alpha": (float, 1.0),
    "beta": (float, None),
    "I0p": (float, 0.0),
    "damping": (float, 1.0),
    "K": (float, 1.0),
    "threshold": (float, 1e12),
    "threshold_low": (float, 1e6),
    "rtol": (float, 1e-10),
    "horizon": (float, 1e60),
    "max_steps": (int, 200_000),
}
_VERIFY = {"n_fields": (int, 5), "n_points": (int, 20), "hs": (FLOAT_LIST, [1e-2, 5e-3, 2.5e-3]), "n_samples": (int, 1000)}

_TOP = {"mode": (str, None), "seed": (int, 0)}
SECTIONS = {
    "simulate": {"eos": _EOS, "grid": _GRID, "initial": _INITIAL, "numerics": _NUMERICS, "diagnostics": _DIAGNOSTICS, "output": _OUTPUT},
    "ode-sweep": {"ode": _ODE, "output": _OUTPUT},
    "verify": {"verify": _VERIFY, "output": _OUTPUT},
}


def _schema_for(mode: str) -> dict:
    key = "verify" if mode.startswith("verify") else mode
    return SECTIONS[key]


def _find_line(text: str, path: str) -> int | None:
    """Best-effort line number of a dotted key path in TOML source."""
    parts = path.split(".")
    table, key = parts[:-1], parts[-1]
    current: list[str] = []
    header = re.compile(r"^\s*\[\s*([A-Za-z0-9_.\- ]+?)\s*\]\s*(#.*)?$")
    assign = re.compile(r"^\s*([A-Za-z0-9_.\-\"']+)\s*=")
    for no, line in enumerate(text.splitlines(), 1):
        m = header.match(line)
        if m:
            current = [s.strip() for s in m.group(1).split(".")]
            if current == parts:
                return no
            continue
        m = assign.match(line)
        if m:
            k = [s.strip().strip("\"'") for s in m.group(1).split(".")]
            if current + k == table + [key] or current + k[:1] == table + [key]:
                return no
    return None


def _coerce(value: Any, typ, path: str, text: str):
    line = _find_line(text, path)
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"expected a number, got {type(value).__name__}", path, line)
        return float(value)
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"expected an integer, got {type(value).__name__}", path, line)
        return int(value)
    if typ is str:
        if not isinstance(value, str):
            raise ConfigError(f"expected a string, got {type(value).__name__}", path, line)
        return value
    if typ == FLOAT_LIST:
        if not isinstance(value, list) or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value):
            raise ConfigError("expected a list of numbers", path, line)
        return [float(v) for v in value]
    raise AssertionError(typ)


def _resolve(data: dict, schema: dict, prefix: str, text: str) -> dict:
    out = {}
    for k in data:
        if k not in schema:
            path = f"{prefix}{k}"
            raise ConfigError(f"unknown key (allowed: {', '.join(sorted(schema))})", path, _find_line(text, path))
    for k, spec in schema.items():
        path = f"{prefix}{k}"
        if isinstance(spec, dict):
            sub = data.get(k, {})
            if not isinstance(sub, dict):
                raise ConfigError("expected a table", path, _find_line(text, path))
            out[k] = _resolve(sub, spec, path + ".", text)
            continue
        typ, default = spec
        if k in data:
            out[k] = _coerce(data[k], typ, path, text)
        elif default is REQUIRED:
            raise ConfigError("missing required key", path)
        else:
            out[k] = default
    return out


@dataclass
class OdeSweepConfig:
    system: str
    epsilons: list[float]
    blowup: odelab.BlowupSystemParams | None
    orlicz: odelab.OrliczParams | None
    controls: odelab.Controls
    threshold_low: float


@dataclass
class VerifyConfig:
    n_fields: int = 5
    n_points: int = 20
    hs: tuple[float, ...] = (1e-2, 5e-3, 2.5e-3)
    n_samples: int = 1000


@dataclass
class RunConfig:
    mode: str
    seed: int = 0
    resolved: dict = field(default_factory=dict)
    eos: EosParams | None = None
    grid: Grid2D | None = None
    initial: InitialDataSpec | None = None
    numerics: Numerics | None = None
    t_end: float = 0.0
    cadence: int = 1
    tolerances: diag.Tolerances = field(default_factory=diag.Tolerances)
    output_dir: Path = Path("out")
    snapshot_times: tuple[float, ...] = ()
    ode: OdeSweepConfig | None = None
    verify: VerifyConfig = field(default_factory=VerifyConfig)

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.resolved, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()


def _build(mode: str, res: dict, text: str) -> RunConfig:
    cfg = RunConfig(mode=mode, seed=res["seed"], resolved=res)
    cfg.output_dir = Path(res["output"]["directory"])
    cfg.snapshot_times = tuple(res["output"]["snapshot_times"])

    def wrap(path, fn):
        try:
            return fn()
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc), path, _find_line(text, path)) from None

    if mode == "simulate":
        e = res["eos"]
        if not e["gamma"] > 1:
            raise ConfigError(f"gamma must satisfy gamma > 1, got {e['gamma']}", "eos.gamma", _find_line(text, "eos.gamma"))
        if not e["mu"] > 0:
            raise ConfigError("mu must be > 0", "eos.mu", _find_line(text, "eos.mu"))
        if e["A"] is None:
            cfg.eos = wrap("eos", lambda: EosParams.normalized(e["gamma"], e["S_bar"], e["mu"]))
        else:
            cfg.eos = wrap("eos.A", lambda: EosParams(gamma=e["gamma"], S_bar=e["S_bar"], A=e["A"], mu=e["mu"]))
        g = res["grid"]
        cfg.grid = wrap("grid", lambda: Grid2D(g["nr"], g["nz"], g["r_max"], g["z_half"]))
        cfg.initial = InitialDataSpec(**res["initial"])
        wrap("initial", cfg.initial.validate)
        n = res["numerics"]
        cfg.numerics = Numerics(n["cfl"], n["reconstruction"], n["integrator"])
        wrap("numerics", cfg.numerics.validate)
        cfg.t_end = n["t_end"]
        if not cfg.t_end > 0:
            raise ConfigError("t_end must be > 0", "numerics.t_end", _find_line(text, "numerics.t_end"))
        try:
            cfg.grid.check_containment(cfg.t_end)
        except ValueError as exc:
            raise ConfigError(f"finite-speed containment: {exc}", "grid.r_max", _find_line(text, "grid.r_max")) from None
        d = res["diagnostics"]
        if d["cadence"] < 1:
            raise ConfigError("cadence must be >= 1", "diagnostics.cadence", _find_line(text, "diagnostics.cadence"))
        cfg.cadence = d["cadence"]
        cfg.tolerances = diag.Tolerances(**d["tolerances"])
    elif mode == "ode-sweep":
        o = res["ode"]
        controls = odelab.Controls(rtol=o["rtol"], threshold=o["threshold"], horizon=o["horizon"], max_steps=o["max_steps"])
        bp = op = None
        if o["system"] == "blowup":
            bp = wrap("ode", lambda: odelab.BlowupSystemParams(C=o["C"], n=o["n"], R0=o["R0"], X0=o["X0"], Y0=o["Y0"]))
        elif o["system"] == "orlicz":
            beta = o["beta"] if o["beta"] is not None else o["gamma"] - 1.0
            op = wrap(
                "ode",
                lambda: odelab.OrliczParams(
                    gamma=o["gamma"], lam=o["lambda"], alpha=o["alpha"], beta=beta, I0=min(o["epsilons"] or [1.0]),
                    I0p=o["I0p"], damping=o["damping"], K=o["K"],
                ),
            )
        else:
            raise ConfigError("system must be 'blowup' or 'orlicz'", "ode.system", _find_line(text, "ode.system"))
        try:
            odelab.check_epsilons(o["epsilons"])
        except odelab.ConfigError as exc:
            raise ConfigError(str(exc), "ode.epsilons", _find_line(text, "ode.epsilons")) from None
        cfg.ode = OdeSweepConfig(o["system"], o["epsilons"], bp, op, controls, o["threshold_low"])
    else:
        v = res["verify"]
        if v["n_fields"] < 1 or v["n_points"] < 1 or len(v["hs"]) < 2:
            raise ConfigError("need n_fields >= 1, n_points >= 1 and at least two step sizes", "verify")
        cfg.verify = VerifyConfig(v["n_fields"], v["n_points"], tuple(v["hs"]), v["n_samples"])
    return cfg


def parse_config_text(text: str, mode: str | None = None) -> RunConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"TOML syntax error: {exc}", "", int(m.group(1)) if m else None) from None
    file_mode = data.get("mode")
    if file_mode is not None and not isinstance(file_mode, str):
        raise ConfigError("expected a string", "mode", _find_line(text, "mode"))
    if mode is None:
        mode = file_mode
    if mode is None:
        raise ConfigError("missing required key", "mode")
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r} (choose from {', '.join(MODES)})", "mode", _find_line(text, "mode"))
    if file_mode is not None and file_mode != mode and not (mode.startswith("verify") and file_mode.startswith("verify")):
        raise ConfigError(f"config is for mode {file_mode!r}, not {mode!r}", "mode", _find_line(text, "mode"))
    schema = dict(_TOP)
    schema.update(_schema_for(mode))
    res = _resolve(data, schema, "", text)
    res["mode"] = mode
    return _build(mode, res, text)


def parse_config(path, mode: str | None = None) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config_text(text, mode)


# --------------------------------------------------------------- scenarios

def _write_checks(path: Path, checks: list[diag.CheckResult]) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["family", "name", "worst_margin", "tolerance", "verdict", "note"])
        for c in checks:
            wr.writerow([c.family, c.name, repr(float(c.worst_margin)), repr(float(c.tolerance)), c.verdict, c.note])


def _read_checks(path: Path) -> list[diag.CheckResult]:
    with open(path, newline="") as fh:
        return [
            diag.CheckResult(r["family"], r["name"], float(r["worst_margin"]), float(r["tolerance"]), r["verdict"], r["note"])
            for r in csv.DictReader(fh)
        ]


def _versions() -> dict[str, str]:
    import threadpoolctl

    return {
        "mhdblowup": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "threadpoolctl": threadpoolctl.__version__,
    }


def _write_manifest(cfg: RunConfig, outdir: Path, threads: int, extra: dict | None = None) -> None:
    lines = [f"mode = {cfg.mode}", f"config_sha256 = {cfg.config_hash}", f"seed = {cfg.seed}", f"threads = {threads}"]
    lines += [f"version.{k} = {v}" for k, v in _versions().items()]
    for k, v in (extra or {}).items():
        lines.append(f"{k} = {v}")
    (outdir / "manifest.txt").write_text("\n".join(lines) + "\n")
    (outdir / "config_resolved.json").write_text(json.dumps(cfg.resolved, sort_keys=True, indent=2, default=str) + "\n")


def run_simulate(cfg: RunConfig, outdir: Path) -> tuple[list[diag.CheckResult], dict]:
    from .simulate import SimulationConfig, run

    sc = SimulationConfig(
        eos=cfg.eos, grid=cfg.grid, initial=cfg.initial, numerics=cfg.numerics, t_end=cfg.t_end,
        cadence=cfg.cadence, snapshot_times=cfg.snapshot_times, output_dir=outdir,
    )
    res = run(sc)
    checks = diag.series_checks(res.series, cfg.eos, cfg.grid.h, cfg.tolerances)
    ok = res.status == "ok"
    checks.insert(0, diag.CheckResult("run", "run_status", 0.0 if ok else -1.0, 0.0, diag.PASS if ok else diag.FAIL, res.status))
    extra = {"status": res.status, "steps": res.steps, "dt": repr(res.dt)}
    for k in ("blowup_functional", "positive_functional"):
        if k in res.initial_meta:
            extra[k] = res.initial_meta[k]
    return checks, extra


#: acceptance windows for the fitted lifespan laws
def _scaling_check(fit: odelab.FitReport, system: str, n: int | None, lam: float | None) -> diag.CheckResult:
    if system == "blowup" and n in (1, 2):
        lo, hi = (-1.15, -0.85) if n == 1 else (-2.2, -1.8)
        margin = min(fit.slope - lo, hi - fit.slope)
        return diag.CheckResult("scalings", f"lifespan_n{n}", margin, 0.0, diag._verdict(margin, 0.0), fit.line())
    need = 0.99 if system == "blowup" else 0.98
    margin = fit.r2 - need
    name = f"lifespan_n{n}" if system == "blowup" else f"lifespan_orlicz_lambda{lam:g}"
    return diag.CheckResult("scalings", name, margin, 0.0, diag._verdict(margin, 0.0), fit.line())


def run_ode_sweep(cfg: RunConfig, outdir: Path) -> tuple[list[diag.CheckResult], dict]:
    o = cfg.ode
    eps = sorted(o.epsilons)

    def one(e: float, controls: odelab.Controls) -> odelab.OdeRun:
        if o.system == "blowup":
            return odelab.integrate_blowup_system(o.blowup, e, controls)
        return odelab.integrate_orlicz_system(replace(o.orlicz, I0=e), controls)

    runs = [one(e, o.controls) for e in eps]
    lows = [one(e, replace(o.controls, threshold=o.threshold_low)) for e in eps]
    with open(outdir / "sweep.csv", "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["epsilon", "blowup_time", "terminated_reason"])
        for e, r in zip(eps, runs):
            wr.writerow([repr(e), repr(r.blowup_time) if r.blowup_time is not None else "none", r.terminated_reason])
    worst_rel = 0.0
    with open(outdir / "threshold_sensitivity.csv", "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["epsilon", "blowup_time_low", "blowup_time_high", "relative_change"])
        for e, a, b in zip(eps, lows, runs):
            if b.blowup_time is None:
                continue
            rel = abs(a.blowup_time - b.blowup_time) / b.blowup_time if a.blowup_time is not None else math.inf
            worst_rel = max(worst_rel, rel)
            wr.writerow([repr(e), repr(a.blowup_time), repr(b.blowup_time), repr(rel)])
    checks = [
        diag.CheckResult(
            "scalings", "threshold_insensitivity", 1e-3 - worst_rel, 0.0, diag._verdict(1e-3 - worst_rel, 0.0),
            f"max relative change {worst_rel:.3e} between thresholds {o.threshold_low:g} and {o.controls.threshold:g}",
        )
    ]
    T = [r.blowup_time for r in runs]
    if all(t is not None for t in T):
        mono = min(T[i] - T[i + 1] for i in range(len(T) - 1))
        checks.append(diag.CheckResult("scalings", "monotone_lifespan", mono, 0.0, diag._verdict(mono, 0.0), "T non-increasing in eps"))
    try:
        fit = odelab.lifespan_sweep_fit(o.system, eps, o.blowup, o.orlicz, o.controls)
    except odelab.ConfigError as exc:
        checks.append(diag.CheckResult("scalings", "lifespan_fit", math.nan, 0.0, diag.FAIL, str(exc)))
        return checks, {}
    (outdir / "fit.txt").write_text(fit.line() + "\n")
    n = o.blowup.n if o.blowup else None
    lam = o.orlicz.lam if o.orlicz else None
    checks.append(_scaling_check(fit, o.system, n, lam))
    log.info(fit.line())
    return checks, {}


def verify_testfn(seed: int = 0, n_samples: int = 1000) -> list[diag.CheckResult]:
    out = []
    worst = 0.0
    for R in (0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0):
        x = np.array([0.0, 0.0, R])
        exact = testfn.eval_profile(R).F
        worst = max(worst, abs(testfn.quad_F_oracle(x) - exact) / exact)
    out.append(diag.CheckResult("testfn", "closed_vs_quadrature", 1e-10 - worst, 0.0, diag._verdict(1e-10 - worst, 0.0), f"max rel {worst:.2e}"))
    rng = np.random.default_rng(seed)
    R = np.sort(rng.uniform(0.0, 20.0, n_samples))
    F, F1, F2 = testfn.profile_arrays(R)
    with np.errstate(divide="ignore", invalid="ignore"):
        lap = np.where(R > 0, F2 + 2 * F1 / np.where(R > 0, R, 1.0) - F, 3 * F2 - F)
    res = float(np.max(np.abs(lap) / np.maximum(1.0, F)))
    out.append(diag.CheckResult("testfn", "radial_ode_residual", 1e-9 - res, 0.0, diag._verdict(1e-9 - res, 0.0), f"max {res:.2e}"))
    pos = float(min(F.min(), F2.min()))
    out.append(diag.CheckResult("testfn", "positivity", pos, 0.0, diag._verdict(pos, 0.0), "min of F and F''"))
    lo, hi = testfn.asymptotic_bracket()
    ok = lo > 0 and hi < math.inf
    out.append(diag.CheckResult("testfn", "asymptotic_bracket", lo, 0.0, diag.PASS if ok else diag.FAIL, f"[{lo:.4f}, {hi:.4f}]"))
    return out


def verify_operators(seed: int = 0, n_fields: int = 5, n_points: int = 20, hs=(1e-2, 5e-3, 2.5e-3)) -> list[diag.CheckResult]:
    rng = np.random.default_rng(seed)
    worst = {k: math.inf for k in OPERATORS}
    exact = {k: True for k in OPERATORS}
    for _ in range(n_fields):
        fld = random_field(rng)
        pts = random_points(rng, n_points)
        for k, c in convergence_study(fld, pts, hs).items():
            exact[k] &= c.exact
            if not c.exact:
                worst[k] = min(worst[k], min(c.orders))
    out = []
    for k in OPERATORS:
        if exact[k]:
            out.append(diag.CheckResult("operators", k, math.inf, 0.0, diag.PASS, "agrees to round-off"))
            continue
        margin = worst[k] - 1.9
        verdict = diag._verdict(margin, 0.0) if k in REQUIRED_OPERATORS else diag.PASS
        note = f"min observed order {worst[k]:.3f}" + ("" if k in REQUIRED_OPERATORS else " (informational)")
        out.append(diag.CheckResult("operators", k, margin, 0.0, verdict, note))
    return out


def run_scenario(cfg: RunConfig, outdir: Path | None = None, threads: int = 1, quiet: bool = False) -> int:
    """Dispatch one scenario, write its artifacts and return the exit status."""
    outdir = Path(outdir or cfg.output_dir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        extra: dict = {}
        if cfg.mode == "simulate":
            checks, extra = run_simulate(cfg, outdir)
        elif cfg.mode == "ode-sweep":
            checks, extra = run_ode_sweep(cfg, outdir)
        else:
            checks = []
            if cfg.mode in ("verify-testfn", "verify-all"):
                checks += verify_testfn(cfg.seed, cfg.verify.n_samples)
            if cfg.mode in ("verify-operators", "verify-all"):
                v = cfg.verify
                checks += verify_operators(cfg.seed, v.n_fields, v.n_points, v.hs)
        _write_checks(outdir / "checks.csv", checks)
        _write_manifest(cfg, outdir, threads, extra)
        text = format_report(checks)
        (outdir / "report.txt").write_text(text)
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_RUNTIME
    if not quiet:
        print(text, end="")
    return EXIT_OK if all(c.verdict != diag.FAIL for c in checks) else EXIT_FAIL


# ------------------------------------------------------------------ report

def format_report(checks: list[diag.CheckResult]) -> str:
    """One table per check family with verdicts and worst margins."""
    lines = []
    families: dict[str, list[diag.CheckResult]] = {}
    for c in checks:
        families.setdefault(c.family, []).append(c)
    for fam, rows in families.items():
        lines.append(f"== {fam} ==")
        lines.append(f"{'check':<28s} {'verdict':<15s} {'worst margin':>14s} {'tolerance':>11s}  note")
        for c in rows:
            lines.append(f"{c.name:<28s} {c.verdict:<15s} {c.worst_margin:>14.6e} {c.tolerance:>11.3e}  {c.note}")
        lines.append("")
    n_fail = sum(c.verdict == diag.FAIL for c in checks)
    lines.append(f"overall: {'PASS' if n_fail == 0 else f'FAIL ({n_fail} failed)'}")
    return "\n".join(lines) + "\n"


def export_report(directory) -> tuple[str, list[diag.CheckResult]]:
    """Consolidate a run directory into a report.

    Simulation checks are recomputed from ``diagnostics_full.csv`` so that
    the report reflects the data on disk; other modes read ``checks.csv``.
    """
    d = Path(directory)
    cfg_path = d / "config_resolved.json"
    if not cfg_path.exists():
        raise FileNotFoundError(f"missing artifact {cfg_path}")
    resolved = json.loads(cfg_path.read_text())
    if resolved.get("mode") == "simulate":
        full = d / "diagnostics_full.csv"
        if not full.exists():
            raise FileNotFoundError(f"missing artifact {full}")
        cfg = _build("simulate", resolved, "")
        series = diag.DiagnosticsSeries.read_csv(full)
        checks = diag.series_checks(series, cfg.eos, cfg.grid.h, cfg.tolerances)
        man = d / "manifest.txt"
        if man.exists():
            m = re.search(r"^status = (.+)$", man.read_text(), re.M)
            if m:
                ok = m.group(1) == "ok"
                checks.insert(0, diag.CheckResult("run", "run_status", 0.0 if ok else -1.0, 0.0, diag.PASS if ok else diag.FAIL, m.group(1)))
    else:
        path = d / "checks.csv"
        if not path.exists():
            raise FileNotFoundError(f"missing artifact {path}")
        checks = _read_checks(path)
    return format_report(checks), checks


# -------------------------------------------------------------------- main

HELP_DEFAULTS = """\
config keys and defaults (TOML; unknown keys are rejected):
  top level     mode (from the subcommand), seed = 0
  [eos]         gamma = 2.0, S_bar = 0.0, mu = 1.0, A = 1/(gamma e^S_bar) unless given
  [grid]        nr = 64, nz = 128, r_max = 3.2, z_half = 3.2
  [initial]     epsilon (required), profile = "cos2", a_rho = a_ur = a_uz = a_S = a_B = 1.0,
                support_radius = 0.25
  [numerics]    t_end (required), cfl = 0.4, reconstruction = "first" | "muscl",
                integrator = "euler" | "heun"
  [diagnostics] cadence = 1
  [diagnostics.tolerances] mass = 1e-10, btheta = 1e-10, entropy = 1e-8, pressure = 1e-10,
                dXY_order = 1.9, dY1 = twice the largest identity residual unless given
  [output]      directory = "out", snapshot_times = []
  [ode]         system (required: "blowup" | "orlicz"), epsilons (required),
                C = 1, n = 3, R0 = 1, X0 = 1, Y0 = 0, gamma = 1.5, lambda = 1, alpha = 1,
                beta = gamma - 1, I0p = 0, damping = 1, K = 1, threshold = 1e12,
                threshold_low = 1e6, rtol = 1e-10, horizon = 1e60, max_steps = 200000
  [verify]      n_fields = 5, n_points = 20, hs = [1e-2, 5e-3, 2.5e-3], n_samples = 1000
exit codes: 0 pass, 1 verification failure, 2 configuration error, 3 runtime/I-O error
"""


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=1, help="BLAS/OpenMP thread cap (default 1)")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")
    common.add_argument("--output", type=Path, default=None, help="output directory (overrides [output].directory)")
    common.add_argument("--quiet", action="store_true", help="suppress the report on stdout")
    p = argparse.ArgumentParser(
        prog="mhdblowup", description=__doc__.split("\n")[0], epilog=HELP_DEFAULTS,
        formatter_class=argparse.RawDescriptionHelpFormatter, parents=[common],
    )
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("simulate", parents=[common], help="run the axisymmetric solver")
    s.add_argument("config", type=Path)
    s = sub.add_parser("ode-sweep", parents=[common], help="lifespan sweep of a comparison ODE")
    s.add_argument("config", type=Path)
    s = sub.add_parser("verify", parents=[common], help="run verification suites")
    s.add_argument("suite", choices=("operators", "testfn", "all"))
    s.add_argument("config", type=Path, nargs="?")
    s = sub.add_parser("report", parents=[common], help="summarise a run directory")
    s.add_argument("directory", type=Path)
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    from threadpoolctl import threadpool_limits

    with threadpool_limits(limits=args.threads):
        try:
            if args.command == "report":
                text, checks = export_report(args.directory)
                if not args.quiet:
                    print(text, end="")
                return EXIT_OK if all(c.verdict != diag.FAIL for c in checks) else EXIT_FAIL
            mode = args.command if args.command != "verify" else f"verify-{args.suite}"
            if args.command == "verify" and args.config is None:
                cfg = parse_config_text("", mode)
            else:
                cfg = parse_config(args.config, mode)
            if args.seed is not None:
                cfg.seed = args.seed
                cfg.resolved["seed"] = args.seed
            return run_scenario(cfg, args.output, args.threads, args.quiet)
        except ConfigError as exc:
            print(f"configuration error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except FileNotFoundError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_RUNTIME
        except (OSError, ArithmeticError, RuntimeError, ValueError) as exc:
            print(f"runtime error ({type(exc).__module__}): {exc}", file=sys.stderr)
            return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
