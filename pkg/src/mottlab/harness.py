"""Batch harness: config files, result persistence, plot tables, commands.

The experiment configuration is a flat UTF-8 key-value document with
dotted sections::

    # lines starting with '#' are comments
    epsilon = 0.1
    a1_over_gamma = 10
    a2_over_a1 = 1.55
    t_over_tau2 = 1.0967741935483871
    lambda0 = 0.01
    potential.width = 1.0
    qmc.points = 65536
    scan.grid = 0.3, 0.25, 0.2, 0.15
    eval.x = 0.16, -0.46, 0.15

Unknown keys are rejected; type errors name the offending key.  Results
are written as a CSV with a fixed column order plus a lossless JSON
mirror.  The CSV is the canonical reproducible artifact: identical config
and seed give byte-identical CSV bytes, which is why its runtime_ms column
is a fixed placeholder (measured runtimes live in the JSON mirror).
"""

from __future__ import annotations

import dataclasses
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, PhysicalConfig, PotentialSpec, build_groups
from .oscillatory import QuadraturePlan, SphereDecomposition
from .probability import RunRecord, ScanSpec, fit_power_law

__all__ = [
    "ExperimentConfig",
    "ResultSet",
    "PlotData",
    "parse_config",
    "parse_config_file",
    "write_records",
    "read_records",
    "emit_plot_data",
    "run_command",
    "COMMANDS",
    "EXIT_OK",
    "EXIT_CONFIG",
    "EXIT_NUMERICAL",
    "EXIT_VERIFY",
]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_VERIFY = 4

CSV_COLUMNS = (
    "variable",
    "value",
    "estimate",
    "std_error",
    "n_inner",
    "n_outer",
    "seed",
    "runtime_ms",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Physical configuration plus quadrature, scan and probe settings."""

    physical: PhysicalConfig
    plan: QuadraturePlan
    theta_bar: float | None
    scan_variable: str
    scan_grid: tuple
    scan_outer_samples: int
    outer_samples: int
    x_radius: float
    y_radius: float
    eval_x: tuple
    eval_y1: tuple
    eval_y2: tuple
    eval_eta1: float
    eval_eta2: float
    regime_warnings: tuple = ()

    def decomposition(self) -> SphereDecomposition:
        if self.theta_bar is not None:
            return SphereDecomposition(self.theta_bar)
        return SphereDecomposition.from_epsilon(self.physical.epsilon)

    def raw(self) -> dict:
        d = dataclasses.asdict(self.physical)
        d["potential"] = dataclasses.asdict(self.physical.potential)
        d["qmc"] = dataclasses.asdict(self.plan)
        d.update(
            theta_bar=self.theta_bar,
            scan_variable=self.scan_variable,
            scan_grid=list(self.scan_grid),
            scan_outer_samples=self.scan_outer_samples,
            outer_samples=self.outer_samples,
            x_radius=self.x_radius,
            y_radius=self.y_radius,
            eval_x=list(self.eval_x),
            eval_y1=list(self.eval_y1),
            eval_y2=list(self.eval_y2),
            eval_eta1=self.eval_eta1,
            eval_eta2=self.eval_eta2,
            regime_warnings=list(self.regime_warnings),
        )
        return d


# key -> (type tag, default); None default means required
_SCHEMA: dict[str, tuple[str, object]] = {
    "epsilon": ("float", None),
    "mass_ratio": ("float", "epsilon"),  # defaults to epsilon (regime scale)
    "a1_over_gamma": ("float", None),
    "a2_over_a1": ("float", None),
    "chi": ("float", 0.0),
    "chi_bar": ("float", 0.0),
    "t_over_tau2": ("float", None),
    "lambda0": ("float", None),
    "potential.kind": ("str", "gaussian"),
    "potential.amplitude": ("float", 1.0),
    "potential.width": ("float", 1.0),
    "qmc.points": ("int", 65536),
    "qmc.replicates": ("int", 8),
    "qmc.seed": ("int", 1),
    "qmc.radius": ("float", 7.0),
    "qmc.sequence": ("str", "sobol"),
    "cap.theta_bar": ("float", float("nan")),  # nan sentinel: epsilon**0.5
    "scan.variable": ("str", "epsilon"),
    "scan.grid": ("floatlist", (0.3, 0.25, 0.2, 0.15)),
    "scan.outer_samples": ("int", 1),
    "outer.samples": ("int", 64),
    "outer.x_radius": ("float", 6.0),
    "outer.y_radius": ("float", 4.0),
    "eval.x": ("vec3", (0.16, -0.46, 0.15)),
    "eval.y1": ("vec3", (-0.39, 0.33, -0.04)),
    "eval.y2": ("vec3", (-0.02, -0.02, -0.3)),
    "eval.eta1": ("float", 0.3),
    "eval.eta2": ("float", -0.1),
}


def _convert(key: str, tag: str, text: str):
    try:
        if tag == "float":
            return float(text)
        if tag == "int":
            v = float(text)
            if v != int(v):
                raise ValueError("not an integer")
            return int(v)
        if tag == "str":
            return text
        if tag == "vec3":
            parts = [p for p in text.replace(",", " ").split() if p]
            if len(parts) != 3:
                raise ValueError(f"expected 3 components, got {len(parts)}")
            return tuple(float(p) for p in parts)
        if tag == "floatlist":
            parts = [p for p in text.replace(",", " ").split() if p]
            if not parts:
                raise ValueError("empty list")
            return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {text!r} as {tag} ({exc})") from None
    raise AssertionError(tag)


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a configuration document.

    Raises ConfigError (missing key, unknown key, type mismatch, hard
    invariant violation).  Regime violations are collected on the returned
    config, never fatal.
    """
    values: dict[str, object] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw_line!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _SCHEMA:
            raise ConfigError(f"unknown key {key!r} (line {lineno})")
        if key in values:
            raise ConfigError(f"duplicate key {key!r} (line {lineno})")
        values[key] = _convert(key, _SCHEMA[key][0], val)

    for key, (_, default) in _SCHEMA.items():
        if key in values:
            continue
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        values[key] = default
    if values["mass_ratio"] == "epsilon":
        values["mass_ratio"] = values["epsilon"]

    try:
        pot = PotentialSpec(
            kind=values["potential.kind"],
            amplitude=values["potential.amplitude"],
            width=values["potential.width"],
        )
        physical = PhysicalConfig(
            epsilon=values["epsilon"],
            mass_ratio=values["mass_ratio"],
            a1_over_gamma=values["a1_over_gamma"],
            a2_over_a1=values["a2_over_a1"],
            chi=values["chi"],
            chi_bar=values["chi_bar"],
            t_over_tau2=values["t_over_tau2"],
            lambda0=values["lambda0"],
            potential=pot,
        )
        plan = QuadraturePlan(
            point_count=values["qmc.points"],
            seed=values["qmc.seed"],
            truncation_radius=values["qmc.radius"],
            sequence_kind=values["qmc.sequence"],
            replicates=values["qmc.replicates"],
        )
    except (ConfigError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    tb = values["cap.theta_bar"]
    theta_bar = None if (isinstance(tb, float) and math.isnan(tb)) else float(tb)
    if theta_bar is not None and not (0.0 < theta_bar < math.pi / 2.0):
        raise ConfigError("cap.theta_bar must lie in (0, pi/2)")
    if values["scan.variable"] not in ("epsilon", "chi"):
        raise ConfigError("scan.variable must be 'epsilon' or 'chi'")
    return ExperimentConfig(
        physical=physical,
        plan=plan,
        theta_bar=theta_bar,
        scan_variable=values["scan.variable"],
        scan_grid=values["scan.grid"],
        scan_outer_samples=values["scan.outer_samples"],
        outer_samples=values["outer.samples"],
        x_radius=values["outer.x_radius"],
        y_radius=values["outer.y_radius"],
        eval_x=values["eval.x"],
        eval_y1=values["eval.y1"],
        eval_y2=values["eval.y2"],
        eval_eta1=values["eval.eta1"],
        eval_eta2=values["eval.eta2"],
        regime_warnings=tuple(physical.regime_report()),
    )


def parse_config_file(path: str | Path) -> ExperimentConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


@dataclass
class ResultSet:
    """Manifest (config snapshot, version, command) plus the run records."""

    manifest: dict
    records: list[RunRecord] = field(default_factory=list)


def _fmt(x: float) -> str:
    """Locale-independent, 17 significant digits (round-trips doubles)."""
    return format(float(x), ".17g")


def write_records(rs: ResultSet, out_dir: str | Path) -> dict[str, Path]:
    """Persist a result set: canonical CSV, JSON mirror, manifest.

    The CSV is byte-deterministic for identical config and seed; its
    runtime_ms column is written as 0 (measured values are in records.json).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "records.csv"
    lines = [",".join(CSV_COLUMNS)]
    for r in rs.records:
        lines.append(
            ",".join(
                [
                    r.variable,
                    _fmt(r.value),
                    _fmt(r.estimate),
                    _fmt(r.std_error),
                    str(r.n_inner),
                    str(r.n_outer),
                    str(r.seed),
                    "0",
                ]
            )
        )
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    json_path = out / "records.json"
    json_path.write_text(
        json.dumps([dataclasses.asdict(r) for r in rs.records], indent=1, sort_keys=True),
        encoding="utf-8",
    )
    manifest_path = out / "manifest.json"
    manifest_path.write_text(
        json.dumps(rs.manifest, indent=1, sort_keys=True), encoding="utf-8"
    )
    return {"csv": csv_path, "json": json_path, "manifest": manifest_path}


def read_records(out_dir: str | Path) -> ResultSet:
    """Reload a result set losslessly from the JSON mirror."""
    out = Path(out_dir)
    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    raw = json.loads((out / "records.json").read_text(encoding="utf-8"))
    return ResultSet(manifest=manifest, records=[RunRecord(**r) for r in raw])


# ---------------------------------------------------------------------------
# Plot-ready tables
# ---------------------------------------------------------------------------


@dataclass
class PlotData:
    tables: dict
    annotations: dict
    warnings: list


def emit_plot_data(rs: ResultSet) -> PlotData:
    """Tables for the two standard plots, with fitted-slope annotations.

    Epsilon records produce (log value, log estimate) rows; angle records
    produce (chi, estimate) rows.  A slope annotation is attached only when
    at least three records have positive estimates.
    """
    if not rs.records:
        raise ValueError("result set has no records")
    tables: dict = {}
    annotations: dict = {}
    warns: list[str] = []
    eps_records = [r for r in rs.records if r.variable == "epsilon" and not r.error]
    chi_records = [r for r in rs.records if r.variable == "chi" and not r.error]
    if eps_records:
        rows = [
            (math.log(r.value), math.log(r.estimate))
            for r in eps_records
            if r.estimate > 0.0
        ]
        tables["log_epsilon"] = rows
        try:
            slope, intercept, resid = fit_power_law(eps_records)
            annotations["log_epsilon_slope"] = slope
            annotations["log_epsilon_intercept"] = intercept
            annotations["log_epsilon_residual"] = resid
        except ValueError as exc:
            warns.append(f"no slope annotation: {exc}")
    if chi_records:
        tables["chi"] = [(r.value, r.estimate) for r in chi_records]
    return PlotData(tables=tables, annotations=annotations, warnings=warns)


def write_plot_data(pd: PlotData, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, rows in pd.tables.items():
        path = out / f"plot_{name}.csv"
        lines = []
        if name == "log_epsilon" and "log_epsilon_slope" in pd.annotations:
            lines.append(f"# fitted_slope = {_fmt(pd.annotations['log_epsilon_slope'])}")
        lines.append("x,y")
        lines.extend(f"{_fmt(r[0])},{_fmt(r[1])}" for r in rows)
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        written.append(path)
    return written


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

COMMANDS = (
    "verify",
    "critical-point",
    "bounds",
    "stationary-check",
    "scan-epsilon",
    "scan-angle",
    "probability",
)


def _manifest(ecfg: ExperimentConfig, command: str) -> dict:
    return {
        "command": command,
        "config": ecfg.raw(),
        "version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
    }


def run_command(command: str, ecfg: ExperimentConfig, log=print) -> tuple[ResultSet, int]:
    """Execute one named experiment; returns (results, exit code)."""
    from . import verify as verify_mod
    from .oscillatory import integrate_cap, stationary_leading_term
    from .phase import (
        ChartPoint,
        BoundFamily,
        GeometryError,
        chart_gradient,
        critical_point_closed_form,
        critical_point_newton,
        gradient_lower_bound,
        minimize_gradient_norm,
    )
    from .probability import config_at_epsilon, p_direct_sampled, scan

    if command not in COMMANDS:
        raise ValueError(f"unknown command {command!r}")
    cfg = ecfg.physical
    groups = build_groups(cfg, emit_warnings=False)
    for msg in ecfg.regime_warnings:
        log(f"regime warning: {msg}")
    rs = ResultSet(manifest=_manifest(ecfg, command))
    snap = ecfg.raw()

    def record(variable, value, estimate, std_error=0.0, n_inner=0, n_outer=1, error=""):
        rs.records.append(
            RunRecord(
                cfg_snapshot=snap,
                variable=variable,
                value=float(value),
                estimate=float(estimate),
                std_error=float(std_error),
                n_inner=int(n_inner),
                n_outer=int(n_outer),
                seed=ecfg.plan.seed,
                runtime_ms=0,
                error=error,
            )
        )

    if command == "verify":
        checks = verify_mod.run_invariant_suite(log=log)
        failures = [c for c in checks if not c.passed]
        for i, c in enumerate(checks):
            record("invariant", float(i), 1.0 if c.passed else 0.0, error="" if c.passed else c.detail)
        rs.manifest["checks"] = [
            {"name": c.name, "passed": c.passed, "detail": c.detail} for c in checks
        ]
        return rs, (EXIT_OK if not failures else EXIT_VERIFY)

    if command == "critical-point":
        x = np.array(ecfg.eval_x)
        y1 = np.array(ecfg.eval_y1)
        y2 = np.array(ecfg.eval_y2)
        cp = critical_point_closed_form(x, groups, ecfg.eval_eta1, ecfg.eval_eta2, y1, y2)
        theta_bar = ecfg.decomposition().theta_bar
        rng = np.random.default_rng(ecfg.plan.seed)
        start_vec = cp.q0.as_vector() + 0.05 * rng.standard_normal(8)
        start_vec[0:2] = np.clip(start_vec[0:2], -0.5 * math.sin(theta_bar), 0.5 * math.sin(theta_bar))
        try:
            newton = critical_point_newton(
                ChartPoint.from_vector(start_vec), x, groups,
                ecfg.eval_eta1, ecfg.eval_eta2, y1, y2, theta_bar,
            )
        except Exception as exc:  # noqa: BLE001
            log(f"newton failed: {exc}")
            record("newton_distance", cfg.epsilon, 0.0, error=str(exc))
            return rs, EXIT_NUMERICAL
        dist = float(np.max(np.abs(newton.q0.as_vector() - cp.q0.as_vector())))
        gnorm = float(
            np.max(np.abs(chart_gradient(cp.q0, x, groups, ecfg.eval_eta1, ecfg.eval_eta2, y1, y2)))
        )
        log(f"critical point q0 = {np.array2string(cp.q0.as_vector(), precision=12)}")
        log(f"phase value = {cp.theta0:.12g}")
        log(f"|det Hessian| = {cp.abs_det_hessian:.12g}  (a^4 b1^4 = {groups.a**4 * groups.b1**4:.12g})")
        log(f"signature = {cp.signature}")
        log(f"newton agrees with closed form to {dist:.2e}")
        rs.manifest["critical_point"] = {
            "q0": [float(v) for v in cp.q0.as_vector()],
            "theta0": cp.theta0,
            "abs_det_hessian": cp.abs_det_hessian,
            "signature": cp.signature,
        }
        record("gradient_norm_at_q0", cfg.epsilon, gnorm)
        record("newton_distance", cfg.epsilon, dist)
        record("abs_det_hessian", cfg.epsilon, cp.abs_det_hessian)
        return rs, EXIT_OK

    if command == "bounds":
        theta_bar = ecfg.decomposition().theta_bar
        families = [(BoundFamily.FAR_FIRST, None), (BoundFamily.CONE, theta_bar)]
        if cfg.chi > 0.0:
            families.insert(1, (BoundFamily.NEAR_FIRST, None))
        failed = False
        for family, tb in families:
            try:
                delta = gradient_lower_bound(family, cfg, groups, theta_bar=tb)
                found, witness = minimize_gradient_norm(family, cfg, groups, theta_bar=tb)
            except GeometryError as exc:
                log(f"{family.value}: skipped ({exc})")
                continue
            ok = found >= delta**2 - 1e-8
            failed = failed or not ok
            log(
                f"{family.value}: bound^2 = {delta**2:.9g}, multistart min = {found:.9g} "
                f"({'ok' if ok else 'VIOLATED'})"
            )
            record(family.value, delta**2, found)
        return rs, (EXIT_OK if not failed else EXIT_NUMERICAL)

    if command == "stationary-check":
        x = np.array(ecfg.eval_x)
        y1 = np.array(ecfg.eval_y1)
        y2 = np.array(ecfg.eval_y2)
        grid = ecfg.scan_grid if ecfg.scan_variable == "epsilon" else (cfg.epsilon,)
        code = EXIT_OK
        for eps in grid:
            cfg_e = config_at_epsilon(cfg, eps)
            groups_e = build_groups(cfg_e, emit_warnings=False)
            dec = (
                SphereDecomposition(ecfg.theta_bar)
                if ecfg.theta_bar is not None
                else SphereDecomposition.from_epsilon(eps)
            )
            try:
                est = integrate_cap(
                    ecfg.eval_eta1, ecfg.eval_eta2, x, y1, y2, cfg_e, groups_e, dec, ecfg.plan
                )
                lead = stationary_leading_term(
                    ecfg.eval_eta1, ecfg.eval_eta2, x, y1, y2, cfg_e, groups_e
                )
            except Exception as exc:  # noqa: BLE001
                record("epsilon", eps, 0.0, error=str(exc))
                code = EXIT_NUMERICAL
                continue
            dev = abs(est.value - lead) / abs(lead)
            log(
                f"epsilon = {eps:g}: |cap integral| = {abs(est.value):.6g} "
                f"(se {est.std_error:.2g}), |leading| = {abs(lead):.6g}, rel dev = {dev:.4f}"
            )
            record("epsilon", eps, dev, est.std_error / abs(lead), est.n_points)
        return rs, code

    if command in ("scan-epsilon", "scan-angle"):
        variable = "epsilon" if command == "scan-epsilon" else "chi"
        spec = ScanSpec(
            variable=variable,
            grid=ecfg.scan_grid,
            outer_samples=ecfg.scan_outer_samples,
            inner_plan=ecfg.plan,
        )
        records = scan(spec, cfg, groups)
        rs.records.extend(records)
        for r in records:
            log(
                f"{variable} = {r.value:g}: estimate = {r.estimate:.6g} "
                f"+- {r.std_error:.2g}" + (f"  [FAILED: {r.error}]" if r.error else "")
            )
        code = EXIT_OK if all(not r.error for r in records) else EXIT_NUMERICAL
        return rs, code

    # probability
    try:
        rec = p_direct_sampled(
            cfg,
            groups,
            ecfg.outer_samples,
            ecfg.plan,
            x_radius=ecfg.x_radius,
            y_radius=ecfg.y_radius,
        )
    except Exception as exc:  # noqa: BLE001
        record("epsilon", cfg.epsilon, 0.0, error=str(exc))
        return rs, EXIT_NUMERICAL
    rs.records.append(rec)
    log(f"P estimate = {rec.estimate:.6g} +- {rec.std_error:.2g}")
    return rs, EXIT_OK
