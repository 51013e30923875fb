"""
Command-line front end and scenario runner.

``run(scenario)`` performs one scenario and writes its artifacts; ``main``
maps subcommands and flags onto a scenario. Exit codes: 0 success,
1 I/O error, 2 invalid configuration, 3 a ``--check`` threshold failed.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import tempfile
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from . import __version__
from .config import (
    ConfigError,
    Scenario,
    key_lines,
    parse_config_text,
    scenario_from_dict,
    scenario_to_dict,
)
from .efficiency import EfficiencyReport, efficiency_report, efficiency_report_numeric
from .harmonics import steering_delays, stair_lines, theta_grid
from .optimize import anneal
from .patterns import CSV_FLOOR_DB, PatternGrid, build_pattern, pattern_metrics, significant_offsets
from .plots import PLOT_FLOOR_DB, plot_overlay, plot_single, plot_waveform
from .presets import table2_xi, table3_xi
from .pulses import PulseKind, PulseSpec, sample_waveform

logger = logging.getLogger("ssb_tma")

ENV_OUTPUT_DIR = "SSB_TMA_OUTPUT_DIR"
FIGURES = ("fig3a", "fig3b", "fig3c", "fig3d", "fig5", "fig6")
EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_CHECK = 0, 1, 2, 3


@dataclass
class RunReport:
    """Everything needed to audit or re-run a scenario."""

    scenario: dict
    metrics: dict
    efficiency: dict | None
    artifacts: dict[str, str]
    version: str
    seed: int
    checks: list[dict] = field(default_factory=list)

    @property
    def checks_passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "version": self.version,
            "seed": self.seed,
            "scenario": self.scenario,
            "metrics": self.metrics,
            "efficiency": self.efficiency,
            "checks": self.checks,
            "artifacts": self.artifacts,
        }


def resolve_xi(scenario: Scenario) -> np.ndarray:
    n = scenario.array.n_elements
    if isinstance(scenario.xi, tuple):
        return np.array(scenario.xi)
    if scenario.xi == "all-ones":
        return np.ones(n)
    if scenario.xi == "table2-preset":
        return table2_xi()
    if scenario.xi == "table3-preset":
        return table3_xi()
    raise ValueError(f"xi source {scenario.xi!r} is produced by the optimizer")


def scenario_efficiency(scenario: Scenario, xi: np.ndarray) -> EfficiencyReport:
    """Closed form for ideal pulses, numerical line sums for trapezoids."""
    if scenario.rise_fall > 0:
        return efficiency_report_numeric(xi, scenario.rise_fall, tau=scenario.array.tau)
    return efficiency_report(xi)


def _ensure_writable(path: Path) -> None:
    path.mkdir(parents=True, exist_ok=True)
    with tempfile.NamedTemporaryFile(dir=path, prefix=".probe-"):
        pass


def _flat_metrics(grid_metrics, theta_scan: float, step: float) -> dict[str, Any]:
    flat = {k: v for k, v in grid_metrics.as_dict().items() if k != "harmonic_peaks_db"}
    flat["peak_error_deg"] = abs(grid_metrics.peak_angle_deg - theta_scan)
    flat["grid_step"] = step
    for m, v in grid_metrics.harmonic_peaks_db.items():
        flat[f"peak[{m}]"] = v
    return flat


def _write_pattern_artifacts(grid: PatternGrid, out: Path, title: str, artifacts: dict) -> None:
    grid.to_csv(out / "pattern.csv", CSV_FLOOR_DB)
    artifacts["pattern_csv"] = str(out / "pattern.csv")
    shown = significant_offsets(grid, PLOT_FLOOR_DB)
    curves = {f"m={m:+d}": grid.row(m) for m in shown}
    artifacts["pattern_svg"] = str(plot_overlay(grid.theta, curves, out / "pattern.svg", title))
    for m in shown:
        name = f"offset_{m:+d}.svg"
        plot_single(grid.theta, grid.row(m), out / name, f"{title} offset {m:+d}")
        artifacts[f"offset_{m:+d}_svg"] = str(out / name)


def _run_single(s: Scenario, xi: np.ndarray, out: Path, artifacts: dict) -> dict:
    theta_scan = s.steering_list[0]
    plan = steering_delays(s.array, theta_scan)
    grid = build_pattern(s.array, plan, xi, s.rise_fall, theta_grid(s.grid_step), s.k_max, s.q_max)
    _write_pattern_artifacts(grid, out, s.name or s.mode, artifacts)
    metrics = pattern_metrics(grid, theta_scan)
    return {"harmonic_peaks_db": metrics.as_dict()["harmonic_peaks_db"], **_flat_metrics(metrics, theta_scan, s.grid_step)}


def _run_sweep(s: Scenario, xi: np.ndarray, out: Path, artifacts: dict) -> dict:
    theta = theta_grid(s.grid_step)
    rows, curves = [], {}
    pattern_dir = out / "patterns"
    pattern_dir.mkdir(exist_ok=True)
    for th in s.steering_list:
        grid = build_pattern(s.array, steering_delays(s.array, th), xi, s.rise_fall, theta, s.k_max, s.q_max)
        grid.to_csv(pattern_dir / f"pattern_{th:06.2f}.csv", CSV_FLOOR_DB)
        m = pattern_metrics(grid, th)
        curves[f"{th:g} deg"] = grid.row(1)
        rows.append(_flat_metrics(m, th, s.grid_step))
    columns = ["theta_scan", "peak_angle_deg", "peak_error_deg", "sll_db", "hpbw_deg", "max_unwanted_db", "max_gate_harmonic_db"]
    with open(out / "sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for r in rows:
            writer.writerow([repr(float(r[c])) for c in columns])
    artifacts["sweep_csv"] = str(out / "sweep.csv")
    artifacts["patterns_dir"] = str(pattern_dir)
    artifacts["pattern_svg"] = str(plot_overlay(theta, curves, out / "pattern.svg", s.name or "scan sweep"))

    unwanted = [r["max_unwanted_db"] for r in rows]
    flat: dict[str, Any] = {
        "sweep": [{c: r[c] for c in columns} for r in rows],
        "max_peak_error_deg": max(r["peak_error_deg"] for r in rows),
        "unwanted_spread_db": max(unwanted) - min(unwanted),
        "max_unwanted_db": max(unwanted),
        "grid_step": s.grid_step,
    }
    for r in rows:
        flat[f"hpbw[{r['theta_scan']:g}]"] = r["hpbw_deg"]
    return flat


def _run_pulse(s: Scenario, out: Path, artifacts: dict) -> dict:
    t = np.linspace(0.0, 1.0, 1024, endpoint=False)
    kind = PulseKind.TRAPEZOID_STAIR_STEP if s.rise_fall > 0 else PulseKind.STAIR_STEP
    columns = {
        "u": sample_waveform(PulseSpec(PulseKind.TWO_STATE_SQUARE), t),
        "v": sample_waveform(PulseSpec(PulseKind.TRI_STATE_SQUARE), t),
        "w": sample_waveform(PulseSpec(kind, rise_fall=s.rise_fall), t),
        "w_delayed": sample_waveform(PulseSpec(kind, delay=s.array.tau, rise_fall=s.rise_fall), t),
    }
    with open(out / "waveform.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", *columns])
        for i, ti in enumerate(t):
            writer.writerow([repr(float(ti)), *(repr(float(c[i])) for c in columns.values())])
    orders, lines = stair_lines(s.q_max, s.rise_fall)
    with open(out / "spectrum.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["order", "re", "im", "abs"])
        for q, c in zip(orders, lines):
            writer.writerow([int(q), repr(float(c.real)), repr(float(c.imag)), repr(float(abs(c)))])
    plot_waveform(t, columns, out / "waveform.svg")
    artifacts.update(
        waveform_csv=str(out / "waveform.csv"),
        spectrum_csv=str(out / "spectrum.csv"),
        waveform_svg=str(out / "waveform.svg"),
    )
    mag = np.abs(lines)
    first = mag[orders == 1][0]
    return {f"line_db[{int(q)}]": float(20 * np.log10(a / first)) for q, a in zip(orders, mag) if a > 1e-12 * first}


def evaluate_checks(checks: list[dict], metrics: dict) -> list[dict]:
    results = []
    for c in checks:
        name = c["metric"]
        value = metrics.get(name)
        entry = dict(c, value=value)
        if not isinstance(value, (int, float)):
            entry.update(passed=False, reason="unknown metric")
        else:
            ok = True
            if "max" in c:
                ok &= value <= c["max"]
            if "min" in c:
                ok &= value >= c["min"]
            if "target" in c:
                ok &= abs(value - c["target"]) <= c["tol"]
            entry["passed"] = bool(ok)
        results.append(entry)
    return results


def run(scenario: Scenario, output_dir: str | Path | None = None) -> RunReport:
    """Execute ``scenario`` and write its artifacts plus ``report.json``.

    The output directory is created and probed for writability before any
    computation, so a bad path fails fast with ``OSError``.
    """
    out = Path(output_dir or scenario.output_dir)
    _ensure_writable(out)
    artifacts: dict[str, str] = {}
    eff: EfficiencyReport | None = None
    extra: dict[str, Any] = {}

    if scenario.mode == "pulse_debug":
        metrics = _run_pulse(scenario, out, artifacts)
    else:
        if scenario.mode == "optimize":
            result = anneal(scenario.array, scenario.optimizer_config())
            xi = result.xi
            extra["optimizer"] = result.as_dict()
            with open(out / "xi.csv", "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["element", "xi"])
                writer.writerows([i, repr(float(x))] for i, x in enumerate(xi))
            artifacts["xi_csv"] = str(out / "xi.csv")
        else:
            xi = resolve_xi(scenario)
        if scenario.mode == "scan_sweep":
            metrics = _run_sweep(scenario, xi, out, artifacts)
        else:
            metrics = _run_single(scenario, xi, out, artifacts)
        eff = scenario_efficiency(scenario, xi)
        metrics.update({k: v for k, v in eff.as_dict().items()})
        metrics["xi"] = [float(x) for x in xi]
    metrics.update(extra)
    if "optimizer" in extra:
        metrics["optimizer_converged"] = float(extra["optimizer"]["converged"])

    report = RunReport(
        scenario=scenario_to_dict(scenario),
        metrics=metrics,
        efficiency=eff.as_dict() if eff else None,
        artifacts=artifacts,
        version=__version__,
        seed=scenario.seed,
        checks=evaluate_checks(scenario.check_list(), metrics),
    )
    report.artifacts["report_json"] = str(out / "report.json")
    (out / "report.json").write_text(json.dumps(report.as_dict(), indent=2) + "\n")
    return report


# ---------------------------------------------------------------- CLI ----


def figure_text(name: str) -> str:
    if name not in FIGURES:
        raise ConfigError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}")
    return resources.files("ssb_tma").joinpath("scenarios", f"{name}.yaml").read_text()


def _set_path(data: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    node = data
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigError(f"--set {dotted}: {k} is not a section")
    node[keys[-1]] = value


def _parse_xi(text: str):
    if "," in text:
        try:
            return [float(v) for v in text.split(",") if v.strip()]
        except ValueError:
            raise ConfigError(f"--xi: cannot parse {text!r}") from None
    return text


_SUBCOMMAND_MODE = {"pulse": "pulse_debug", "sweep": "scan_sweep", "optimize": "optimize"}


def build_scenario(args: argparse.Namespace) -> Scenario:
    """Merge config file, environment and flags (in that order) into a Scenario."""
    if args.command == "reproduce":
        text = figure_text(args.figure)
    elif args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
    else:
        text = ""
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader) if text else None
        data = (yaml.safe_load(text) if text else None) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"YAML syntax error: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("scenario must be a mapping")
    lines = key_lines(node) if node is not None else {}

    overrides: dict[str, Any] = {}
    mode = _SUBCOMMAND_MODE.get(args.command)
    if mode:
        overrides["mode"] = mode
        if mode == "optimize":
            overrides["xi"] = "optimizer"
    elif getattr(args, "mode", None):
        overrides["mode"] = args.mode
    elif "mode" not in data:
        overrides["mode"] = "phased"
    if os.environ.get(ENV_OUTPUT_DIR):
        overrides["output_dir"] = os.environ[ENV_OUTPUT_DIR]
    flag_map = {
        "n_elements": "array.n_elements",
        "spacing": "array.spacing",
        "tau": "array.tau",
        "rise_fall": "rise_fall",
        "grid_step": "grid_step",
        "k_max": "truncation.k_max",
        "q_max": "truncation.q_max",
        "seed": "seed",
        "output_dir": "output_dir",
        "name": "name",
    }
    for attr, path in flag_map.items():
        value = getattr(args, attr, None)
        if value is not None:
            overrides[path] = value
    if getattr(args, "steering", None) is not None:
        st = args.steering
        overrides["steering"] = st if (args.command == "sweep" or len(st) > 1) else st[0]
    if getattr(args, "xi", None) is not None:
        overrides["xi"] = _parse_xi(args.xi)
    for item in getattr(args, "set", None) or []:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        overrides[key.strip()] = yaml.safe_load(raw)

    if "array.n_elements" in overrides:
        data.pop("N", None)
    for path, value in overrides.items():
        _set_path(data, path, value)
        for known in [p for p in lines if p == path or p.startswith(path + ".")]:
            lines.pop(known)
    return scenario_from_dict(data, lines)


def _common(p: argparse.ArgumentParser, steering_many: bool = False) -> None:
    p.add_argument("-c", "--config", help="scenario YAML file")
    p.add_argument("-o", "--output-dir", dest="output_dir", help=f"output directory (env {ENV_OUTPUT_DIR})")
    p.add_argument("-N", "--n-elements", dest="n_elements", type=int)
    p.add_argument("--spacing", type=float, help="element spacing in wavelengths")
    p.add_argument("--tau", type=float, help="branch delay, fraction of the period")
    p.add_argument("--steering", type=float, nargs="+", help="scan angle(s) in degrees")
    p.add_argument("--xi", help="all-ones | table2-preset | table3-preset | comma-separated list")
    p.add_argument("--rise-fall", dest="rise_fall", type=float, help="trapezoid ramp width (fraction of T0)")
    p.add_argument("--grid-step", dest="grid_step", type=float, help="angle grid step in degrees")
    p.add_argument("--k-max", dest="k_max", type=int)
    p.add_argument("--q-max", dest="q_max", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--name")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any config key (dotted path)")
    p.add_argument("--check", action="store_true", help="exit with status 3 if a configured check fails")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ssb-tma", description="SSB time-modulated array simulator.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pulse", help="dump stair-step waveforms and spectrum")
    _common(p)
    p = sub.add_parser("pattern", help="radiation patterns, metrics and plots")
    _common(p)
    p.add_argument("--mode", choices=("phased", "beamformer", "nonideal"))
    p = sub.add_parser("efficiency", help="print the efficiency report only")
    _common(p)
    p.add_argument("--mode", choices=("phased", "beamformer", "nonideal"))
    p = sub.add_parser("sweep", help="scan-angle sweep")
    _common(p)
    p = sub.add_parser("optimize", help="anneal duty cycles for a target SLL")
    _common(p)
    p = sub.add_parser("reproduce", help="run a bundled figure scenario")
    p.add_argument("figure", choices=FIGURES)
    _common(p)
    return parser


def _print_summary(report: RunReport) -> None:
    m = report.metrics
    for key in ("sll_db", "hpbw_deg", "peak_angle_deg", "max_unwanted_db", "max_gate_harmonic_db",
                "max_peak_error_deg", "unwanted_spread_db", "eta_tma", "eta_bfn", "eta"):
        if isinstance(m.get(key), (int, float)):
            print(f"{key:>22s}  {m[key]: .4f}")
    for c in report.checks:
        status = "PASS" if c["passed"] else "FAIL"
        print(f"[{status}] {c['metric']} = {c['value']}  ({', '.join(f'{k}={c[k]}' for k in ('max', 'min', 'target', 'tol') if k in c)})")
    print(f"report: {report.artifacts['report_json']}")


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        scenario = build_scenario(args)
        if args.command == "efficiency":
            if scenario.mode in ("optimize", "pulse_debug", "scan_sweep"):
                raise ConfigError("efficiency needs a fixed set of duty cycles")
            eff = scenario_efficiency(scenario, resolve_xi(scenario))
            print(json.dumps(eff.as_dict(), indent=2))
            wanted = [c for c in scenario.check_list() if c["metric"] in eff.as_dict()]
            checks = evaluate_checks(wanted, eff.as_dict())
            return EXIT_CHECK if args.check and not all(c["passed"] for c in checks) else EXIT_OK
        report = run(scenario)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    _print_summary(report)
    if args.check and not report.checks_passed:
        return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
