"""
Scenario files.

Scenarios are YAML documents (comments allowed). Every key is optional
except ``mode``; unknown keys are rejected with the offending line number.

.. code-block:: yaml

    name: fig3b
    mode: beamformer          # phased | beamformer | nonideal | scan_sweep | optimize | pulse_debug
    array:
      n_elements: 30
      spacing: 0.5            # wavelengths
      tau: 0.25               # branch delay, fraction of the period
    steering: 90              # degrees; a list for scan_sweep
    xi: table2-preset         # all-ones | table2-preset | table3-preset | optimizer | [list]
    rise_fall: 0.0            # trapezoid ramp, fraction of the period
    grid_step: 0.05           # degrees
    truncation: {k_max: 20, q_max: 31}
    output_dir: out/fig3b
    seed: 0
    optimizer: {sll_target: -17, harmonic_threshold: -30}
    checks:
      - {metric: sll_db, max: -16.5}
      - {metric: "peak[-7]", target: -16.9, tol: 0.05}
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

import yaml

from .harmonics import ArrayConfig, DEFAULT_K_MAX, DEFAULT_Q_MAX
from .optimize import OptimizerConfig

MODES = ("phased", "beamformer", "nonideal", "scan_sweep", "optimize", "pulse_debug")
XI_SOURCES = ("all-ones", "table2-preset", "table3-preset", "optimizer")
DEFAULT_SWEEP = (22.0, 45.0, 70.0, 90.0, 110.0, 135.0, 158.0)
DEFAULT_RISE_FALL_NONIDEAL = 0.06

_XI_ALIASES = {"ones": "all-ones", "table2": "table2-preset", "table3": "table3-preset"}
_TOP_KEYS = {
    "name", "mode", "array", "N", "steering", "xi", "rise_fall", "grid_step",
    "truncation", "output_dir", "seed", "optimizer", "checks",
}
_ARRAY_KEYS = {"n_elements", "spacing", "positions", "tau"}
_TRUNC_KEYS = {"k_max", "q_max"}
_OPT_KEYS = {f.name for f in fields(OptimizerConfig)} - {"seed", "rise_fall"}
_CHECK_KEYS = {"metric", "max", "min", "target", "tol"}


class ConfigError(ValueError):
    """Invalid scenario; the message carries the line number when known."""


@dataclass(frozen=True)
class Scenario:
    mode: str
    array: ArrayConfig = field(default_factory=lambda: ArrayConfig(30))
    steering: float | tuple[float, ...] = 90.0
    xi: str | tuple[float, ...] = "all-ones"
    rise_fall: float = 0.0
    grid_step: float = 0.05
    k_max: int = DEFAULT_K_MAX
    q_max: int = DEFAULT_Q_MAX
    output_dir: str = "out"
    seed: int = 0
    name: str = ""
    optimizer: tuple[tuple[str, Any], ...] = ()
    checks: tuple[tuple[tuple[str, Any], ...], ...] = ()

    def optimizer_config(self) -> OptimizerConfig:
        opts = dict(self.optimizer)
        if "weights" in opts:
            opts["weights"] = tuple(opts["weights"])
        return OptimizerConfig(seed=self.seed, rise_fall=self.rise_fall, **opts)

    @property
    def steering_list(self) -> tuple[float, ...]:
        return self.steering if isinstance(self.steering, tuple) else (self.steering,)

    def check_list(self) -> list[dict]:
        return [dict(c) for c in self.checks]


def key_lines(node, prefix: str = "") -> dict[str, int]:
    """Map dotted key paths to 1-based source lines."""
    out: dict[str, int] = {}
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            path = f"{prefix}{key_node.value}"
            out[path] = key_node.start_mark.line + 1
            out.update(key_lines(value_node, path + "."))
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            path = f"{prefix}{i}"
            out[path] = item.start_mark.line + 1
            out.update(key_lines(item, path + "."))
    return out


class _Builder:
    def __init__(self, lines: dict[str, int]):
        self.lines = lines

    def fail(self, path: str, message: str) -> ConfigError:
        line = self.lines.get(path)
        where = f"line {line}: " if line else ""
        return ConfigError(f"{where}{path}: {message}")

    def unknown(self, data: dict, allowed: set[str], prefix: str = "") -> None:
        for key in data:
            if key not in allowed:
                raise self.fail(f"{prefix}{key}", f"unknown key (allowed: {', '.join(sorted(allowed))})")

    def number(self, data: dict, key: str, path: str, default, kind=float):
        if key not in data:
            return default
        value = data[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise self.fail(path, f"expected a number, got {value!r}")
        if kind is int and int(value) != value:
            raise self.fail(path, f"expected an integer, got {value!r}")
        return kind(value)


def scenario_from_dict(data: dict, lines: dict[str, int] | None = None) -> Scenario:
    b = _Builder(lines or {})
    if not isinstance(data, dict):
        raise ConfigError("scenario must be a mapping")
    b.unknown(data, _TOP_KEYS)

    mode = str(data.get("mode", "")).lower().replace("-", "_")
    if mode not in MODES:
        raise b.fail("mode", f"expected one of {', '.join(MODES)}, got {data.get('mode')!r}")

    arr = data.get("array", {}) or {}
    if not isinstance(arr, dict):
        raise b.fail("array", "expected a mapping")
    b.unknown(arr, _ARRAY_KEYS, "array.")
    if "N" in data and "n_elements" in arr:
        raise b.fail("N", "give the element count once (N or array.n_elements)")
    n = b.number(data, "N", "N", None, int)
    n = b.number(arr, "n_elements", "array.n_elements", 30 if n is None else n, int)
    try:
        array = ArrayConfig(
            n_elements=n,
            spacing=b.number(arr, "spacing", "array.spacing", 0.5),
            positions=tuple(arr["positions"]) if "positions" in arr else None,
            tau=b.number(arr, "tau", "array.tau", 0.25),
        )
    except (ValueError, TypeError) as exc:
        key = "N" if "N" in data else "array.n_elements"
        for k in ("positions", "tau", "spacing"):
            if k in str(exc):
                key = f"array.{k}"
        raise b.fail(key, str(exc)) from None

    sweep = mode == "scan_sweep"
    raw_steer = data.get("steering", list(DEFAULT_SWEEP) if sweep else 90.0)
    if isinstance(raw_steer, list):
        if not raw_steer or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in raw_steer):
            raise b.fail("steering", "expected a non-empty list of angles")
        steering: float | tuple[float, ...] = tuple(float(v) for v in raw_steer)
        if not sweep and len(steering) != 1:
            raise b.fail("steering", f"mode {mode} takes a single angle")
        if not sweep:
            steering = steering[0]
    else:
        steering = b.number(data, "steering", "steering", 90.0)
        if sweep:
            steering = (steering,)
    for th in (steering if isinstance(steering, tuple) else (steering,)):
        if not 0.0 < th < 180.0:
            raise b.fail("steering", f"angles must be in (0, 180) degrees, got {th}")

    raw_xi = data.get("xi", "optimizer" if mode == "optimize" else "all-ones")
    if isinstance(raw_xi, list):
        if len(raw_xi) != array.n_elements:
            raise b.fail("xi", f"expected {array.n_elements} duty cycles, got {len(raw_xi)}")
        for i, v in enumerate(raw_xi):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not 0 < v <= 1:
                raise b.fail(f"xi.{i}", f"duty cycle must be in (0, 1], got {v!r}")
        xi: str | tuple[float, ...] = tuple(float(v) for v in raw_xi)
    else:
        xi = _XI_ALIASES.get(str(raw_xi), str(raw_xi))
        if xi not in XI_SOURCES:
            raise b.fail("xi", f"expected a list or one of {', '.join(XI_SOURCES)}, got {raw_xi!r}")
        if xi in ("table2-preset", "table3-preset") and array.n_elements != 30:
            raise b.fail("xi", "the published duty-cycle sets are for 30 elements")
    if mode == "phased" and xi != "all-ones":
        raise b.fail("xi", "phased mode keeps every gate closed (xi must be all-ones)")
    if (xi == "optimizer") != (mode == "optimize"):
        raise b.fail("xi", "xi: optimizer goes with mode: optimize")

    default_rf = DEFAULT_RISE_FALL_NONIDEAL if mode == "nonideal" else 0.0
    rise_fall = b.number(data, "rise_fall", "rise_fall", default_rf)
    if not 0.0 <= rise_fall < 0.125:
        raise b.fail("rise_fall", f"must be in [0, 0.125), got {rise_fall}")
    if rise_fall > 0 and mode not in ("nonideal", "optimize", "scan_sweep", "pulse_debug"):
        raise b.fail("rise_fall", f"mode {mode} uses ideal pulses; use mode: nonideal")

    grid_step = b.number(data, "grid_step", "grid_step", 0.5 if sweep else 0.05)
    n_steps = round(180.0 / grid_step) if grid_step > 0 else 0
    if grid_step <= 0 or abs(n_steps * grid_step - 180.0) > 1e-9:
        raise b.fail("grid_step", f"must be positive and divide 180, got {grid_step}")

    trunc = data.get("truncation", {}) or {}
    if not isinstance(trunc, dict):
        raise b.fail("truncation", "expected a mapping")
    b.unknown(trunc, _TRUNC_KEYS, "truncation.")
    k_max = b.number(trunc, "k_max", "truncation.k_max", DEFAULT_K_MAX, int)
    q_max = b.number(trunc, "q_max", "truncation.q_max", DEFAULT_Q_MAX, int)
    if k_max < 0:
        raise b.fail("truncation.k_max", "must be >= 0")
    if q_max < 1:
        raise b.fail("truncation.q_max", "must be >= 1")

    seed = b.number(data, "seed", "seed", 0, int)

    opt_raw = data.get("optimizer", {}) or {}
    if not isinstance(opt_raw, dict):
        raise b.fail("optimizer", "expected a mapping")
    b.unknown(opt_raw, _OPT_KEYS, "optimizer.")
    optimizer = tuple(sorted((k, tuple(v) if isinstance(v, list) else v) for k, v in opt_raw.items()))

    checks_raw = data.get("checks", []) or []
    if not isinstance(checks_raw, list):
        raise b.fail("checks", "expected a list")
    checks = []
    for i, c in enumerate(checks_raw):
        if not isinstance(c, dict) or "metric" not in c:
            raise b.fail(f"checks.{i}", "each check needs a metric")
        b.unknown(c, _CHECK_KEYS, f"checks.{i}.")
        if "target" in c and "tol" not in c:
            raise b.fail(f"checks.{i}", "target needs a tol")
        checks.append(tuple(sorted(c.items())))

    scenario = Scenario(
        mode=mode,
        array=array,
        steering=steering,
        xi=xi,
        rise_fall=rise_fall,
        grid_step=grid_step,
        k_max=k_max,
        q_max=q_max,
        output_dir=str(data.get("output_dir", "out")),
        seed=seed,
        name=str(data.get("name", "")),
        optimizer=optimizer,
        checks=tuple(checks),
    )
    try:
        scenario.optimizer_config()
    except (ValueError, TypeError) as exc:
        raise b.fail("optimizer", str(exc)) from None
    return scenario


def parse_config_text(text: str) -> Scenario:
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"YAML syntax error: {exc}") from None
    if data is None:
        raise ConfigError("empty scenario")
    return scenario_from_dict(data, key_lines(node))


def parse_config(path: str | Path) -> Scenario:
    """Read and validate a scenario file."""
    return parse_config_text(Path(path).read_text())


def scenario_to_dict(s: Scenario) -> dict:
    arr: dict[str, Any] = {"n_elements": s.array.n_elements, "spacing": s.array.spacing, "tau": s.array.tau}
    default_pos = ArrayConfig(s.array.n_elements, s.array.spacing).positions
    if s.array.positions != default_pos:
        arr["positions"] = list(s.array.positions)
    d: dict[str, Any] = {
        "name": s.name,
        "mode": s.mode,
        "array": arr,
        "steering": list(s.steering) if isinstance(s.steering, tuple) else s.steering,
        "xi": list(s.xi) if isinstance(s.xi, tuple) else s.xi,
        "rise_fall": s.rise_fall,
        "grid_step": s.grid_step,
        "truncation": {"k_max": s.k_max, "q_max": s.q_max},
        "output_dir": s.output_dir,
        "seed": s.seed,
    }
    if s.optimizer:
        d["optimizer"] = {k: list(v) if isinstance(v, tuple) else v for k, v in s.optimizer}
    if s.checks:
        d["checks"] = [dict(c) for c in s.checks]
    return d


def serialize(s: Scenario) -> str:
    return yaml.safe_dump(scenario_to_dict(s), sort_keys=False)


def with_overrides(s: Scenario, **changes) -> Scenario:
    """Re-validate ``s`` with top-level keys replaced (``None`` values ignored)."""
    data = scenario_to_dict(s)
    for key, value in changes.items():
        if value is None:
            continue
        if key in ("n_elements", "spacing", "tau"):
            data["array"][key] = value
            data["array"].pop("positions", None)
        elif key in ("k_max", "q_max"):
            data["truncation"][key] = value
        else:
            data[key] = value
    return scenario_from_dict(data)


__all__ = [
    "ConfigError",
    "Scenario",
    "parse_config",
    "parse_config_text",
    "scenario_from_dict",
    "scenario_to_dict",
    "serialize",
    "with_overrides",
]
