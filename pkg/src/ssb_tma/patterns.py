"""
Normalized power patterns and their figures of merit.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .harmonics import (
    DEFAULT_K_MAX,
    DEFAULT_Q_MAX,
    ArrayConfig,
    SteeringPlan,
    offset_fields,
    steering_delays,
    theta_grid,
)

FLOOR_DB = -200.0
CSV_FLOOR_DB = -60.0


@dataclass(frozen=True)
class PatternGrid:
    """Power of every carrier offset on a common angle grid.

    ``power_db[i, j]`` is the power at ``offsets[i]`` and ``theta[j]``, in dB
    relative to the global maximum and floored at -200 dB.
    """

    theta: np.ndarray
    offsets: np.ndarray
    power_db: np.ndarray = field(repr=False)

    def row(self, offset: int) -> np.ndarray:
        hit = np.flatnonzero(self.offsets == offset)
        if hit.size == 0:
            raise KeyError(f"offset {offset} not in pattern")
        return self.power_db[hit[0]]

    def to_csv(self, path: str | Path, floor_db: float = CSV_FLOOR_DB) -> int:
        """Write ``theta_deg,offset,power_db`` rows; offsets peaking below ``floor_db`` are skipped.

        Returns the number of offsets written.
        """
        kept = 0
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["theta_deg", "offset", "power_db"])
            for m, row in zip(self.offsets, self.power_db):
                if row.max() < floor_db:
                    continue
                kept += 1
                for th, p in zip(self.theta, row):
                    writer.writerow([repr(float(th)), int(m), repr(float(p))])
        return kept


@dataclass
class PatternMetrics:
    theta_scan: float
    peak_angle_deg: float
    sll_db: float
    hpbw_deg: float
    harmonic_peaks_db: dict[int, float]
    max_unwanted_db: float
    max_gate_harmonic_db: float

    def as_dict(self) -> dict:
        return {
            "theta_scan": self.theta_scan,
            "peak_angle_deg": self.peak_angle_deg,
            "sll_db": self.sll_db,
            "hpbw_deg": self.hpbw_deg,
            "max_unwanted_db": self.max_unwanted_db,
            "max_gate_harmonic_db": self.max_gate_harmonic_db,
            "harmonic_peaks_db": {str(k): v for k, v in self.harmonic_peaks_db.items()},
        }


def to_db(power: np.ndarray, reference: float | None = None) -> np.ndarray:
    ref = power.max() if reference is None else reference
    with np.errstate(divide="ignore"):
        out = 10.0 * np.log10(power / ref)
    return np.maximum(out, FLOOR_DB)


def build_pattern(
    config: ArrayConfig,
    delays: SteeringPlan | np.ndarray | None = None,
    xi=None,
    rise_fall: float = 0.0,
    theta_deg: np.ndarray | None = None,
    k_max: int = DEFAULT_K_MAX,
    q_max: int = DEFAULT_Q_MAX,
) -> PatternGrid:
    """Normalized power pattern of every offset up to the truncation.

    ``rise_fall = 0`` uses ideal pulses; a positive value uses trapezoidal
    stair steps (lines by quadrature).
    """
    theta = theta_grid() if theta_deg is None else np.asarray(theta_deg, dtype=float)
    offsets, fields = offset_fields(config, delays, xi, theta, k_max, q_max, rise_fall)
    power = np.abs(fields) ** 2
    return PatternGrid(theta, offsets, to_db(power))


def _main_lobe(pattern: np.ndarray) -> tuple[int, int, int]:
    peak = int(np.argmax(pattern))
    lo = peak
    while lo > 0 and pattern[lo - 1] <= pattern[lo]:
        lo -= 1
    hi = peak
    while hi < len(pattern) - 1 and pattern[hi + 1] <= pattern[hi]:
        hi += 1
    return peak, lo, hi


def side_lobe_level(pattern: PatternGrid | np.ndarray, offset: int = 1) -> float:
    """Highest level outside the main lobe, relative to the main-lobe peak (dB).

    The main lobe extends from the peak down to the first local minimum on
    each side. Returns -200 dB when nothing lies outside it.
    """
    row = pattern.row(offset) if isinstance(pattern, PatternGrid) else np.asarray(pattern)
    peak, lo, hi = _main_lobe(row)
    outside = np.concatenate([row[:lo], row[hi + 1:]])
    if outside.size == 0:
        return FLOOR_DB
    return float(max(outside.max() - row[peak], FLOOR_DB))


def half_power_beamwidth(theta: np.ndarray, pattern_db: np.ndarray) -> float:
    """Width of the main lobe at 3 dB below its own peak, with linear interpolation."""
    peak, _, _ = _main_lobe(pattern_db)
    level = pattern_db[peak] - 3.0
    below = pattern_db < level

    left = np.flatnonzero(below[:peak])
    if left.size:
        i = left[-1]
        x_lo = np.interp(level, [pattern_db[i], pattern_db[i + 1]], [theta[i], theta[i + 1]])
    else:
        x_lo = theta[0]
    right = np.flatnonzero(below[peak:])
    if right.size:
        i = peak + right[0]
        x_hi = np.interp(level, [pattern_db[i], pattern_db[i - 1]], [theta[i], theta[i - 1]])
    else:
        x_hi = theta[-1]
    return float(x_hi - x_lo)


def harmonic_peak_levels(pattern: PatternGrid) -> dict[int, float]:
    """Peak level of every offset, in dB relative to the global maximum."""
    return {int(m): float(row.max()) for m, row in zip(pattern.offsets, pattern.power_db)}


def is_stair_offset(offset: int) -> bool:
    """Offsets reached by ungated (k = 0) stair-step harmonics: +1, -7, +9, -15, ..."""
    if offset > 0:
        return offset % 8 == 1
    if offset < 0:
        return (-offset) % 8 == 7
    return False


def unwanted_levels(peaks: dict[int, float]) -> tuple[float, float]:
    """(max over all offsets but +1, max over offsets that need k != 0)."""
    unwanted = [v for m, v in peaks.items() if m != 1]
    gate = [v for m, v in peaks.items() if not is_stair_offset(m)]
    return (max(unwanted) if unwanted else FLOOR_DB, max(gate) if gate else FLOOR_DB)


def pattern_metrics(pattern: PatternGrid, theta_scan: float = 90.0) -> PatternMetrics:
    row = pattern.row(1)
    peaks = harmonic_peak_levels(pattern)
    unwanted, gate = unwanted_levels(peaks)
    return PatternMetrics(
        theta_scan=float(theta_scan),
        peak_angle_deg=float(pattern.theta[np.argmax(row)]),
        sll_db=side_lobe_level(pattern, 1),
        hpbw_deg=half_power_beamwidth(pattern.theta, row),
        harmonic_peaks_db=peaks,
        max_unwanted_db=unwanted,
        max_gate_harmonic_db=gate,
    )


def scan_sweep(
    config: ArrayConfig,
    xi,
    theta_list: Iterable[float],
    rise_fall: float = 0.0,
    grid_step: float = 0.5,
    k_max: int = DEFAULT_K_MAX,
    q_max: int = DEFAULT_Q_MAX,
) -> list[PatternMetrics]:
    """Metrics of the steered pattern for each requested scan angle."""
    theta = theta_grid(grid_step)
    out = []
    for th in theta_list:
        plan = steering_delays(config, th)
        grid = build_pattern(config, plan, xi, rise_fall, theta, k_max, q_max)
        out.append(pattern_metrics(grid, th))
    return out


def significant_offsets(pattern: PatternGrid, floor_db: float) -> Sequence[int]:
    return [int(m) for m, row in zip(pattern.offsets, pattern.power_db) if row.max() >= floor_db]


__all__ = [
    "PatternGrid",
    "PatternMetrics",
    "build_pattern",
    "side_lobe_level",
    "half_power_beamwidth",
    "harmonic_peak_levels",
    "pattern_metrics",
    "scan_sweep",
    "is_stair_offset",
    "unwanted_levels",
]
