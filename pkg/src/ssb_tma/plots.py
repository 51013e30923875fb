"""SVG pattern plots (matplotlib, non-interactive backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

PLOT_FLOOR_DB = -40.0


def _axes(title: str):
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.set_xlim(0, 180)
    ax.set_ylim(PLOT_FLOOR_DB, 0)
    ax.set_xlabel("theta (deg)")
    ax.set_ylabel("normalized power (dB)")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    return fig, ax


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


def plot_overlay(theta, curves: dict[str, np.ndarray], path: str | Path, title: str = "") -> Path:
    """All ``curves`` (label -> dB values) on one set of axes."""
    fig, ax = _axes(title)
    for label, values in curves.items():
        ax.plot(theta, np.maximum(values, PLOT_FLOOR_DB), lw=1, label=label)
    if len(curves) <= 12:
        ax.legend(fontsize=7, loc="upper right")
    return _save(fig, Path(path))


def plot_single(theta, values: np.ndarray, path: str | Path, title: str = "") -> Path:
    fig, ax = _axes(title)
    ax.plot(theta, np.maximum(values, PLOT_FLOOR_DB), lw=1)
    return _save(fig, Path(path))


def plot_waveform(t, columns: dict[str, np.ndarray], path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    for label, values in columns.items():
        ax.step(t, values, where="post", lw=1, label=label)
    ax.set_xlabel("t / T0")
    ax.set_ylabel("amplitude")
    ax.legend(fontsize=7)
    ax.grid(True, alpha=0.3)
    return _save(fig, Path(path))
