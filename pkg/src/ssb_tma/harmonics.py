"""
Dynamic excitations and harmonic array factors of the SSB time-modulated array.

Each element n is fed through two stair-step branches, ``w_n(t)`` and
``w_n(t - tau)`` (the second one rotated by +90 deg), and gated by an on/off
pulse ``c_n(t)`` of duty ``xi_n``. The normalized feed is

    a_n(t) = c_n(t) * (w_n(t) + j w_n(t - tau)) / (sqrt(2) (1 + sqrt(2)))

and the field radiated at carrier offset ``m * w0`` is
``E_m(theta) = sum_n A_{n,m} exp(j beta z_n cos theta)`` where ``A_{n,m}`` are
the Fourier lines of ``a_n``.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from .pulses import (
    STAIR_PEAK,
    SQRT2,
    TRAPEZOID_SAMPLES,
    PulseKind,
    PulseSpec,
    in_upsilon,
    quadrature_spectrum,
    rect_coefficient,
    stair_step_lines,
    upsilon_branch,
)

DEFAULT_K_MAX = 20
DEFAULT_Q_MAX = 31
FEED_NORM = 1.0 / (SQRT2 * STAIR_PEAK)


@dataclass(frozen=True)
class ArrayConfig:
    """Linear array geometry along z.

    Parameters
    ----------
    n_elements : int
        Number of elements N (>= 2).
    spacing : float
        Inter-element spacing in wavelengths.
    positions : tuple of float, optional
        Element positions in wavelengths; defaults to ``n * spacing``.
    tau : float
        Delay between the two stair-step branches, as a fraction of the
        period. 0.25 cancels the mirror harmonics.
    """

    n_elements: int
    spacing: float = 0.5
    positions: tuple[float, ...] | None = None
    tau: float = 0.25

    def __post_init__(self) -> None:
        if int(self.n_elements) != self.n_elements or self.n_elements < 2:
            raise ValueError(f"n_elements must be an integer >= 2, got {self.n_elements}")
        if self.spacing <= 0:
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        if self.positions is None:
            object.__setattr__(self, "positions", tuple(float(n * self.spacing) for n in range(self.n_elements)))
        else:
            pos = tuple(float(z) for z in self.positions)
            if len(pos) != self.n_elements:
                raise ValueError("positions must have one entry per element")
            if np.any(np.diff(pos) <= 0):
                raise ValueError("positions must be strictly increasing")
            object.__setattr__(self, "positions", pos)
        if not 0.0 <= self.tau < 1.0:
            raise ValueError(f"tau must be in [0, 1), got {self.tau}")

    @property
    def z(self) -> np.ndarray:
        return np.asarray(self.positions)

    @property
    def cancels_mirror(self) -> bool:
        return self.tau == 0.25


@dataclass(frozen=True)
class SteeringPlan:
    theta_scan: float
    delays: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        d = np.mod(np.asarray(self.delays, dtype=float), 1.0)
        d.setflags(write=False)
        object.__setattr__(self, "delays", d)


class Branch(str, enum.Enum):
    PLUS = "plus"    # q in {1, 9, 17, ...}, radiated at k + q
    MINUS = "minus"  # q in {7, 15, 23, ...}, radiated at k - q


@dataclass(frozen=True)
class ExcitationSet:
    k: int
    q: int
    branch: Branch
    weights: np.ndarray = field(repr=False)

    @property
    def offset(self) -> int:
        return self.k + self.q if self.branch is Branch.PLUS else self.k - self.q


@dataclass(frozen=True)
class CombinedSpectrum:
    """Per-element lines of ``(w_n(t) + j w_n(t - tau)) / (sqrt(2)(1 + sqrt(2)))``."""

    orders: np.ndarray
    lines: np.ndarray  # (n_elements, len(orders))
    cancelled: bool

    def line(self, order: int) -> np.ndarray:
        idx = np.searchsorted(self.orders, order)
        if idx >= len(self.orders) or self.orders[idx] != order:
            raise KeyError(order)
        return self.lines[:, idx]


def _as_delays(config: ArrayConfig, delays: SteeringPlan | np.ndarray | None) -> np.ndarray:
    if delays is None:
        return np.zeros(config.n_elements)
    d = delays.delays if isinstance(delays, SteeringPlan) else np.mod(np.asarray(delays, dtype=float), 1.0)
    if d.shape != (config.n_elements,):
        raise ValueError(f"expected {config.n_elements} delays, got shape {d.shape}")
    return d


def _as_xi(config: ArrayConfig, xi) -> np.ndarray:
    if xi is None:
        return np.ones(config.n_elements)
    x = np.asarray(xi, dtype=float)
    if x.shape != (config.n_elements,):
        raise ValueError(f"expected {config.n_elements} duty cycles, got shape {x.shape}")
    if np.any(x <= 0) or np.any(x > 1):
        raise ValueError("duty cycles must lie in (0, 1]")
    return x


def theta_grid(step: float = 0.05) -> np.ndarray:
    """Uniform grid over [0, 180] degrees, both ends included."""
    n = int(round(180.0 / step))
    if n < 1 or not np.isclose(n * step, 180.0):
        raise ValueError(f"grid step must divide 180 degrees, got {step}")
    return np.linspace(0.0, 180.0, n + 1)


def steering_delays(config: ArrayConfig, theta_scan: float) -> SteeringPlan:
    """Stair-step delays that steer the +1 harmonic towards ``theta_scan`` degrees.

    ``D_n / T0 = z_n cos(theta_scan)`` with ``z_n`` in wavelengths, wrapped
    into [0, 1); the +1 line then picks up the progressive phase
    ``exp(-j 2 pi z_n cos theta_scan)``.
    """
    if not 0.0 < theta_scan < 180.0:
        raise ValueError(f"theta_scan must be in (0, 180) degrees, got {theta_scan}")
    c = np.cos(np.radians(theta_scan))
    if theta_scan == 90.0:
        c = 0.0
    return SteeringPlan(float(theta_scan), config.z * c)


def branch_delay_factor(orders: np.ndarray, tau: float) -> np.ndarray:
    """``exp(-j 2 pi p tau)``; exact powers of -j when tau is a multiple of 1/4."""
    if (4 * tau) == int(4 * tau):
        table = np.array([1, -1j, -1, 1j])
        return table[(orders * int(4 * tau)) % 4]
    return np.exp(-2j * np.pi * orders * tau)


def stair_lines(q_max: int, rise_fall: float = 0.0, samples: int = TRAPEZOID_SAMPLES) -> tuple[np.ndarray, np.ndarray]:
    """Stair-step lines for orders -q_max..q_max.

    Ideal pulses use the closed form; a non-zero ``rise_fall`` switches to the
    trapezoidal waveform evaluated by quadrature.
    """
    if rise_fall == 0.0:
        return stair_step_lines(q_max)
    if samples <= 2 * q_max:
        raise ValueError("not enough quadrature samples for the requested q_max")
    orders, lines = quadrature_spectrum(PulseSpec(PulseKind.TRAPEZOID_STAIR_STEP, rise_fall=rise_fall), samples)
    p = np.arange(-q_max, q_max + 1)
    return p, lines[p % samples]


def ssb_combined_spectrum(
    config: ArrayConfig,
    delays: SteeringPlan | np.ndarray | None = None,
    q_max: int = DEFAULT_Q_MAX,
    rise_fall: float = 0.0,
) -> CombinedSpectrum:
    """Lines of the normalized two-branch stair-step feed of every element.

    With ``tau = 1/4`` the lines at -1, +7, -9, +15, ... vanish and only
    +q (q = 1, 9, 17, ...) and -q (q = 7, 15, 23, ...) survive. Any other
    ``tau`` returns the uncancelled spectrum and emits a ``RuntimeWarning``.
    """
    d = _as_delays(config, delays)
    p, w = stair_lines(q_max, rise_fall)
    if not config.cancels_mirror:
        warnings.warn(f"tau={config.tau} does not cancel the mirror harmonics", RuntimeWarning, stacklevel=2)
    branch_sum = 1.0 + 1j * branch_delay_factor(p, config.tau)
    shift = np.exp(-2j * np.pi * np.outer(d, p))
    lines = FEED_NORM * (w * branch_sum)[None, :] * shift
    return CombinedSpectrum(p, lines, config.cancels_mirror)


def dynamic_excitations(
    config: ArrayConfig,
    delays: SteeringPlan | np.ndarray | None,
    xi,
    k: int,
    q: int,
) -> ExcitationSet:
    """Normalized per-element weights of the (k, q) harmonic term.

    ``+-8 C_nk / (j sqrt(2) (1 + sqrt(2)) pi q) * exp(-+j 2 pi q D_n)`` with the
    upper sign for q in {1, 9, ...} and the lower one for q in {7, 15, ...}.
    """
    sign = upsilon_branch(q)
    d = _as_delays(config, delays)
    x = _as_xi(config, xi)
    c = rect_coefficient(x, k)
    w = sign * 8.0 * c / (1j * SQRT2 * STAIR_PEAK * np.pi * q) * np.exp(-sign * 2j * np.pi * q * d)
    return ExcitationSet(int(k), int(q), Branch.PLUS if sign > 0 else Branch.MINUS, w)


def steering_matrix(config: ArrayConfig, theta_deg: np.ndarray) -> np.ndarray:
    """``exp(j 2 pi z_n cos theta)``, shape (n_elements, len(theta))."""
    u = np.cos(np.radians(np.asarray(theta_deg, dtype=float)))
    return np.exp(2j * np.pi * np.outer(config.z, u))


def array_factor(config: ArrayConfig, excitations: ExcitationSet | np.ndarray, theta_deg) -> np.ndarray:
    """``sum_n weight_n exp(j beta z_n cos theta)`` on ``theta_deg``."""
    theta = np.atleast_1d(np.asarray(theta_deg, dtype=float))
    if theta.size == 0:
        raise ValueError("empty angle grid")
    w = excitations.weights if isinstance(excitations, ExcitationSet) else np.asarray(excitations)
    return w @ steering_matrix(config, theta)


def composite_offset_field(
    config: ArrayConfig,
    delays: SteeringPlan | np.ndarray | None,
    xi,
    offset: int,
    theta_deg,
    k_max: int = DEFAULT_K_MAX,
    q_max: int = DEFAULT_Q_MAX,
) -> np.ndarray:
    """Coherent field at carrier offset ``offset`` summed term by term.

    Adds every (k, q) with ``k + q = offset`` (q in {1, 9, ...}) or
    ``k - q = offset`` (q in {7, 15, ...}), ``|k| <= k_max`` and ``q <= q_max``.
    """
    field_ = np.zeros(np.atleast_1d(theta_deg).shape, dtype=complex)
    for q in range(1, q_max + 1):
        if not in_upsilon(q):
            continue
        k = offset - q if upsilon_branch(q) > 0 else offset + q
        if abs(k) <= k_max:
            field_ += array_factor(config, dynamic_excitations(config, delays, xi, k, q), theta_deg)
    return field_


def element_lines(
    config: ArrayConfig,
    delays: SteeringPlan | np.ndarray | None = None,
    xi=None,
    k_max: int = DEFAULT_K_MAX,
    q_max: int = DEFAULT_Q_MAX,
    rise_fall: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Lines ``A_{n,m}`` of the full gated feed, offsets -(k_max+q_max)..(k_max+q_max).

    The gate lines (|k| <= k_max) are convolved with the two-branch stair-step
    lines (|p| <= q_max) element by element.

    Returns
    -------
    offsets : ndarray of int
    lines : ndarray, shape (n_elements, len(offsets))
    """
    x = _as_xi(config, xi)
    spec = ssb_combined_spectrum(config, delays, q_max, rise_fall)
    k = np.arange(-k_max, k_max + 1)
    gate = rect_coefficient(x[:, None], k[None, :])
    n_p = spec.lines.shape[1]
    out = np.zeros((config.n_elements, 2 * k_max + n_p), dtype=complex)
    for i in range(2 * k_max + 1):
        out[:, i:i + n_p] += gate[:, i:i + 1] * spec.lines
    offsets = np.arange(-(k_max + q_max), k_max + q_max + 1)
    return offsets, out


def offset_fields(
    config: ArrayConfig,
    delays: SteeringPlan | np.ndarray | None,
    xi,
    theta_deg,
    k_max: int = DEFAULT_K_MAX,
    q_max: int = DEFAULT_Q_MAX,
    rise_fall: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Fields of every offset on ``theta_deg``; shape (n_offsets, n_theta)."""
    offsets, lines = element_lines(config, delays, xi, k_max, q_max, rise_fall)
    return offsets, lines.T @ steering_matrix(config, theta_deg)


def term_power_sum(config: ArrayConfig, delays, xi, k_max: int, q_max: int) -> float:
    """``4 pi sum_{k,q} sum_n |weight|^2`` over every (k, q) term, term by term.

    This is the total radiated mean power as the sum of the individual
    harmonic powers (half-wavelength spacing, isotropic elements).
    """
    x = _as_xi(config, xi)
    _as_delays(config, delays)
    k = np.arange(-k_max, k_max + 1)
    gate_power = np.sum(np.abs(rect_coefficient(x[:, None], k[None, :])) ** 2)
    q = np.arange(1, q_max + 1)
    q = q[in_upsilon(q)]
    per_q = 32.0 / (STAIR_PEAK * np.pi * q) ** 2
    return float(4 * np.pi * gate_power * per_q.sum())
