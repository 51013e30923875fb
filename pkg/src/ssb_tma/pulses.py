"""
Periodic switching waveforms and their Fourier lines.

All times are fractions of the modulation period (T0 = 1). Three odd
waveforms are supported in closed form:

* two-state square wave ``u``: +1 on [0, 1/2), -1 on [1/2, 1)
* tri-state square wave ``v``: +sqrt(2) on [1/8, 3/8), -sqrt(2) on [5/8, 7/8)
* four-level stair step ``w = u + v`` with levels +-1, +-(1 + sqrt(2))

plus the rectangular on/off pulse ``c`` that gates the element amplitude and
a trapezoidal stair step whose transitions ramp linearly over ``rise_fall``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

import numpy as np

SQRT2 = np.sqrt(2.0)
STAIR_PEAK = 1.0 + SQRT2

DEFAULT_Q_MAX = 31
TRAPEZOID_SAMPLES = 2**14
ORACLE_SAMPLES = 2**16


class PulseKind(str, enum.Enum):
    TWO_STATE_SQUARE = "two_state_square"
    TRI_STATE_SQUARE = "tri_state_square"
    STAIR_STEP = "stair_step"
    RECT = "rect"
    TRAPEZOID_STAIR_STEP = "trapezoid_stair_step"


# Transition instants within one period and the level entered at each one.
_BREAKPOINTS = {
    PulseKind.TWO_STATE_SQUARE: (
        np.array([0.0, 0.5]),
        np.array([1.0, -1.0]),
    ),
    PulseKind.TRI_STATE_SQUARE: (
        np.array([1 / 8, 3 / 8, 5 / 8, 7 / 8]),
        np.array([SQRT2, 0.0, -SQRT2, 0.0]),
    ),
    PulseKind.STAIR_STEP: (
        np.array([0.0, 1 / 8, 3 / 8, 1 / 2, 5 / 8, 7 / 8]),
        np.array([1.0, STAIR_PEAK, 1.0, -1.0, -STAIR_PEAK, -1.0]),
    ),
}
_BREAKPOINTS[PulseKind.TRAPEZOID_STAIR_STEP] = _BREAKPOINTS[PulseKind.STAIR_STEP]

_ODD_KINDS = (
    PulseKind.TWO_STATE_SQUARE,
    PulseKind.TRI_STATE_SQUARE,
    PulseKind.STAIR_STEP,
)


@dataclass(frozen=True)
class PulseSpec:
    """Declarative description of one periodic modulating waveform.

    Parameters
    ----------
    kind : PulseKind
        Waveform family.
    delay : float
        Time shift as a fraction of the period, in [0, 1). For ``RECT`` this
        is the switch-on instant.
    duty : float
        Normalized on-time in (0, 1]. Only meaningful for ``RECT``.
    rise_fall : float
        Full linear ramp duration as a fraction of the period, in [0, 0.25).
        Only meaningful for ``TRAPEZOID_STAIR_STEP``.
    period : float
        Kept for bookkeeping; every computation is done in units of it.
    """

    kind: PulseKind
    delay: float = 0.0
    duty: float = 1.0
    rise_fall: float = 0.0
    period: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", PulseKind(self.kind))
        if not 0.0 <= self.delay < 1.0:
            raise ValueError(f"delay must be in [0, 1), got {self.delay}")
        if not 0.0 < self.duty <= 1.0:
            raise ValueError(f"duty must be in (0, 1], got {self.duty}")
        if not 0.0 <= self.rise_fall < 0.25:
            raise ValueError(f"rise_fall must be in [0, 0.25), got {self.rise_fall}")
        if self.kind is PulseKind.TRAPEZOID_STAIR_STEP and self.rise_fall >= 0.125:
            # ramps would overlap the 1/8-long stair segments
            raise ValueError("rise_fall must be below 0.125 for the stair-step ramps")
        if self.period <= 0:
            raise ValueError(f"period must be positive, got {self.period}")


# ---------------------------------------------------------------------------
# Harmonic index sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HarmonicIndexSets:
    """Harmonic orders carried by the stair-step pulse, up to ``truncation``.

    ``upsilon`` = {1, 7, 9, 15, 17, ...}; ``upsilon1`` = {1, 9, 17, ...} are
    radiated on the positive side, ``upsilon2`` = {7, 15, 23, ...} on the
    negative side once the two delayed branches are combined.
    """

    truncation: int
    upsilon: tuple[int, ...]
    upsilon1: tuple[int, ...]
    upsilon2: tuple[int, ...]

    @classmethod
    def up_to(cls, q_max: int = DEFAULT_Q_MAX) -> "HarmonicIndexSets":
        q = np.arange(1, q_max + 1)
        ups1 = q[q % 8 == 1]
        ups2 = q[q % 8 == 7]
        ups = np.sort(np.concatenate([ups1, ups2]))
        return cls(q_max, tuple(int(x) for x in ups), tuple(int(x) for x in ups1), tuple(int(x) for x in ups2))


def in_upsilon(q: int | np.ndarray) -> bool | np.ndarray:
    """True where ``|q|`` belongs to {1, 7, 9, 15, ...}, i.e. ``|q| mod 8`` is 1 or 7."""
    r = np.abs(q) % 8
    return (r == 1) | (r == 7)


def upsilon_branch(q: int) -> int:
    """+1 for orders radiated at +q, -1 for orders radiated at -q."""
    if q <= 0 or not in_upsilon(q):
        raise ValueError(f"order {q} is not carried by the stair-step pulse")
    return 1 if q % 8 == 1 else -1


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def _ideal_levels(kind: PulseKind, t: np.ndarray) -> np.ndarray:
    edges, levels = _BREAKPOINTS[kind]
    idx = np.searchsorted(edges, t, side="right") - 1
    # t before the first edge wraps to the last level of the period
    return levels[idx % len(levels)]


def _trapezoid_levels(rise_fall: float, t: np.ndarray) -> np.ndarray:
    edges, levels = _BREAKPOINTS[PulseKind.STAIR_STEP]
    before = np.roll(levels, 1)
    half = rise_fall / 2.0
    xp = np.column_stack([edges - half, edges + half]).ravel()
    fp = np.column_stack([before, levels]).ravel()
    return np.interp(t, xp, fp, period=1.0)


def sample_waveform(spec: PulseSpec, t: float | np.ndarray) -> float | np.ndarray:
    """Instantaneous level of ``spec`` at time(s) ``t`` (fractions of a period).

    Segments are closed on the left, so ``t`` exactly on a transition returns
    the level that is being entered. Times outside [0, 1) wrap periodically.

    Examples
    --------
    >>> round(float(sample_waveform(PulseSpec(PulseKind.STAIR_STEP), 0.125)), 4)
    2.4142
    """
    scalar = np.ndim(t) == 0
    tt = np.mod(np.asarray(t, dtype=float) - spec.delay, 1.0)
    if spec.kind is PulseKind.RECT:
        out = (tt < spec.duty).astype(float)
    elif spec.kind is PulseKind.TRAPEZOID_STAIR_STEP and spec.rise_fall > 0:
        out = _trapezoid_levels(spec.rise_fall, tt)
    else:
        out = _ideal_levels(spec.kind, tt)
    return float(out) if scalar else out


# ---------------------------------------------------------------------------
# Closed-form coefficients
# ---------------------------------------------------------------------------

def tri_state_sign(q: int) -> int:
    """Sign of the tri-state coefficient relative to the two-state one, odd ``q``.

    Follows the triangular-number parity (-1)**((q+1)(q-1)/8).
    """
    return -1 if ((q + 1) * (q - 1) // 8) % 2 else 1


def closed_form_coefficient(kind: PulseKind | str, q: int) -> complex:
    """Exact Fourier coefficient of order ``q`` for an ideal odd waveform.

    Raises
    ------
    ValueError
        For kinds without a closed form here (``RECT`` has its own function;
        the trapezoid is only available by quadrature).
    """
    kind = PulseKind(kind)
    if kind not in _ODD_KINDS:
        raise ValueError(f"no closed-form coefficient for {kind.value}")
    q = int(q)
    if q % 2 == 0:
        return 0j
    u_q = -2j / (np.pi * q)
    if kind is PulseKind.TWO_STATE_SQUARE:
        return u_q
    v_q = tri_state_sign(q) * u_q
    if kind is PulseKind.TRI_STATE_SQUARE:
        return v_q
    # stair step: u and v reinforce for |q| mod 8 in {1, 7} and cancel otherwise
    return u_q + v_q if in_upsilon(q) else 0j


def stair_step_lines(q_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form stair-step lines for orders -q_max..q_max.

    Returns
    -------
    orders : ndarray of int
    lines : ndarray of complex
    """
    p = np.arange(-q_max, q_max + 1)
    safe = np.where(p == 0, 1, p)
    lines = np.where(in_upsilon(p), -4j / (np.pi * safe), 0j)
    return p, lines


def rect_coefficient(xi: float | np.ndarray, k: int | np.ndarray) -> complex | np.ndarray:
    """Fourier coefficient ``xi * sinc(k pi xi) * exp(-j k pi xi)`` of an on/off pulse.

    The pulse is on over [0, xi) of each period. Broadcasts over ``xi`` and ``k``.
    """
    xi_arr = np.asarray(xi, dtype=float)
    if np.any(xi_arr <= 0) or np.any(xi_arr > 1):
        raise ValueError(f"duty cycle must be in (0, 1], got {xi}")
    k_arr = np.asarray(k)
    # np.sinc is the normalized sinc: sin(pi x)/(pi x)
    c = xi_arr * np.sinc(k_arr * xi_arr) * np.exp(-1j * np.pi * k_arr * xi_arr)
    return complex(c) if c.ndim == 0 else c


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

def quadrature_spectrum(spec: PulseSpec, samples: int = ORACLE_SAMPLES) -> tuple[np.ndarray, np.ndarray]:
    """All Fourier lines of ``spec`` from a midpoint-sampled DFT.

    The undelayed waveform is sampled at cell midpoints ``(i + 1/2)/samples``
    (transitions at multiples of 1/8 fall on cell edges when ``samples`` is a
    multiple of 8), then the delay is applied exactly through the shift
    theorem.

    Returns
    -------
    orders : ndarray of int
        FFT order of each line, in ``np.fft.fftfreq`` layout.
    lines : ndarray of complex
    """
    if samples < 8:
        raise ValueError("need at least 8 samples")
    t = (np.arange(samples) + 0.5) / samples
    base = PulseSpec(spec.kind, 0.0, spec.duty, spec.rise_fall, spec.period)
    x = sample_waveform(base, t)
    orders = np.rint(np.fft.fftfreq(samples, 1.0 / samples)).astype(int)
    lines = np.fft.fft(x) / samples
    lines *= np.exp(-1j * np.pi * orders / samples)
    if spec.delay:
        lines *= np.exp(-2j * np.pi * orders * spec.delay)
    return orders, lines


def quadrature_coefficient(spec: PulseSpec, order: int, samples: int = ORACLE_SAMPLES) -> complex:
    """Numerical Fourier coefficient of ``spec`` at ``order``."""
    order = int(order)
    if samples < 64 * abs(order):
        raise ValueError(f"need at least {64 * abs(order)} samples for order {order}")
    _, lines = quadrature_spectrum(spec, samples)
    return complex(lines[order % samples])


def coefficients(spec: PulseSpec, orders: Iterable[int], samples: int = TRAPEZOID_SAMPLES) -> np.ndarray:
    """Coefficients at ``orders``, closed form when one exists, else quadrature."""
    orders = np.asarray(list(orders), dtype=int)
    if spec.kind in _ODD_KINDS:
        shift = np.exp(-2j * np.pi * orders * spec.delay)
        return np.array([closed_form_coefficient(spec.kind, q) for q in orders]) * shift
    if spec.kind is PulseKind.RECT:
        return rect_coefficient(spec.duty, orders) * np.exp(-2j * np.pi * orders * spec.delay)
    _, lines = quadrature_spectrum(spec, samples)
    return lines[orders % samples]
