"""
Time-modulation efficiency of the SSB array.

The overall efficiency splits into ``eta = eta_tma * eta_bfn``:

* ``eta_tma`` = useful power (the +1 harmonic of the ungated term) over the
  total power radiated by the time-modulated array;
* ``eta_bfn`` = total time-modulated power over that of a uniform static
  array with the same number of elements (``4 pi N`` for half-wavelength
  spacing and isotropic elements).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from .harmonics import FEED_NORM, branch_delay_factor
from .pulses import (
    STAIR_PEAK,
    TRAPEZOID_SAMPLES,
    PulseKind,
    PulseSpec,
    quadrature_spectrum,
    rect_coefficient,
)

# 128 / (pi (1 + sqrt 2)^2): power of the +1 line of one always-on element
_UNIT_POWER = 128.0 / (np.pi * STAIR_PEAK**2)


def polygamma1(z: float, terms: int = 2000) -> float:
    """Trigamma function ``sum_{k>=0} 1/(z+k)^2`` for ``z > 0``.

    Direct summation of ``terms`` terms, then the Euler-Maclaurin tail
    ``1/(z+K) + 1/(2 (z+K)^2) + 1/(6 (z+K)^3)``.
    """
    if not z > 0:
        raise ValueError(f"polygamma1 needs z > 0, got {z}")
    k = np.arange(terms, dtype=float)
    head = np.sum(1.0 / (z + k[::-1]) ** 2)  # small terms first
    x = z + terms
    return float(head + 1.0 / x + 1.0 / (2.0 * x**2) + 1.0 / (6.0 * x**3))


@dataclass(frozen=True)
class SeriesConstant:
    a0: float
    psi1_eighth: float
    psi1_seven_eighths: float


@lru_cache(maxsize=None)
def series_constant() -> SeriesConstant:
    p1 = polygamma1(1.0 / 8.0)
    p7 = polygamma1(7.0 / 8.0)
    return SeriesConstant((p1 + p7) / 64.0, p1, p7)


def a0_constant(method: str = "polygamma", q_max: int = 10**6) -> float:
    """``A0 = sum over q in {1, 7, 9, 15, ...} of 1/q^2`` (about 1.053).

    ``method="polygamma"`` uses ``(psi1(1/8) + psi1(7/8)) / 64``;
    ``method="direct_sum"`` adds the terms with ``q <= q_max`` only.
    """
    if method == "polygamma":
        return series_constant().a0
    if method == "direct_sum":
        q = np.arange(1, q_max + 1, dtype=float)
        r = np.arange(1, q_max + 1) % 8
        q = q[(r == 1) | (r == 7)]
        return float(np.sum(1.0 / q[::-1] ** 2))
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class EfficiencyReport:
    p_useful: float
    p_radiated: float
    p_static: float
    eta_tma: float
    eta_bfn: float
    eta: float

    @property
    def eta_tma_db(self) -> float:
        return float(10 * np.log10(self.eta_tma))

    @property
    def eta_bfn_db(self) -> float:
        return float(10 * np.log10(self.eta_bfn))

    @property
    def eta_db(self) -> float:
        return float(10 * np.log10(self.eta))

    def as_dict(self) -> dict:
        d = asdict(self)
        d.update(eta_tma_db=self.eta_tma_db, eta_bfn_db=self.eta_bfn_db, eta_db=self.eta_db)
        return d


def _check_xi(xi) -> np.ndarray:
    x = np.atleast_1d(np.asarray(xi, dtype=float))
    if x.size == 0:
        raise ValueError("need at least one duty cycle")
    if np.any(x <= 0) or np.any(x > 1):
        raise ValueError("duty cycles must lie in (0, 1]")
    return x


def _report(p_useful: float, p_radiated: float, n: int) -> EfficiencyReport:
    p_static = 4.0 * np.pi * n
    eta_tma = p_useful / p_radiated
    eta_bfn = p_radiated / p_static
    return EfficiencyReport(p_useful, p_radiated, p_static, eta_tma, eta_bfn, eta_tma * eta_bfn)


def efficiency_report(xi, a0: float | None = None) -> EfficiencyReport:
    """Closed-form efficiencies for ideal pulses and duty cycles ``xi``.

    Steering delays do not enter: they only rotate line phases.
    """
    x = _check_xi(xi)
    a0 = a0_constant() if a0 is None else a0
    p_radiated = _UNIT_POWER * a0 * np.sum(x)
    p_useful = _UNIT_POWER * np.sum(x**2)
    return _report(float(p_useful), float(p_radiated), x.size)


def efficiency_report_numeric(
    xi,
    rise_fall: float = 0.0,
    delays=None,
    tau: float = 0.25,
    k_max: int = 10_000,
    samples: int = TRAPEZOID_SAMPLES,
) -> EfficiencyReport:
    """Efficiencies from numerically obtained spectral lines.

    The stair-step lines come from quadrature of the (possibly trapezoidal)
    waveform; every gate line ``|k| <= k_max`` is paired with every stair
    line and the powers ``4 pi sum_n |weight|^2`` are added term by term.
    The useful power is the k = 0, +1 term.
    """
    x = _check_xi(xi)
    d = np.zeros(x.size) if delays is None else np.mod(np.asarray(getattr(delays, "delays", delays), float), 1.0)
    if d.shape != x.shape:
        raise ValueError("one delay per element is required")
    kind = PulseKind.TRAPEZOID_STAIR_STEP if rise_fall > 0 else PulseKind.STAIR_STEP
    orders, w = quadrature_spectrum(PulseSpec(kind, rise_fall=rise_fall), samples)

    branch = FEED_NORM * w * (1.0 + 1j * branch_delay_factor(orders, tau))
    shift = np.exp(-2j * np.pi * np.outer(d, orders))
    feed_power = np.sum(np.abs(branch[None, :] * shift) ** 2, axis=1)
    useful_line = np.abs(branch[1] * shift[:, 1]) ** 2

    k = np.arange(-k_max, k_max + 1)
    gate_power = np.array([np.sum(np.abs(rect_coefficient(xn, k)) ** 2) for xn in x])

    p_radiated = 4.0 * np.pi * np.sum(gate_power * feed_power)
    p_useful = 4.0 * np.pi * np.sum(x**2 * useful_line)
    return _report(float(p_useful), float(p_radiated), x.size)
