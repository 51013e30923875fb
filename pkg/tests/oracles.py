"""
Independent brute-force references used by the tests.

Nothing here imports the package: waveforms are rebuilt from their level
tables and the array factor is simulated directly in the time domain.
"""

from __future__ import annotations

import numpy as np

R2 = np.sqrt(2.0)


def stair_step(t):
    """Four-level stair step: 1, 1+sqrt2, 1 on the first half, negated on the second."""
    t = np.mod(np.asarray(t, dtype=float), 1.0)
    u = np.where(t < 0.5, 1.0, -1.0)
    v = np.where((t >= 1 / 8) & (t < 3 / 8), R2, 0.0) - np.where((t >= 5 / 8) & (t < 7 / 8), R2, 0.0)
    return u + v


def gate(t, xi):
    t = np.mod(np.asarray(t, dtype=float), 1.0)
    return (t < xi).astype(float)


def feed(t, xi, delay, tau=0.25):
    """Normalized two-branch gated feed of one element."""
    s = stair_step(t - delay) + 1j * stair_step(t - delay - tau)
    return gate(t, xi) * s / (R2 * (1 + R2))


def time_domain_offsets(z, xi, delays, theta_deg, samples=2**12, tau=0.25):
    """Per-offset fields from an FFT over one period of the simulated array factor.

    The array factor ``F(theta, t) = sum_n a_n(t) exp(j 2 pi z_n cos theta)`` is
    sampled at cell midpoints; line ``m`` is the DFT bin times ``exp(-j pi m / M)``.

    Returns
    -------
    orders : ndarray of int, fftfreq layout
    fields : ndarray, shape (samples, len(theta_deg))
    """
    t = (np.arange(samples) + 0.5) / samples
    a = np.array([feed(t, x, d, tau) for x, d in zip(xi, delays)])  # (N, M)
    steer = np.exp(2j * np.pi * np.outer(z, np.cos(np.radians(theta_deg))))
    af = a.T @ steer  # (M, Theta)
    orders = np.rint(np.fft.fftfreq(samples, 1.0 / samples)).astype(int)
    lines = np.fft.fft(af, axis=0) / samples
    lines *= np.exp(-1j * np.pi * orders / samples)[:, None]
    return orders, lines


def fourier_line(x_of_t, order, samples=2**16):
    """Midpoint-rule Fourier coefficient of a callable over one period."""
    t = (np.arange(samples) + 0.5) / samples
    return complex(np.mean(x_of_t(t) * np.exp(-2j * np.pi * order * t)))


def uniform_array_factor(n, d, theta_deg):
    """|sum_n exp(j 2 pi n d cos theta)|^2 normalized to 1."""
    psi = 2 * np.pi * d * np.cos(np.radians(theta_deg))
    af = np.exp(1j * np.outer(np.arange(n), psi)).sum(axis=0)
    return np.abs(af) ** 2 / n**2
