"""Differencing, the DFT of increments, periodograms and noise spectra.

The DFT is unitary (N^{-1/2} factor, e^{-2*pi*i} forward), so the sum of the
periodogram equals the sum of squared increments (Parseval).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidParameterError
from .noise import NoiseSpec
from .sdesim import Grid


@dataclass(frozen=True)
class IncrementSeries:
    """First differences d_j = u_{j+1} - u_j of a sampled series, length N."""

    grid: Grid
    d: np.ndarray

    def __post_init__(self):
        if len(self.d) != self.grid.n:
            raise InvalidParameterError("increment series must have length N")


@dataclass(frozen=True)
class Periodogram:
    """Squared moduli |J_k|^2 of the unitary DFT of increments, k = 0..N-1."""

    grid: Grid
    s: np.ndarray

    def __post_init__(self):
        if len(self.s) != self.grid.n:
            raise InvalidParameterError("periodogram must have length N")

    def validate(self, d: np.ndarray | None = None, rtol: float = 1e-12) -> None:
        """Check nonnegativity, Hermitian symmetry and (if d given) Parseval."""
        if np.any(self.s < 0):
            raise InvalidParameterError("periodogram has negative entries")
        if not np.allclose(self.s[1:], self.s[1:][::-1], rtol=1e-9, atol=0.0):
            raise InvalidParameterError("periodogram is not Hermitian-symmetric")
        if d is not None:
            lhs, rhs = self.s.sum(), float(np.dot(d, d))
            if abs(lhs - rhs) > rtol * max(abs(rhs), 1e-300):
                raise InvalidParameterError("Parseval identity violated")


def increments(series) -> IncrementSeries:
    """First differences of an observed series or latent path."""
    values = getattr(series, "y", None)
    if values is None:
        values = series.x
    return IncrementSeries(series.grid, np.diff(np.asarray(values, dtype=float)))


def dft_increments(inc: IncrementSeries) -> np.ndarray:
    """Unitary DFT of the increments, computed with an O(N log N) transform."""
    n = inc.grid.n
    return np.fft.fft(inc.d) / np.sqrt(n)


def periodogram(inc: IncrementSeries) -> Periodogram:
    """|J_k|^2 for k = 0..N-1; uses the real FFT and mirrors the upper half."""
    n = inc.grid.n
    half = np.fft.rfft(inc.d)
    s_half = (half.real**2 + half.imag**2) / n
    s = np.concatenate([s_half, s_half[-2:0:-1]])
    return Periodogram(inc.grid, s)


@lru_cache(maxsize=8)
def _sin2_table(n: int) -> np.ndarray:
    """4*sin^2(pi*k/N) for k = 0..N-1 (the differencing gain)."""
    k = np.arange(n)
    return 4.0 * np.sin(np.pi * k / n) ** 2


def white_noise_spectrum(sig2_eps: float, k, n: int):
    """Spectrum of differenced white noise: sig2_eps * 4*sin^2(pi*k/N)."""
    k = np.asarray(k)
    out = sig2_eps * 4.0 * np.sin(np.pi * k / n) ** 2
    return out if out.ndim else float(out)


def ma_gain(theta, k, n: int):
    """|1 + sum_m theta_m e^{2*pi*i*(k/N)*m}|^2 of the MA transfer function."""
    k = np.asarray(k, dtype=float)
    h = np.ones_like(k, dtype=complex)
    for m, t in enumerate(theta, start=1):
        h = h + t * np.exp(2j * np.pi * (k / n) * m)
    out = h.real**2 + h.imag**2
    return out if out.ndim else float(out)


def ma_noise_spectrum(sig2_eta: float, theta, k, n: int):
    """Spectrum of differenced MA(q) noise at DFT frequency index k."""
    if len(theta) == 0:
        return white_noise_spectrum(sig2_eta, k, n)
    k_arr = np.asarray(k)
    out = sig2_eta * ma_gain(theta, k_arr, n) * 4.0 * np.sin(np.pi * k_arr / n) ** 2
    return out if np.ndim(k) else float(out)


def noise_spectrum(spec: NoiseSpec, k, n: int):
    """Dispatch to the white or MA form according to the spec."""
    if spec.q == 0:
        return white_noise_spectrum(spec.sig2, k, n)
    return ma_noise_spectrum(spec.sig2, spec.theta, k, n)
