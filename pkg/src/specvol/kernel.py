"""The implied time-domain smoothing kernel and the time-domain estimator.

The frequency-wise shrinkage curve L has an inverse DFT l_tau which acts as a
circular smoothing window on the autocovariance of the increments; summing
the smoothed autocovariance reproduces the frequency-domain estimate exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidParameterError
from .spectral import increments
from .whittle import RatioCurve


@dataclass(frozen=True)
class Kernel:
    """Circular lag weights l[tau], tau = 0..N-1."""

    l: np.ndarray
    form: str = "numeric"


def kernel_from_ratio(rc: RatioCurve) -> Kernel:
    """l = (1/N) * inverse DFT of the ratio curve; real by symmetry."""
    l = np.fft.ifft(rc.l)
    return Kernel(l.real.copy(), form="numeric")


def kernel_closed_form(sig2_x: float, sig2_eps: float, tau):
    """Leading-order closed form of the kernel, chosen by noise regime.

    Low noise (sig2_eps < sig2_x): (sig2_eps / sig2_x)^tau.
    High noise (sig2_eps > sig2_x): (sx / 2 se) * (1 - sx / se)^tau with
    sx, se the standard deviations.
    """
    if sig2_x <= 0 or sig2_eps <= 0:
        raise InvalidParameterError("variances must be positive")
    if sig2_eps == sig2_x:
        raise DomainError("noise-to-signal ratio exactly 1: neither expansion is valid")
    tau_arr = np.asarray(tau)
    if sig2_eps < sig2_x:
        out = (sig2_eps / sig2_x) ** tau_arr.astype(float)
    else:
        sx = math.sqrt(sig2_x)
        se = math.sqrt(sig2_eps)
        out = sx / (2.0 * se) * (1.0 - sx / se) ** tau_arr.astype(float)
    return out if out.ndim else float(out)


def kernel_laplace(sig2_x: float, sig2_eps: float, tau):
    """Laplace-window approximation (sx / 2 se) * exp(-(sx / se) |tau|)."""
    if sig2_x <= 0 or sig2_eps <= 0:
        raise InvalidParameterError("variances must be positive")
    sx = math.sqrt(sig2_x)
    se = math.sqrt(sig2_eps)
    out = sx / (2.0 * se) * np.exp(-(sx / se) * np.abs(np.asarray(tau, dtype=float)))
    return out if out.ndim else float(out)


def time_domain_m1(series, kern: Kernel) -> float:
    """Kernel-smoothed circular increment autocovariance, summed over lags.

    Equals the frequency-domain shrinkage estimate when the kernel is the
    inverse DFT of the same ratio curve (convolution theorem).
    """
    inc = increments(series)
    n = inc.grid.n
    if len(kern.l) != n:
        raise InvalidParameterError("kernel length must equal the number of increments")
    f = np.fft.fft(inc.d)
    acov = np.fft.ifft(f.real**2 + f.imag**2).real  # circular sum_j d_j d_{j+u}
    return float(np.dot(kern.l, acov))
