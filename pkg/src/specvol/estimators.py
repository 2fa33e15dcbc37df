"""Integrated-volatility estimators and their closed-form variance predictions.

Estimator tags follow the reporting convention used throughout the package:
b (naive realized volatility of the observed series), u (realized volatility
of the latent path), m1 (frequency-by-frequency shrinkage), w (N * fitted
signal variance), m2 (oracle shrinkage from the separately observed
components), s1/s2 (two-scale subsampling estimators).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .noise import ObservedSeries
from .sdesim import Grid, LatentPath
from .spectral import increments, periodogram
from .whittle import (
    FitOptions,
    WhittleFit,
    fit_ma,
    fit_white,
    multiscale_ratio,
    select_order_aicc,
)

ESTIMATOR_TAGS = ("b", "u", "m1", "m2", "w", "s1", "s2")


@dataclass(frozen=True)
class EstimateReport:
    name: str
    value: float
    fit: WhittleFit | None = None
    k_subsample: int | None = None
    degenerate: bool = False


@dataclass(frozen=True)
class FisherMatrix:
    """Diagonal limiting information for (tau_X, sigma^2_eps)."""

    i_tt: float
    i_ee: float


def _values(series) -> np.ndarray:
    v = getattr(series, "y", None)
    if v is None:
        v = getattr(series, "x", series)
    return np.asarray(v, dtype=float)


def realized_volatility(series) -> float:
    """Sum of squared increments of the sampled series."""
    v = _values(series)
    if len(v) < 2:
        raise InvalidParameterError("need at least two samples")
    d = np.diff(v)
    return float(np.dot(d, d))


def parse_noise_model(spec: str) -> tuple[str, int]:
    """Parse 'white', 'ma:q' or 'aicc:qmax' into (kind, order)."""
    s = spec.strip().lower()
    if s == "white":
        return "white", 0
    for kind in ("ma", "aicc"):
        if s.startswith(kind + ":"):
            try:
                order = int(s.split(":", 1)[1])
            except ValueError:
                raise InvalidParameterError(f"bad noise model {spec!r}") from None
            if order < 0 or (kind == "ma" and order < 1):
                raise InvalidParameterError(f"bad order in noise model {spec!r}")
            return kind, order
    raise InvalidParameterError(
        f"unknown noise model {spec!r}; expected white, ma:q or aicc:qmax")


def fit_series(series, noise_model: str = "white",
               opts: FitOptions | None = None) -> WhittleFit:
    """Periodogram + likelihood fit for the requested noise model."""
    kind, order = parse_noise_model(noise_model)
    per = periodogram(increments(series))
    if kind == "white":
        return fit_white(per, opts)
    if kind == "ma":
        return fit_ma(per, order, opts)
    _, fit, _ = select_order_aicc(per, order, opts)
    return fit


def multiscale_m1(series: ObservedSeries, noise_model: str = "white",
                  opts: FitOptions | None = None) -> EstimateReport:
    """Shrinkage estimator: sum_k l[k] * s[k] with l from the fitted model."""
    per = periodogram(increments(series))
    kind, order = parse_noise_model(noise_model)
    if kind == "white":
        fit = fit_white(per, opts)
    elif kind == "ma":
        fit = fit_ma(per, order, opts)
    else:
        _, fit, _ = select_order_aicc(per, order, opts)
    rc = multiscale_ratio(fit, series.grid)
    value = float(np.dot(rc.l, per.s))
    return EstimateReport("m1", value, fit=fit)


def m1_from_fit(series, fit: WhittleFit) -> EstimateReport:
    """m1 value for an already-fitted model (avoids refitting)."""
    per = periodogram(increments(series))
    rc = multiscale_ratio(fit, series.grid)
    return EstimateReport("m1", float(np.dot(rc.l, per.s)), fit=fit)


def whittle_w(fit: WhittleFit, g: Grid) -> EstimateReport:
    """Likelihood-invariant twin of m1: N times the fitted signal variance."""
    return EstimateReport("w", g.n * fit.sig2_x, fit=fit)


def oracle_m2(latent: LatentPath, noise_path: np.ndarray) -> EstimateReport:
    """Shrinkage with the ratio estimated from the separately observed
    signal and noise periodograms (simulation-only oracle)."""
    noise_path = np.asarray(noise_path, dtype=float)
    if len(noise_path) != latent.grid.n + 1:
        raise InvalidParameterError("noise path length must match the grid")
    sx = periodogram(increments(latent)).s
    obs = ObservedSeries(latent.grid, latent.x + noise_path)
    sy = periodogram(increments(obs)).s
    d_eps = np.diff(noise_path)
    half = np.fft.rfft(d_eps)
    se_half = (half.real**2 + half.imag**2) / latent.grid.n
    se = np.concatenate([se_half, se_half[-2:0:-1]])
    denom = sx + se
    degenerate = bool(np.any(denom == 0.0))
    with np.errstate(invalid="ignore", divide="ignore"):
        l = np.where(denom > 0, sx / np.where(denom > 0, denom, 1.0), 0.0)
    return EstimateReport("m2", float(np.dot(l, sy)), degenerate=degenerate)


def tsrv_avg(series, k_subsample: int) -> EstimateReport:
    """Average of realized volatilities over the K subsampled offset grids."""
    v = _values(series)
    n = len(v) - 1
    k = int(k_subsample)
    if k < 1 or k > n // 2:
        raise InvalidParameterError(f"subsample count must be in 1..N/2, got {k}")
    d = v[k:] - v[:-k]
    return EstimateReport("s2", float(np.dot(d, d)) / k, k_subsample=k)


def nbar(n: int, k: int) -> float:
    """Average number of increments per offset grid, (N - K + 1) / K."""
    return (n - k + 1) / k


def sparse_quarticity(series, t: float, sparse_step: int = 300) -> float:
    """Realized quarticity of the sparsely sampled series.

    Increments over `sparse_step` points are averaged across all grid offsets
    (the single-offset version is far too noisy to drive a subsampling rule:
    its relative standard deviation is ~40% at one trading day of data).
    """
    v = _values(series)
    n = len(v) - 1
    step = min(sparse_step, max(1, n // 4))
    d = v[step:] - v[:-step]  # all overlapping sparse increments
    n_sparse = n / step
    return float(n_sparse**2 / (3.0 * t) * np.mean(d**4))


def optimal_subsample_count(series, t: float, sig2_eps_hat: float | None = None,
                            sparse_step: int = 300) -> int:
    """Plug-in K* = round(c * N^{2/3}) from the two-scale theory.

    c = (12 sig_eps^4 / (T * Q))^{1/3} with the noise variance estimated as
    RV/(2N) by default and the quarticity Q from a sparse grid. Returns the
    unclamped rounded value; K* <= 1 signals the degenerate regime.
    """
    v = _values(series)
    n = len(v) - 1
    if sig2_eps_hat is None:
        sig2_eps_hat = realized_volatility(v) / (2.0 * n)
    quarticity = sparse_quarticity(v, t, sparse_step)
    if quarticity <= 0:
        return 0
    c = (12.0 * sig2_eps_hat**2 / (t * quarticity)) ** (1.0 / 3.0)
    return int(round(c * n ** (2.0 / 3.0)))


def sparse_optimal_subsample(series, t: float,
                             sig2_eps_hat: float | None = None,
                             sparse_step: int = 300) -> int:
    """Subsample count matching the sparse-optimal sample size.

    The bias-variance optimal number of sparse samples is
    n* = (T * Q / (4 sig_eps^4))^{1/3}; the corresponding subsample count is
    K = round(N / n*), clamped to the valid range 1..N/2. Plug-ins for the
    noise variance and the quarticity Q are as in optimal_subsample_count.
    """
    v = _values(series)
    n = len(v) - 1
    if sig2_eps_hat is None:
        sig2_eps_hat = realized_volatility(v) / (2.0 * n)
    quarticity = sparse_quarticity(v, t, sparse_step)
    if quarticity <= 0 or sig2_eps_hat <= 0:
        return 1
    n_opt = (t * quarticity / (4.0 * sig2_eps_hat**2)) ** (1.0 / 3.0)
    k = int(round(n / n_opt)) if n_opt > 0 else n // 2
    return max(1, min(k, n // 2))


def tsrv_first_best(series, t: float,
                    sig2_eps_hat: float | None = None) -> EstimateReport:
    """Bias-corrected two-scale estimator at the plug-in subsample count.

    Reported as 0 with the degenerate flag when the optimal count collapses
    to a single scale (no room for bias correction).
    """
    v = _values(series)
    n = len(v) - 1
    k_star = optimal_subsample_count(v, t, sig2_eps_hat)
    if k_star <= 1:
        return EstimateReport("s1", 0.0, k_subsample=max(k_star, 0), degenerate=True)
    k_star = min(k_star, n // 2)
    avg = tsrv_avg(v, k_star).value
    rv = realized_volatility(v)
    value = avg - nbar(n, k_star) / n * rv
    return EstimateReport("s1", value, k_subsample=k_star)


def predicted_variance_w(t: float, tau_x: float, sigma_eps: float, dt: float) -> float:
    """Leading-order variance of the w estimator: 16 T sig_eps tau_X^{3/2} sqrt(dt)."""
    for name, val in (("t", t), ("tau_x", tau_x), ("sigma_eps", sigma_eps), ("dt", dt)):
        if not (math.isfinite(val) and val > 0):
            raise InvalidParameterError(f"{name} must be positive, got {val}")
    return 16.0 * t * sigma_eps * tau_x**1.5 * math.sqrt(dt)


def fisher_matrix(t: float, tau_x: float, sigma_eps: float) -> FisherMatrix:
    """Limiting information: diag(T / (16 sig_eps tau_X^{3/2}), 2T / sig_eps^4)."""
    for name, val in (("t", t), ("tau_x", tau_x), ("sigma_eps", sigma_eps)):
        if not (math.isfinite(val) and val > 0):
            raise InvalidParameterError(f"{name} must be positive, got {val}")
    i_tt = t / (16.0 * sigma_eps * tau_x**1.5)
    i_ee = 2.0 * t / sigma_eps**4
    return FisherMatrix(i_tt=i_tt, i_ee=i_ee)
