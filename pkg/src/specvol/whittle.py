"""Whittle-type fitting of the frequency-wise energy model.

The model spectrum at DFT index k is

    S_k = sig2_x + noise_spectrum(k),

with the noise term either white (sig2_eps * 4 sin^2(pi k/N)) or MA(q).
The objective is maximised over k = 1..N/2-1 (k = 0 carries drift leakage,
Nyquist is excluded), with variances log-parameterized to stay positive and a
derivative-free simplex search with deterministic multistarts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import DegenerateFitError, DomainError, FitFailedError, InvalidParameterError
from .noise import NoiseSpec
from .sdesim import Grid
from .spectral import Periodogram, noise_spectrum

_LOG_CLAMP = math.log(1e-300)  # lower clamp on variances in log space
_LOG_CAP = 700.0


@dataclass(frozen=True)
class FitOptions:
    """Tolerances and search budget for the likelihood maximisation."""

    rel_tol: float = 1e-10
    max_evals_per_dim: int = 500
    multistarts: int = 3
    restarts: int = 3
    boundary_factor: float = 1e-3


@dataclass(frozen=True)
class WhittleFit:
    """Fitted energy model: per-increment signal variance plus noise."""

    sig2_x: float
    sig2_noise: float  # sigma^2_eps when q == 0, else sigma^2_eta
    theta: tuple
    q: int
    loglik: float
    aicc: float
    converged: bool
    n_freq: int
    boundary: bool

    @property
    def noise_spec(self) -> NoiseSpec:
        return NoiseSpec(self.sig2_noise, self.theta)


@dataclass(frozen=True)
class RatioCurve:
    """Frequency-wise shrinkage weights l[k] in [0, 1], k = 0..N-1."""

    l: np.ndarray

    def __post_init__(self):
        if np.any(self.l < 0) or np.any(self.l > 1):
            raise InvalidParameterError("ratio curve must lie in [0, 1]")


@dataclass(frozen=True)
class OrderRow:
    """One row of the per-order selection report."""

    q: int
    theta: tuple
    sig2_x: float
    sig2_noise: float
    loglik: float
    aicc: float
    converged: bool
    failed: bool


def aicc_value(loglik: float, q: int, n_freq: int) -> float:
    """Corrected AIC with p = q parameters over n = n_freq frequencies."""
    n, p = n_freq, q
    if n - p - 3 <= 0:
        raise InvalidParameterError("too few frequencies for AICC at this order")
    return -2.0 * loglik + 2.0 * (p + 2) * n / (n - p - 3)


def whittle_loglik(per: Periodogram, sig2_x: float, noise: NoiseSpec) -> float:
    """Energy log-likelihood -sum_k [log S_k + s_k / S_k] over k = 1..N/2-1."""
    n = per.grid.n
    k = np.arange(1, n // 2)
    s_model = sig2_x + noise_spectrum(noise, k, n)
    if np.any(s_model <= 0):
        raise DomainError("model spectrum must be strictly positive at every used frequency")
    ph = per.s[1 : n // 2]
    return float(-(np.log(s_model).sum() + (ph / s_model).sum()))


class _Objective:
    """Negative log-likelihood in log-variance coordinates, precomputed tables."""

    def __init__(self, per: Periodogram, q: int):
        n = per.grid.n
        k = np.arange(1, n // 2)
        self.n = n
        self.q = q
        self.ph = per.s[1 : n // 2]
        self.sin2 = 4.0 * np.sin(np.pi * k / n) ** 2
        if q > 0:
            m = np.arange(1, q + 1)[:, None]
            phase = 2.0 * np.pi * (k[None, :] / n) * m
            self.cos_t = np.cos(phase)
            self.sin_t = np.sin(phase)

    def model(self, u: np.ndarray) -> np.ndarray:
        a = math.exp(min(max(u[0], _LOG_CLAMP), _LOG_CAP))
        b = math.exp(min(max(u[1], _LOG_CLAMP), _LOG_CAP))
        if self.q == 0:
            return a + b * self.sin2
        theta = u[2:]
        hr = 1.0 + theta @ self.cos_t
        hi = theta @ self.sin_t
        return a + b * (hr * hr + hi * hi) * self.sin2

    def __call__(self, u: np.ndarray) -> float:
        s = self.model(u)
        # Clamped variances can make S underflow to 0 at some k; treat as +inf.
        if s[0] <= 0 or not np.all(s > 0):
            return np.inf
        return float(np.log(s).sum() + (self.ph / s).sum())


def _moment_init(per: Periodogram) -> tuple[float, float]:
    """Moment-matched starting point: low-frequency mean for the signal,
    a quarter of the near-Nyquist mean for the noise (differencing gain ~ 4)."""
    n = per.grid.n
    ph = per.s[1 : n // 2]
    m_lo = max(1, int(0.05 * len(ph)))
    m_hi = max(1, int(0.10 * len(ph)))
    sig_x0 = max(float(ph[:m_lo].mean()), 1e-300)
    sig_e0 = max(float(ph[-m_hi:].mean()) / 4.0, 1e-300)
    return sig_x0, sig_e0


def _maximize(obj: _Objective, starts: list[np.ndarray], opts: FitOptions):
    """Simplex descent with restarts from each start; returns (u, f, converged)."""
    best_u, best_f, converged = None, np.inf, False
    maxfev = opts.max_evals_per_dim * (2 + obj.q)
    for u0 in starts:
        f0 = obj(u0)
        fatol = opts.rel_tol * max(1.0, abs(f0) if np.isfinite(f0) else 1.0)
        u, f_prev, ok = np.asarray(u0, dtype=float), f0, False
        for _ in range(max(1, opts.restarts)):
            res = minimize(
                obj,
                u,
                method="Nelder-Mead",
                options={
                    "maxfev": maxfev,
                    "xatol": 1e-9,
                    "fatol": fatol,
                    "adaptive": obj.q > 0,
                },
            )
            u = res.x
            ok = ok or res.success
            if not np.isfinite(res.fun) or f_prev - res.fun <= fatol:
                f_prev = min(f_prev, res.fun)
                break
            f_prev = res.fun
        if f_prev < best_f:
            best_u, best_f = u, f_prev
        converged = converged or ok
    return best_u, best_f, converged


def _build_fit(obj: _Objective, per: Periodogram, u: np.ndarray, f: float,
               converged: bool, init: tuple[float, float], opts: FitOptions) -> WhittleFit:
    n = per.grid.n
    sig2_x = math.exp(min(max(u[0], _LOG_CLAMP), _LOG_CAP))
    sig2_noise = math.exp(min(max(u[1], _LOG_CLAMP), _LOG_CAP))
    theta = tuple(float(t) for t in u[2:])
    n_freq = n // 2 - 1
    boundary = (sig2_x < opts.boundary_factor * init[0]
                or sig2_noise < opts.boundary_factor * init[1])
    loglik = -f
    return WhittleFit(
        sig2_x=sig2_x,
        sig2_noise=sig2_noise,
        theta=theta,
        q=obj.q,
        loglik=loglik,
        aicc=aicc_value(loglik, obj.q, n_freq),
        converged=converged,
        n_freq=n_freq,
        boundary=boundary,
    )


_JITTERS = (
    (0.0, 0.0),
    (math.log(5.0), math.log(0.2)),
    (math.log(0.2), math.log(5.0)),
    (math.log(25.0), math.log(0.04)),
    (math.log(0.04), math.log(25.0)),
)


def _starts_for(u0: np.ndarray, count: int) -> list[np.ndarray]:
    starts = []
    for i in range(max(1, count)):
        da, db = _JITTERS[i % len(_JITTERS)]
        u = u0.copy()
        u[0] += da
        u[1] += db
        starts.append(u)
    return starts


def fit_white(per: Periodogram, opts: FitOptions | None = None) -> WhittleFit:
    """Maximise the energy likelihood over (sig2_x, sig2_eps) >= 0."""
    opts = opts or FitOptions()
    obj = _Objective(per, q=0)
    init = _moment_init(per)
    u0 = np.array([math.log(init[0]), math.log(init[1])])
    u, f, converged = _maximize(obj, _starts_for(u0, opts.multistarts), opts)
    if u is None or not np.isfinite(f):
        raise FitFailedError("white-noise fit did not produce a finite optimum")
    fit = _build_fit(obj, per, u, f, converged, init, opts)
    if not converged:
        raise FitFailedError("white-noise fit did not converge", fit=fit)
    return fit


def fit_ma(per: Periodogram, q: int, opts: FitOptions | None = None,
           extra_starts: list[np.ndarray] | None = None) -> WhittleFit:
    """Maximise the MA(q)-extended likelihood over (sig2_x, sig2_eta, theta)."""
    if q < 1:
        raise InvalidParameterError(f"fit_ma needs q >= 1, got {q}")
    n_freq = per.grid.n // 2 - 1
    if n_freq <= q + 2:
        raise InvalidParameterError("too few frequencies for this MA order")
    opts = opts or FitOptions()
    white = fit_white(per, opts)
    init = (max(white.sig2_x, 1e-300), max(white.sig2_noise, 1e-300))
    u0 = np.concatenate([[math.log(init[0]), math.log(init[1])], np.zeros(q)])
    starts = _starts_for(u0, opts.multistarts)
    if extra_starts:
        starts = list(extra_starts) + starts
    obj = _Objective(per, q=q)
    u, f, converged = _maximize(obj, starts, opts)
    if u is None or not np.isfinite(f):
        raise FitFailedError(f"MA({q}) fit did not produce a finite optimum")
    fit = _build_fit(obj, per, u, f, converged, init, opts)
    if not converged:
        raise FitFailedError(f"MA({q}) fit did not converge", fit=fit)
    return fit


def select_order_aicc(per: Periodogram, q_max: int, opts: FitOptions | None = None):
    """Fit q = 0..q_max and pick the AICC minimiser (ties go to smaller q).

    Returns (q_star, best_fit, table); orders whose fit failed are excluded
    from the selection and flagged in the table.
    """
    if q_max < 0:
        raise InvalidParameterError(f"q_max must be >= 0, got {q_max}")
    opts = opts or FitOptions()
    table: list[OrderRow] = []
    fits: dict[int, WhittleFit] = {}
    prev: WhittleFit | None = None
    for q in range(q_max + 1):
        try:
            if q == 0:
                fit = fit_white(per, opts)
            else:
                extra = None
                if prev is not None:
                    warm = np.concatenate([
                        [math.log(max(prev.sig2_x, 1e-300)),
                         math.log(max(prev.sig2_noise, 1e-300))],
                        list(prev.theta) + [0.0] * (q - len(prev.theta)),
                    ])
                    extra = [warm]
                fit = fit_ma(per, q, opts, extra_starts=extra)
        except FitFailedError as exc:
            bad = exc.fit
            table.append(OrderRow(
                q=q,
                theta=bad.theta if bad else (),
                sig2_x=bad.sig2_x if bad else math.nan,
                sig2_noise=bad.sig2_noise if bad else math.nan,
                loglik=bad.loglik if bad else math.nan,
                aicc=bad.aicc if bad else math.nan,
                converged=False,
                failed=True,
            ))
            continue
        fits[q] = fit
        prev = fit
        table.append(OrderRow(q, fit.theta, fit.sig2_x, fit.sig2_noise,
                              fit.loglik, fit.aicc, fit.converged, False))
    if not fits:
        raise FitFailedError("no MA order could be fitted")
    best_aicc = min(f.aicc for f in fits.values())
    q_star = min(q for q, f in fits.items() if f.aicc <= best_aicc + 1e-9)
    return q_star, fits[q_star], table


def multiscale_ratio(fit: WhittleFit, g: Grid) -> RatioCurve:
    """Shrinkage curve l[k] = sig2_x / (sig2_x + noise spectrum at k)."""
    if fit.sig2_x == 0.0 and fit.sig2_noise == 0.0:
        raise DegenerateFitError("fit has zero signal and zero noise variance")
    k = np.arange(g.n)
    ns = np.asarray(noise_spectrum(fit.noise_spec, k, g.n))
    denom = fit.sig2_x + ns
    with np.errstate(invalid="ignore", divide="ignore"):
        l = np.where(denom > 0, fit.sig2_x / np.where(denom > 0, denom, 1.0), 0.0)
    l[0] = 1.0 if fit.sig2_x > 0 else 0.0
    return RatioCurve(np.clip(l, 0.0, 1.0))
