import math

import numpy as np
import pytest

from specvol import (
    DomainError,
    Grid,
    InvalidParameterError,
    NoiseSpec,
    WhittleFit,
    increments,
    kernel_closed_form,
    kernel_from_ratio,
    kernel_laplace,
    m1_from_fit,
    multiscale_ratio,
    observe,
    periodogram,
    simulate_brownian,
    time_domain_m1,
)


def _white_fit(sig2_x, sig2_eps, n):
    return WhittleFit(sig2_x=sig2_x, sig2_noise=sig2_eps, theta=(), q=0,
                      loglik=0.0, aicc=0.0, converged=True,
                      n_freq=n // 2 - 1, boundary=False)


def test_kernel_from_ratio_properties():
    n = 512
    g = Grid(n, 1.0)
    rc = multiscale_ratio(_white_fit(6.8e-9, 2.5e-7, n), g)
    kern = kernel_from_ratio(rc)
    assert kern.l.shape == (n,)
    # total weight equals the zero-frequency ratio
    assert kern.l.sum() == pytest.approx(rc.l[0], abs=1e-10)
    # circular symmetry l[tau] == l[n - tau]
    assert np.allclose(kern.l[1:], kern.l[1:][::-1], atol=1e-14)
    # the inverse transform of the ratio is genuinely real
    imag = np.fft.ifft(rc.l).imag
    assert np.max(np.abs(imag)) < 1e-14


def test_closed_form_regimes():
    # low noise: geometric decay (sig2_eps / sig2_x)^tau
    assert kernel_closed_form(1e-6, 1e-8, 0) == 1.0
    assert kernel_closed_form(1e-6, 1e-8, 2) == pytest.approx(1e-4, rel=1e-12)
    # high noise: (sx / 2 se) (1 - sx / se)^tau
    sx, se = math.sqrt(6.8e-9), math.sqrt(2.5e-7)
    got = kernel_closed_form(6.8e-9, 2.5e-7, 1)
    assert got == pytest.approx(sx / (2 * se) * (1 - sx / se), rel=1e-12)
    with pytest.raises(DomainError):
        kernel_closed_form(1e-7, 1e-7, 0)
    with pytest.raises(InvalidParameterError):
        kernel_closed_form(-1e-7, 1e-7, 0)


def test_laplace_window_value():
    # variance ratio 0.0331 puts sqrt(ratio)/2 = 0.0910 at lag zero
    sig2_eps = 2.5e-7
    sig2_x = 0.0331 * sig2_eps
    assert kernel_laplace(sig2_x, sig2_eps, 0) == pytest.approx(0.0910, abs=5e-4)
    tau = np.arange(5)
    vals = kernel_laplace(sig2_x, sig2_eps, tau)
    assert np.all(np.diff(vals) < 0)


def test_approximations_track_numeric_kernel():
    n = 4096
    g = Grid(n, 1.0)
    sig2_x, sig2_eps = 6.8e-9, 2.5e-7
    kern = kernel_from_ratio(multiscale_ratio(_white_fit(sig2_x, sig2_eps, n), g))
    # leading-order geometric form: good at small lags only
    tau = np.arange(1, 11)
    approx = kernel_closed_form(sig2_x, sig2_eps, tau)
    assert np.allclose(kern.l[1:11], approx, rtol=0.25)
    # the Laplace window matches the exact kernel much more closely
    tau = np.arange(21)
    lap = kernel_laplace(sig2_x, sig2_eps, tau)
    assert np.allclose(kern.l[:21], lap, rtol=0.05)


def test_time_domain_equals_frequency_domain():
    n = 4096
    g = Grid(n, 1.0)
    path = simulate_brownian(0.02, g, 21)
    obs = observe(path, NoiseSpec.white(1e-5), 22)
    fit = _white_fit(2 * 0.02 * g.dt, 1e-5, n)
    freq_val = m1_from_fit(obs, fit).value
    kern = kernel_from_ratio(multiscale_ratio(fit, g))
    time_val = time_domain_m1(obs, kern)
    assert time_val == pytest.approx(freq_val, rel=1e-10)


def test_time_domain_rejects_mismatched_kernel():
    g = Grid(64, 1.0)
    path = simulate_brownian(0.01, g, 1)
    kern = kernel_from_ratio(multiscale_ratio(_white_fit(1e-8, 1e-7, 128), Grid(128, 1.0)))
    with pytest.raises(InvalidParameterError):
        time_domain_m1(path, kern)
