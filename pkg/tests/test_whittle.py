import math

import numpy as np
import pytest

from specvol import (
    DegenerateFitError,
    DomainError,
    Grid,
    InvalidParameterError,
    NoiseSpec,
    ObservedSeries,
    WhittleFit,
    aicc_value,
    fit_ma,
    fit_white,
    increments,
    multiscale_ratio,
    noise_spectrum,
    observe,
    periodogram,
    sample_noise,
    select_order_aicc,
    simulate_brownian,
    whittle_loglik,
)


def _noisy_series(n=4096, sig2=1e-4, sig2_eps=4e-4, seed=0, theta=()):
    g = Grid(n, 1.0)
    path = simulate_brownian(sig2, g, seed)
    spec = NoiseSpec(sig2_eps, theta)
    return observe(path, spec, seed + 10_000), g


def test_loglik_matches_direct_sum():
    obs, g = _noisy_series(n=256)
    per = periodogram(increments(obs))
    sig2_x, spec = 3e-4, NoiseSpec.white(2e-4)
    got = whittle_loglik(per, sig2_x, spec)
    k = np.arange(1, g.n // 2)
    s = sig2_x + noise_spectrum(spec, k, g.n)
    want = float(-np.sum(np.log(s) + per.s[1:g.n // 2] / s))
    assert got == pytest.approx(want, rel=1e-14)


def test_loglik_rejects_nonpositive_spectrum():
    obs, _ = _noisy_series(n=64)
    per = periodogram(increments(obs))
    with pytest.raises(DomainError):
        whittle_loglik(per, 0.0, NoiseSpec.white(0.0))


def test_aicc_value_formula_and_guard():
    assert aicc_value(-10.0, 0, 100) == pytest.approx(20 + 2 * 2 * 100 / 97)
    assert aicc_value(-10.0, 3, 100) == pytest.approx(20 + 2 * 5 * 100 / 94)
    with pytest.raises(InvalidParameterError):
        aicc_value(0.0, 97, 100)


def test_fit_white_recovers_parameters():
    # per-increment signal variance = 2*sig2*dt
    obs, g = _noisy_series(n=8192, sig2=0.05, sig2_eps=4e-4, seed=2)
    fit = fit_white(periodogram(increments(obs)))
    truth_x = 2 * 0.05 * g.dt
    assert fit.converged
    assert fit.sig2_x == pytest.approx(truth_x, rel=0.3)
    assert fit.sig2_noise == pytest.approx(4e-4, rel=0.1)
    assert not fit.boundary
    assert fit.n_freq == g.n // 2 - 1
    assert fit.aicc == pytest.approx(aicc_value(fit.loglik, 0, fit.n_freq))


def test_fit_white_is_deterministic():
    obs, _ = _noisy_series(n=1024, seed=4)
    per = periodogram(increments(obs))
    a, b = fit_white(per), fit_white(per)
    assert a == b


def test_fit_flags_boundary_without_noise():
    g = Grid(4096, 1.0)
    path = simulate_brownian(0.05, g, 3)
    obs = ObservedSeries(g, path.x)  # no noise at all
    fit = fit_white(periodogram(increments(obs)))
    assert fit.sig2_noise < 1e-3 * fit.sig2_x or fit.boundary


def test_fit_ma_recovers_coefficients():
    theta = (0.6,)
    obs, g = _noisy_series(n=8192, sig2=0.05, sig2_eps=3e-4, seed=6, theta=theta)
    fit = fit_ma(periodogram(increments(obs)), 1)
    assert fit.q == 1
    assert fit.theta[0] == pytest.approx(0.6, abs=0.1)
    assert fit.sig2_noise == pytest.approx(3e-4, rel=0.15)


def test_select_order_prefers_truth():
    theta = (0.8, -0.5)
    obs, _ = _noisy_series(n=8192, sig2=0.05, sig2_eps=3e-4, seed=8, theta=theta)
    q_star, fit, table = select_order_aicc(periodogram(increments(obs)), 4)
    assert q_star == 2
    assert fit.q == 2
    assert [row.q for row in table] == [0, 1, 2, 3, 4]
    fitted = {row.q: row for row in table if not row.failed}
    assert all(fitted[2].aicc <= fitted[q].aicc + 1e-9 for q in fitted)


def test_select_order_white_truth_mostly_picks_zero():
    # spurious small-order wins happen on some paths; the rate must be low
    picks = []
    for seed in range(20):
        obs, _ = _noisy_series(n=4096, sig2=0.05, sig2_eps=3e-4, seed=100 + seed)
        q_star, _, _ = select_order_aicc(periodogram(increments(obs)), 2)
        picks.append(q_star)
    # the order penalty difference is ~2 log-likelihood units, so spurious
    # one-coefficient wins occur on roughly a quarter of white-noise paths
    assert picks.count(0) >= 12


def test_multiscale_ratio_shape_and_range():
    fit = WhittleFit(sig2_x=1e-8, sig2_noise=2.5e-7, theta=(), q=0,
                     loglik=0.0, aicc=0.0, converged=True, n_freq=127,
                     boundary=False)
    g = Grid(256, 1.0)
    rc = multiscale_ratio(fit, g)
    assert rc.l.shape == (256,)
    assert rc.l[0] == 1.0
    assert np.all((rc.l >= 0) & (rc.l <= 1))
    assert np.allclose(rc.l[1:], rc.l[1:][::-1])  # symmetric
    # monotone decreasing up to Nyquist for the white model
    assert np.all(np.diff(rc.l[: 129]) <= 1e-15)


def test_multiscale_ratio_degenerate_and_zero_noise():
    g = Grid(64, 1.0)
    base = dict(theta=(), q=0, loglik=0.0, aicc=0.0, converged=True,
                n_freq=31, boundary=True)
    with pytest.raises(DegenerateFitError):
        multiscale_ratio(WhittleFit(sig2_x=0.0, sig2_noise=0.0, **base), g)
    rc = multiscale_ratio(WhittleFit(sig2_x=1e-8, sig2_noise=0.0, **base), g)
    assert np.all(rc.l == 1.0)
