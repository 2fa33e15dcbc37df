import numpy as np
import pytest

from specvol import (
    Grid,
    InvalidParameterError,
    NoiseSpec,
    ObservedSeries,
    dft_increments,
    increments,
    ma_gain,
    ma_noise_spectrum,
    noise_spectrum,
    periodogram,
    sample_noise,
    simulate_brownian,
    white_noise_spectrum,
)


def _toy_series(n=512, seed=0):
    g = Grid(n, 1.0)
    rng = np.random.default_rng(seed)
    return ObservedSeries(g, rng.standard_normal(n + 1).cumsum())


def test_increments_shape_and_source_selection():
    obs = _toy_series()
    inc = increments(obs)
    assert len(inc.d) == obs.grid.n
    assert np.allclose(inc.d, np.diff(obs.y))
    lat = simulate_brownian(0.01, Grid(64, 1.0), 3)
    assert np.allclose(increments(lat).d, np.diff(lat.x))


def test_dft_is_unitary():
    obs = _toy_series(256)
    inc = increments(obs)
    j = dft_increments(inc)
    assert np.sum(np.abs(j) ** 2) == pytest.approx(float(np.dot(inc.d, inc.d)), rel=1e-12)


def test_periodogram_parseval_symmetry_nonneg():
    obs = _toy_series(1024, seed=5)
    inc = increments(obs)
    per = periodogram(inc)
    per.validate(inc.d, rtol=1e-12)
    assert np.all(per.s >= 0)
    assert np.allclose(per.s[1:], per.s[1:][::-1])
    assert per.s.sum() == pytest.approx(float(np.dot(inc.d, inc.d)), rel=1e-12)


def test_periodogram_matches_direct_dft():
    obs = _toy_series(128, seed=9)
    inc = increments(obs)
    per = periodogram(inc)
    direct = np.abs(np.fft.fft(inc.d) / np.sqrt(inc.grid.n)) ** 2
    assert np.allclose(per.s, direct, rtol=1e-10)


def test_white_noise_spectrum_values():
    n = 512
    assert white_noise_spectrum(2.0, 0, n) == 0.0
    # at the Nyquist index the differencing gain is 4
    assert white_noise_spectrum(2.0, n // 2, n) == pytest.approx(8.0, rel=1e-12)


def test_ma_gain_endpoints():
    theta = (0.8, -0.6, 0.1, 0.4)
    n = 1000
    assert ma_gain(theta, 0, n) == pytest.approx((1 + sum(theta)) ** 2, rel=1e-12)
    got = ma_gain(theta, np.arange(4), n)
    assert got.shape == (4,)


def test_ma_spectrum_reduces_to_white():
    n = 256
    k = np.arange(n)
    assert np.allclose(ma_noise_spectrum(1.5, (), k, n),
                       white_noise_spectrum(1.5, k, n))
    spec = NoiseSpec.ma((0.0,), 1.5)
    assert np.allclose(noise_spectrum(spec, k, n),
                       white_noise_spectrum(1.5, k, n))


def test_noise_spectrum_matches_empirical_energy():
    """Mean periodogram of simulated noise increments matches the formula."""
    n = 2048
    g = Grid(n, 1.0)
    spec = NoiseSpec.ma((0.7, -0.3), 1.0)
    acc = np.zeros(n)
    reps = 200
    for s in range(reps):
        eps = sample_noise(spec, n + 1, s)
        acc += periodogram(increments(ObservedSeries(g, eps))).s
    acc /= reps
    theory = noise_spectrum(spec, np.arange(n), n)
    # single ordinates stay noisy even after averaging; compare coarse bins
    nbin = 64
    acc_b = acc[: n // nbin * nbin].reshape(-1, nbin).mean(axis=1)
    theory_b = theory[: n // nbin * nbin].reshape(-1, nbin).mean(axis=1)
    mask = theory_b > 0.1 * theory_b.max()
    assert np.allclose(acc_b[mask], theory_b[mask], rtol=0.05)


def test_validate_catches_parseval_violation():
    obs = _toy_series(64)
    inc = increments(obs)
    per = periodogram(inc)
    with pytest.raises(InvalidParameterError):
        per.validate(2.0 * inc.d)
