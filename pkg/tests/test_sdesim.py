import math

import numpy as np
import pytest

from specvol import (
    Grid,
    HestonParams,
    InvalidParameterError,
    TRADING_DAY_YEARS,
    simulate_brownian,
    simulate_heston,
    simulate_ou,
    true_integrated_volatility,
)


def test_grid_validation():
    with pytest.raises(InvalidParameterError):
        Grid(3, 1.0)
    with pytest.raises(InvalidParameterError):
        Grid(7, 1.0)  # odd
    with pytest.raises(InvalidParameterError):
        Grid(8, 0.0)
    g = Grid(8, 2.0)
    assert g.dt == 0.25
    assert np.allclose(g.times(), 0.25 * np.arange(9))


def test_heston_params_validation():
    with pytest.raises(InvalidParameterError):
        HestonParams(kappa=-1.0)
    with pytest.raises(InvalidParameterError):
        HestonParams(rho=1.5)
    with pytest.raises(InvalidParameterError):
        HestonParams(nu0=-0.1)
    assert HestonParams().feller_satisfied  # 2*5*0.04 = 0.4 >= 0.25
    assert not HestonParams(gamma=1.0).feller_satisfied


def test_heston_shapes_and_determinism():
    g = Grid(512, TRADING_DAY_YEARS)
    p = HestonParams()
    a = simulate_heston(p, g, 42)
    b = simulate_heston(p, g, 42)
    c = simulate_heston(p, g, 43)
    assert len(a.x) == 513 and len(a.spot_var) == 513
    assert np.array_equal(a.x, b.x)
    assert not np.array_equal(a.x, c.x)
    assert a.x[0] == p.x0 and a.spot_var[0] == p.nu0
    assert np.all(a.spot_var >= 0)


def test_heston_mean_iv_near_alpha_t():
    g = Grid(1024, TRADING_DAY_YEARS)
    p = HestonParams()
    ivs = [true_integrated_volatility(simulate_heston(p, g, s)) for s in range(300)]
    target = p.alpha * g.t
    assert abs(np.mean(ivs) - target) < 0.1 * target


def test_brownian_exact_iv_and_distribution():
    g = Grid(2048, 0.5)
    sig2 = 0.01
    path = simulate_brownian(sig2, g, 7)
    # spot variance is constant, so the Riemann truth is exact
    assert true_integrated_volatility(path) == pytest.approx(2 * sig2 * g.t, rel=1e-12)
    rv = float(np.sum(np.diff(path.x) ** 2))
    assert rv == pytest.approx(2 * sig2 * g.t, rel=0.1)


def test_ou_zero_theta_matches_brownian():
    g = Grid(256, 1.0)
    a = simulate_ou(0.02, g, 11, theta=0.0)
    b = simulate_brownian(0.02, g, 11)
    assert np.allclose(a.x, b.x, rtol=0, atol=1e-15)


def test_ou_mean_reversion_shrinks_variance():
    g = Grid(4096, 4.0)
    wide = simulate_ou(0.02, g, 5, theta=0.0)
    tight = simulate_ou(0.02, g, 5, theta=-20.0)
    assert np.var(tight.x) < np.var(wide.x)


def test_simulators_reject_bad_inputs():
    g = Grid(16, 1.0)
    with pytest.raises(InvalidParameterError):
        simulate_brownian(-1.0, g, 0)
    with pytest.raises(InvalidParameterError):
        simulate_ou(0.01, g, 0, theta=math.inf)
