import math

import numpy as np
import pytest

from acflow import (ALPHA, cutoff_profile, cutoff_residual,
                    cutoff_residual_bound, heteroclinic, potential_eval,
                    profile_energy_alpha)
from acflow.profile import RESIDUAL_BOUND_K, _gbar


def test_heteroclinic_basic_values():
    assert heteroclinic(0.0, 0) == 0.0
    # first integral at the origin: g'(0) = sqrt(2 W(0)) = 1/sqrt(2)
    assert heteroclinic(0.0, 1) == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-15)
    # asymptotics: 1 - g(20) = 1.04e-12 (two-sided tail of tanh(x/sqrt 2))
    assert abs(heteroclinic(20.0, 0) - 1.0) <= 2e-12


def test_heteroclinic_against_ode_shooting_oracle():
    # integrate g'' = W'(g) from (g, g') = (0, 1/sqrt 2); the heteroclinic is
    # unstable so the oracle window stays at [0, 5]
    from scipy.integrate import solve_ivp

    sol = solve_ivp(lambda t, y: [y[1], potential_eval(y[0], 1)],
                    [0.0, 5.0], [0.0, 1.0 / math.sqrt(2.0)],
                    rtol=1e-12, atol=1e-14, dense_output=True)
    xs = np.linspace(0.0, 5.0, 21)
    assert np.max(np.abs(sol.sol(xs)[0] - heteroclinic(xs, 0))) < 1e-9


def test_heteroclinic_odd_increasing():
    x = np.linspace(-8.0, 8.0, 401)
    g = heteroclinic(x, 0)
    assert np.allclose(g, -heteroclinic(-x, 0), atol=0)
    assert np.all(np.diff(g) > 0.0)


def test_equipartition_and_ode_residual():
    x = np.linspace(-10.0, 10.0, 2001)
    g = heteroclinic(x, 0)
    gp = heteroclinic(x, 1)
    gpp = heteroclinic(x, 2)
    assert np.max(np.abs(gp**2 - 2.0 * potential_eval(g, 0))) <= 1e-10
    assert np.max(np.abs(gpp - potential_eval(g, 1))) <= 1e-10


def test_profile_energy_alpha():
    # closed form 2 sqrt(2) / 3, confirmed by the quadrature oracle
    val = profile_energy_alpha()
    assert val == pytest.approx(2.0 * math.sqrt(2.0) / 3.0, abs=1e-12)
    assert val == pytest.approx(ALPHA, abs=1e-12)
    # half-line doubled equals the full line (even integrand)
    from scipy.integrate import quad
    half, _ = quad(lambda x: heteroclinic(x, 1) ** 2, 0.0, 20.0, limit=200)
    assert 2.0 * half == pytest.approx(val, abs=1e-10)
    # equipartition identity: integral of 2 W(g) has the same value
    two_w, _ = quad(lambda x: 2.0 * potential_eval(heteroclinic(x, 0), 0),
                    -20.0, 20.0, limit=200)
    assert two_w == pytest.approx(val, abs=1e-8)


def test_cutoff_profile_regions():
    eps = 0.05
    L = abs(math.log(eps))
    # pure-g region
    assert cutoff_profile(eps, 0.0, 0) == 0.0
    assert cutoff_profile(eps, 1.0, 0) == heteroclinic(1.0, 0)
    # saturated region: 20 > 6 |log eps| ~= 17.97
    assert 6.0 * L < 20.0
    assert cutoff_profile(eps, 20.0, 0) == 1.0
    assert cutoff_profile(eps, -20.0, 0) == -1.0
    assert cutoff_profile(eps, 20.0, 1) == 0.0
    assert cutoff_profile(eps, 20.0, 2) == 0.0


def test_cutoff_rejects_bad_eps():
    for eps in (0.0, -0.1, 0.5, 1.0, 1.5):
        with pytest.raises(ValueError):
            cutoff_profile(eps, 1.0, 0)


def test_cutoff_monotone_odd():
    eps = 0.05
    x = np.linspace(-20.0, 20.0, 2001)
    gb = cutoff_profile(eps, x, 0)
    assert np.allclose(gb, -cutoff_profile(eps, -x, 0), atol=0)
    assert np.all(np.diff(gb) >= 0.0)


def test_cutoff_c2_across_blend():
    eps = 0.05
    L = abs(math.log(eps))
    for x0 in (3.0 * L, 6.0 * L):
        for order in (0, 1, 2):
            below = cutoff_profile(eps, x0 - 1e-7, order)
            above = cutoff_profile(eps, x0 + 1e-7, order)
            assert abs(above - below) < 1e-5


def test_cutoff_energy_matches_alpha():
    eps = 0.05
    L = abs(math.log(eps))
    x = np.linspace(-6.0 * L - 0.5, 6.0 * L + 0.5, 200001)
    val = np.trapezoid(cutoff_profile(eps, x, 1) ** 2, x)
    assert abs(val - ALPHA) <= 1e-3


def test_cutoff_residual_support_and_bound():
    eps = 0.05
    L = abs(math.log(eps))
    inner = np.linspace(-3.0 * L + 1e-6, 3.0 * L - 1e-6, 5001)
    for order in (0, 1, 2):
        assert np.max(np.abs(cutoff_residual(eps, inner, order))) < 1e-12
    outer = np.linspace(6.0 * L + 1e-6, 6.0 * L + 5.0, 101)
    assert np.max(np.abs(cutoff_residual(eps, outer, 0))) == 0.0

    bound = cutoff_residual_bound(eps)
    assert bound <= RESIDUAL_BOUND_K * eps**3
    assert RESIDUAL_BOUND_K <= 100.0
    # cubic-order check: halving eps shrinks the bound by at least 8x
    assert cutoff_residual_bound(eps / 2.0) <= bound / 8.0


def test_cutoff_residual_matches_finite_difference():
    # eta' by the analytic formula against a centered difference of eta
    eps = 0.05
    L = abs(math.log(eps))
    x = np.linspace(3.2 * L, 5.8 * L, 41)
    h = 1e-6
    fd = (cutoff_residual(eps, x + h, 0) - cutoff_residual(eps, x - h, 0)) / (2 * h)
    assert np.max(np.abs(fd - cutoff_residual(eps, x, 1))) < 1e-6


def test_gbar_higher_orders_consistent():
    # orders 3 and 4 back the residual derivatives; check them against
    # centered differences of the lower orders
    eps = 0.05
    L = abs(math.log(eps))
    x = np.linspace(3.1 * L, 5.9 * L, 31)
    h = 1e-6
    for k in (3, 4):
        fd = (_gbar(x + h, eps, k - 1) - _gbar(x - h, eps, k - 1)) / (2 * h)
        assert np.max(np.abs(fd - _gbar(x, eps, k))) < 1e-5
