import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dcecavity.core import CavityParams, chi_of_t, derived_mode, doppler_from_speed, params_from

speeds = st.floats(min_value=1e-3, max_value=0.999)
rhos = st.floats(min_value=1e-6, max_value=0.999)


def test_speed_point_06_gives_doppler_4():
    p = params_from(v=0.6, rho=0.5)
    assert p.d == pytest.approx(4.0, rel=1e-15)


def test_gamma_2():
    p = params_from(gamma=2.0, rho=0.5)
    assert p.v == pytest.approx(math.sqrt(3) / 2, rel=1e-15)
    assert p.d == pytest.approx((2 + math.sqrt(3)) ** 2, rel=1e-14)
    assert p.d == pytest.approx(13.928, abs=5e-4)


def test_rho_one_over_d_gives_theta_zero():
    p = params_from(v=0.6, rho_power=1)
    assert p.theta == 0.0
    assert p.exact_power == 1
    assert p.rho == pytest.approx(0.25)


@given(speeds, rhos)
def test_invariants(v, rho):
    p = params_from(v=v, rho=rho)
    assert p.gamma == pytest.approx(1 / math.sqrt(1 - v * v), rel=1e-12)
    assert p.d == pytest.approx((1 + v) / (1 - v), rel=1e-12)
    g = p.gamma
    assert p.d == pytest.approx((g + math.sqrt(g * g - 1)) ** 2, rel=1e-9)
    assert p.l_f == pytest.approx(rho * p.l_i, rel=1e-15)
    assert p.T == pytest.approx((p.l_i - p.l_f) / v, rel=1e-12)
    assert p.rho == pytest.approx(1 - v * p.T / p.l_i, rel=1e-9)
    assert p.Theta == pytest.approx(math.log(1 / rho) / p.log_d, rel=1e-12)
    assert 0.0 <= p.theta < 1.0
    assert p.chi_f == pytest.approx(math.pi / v * math.log(1 / rho), rel=1e-12)


@given(speeds, rhos, st.floats(min_value=0.1, max_value=10.0))
def test_rho_and_duration_round_trip(v, rho, l_i):
    a = params_from(v=v, rho=rho, l_i=l_i)
    b = params_from(v=v, T=(l_i - rho * l_i) / v, l_i=l_i)
    # rho = 1 - v T / l_i cancels; the round trip is exact up to eps / (rho ln d)
    tol = 16 * np.finfo(float).eps * (1 + 1 / rho) / a.log_d
    gap = abs(a.theta - b.theta)
    assert min(gap, abs(gap - 1)) <= tol


@given(st.sampled_from([0.1, 0.3, 0.6, 0.9, 0.99]), st.integers(min_value=1, max_value=6))
def test_exact_powers_have_zero_theta(v, k):
    p = params_from(v=v, rho=params_from(v=v, rho=0.5).d ** (-k))
    assert p.theta == 0.0
    assert p.exact_power == k


@pytest.mark.parametrize(
    "kw",
    [
        {"v": 1.0, "rho": 0.5},
        {"v": 0.0, "rho": 0.5},
        {"v": -0.1, "rho": 0.5},
        {"v": 1 - 1e-13, "rho": 0.5},
        {"v": 0.5, "rho": 1.0},
        {"v": 0.5, "rho": 0.0},
        {"v": 0.5, "T": 2.0},
        {"v": 0.5, "T": 0.0},
        {"v": 0.5},
        {"v": 0.5, "rho": 0.5, "T": 1.0},
        {"gamma": 0.9, "rho": 0.5},
        {"v": 0.5, "theta": 1.0},
    ],
)
def test_invalid_parameters(kw):
    with pytest.raises(ValueError):
        params_from(**kw)


def test_params_are_frozen():
    p = params_from(v=0.6, rho=0.5)
    assert isinstance(p, CavityParams)
    with pytest.raises(AttributeError):
        p.v = 0.7


def test_chi_endpoints():
    p = params_from(v=0.6, rho=0.3)
    assert chi_of_t(p, 0.0) == 0.0
    assert chi_of_t(p, p.T) == pytest.approx(math.pi / p.v * math.log(1 / p.rho), rel=1e-14)
    with pytest.raises(ValueError):
        chi_of_t(p, p.T * 1.01)
    with pytest.raises(ValueError):
        chi_of_t(p, -1e-3)


@given(speeds, st.floats(min_value=1e-4, max_value=0.5))
def test_chi_increasing_and_convex(v, rho):
    p = params_from(v=v, rho=rho)
    t = np.linspace(0, p.T, 100)
    chi = np.array([chi_of_t(p, x) for x in t])
    assert np.all(np.diff(chi) > 0)
    assert np.all(np.diff(chi, 2) >= -1e-9 * chi.max())


def test_derived_mode_examples():
    p = params_from(v=0.6, rho=0.5)
    q1 = derived_mode(p, 1, 0.0)
    assert q1.lambda_n == pytest.approx(1.2 / math.log(4), rel=1e-14)
    assert q1.lambda_n == pytest.approx(0.86562, abs=1e-5)
    assert derived_mode(p, 3, 0.0).lambda_n == pytest.approx(3 * q1.lambda_n, rel=1e-15)
    assert q1.omega_n_t == pytest.approx(math.pi)
    small = params_from(v=1e-6, rho=0.999)
    assert derived_mode(small, 1, 0.0).lambda_n == pytest.approx(1.0, abs=1e-9)


@given(speeds, rhos, st.floats(min_value=0, max_value=1))
def test_lambda_equidistant(v, rho, frac):
    p = params_from(v=v, rho=rho)
    t = frac * p.T
    lam = [derived_mode(p, n, t).lambda_n for n in range(1, 6)]
    assert np.allclose(np.diff(lam), lam[0], rtol=1e-13)
    assert all(derived_mode(p, n, t).omega_n_t > 0 for n in (1, 7))


def test_mode_index_validation():
    p = params_from(v=0.6, rho=0.5)
    for bad in (0, -1, 1.5):
        with pytest.raises(ValueError):
            derived_mode(p, bad, 0.0)


def test_doppler_from_speed_small_v():
    d, log_d = doppler_from_speed(1e-9)
    assert log_d == pytest.approx(2e-9, rel=1e-9)
