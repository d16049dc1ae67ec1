import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dcecavity.core import params_from
from dcecavity.spectrum import (
    EULER_GAMMA,
    cluster_interference,
    exact_maximum_search,
    leading_log_estimate,
    maxima_positions,
    mean_particle_number,
    plateau_estimate,
    scan_theta,
    spectrum,
    tail_slope,
    zero_positions,
)
from dcecavity.transform import closed_form_block


def d_of(gamma):
    return params_from(gamma=gamma, theta=0.5).d


def brute_force(n, d, th, M=400_000):
    """Plain float sum of the series with the crude ``k^-3`` remainder bound."""
    A, B = d**th, d ** (1 - th)
    k = np.arange(1, M + 1, dtype=float)
    terms = k * np.sin(np.pi * (A - 1) * (n + k * B) / (d - 1)) ** 2 / ((n * A + k) ** 2 * (n + k * B) ** 2)
    pref = (d - 1) ** 2 * n / math.pi**2
    return pref * math.fsum(terms), pref / (2 * M**2 * B**2)


@pytest.mark.parametrize("n,d,th", [(1, 4.0, 0.5), (3, 13.93, 0.8), (2, 400.0, 0.2), (5, 1.5, 0.95)])
def test_matches_brute_force_sum(n, d, th):
    ref, rem = brute_force(n, d, th)
    r = mean_particle_number(n, d, th)
    assert r.converged
    # the brute-force phases lose ~ k * eps accuracy
    assert abs(r.n_mean - ref) <= r.tail_bound + rem + 1e-9 * ref


@pytest.mark.parametrize("n,d,th", [(1, 4.0, 0.5), (2, 13.93, 0.9), (4, 1.5, 0.3)])
def test_tail_bound_is_honest(n, d, th):
    loose = mean_particle_number(n, d, th, tol=1e-5)
    tight = mean_particle_number(n, d, th, tol=1e-12)
    assert abs(loose.n_mean - tight.n_mean) <= loose.tail_bound + tight.tail_bound


@given(st.integers(1, 64), st.floats(1.01, 1e4))
def test_theta_zero_gives_exact_zero(n, d):
    r = mean_particle_number(n, d, 0.0)
    assert r.n_mean == 0.0 and r.tail_bound == 0.0


@given(st.integers(1, 32), st.floats(1.05, 1e3), st.floats(0.0, 0.999))
def test_non_negative(n, d, th):
    assert mean_particle_number(n, d, th, tol=1e-6).n_mean >= 0.0


def test_spectrum_all_zero_at_theta_zero():
    s = spectrum(4.0, 0.0, 32)
    assert np.all(s.values() == 0.0)
    assert s.shortfall == ()


@pytest.mark.parametrize("m", [1, 2, 3])
def test_periodicity_is_bitwise(m):
    # d = 4 and rho = 1/2 keep every rescaled rho exact in binary
    a = params_from(v=0.6, rho=0.5)
    b = params_from(v=0.6, rho=0.5 * a.d ** (-m))
    assert (b.d, b.theta) == (a.d, a.theta)
    assert np.array_equal(spectrum(a.d, a.theta, 8).values(), spectrum(b.d, b.theta, 8).values())


def test_periodicity_within_rounding():
    a = params_from(v=0.6, rho=0.3)
    for m in (1, 2, 3):
        b = params_from(v=0.6, rho=0.3 * a.d ** (-m))
        assert np.allclose(spectrum(a.d, a.theta, 8).values(), spectrum(b.d, b.theta, 8).values(), rtol=1e-12, atol=0)


@pytest.mark.parametrize("gamma", [2.0, 100.0])
def test_seam_decreases_to_zero(gamma):
    d = d_of(gamma)
    vals = [mean_particle_number(1, d, 1 - eps, tol=1e-12).n_mean for eps in (1e-2, 1e-3, 1e-4)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < 1e-3 * mean_particle_number(1, d, 0.5).n_mean


def test_tail_slope_gamma10():
    ns = np.unique(np.round(np.geomspace(64, 256, 9)).astype(int))
    d = d_of(10.0)
    assert abs(tail_slope(d, 0.5, ns) + 1) <= 0.1
    for th in (0.4, 0.6):
        assert abs(tail_slope(d, th, ns) + 1) <= 0.1


@pytest.mark.xfail(strict=True, reason="at gamma=100 the n^-1 regime starts well beyond n = 256")
def test_tail_slope_gamma100():
    ns = np.unique(np.round(np.geomspace(64, 256, 9)).astype(int))
    d = d_of(100.0)
    for th in (0.4, 0.6):
        assert abs(tail_slope(d, th, ns) + 1) <= 0.1


def test_definition_consistency_with_transform_rows():
    d, th = 4.0, 0.5
    _, V, _ = closed_form_block(d, th, np.arange(1, 5), np.arange(1, 513))
    rows = (np.abs(V) ** 2).sum(axis=1)
    for n in range(1, 5):
        r = mean_particle_number(n, d, th, tol=1e-12)
        # |V_nk|^2 <= (d-1)^2 n k / (pi^2 k^4 B^2) bounds the dropped columns
        trunc = (d - 1) ** 2 * n / (math.pi**2 * 2 * 512**2 * d ** (1 - th) ** 2)
        assert r.n_mean - trunc - r.tail_bound - 1e-14 <= rows[n - 1] <= r.n_mean + r.tail_bound + 1e-14


def test_n_greater_than_one_at_gamma_1000():
    m = exact_maximum_search(1, d_of(1000.0))
    assert m.n_at_max > 1.0


@pytest.mark.parametrize("gamma,ref", [(2.0, 0.85), (100.0, 0.94), (1000.0, 0.96)])
def test_exact_maximum_positions(gamma, ref):
    assert exact_maximum_search(1, d_of(gamma)).theta_max == pytest.approx(ref, abs=0.01)


def test_exact_search_flags_secondary_bump():
    assert exact_maximum_search(1, d_of(2.0)).multimodal


def test_exact_search_bracket_validation():
    with pytest.raises(ValueError):
        exact_maximum_search(1, 4.0, bracket=(0.0, 0.5))


def test_plateau_estimate():
    assert plateau_estimate(1) == pytest.approx(7.17e-2, abs=5e-5)
    assert plateau_estimate(2) == pytest.approx(5.34e-2, abs=5e-5)
    assert plateau_estimate(4) < plateau_estimate(2)
    assert EULER_GAMMA == pytest.approx(0.5772156649, abs=1e-10)


def test_plateau_close_to_exact_at_gamma_1000():
    exact = mean_particle_number(1, d_of(1000.0), 0.5).n_mean
    assert abs(exact - plateau_estimate(1)) / plateau_estimate(1) < 0.15


def test_predicted_maxima():
    assert maxima_positions(1, d_of(2.0))[0] == pytest.approx(0.74, abs=0.005)
    assert maxima_positions(1, d_of(10.0))[0] == pytest.approx(0.88, abs=0.005)
    assert len(maxima_positions(2, d_of(1000.0))) == 2
    assert maxima_positions(1, 4.0) == [1 + math.log(0.5) / math.log(4.0)]


def test_leading_log_sine_zero():
    # n d^(theta-1) = 1 at theta = 1 - ln(2)/ln(d) for n = 2
    d = 50.0
    assert leading_log_estimate(2, d, 1 - math.log(2) / math.log(d)) < 1e-25


def test_leading_log_at_maximum_gamma100():
    d = d_of(100.0)
    th = maxima_positions(1, d)[0]
    est = leading_log_estimate(1, d, th)
    assert est == pytest.approx(math.log(d) / math.pi**2, rel=1e-12)
    exact = mean_particle_number(1, d, th).n_mean
    assert 0.5 <= est / exact <= 2.0


def test_leading_log_grows_like_log_d():
    ests = []
    for g in (10.0, 100.0, 1000.0):
        d = d_of(g)
        ests.append(leading_log_estimate(1, d, maxima_positions(1, d)[0]) / math.log(d))
    assert np.allclose(ests, 1 / math.pi**2, rtol=1e-12)


def test_zero_positions():
    z = zero_positions(4.0, 3)
    assert [x.k for x in z] == [1, 2, 3]
    assert z[0].rho == 0.25
    for x in z:
        p = params_from(v=0.6, rho=x.rho)
        assert p.theta == 0.0
        for n in range(1, 9):
            r = mean_particle_number(n, p.d, p.theta)
            assert r.n_mean <= r.tail_bound


def test_cluster_destructive_at_exact_power():
    p = params_from(v=0.6, rho_power=1)
    c = cluster_interference(p, 1)
    assert c.classification == "destructive"


def test_cluster_constructive_near_predicted_maximum():
    d = d_of(1000.0)
    th = maxima_positions(1, d)[0]
    assert cluster_interference(params_from(gamma=1000.0, theta=th), 1).classification == "constructive"
    assert cluster_interference(params_from(gamma=1000.0, theta=th - 0.01), 1).classification == "neither"


@given(st.integers(1, 20), st.floats(0.01, 0.99), st.floats(0.05, 0.95))
def test_cluster_order_constraint(n, th, v):
    c = cluster_interference(params_from(v=v, theta=th), n)
    if c.classification == "constructive":
        assert 2 * c.kinematics.j + 1 <= n


def test_scan_is_independent_of_workers():
    grid = np.linspace(0, 0.95, 12)
    a = scan_theta((1, 2), 13.93, grid, workers=1)
    b = scan_theta((1, 2), 13.93, grid, workers=2)
    assert a == b
    assert [r.n for r in a[:4]] == [1, 2, 1, 2]


def test_scan_rejects_bad_grid():
    with pytest.raises(ValueError):
        scan_theta((1,), 4.0, [0.5, 1.0])


def test_validation():
    with pytest.raises(ValueError):
        mean_particle_number(1, 1.0, 0.5)
    with pytest.raises(ValueError):
        mean_particle_number(1, 4.0, 1.0)
    with pytest.raises(ValueError):
        mean_particle_number(0, 4.0, 0.5)
