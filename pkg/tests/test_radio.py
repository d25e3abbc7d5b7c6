import math

import numpy as np
import pytest
from scipy.integrate import quad

from edgecache.radio import (
    BITS_PER_BYTE,
    RadioParams,
    build_rate_table,
    dbm_to_watts,
    default_radio_params,
    expected_rate,
    instantaneous_rate,
    latencies_from_rates,
    pairwise_distances,
    rate_matrix,
)

# Frozen reference values for the default parameters (gamma0=1, alpha0=4,
# B=400 MHz, P=43 dBm, p_A=0.5, noise PSD -174 dBm/Hz) with 8 associated
# users at 100 m, computed once by direct evaluation of the closed forms.
REF_BAND_HZ = 100_000_000.0  # 400e6 / (0.5 * 8)
REF_POWER_W = 4.988155787422198  # 10^(43/10)/1000 / (0.5 * 8)
REF_SNR = 125296.80840681764
REF_RATE_BPS = 1693500165.5032203
# Mean rate under unit-mean exponential fading, by numerical quadrature of
# band * log2(1 + g * snr) * exp(-g) over g in [0, inf).
REF_FADING_MEAN_BPS = 1610238399.1197362


def test_dbm_to_watts():
    assert dbm_to_watts(30.0) == pytest.approx(1.0)
    assert dbm_to_watts(0.0) == pytest.approx(1e-3)
    assert dbm_to_watts(43.0) == pytest.approx(19.95262314968879)


def test_expected_rate_matches_closed_form():
    params = default_radio_params()
    share = params.active_prob * 8
    assert params.bandwidth_hz / share == REF_BAND_HZ
    assert params.power_w / share == pytest.approx(REF_POWER_W, rel=1e-12)
    snr = (params.power_w / share) * params.gamma0 * 100.0 ** (-4.0) / (
        params.noise_psd_w * REF_BAND_HZ
    )
    assert snr == pytest.approx(REF_SNR, rel=1e-12)
    assert expected_rate(params, 100.0, 8) == pytest.approx(REF_RATE_BPS, rel=1e-12)


def test_rate_decreases_with_distance_and_load():
    params = default_radio_params()
    r1 = expected_rate(params, 50.0, 8)
    r2 = expected_rate(params, 200.0, 8)
    assert r1 > r2 > 0
    # More associated users shrink the per-user share.
    assert expected_rate(params, 100.0, 16) < expected_rate(params, 100.0, 8)


def test_rate_outside_coverage_rejected():
    params = default_radio_params(coverage_radius_m=275.0)
    with pytest.raises(ValueError, match="coverage"):
        expected_rate(params, 276.0, 4)


def test_min_distance_clamp():
    params = default_radio_params()
    assert expected_rate(params, 0.0, 4) == expected_rate(params, params.min_distance_m, 4)


def test_instantaneous_rate_gain_one_is_mean():
    params = default_radio_params()
    assert instantaneous_rate(params, 120.0, 6, 1.0) == expected_rate(params, 120.0, 6)
    assert instantaneous_rate(params, 120.0, 6, 0.0) == 0.0


def test_fading_mean_matches_quadrature():
    params = default_radio_params()

    def integrand(g):
        return instantaneous_rate(params, 100.0, 8, g) * math.exp(-g)

    val, err = quad(integrand, 0.0, np.inf)
    assert val == pytest.approx(REF_FADING_MEAN_BPS, rel=1e-9)
    # Jensen: mean rate under fading is below the rate at the mean gain.
    assert val < REF_RATE_BPS


def test_from_config_accepts_dbm():
    p = RadioParams.from_config({
        "gamma0": 1.0, "alpha0": 4.0, "noise_psd_dbm_per_hz": -174.0,
        "bandwidth_hz": 400e6, "power_dbm": 43.0, "active_prob": 0.5,
        "backhaul_rate_bps": 10e9, "coverage_radius_m": 275.0,
    })
    assert p == default_radio_params()
    # Round trip through the plain-watts config form.
    assert RadioParams.from_config(p.to_config()) == p


def test_invalid_params_rejected():
    base = default_radio_params().to_config()
    for field, bad in [("alpha0", 0.0), ("bandwidth_hz", -1.0), ("active_prob", 0.0),
                       ("active_prob", 1.5), ("coverage_radius_m", 0.0)]:
        cfg = dict(base)
        cfg[field] = bad
        with pytest.raises(ValueError):
            RadioParams.from_config(cfg)


def test_pairwise_distances():
    servers = np.array([[0.0, 0.0], [3.0, 4.0]])
    users = np.array([[3.0, 4.0], [0.0, 0.0], [6.0, 8.0]])
    d = pairwise_distances(servers, users)
    assert d == pytest.approx(np.array([[5.0, 0.0, 10.0], [0.0, 5.0, 5.0]]))


def test_rate_matrix_matches_scalar_path():
    params = default_radio_params()
    rng = np.random.default_rng(3)
    servers = rng.uniform(0, 600, size=(3, 2))
    users = rng.uniform(0, 600, size=(7, 2))
    dist = pairwise_distances(servers, users)
    mat = rate_matrix(params, dist)
    assoc = dist <= params.coverage_radius_m
    for m in range(3):
        n = int(assoc[m].sum())
        for k in range(7):
            if assoc[m, k]:
                assert mat[m, k] == pytest.approx(expected_rate(params, dist[m, k], n))
            else:
                assert math.isnan(mat[m, k])


def test_latency_direct_and_relay():
    params = default_radio_params()
    rate = np.array([[1e8], [np.nan]])  # server 0 covers user 0; server 1 does not
    assoc = np.array([[True], [False]])
    sizes = np.array([25_000_000], dtype=np.int64)  # 2e8 bits
    inference = np.zeros((1, 1))
    lat = latencies_from_rates(rate, assoc, sizes, 1e9, inference)
    assert lat.shape == (2, 1, 1)
    assert lat[0, 0, 0] == pytest.approx(2.0)  # 2e8 bits / 1e8 bps
    # Relay: backhaul 0.2 s plus the best direct 2.0 s.
    assert lat[1, 0, 0] == pytest.approx(2.2)


def test_latency_inference_added_and_uncovered_inf():
    params = default_radio_params()
    rate = np.array([[np.nan]])
    assoc = np.array([[False]])
    sizes = np.array([10], dtype=np.int64)
    lat = latencies_from_rates(rate, assoc, sizes, 1e9, np.full((1, 1), 0.5))
    assert np.isinf(lat[0, 0, 0])  # no covering server at all

    rate = np.array([[1e8]])
    assoc = np.array([[True]])
    lat0 = latencies_from_rates(rate, assoc, sizes, 1e9, np.zeros((1, 1)))
    lat5 = latencies_from_rates(rate, assoc, sizes, 1e9, np.full((1, 1), 0.5))
    assert lat5[0, 0, 0] == pytest.approx(lat0[0, 0, 0] + 0.5)


def test_build_rate_table_consistency(small_scenario):
    scenario, table = small_scenario
    M, K, I = scenario.n_servers, scenario.n_users, scenario.n_models
    assert table.assoc.shape == (M, K)
    assert table.rate.shape == (M, K)
    assert table.latency.shape == (M, K, I)
    assert table.reach.shape == (M, K, I)
    assert (table.n_assoc == table.assoc.sum(axis=1)).all()
    # Reachability is exactly the deadline comparison.
    expected = table.latency <= scenario.demand.deadline_s[None, :, :]
    assert (table.reach == expected).all()
    # NaN rates exactly where not associated.
    assert (np.isnan(table.rate) == ~table.assoc).all()
    # Determinism: rebuilding gives bit-identical tables.
    again = build_rate_table(scenario)
    assert np.array_equal(table.latency, again.latency, equal_nan=True)
    assert (table.reach == again.reach).all()


def test_bits_per_byte_constant():
    assert BITS_PER_BYTE == 8
