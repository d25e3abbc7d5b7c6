"""Link rates, end-to-end delivery latency and deadline reachability.

A user can download either from an associated server (inside its coverage
disk) or via a relay: the holding server ships the model over the backhaul
to the best associated server first.  Reachability marks the (server,
user, model) triples whose end-to-end latency meets the user's deadline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

BITS_PER_BYTE = 8


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) / 1000.0


@dataclass(frozen=True)
class RadioParams:
    gamma0: float  # antenna factor
    alpha0: float  # path-loss exponent
    noise_psd_w: float  # noise power spectral density, W/Hz
    bandwidth_hz: float  # total bandwidth B
    power_w: float  # total transmit power P
    active_prob: float  # user active probability
    backhaul_rate_bps: float  # constant server-to-server rate
    coverage_radius_m: float
    min_distance_m: float = 1.0  # clamp for the path-loss singularity

    def __post_init__(self):
        for name in ("gamma0", "alpha0", "noise_psd_w", "bandwidth_hz", "power_w",
                     "backhaul_rate_bps", "coverage_radius_m", "min_distance_m"):
            if getattr(self, name) <= 0:
                raise ValueError(f"radio parameter {name} must be positive")
        if not 0 < self.active_prob <= 1:
            raise ValueError("active_prob must lie in (0, 1]")

    @classmethod
    def from_config(cls, cfg: dict) -> "RadioParams":
        """Build from a config section; powers may be given in dBm."""
        cfg = dict(cfg)
        if "power_dbm" in cfg:
            cfg["power_w"] = dbm_to_watts(cfg.pop("power_dbm"))
        if "noise_psd_dbm_per_hz" in cfg:
            cfg["noise_psd_w"] = dbm_to_watts(cfg.pop("noise_psd_dbm_per_hz"))
        return cls(**cfg)

    def to_config(self) -> dict:
        return {
            "gamma0": self.gamma0,
            "alpha0": self.alpha0,
            "noise_psd_w": self.noise_psd_w,
            "bandwidth_hz": self.bandwidth_hz,
            "power_w": self.power_w,
            "active_prob": self.active_prob,
            "backhaul_rate_bps": self.backhaul_rate_bps,
            "coverage_radius_m": self.coverage_radius_m,
            "min_distance_m": self.min_distance_m,
        }


# Thermal noise floor; the standard default when a config omits the PSD.
DEFAULT_NOISE_PSD_DBM_PER_HZ = -174.0


def default_radio_params(coverage_radius_m: float = 275.0) -> RadioParams:
    return RadioParams(
        gamma0=1.0,
        alpha0=4.0,
        noise_psd_w=dbm_to_watts(DEFAULT_NOISE_PSD_DBM_PER_HZ),
        bandwidth_hz=400e6,
        power_w=dbm_to_watts(43.0),
        active_prob=0.5,
        backhaul_rate_bps=10e9,
        coverage_radius_m=coverage_radius_m,
    )


def expected_rate(params: RadioParams, distance_m: float, n_assoc_users: int) -> float:
    """Mean downlink rate in bits/s for one of ``n_assoc_users`` associated
    users at the given distance; bandwidth and power are split evenly among
    the expected number of active users."""
    if n_assoc_users < 1:
        raise ValueError("n_assoc_users must be at least 1")
    if distance_m > params.coverage_radius_m:
        raise ValueError("user is outside the server's coverage radius")
    return instantaneous_rate(params, distance_m, n_assoc_users, 1.0)


def instantaneous_rate(
    params: RadioParams, distance_m: float, n_assoc_users: int, fading_power_gain: float
) -> float:
    """Rate under a given fading power gain; gain 1 reproduces the mean rate."""
    if fading_power_gain < 0:
        raise ValueError("fading_power_gain must be non-negative")
    d = max(distance_m, params.min_distance_m)
    share = params.active_prob * n_assoc_users
    band = params.bandwidth_hz / share
    power = params.power_w / share
    snr = fading_power_gain * power * params.gamma0 * d ** (-params.alpha0) / (
        params.noise_psd_w * band
    )
    return band * math.log2(1.0 + snr)


@dataclass
class RateTable:
    """Precomputed link rates, latencies and deadline reachability.

    ``rate[m, k]`` is NaN for non-associated pairs; ``latency`` is +inf for
    users covered by no server.
    """

    assoc: np.ndarray  # (M, K) bool, m covers k
    rate: np.ndarray  # (M, K) float bits/s, NaN outside coverage
    latency: np.ndarray  # (M, K, I) float seconds
    reach: np.ndarray  # (M, K, I) bool
    n_assoc: np.ndarray  # (M,) users inside each server's coverage

    def servers_covering(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.assoc[:, k])


def pairwise_distances(server_pos: np.ndarray, user_pos: np.ndarray) -> np.ndarray:
    diff = server_pos[:, None, :] - user_pos[None, :, :]
    return np.sqrt((diff ** 2).sum(axis=-1))


def rate_matrix(params: RadioParams, dist: np.ndarray, gains: np.ndarray | None = None) -> np.ndarray:
    """Vectorized rate computation over a (..., M, K) distance layout.

    ``gains`` broadcasts against ``dist``; non-associated pairs come out NaN.
    """
    assoc = dist <= params.coverage_radius_m
    n_assoc = assoc.sum(axis=-1, keepdims=True)  # users per server
    d = np.maximum(dist, params.min_distance_m)
    share = params.active_prob * np.maximum(n_assoc, 1)
    band = params.bandwidth_hz / share
    power = params.power_w / share
    snr = power * params.gamma0 * d ** (-params.alpha0) / (params.noise_psd_w * band)
    if gains is not None:
        snr = snr * gains
    rates = band * np.log2(1.0 + snr)
    return np.where(assoc, rates, np.nan)


def latencies_from_rates(
    rate: np.ndarray,
    assoc: np.ndarray,
    model_sizes: np.ndarray,
    backhaul_rate_bps: float,
    inference_s: np.ndarray,
) -> np.ndarray:
    """End-to-end latency (..., M, K, I) from a (..., M, K) rate matrix.

    Associated servers deliver directly; others relay through the user's
    fastest associated server over the backhaul.  Users with no coverage
    get +inf everywhere.
    """
    bits = model_sizes.astype(np.float64) * BITS_PER_BYTE  # (I,)
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = bits / rate[..., :, :, None]  # (..., M, K, I)
    direct = np.where(assoc[..., :, :, None], direct, np.inf)
    # Fastest direct download time per user; min over associated servers.
    best_direct = np.min(direct, axis=-3)  # (..., K, I)
    relay = bits / backhaul_rate_bps + best_direct  # (..., K, I)
    lat = np.where(assoc[..., :, :, None], direct, relay[..., None, :, :])
    return lat + inference_s[..., None, :, :]


def build_rate_table(scenario) -> RateTable:
    """Assemble rates, latencies and reachability for a scenario.

    Pure function of the scenario: identical inputs give identical tables.
    """
    params = scenario.radio
    dist = pairwise_distances(scenario.server_pos, scenario.user_pos)
    assoc = dist <= params.coverage_radius_m
    rate = rate_matrix(params, dist)
    lat = latencies_from_rates(
        rate, assoc, scenario.library.model_sizes,
        params.backhaul_rate_bps, scenario.demand.inference_s,
    )
    reach = lat <= scenario.demand.deadline_s[None, :, :]
    return RateTable(
        assoc=assoc,
        rate=rate,
        latency=lat,
        reach=reach,
        n_assoc=assoc.sum(axis=1),
    )


def e2e_latency(scenario, rates: RateTable, m: int, k: int, i: int) -> float:
    """Delivery latency of model i from server m to user k, in seconds."""
    return float(rates.latency[m, k, i])
