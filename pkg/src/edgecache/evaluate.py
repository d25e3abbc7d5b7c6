"""Placement evaluation under fading realizations and user mobility.

Placements are decided on expected rates; here they are re-scored under
i.i.d. unit-mean exponential power gains per link, or along a mobility
trace with reachability recomputed from the moving user positions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .generate import MobilityParams, init_mobility, mobility_step
from .radio import build_rate_table, latencies_from_rates, pairwise_distances, rate_matrix
from .scenario import Scenario


def evaluate_fading(
    scenario: Scenario,
    x: np.ndarray,
    n_realizations: int = 1000,
    seed: int = 0,
    batch: int = 128,
) -> tuple[float, float]:
    """(mean, std) of the realized hit ratio over fading draws.

    Each realization r draws its gains from the sub-seed (seed, r), so the
    result is independent of batching or evaluation order.
    """
    params = scenario.radio
    x = np.asarray(x, dtype=bool)
    dist = pairwise_distances(scenario.server_pos, scenario.user_pos)
    assoc = dist <= params.coverage_radius_m
    p = scenario.demand.p_units
    total = scenario.demand.total_units
    M, K = dist.shape

    ratios = np.empty(n_realizations, dtype=np.float64)
    done = 0
    while done < n_realizations:
        n = min(batch, n_realizations - done)
        gains = np.stack([
            np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(done + r,)))
            .exponential(size=(M, K))
            for r in range(n)
        ])
        rates = rate_matrix(params, dist, gains)  # (n, M, K)
        lat = latencies_from_rates(
            rates, assoc, scenario.library.model_sizes,
            params.backhaul_rate_bps, scenario.demand.inference_s,
        )  # (n, M, K, I)
        reach = lat <= scenario.demand.deadline_s[None, None, :, :]
        covered = (reach & x[None, :, None, :]).any(axis=1)  # (n, K, I)
        ratios[done:done + n] = (covered * p[None]).sum(axis=(1, 2)) / total
        done += n
    return float(ratios.mean()), float(ratios.std())


@dataclass
class MobilityPoint:
    t_s: float
    hit_ratio: float


def mobility_series(
    scenario: Scenario,
    x: np.ndarray,
    params: MobilityParams,
    horizon_s: float,
    seed: int = 0,
) -> list[MobilityPoint]:
    """Hit ratio of a fixed placement re-evaluated each slot as users move.

    Reachability is recomputed from expected rates at the new positions;
    the placement is never revised.
    """
    x = np.asarray(x, dtype=bool)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    state = init_mobility(scenario.user_pos, params, rng)
    p = scenario.demand.p_units
    total = scenario.demand.total_units

    n_slots = int(round(horizon_s / params.slot_s))
    out: list[MobilityPoint] = []
    for slot in range(n_slots + 1):
        moved = scenario.with_user_positions(state.pos)
        rates = build_rate_table(moved)
        covered = (rates.reach & x[:, None, :]).any(axis=0)
        out.append(MobilityPoint(slot * params.slot_s, float(p[covered].sum() / total)))
        if slot < n_slots:
            state = mobility_step(state, params, scenario.area_side_m, rng)
    return out
