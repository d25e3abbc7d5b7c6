"""Global marginal-gain greedy placement and the no-sharing baseline.

Each step adds the single (server, model) copy with the largest hit-count
gain among those that still fit.  The baseline runs the same loop but
charges every placed model its full download size, ignoring block overlap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .objective import covered_requests
from .radio import RateTable
from .scenario import Scenario


@dataclass
class GreedyState:
    x: np.ndarray  # (M, I) bool
    placed_blocks: np.ndarray  # (M, J) bool
    used_bytes: np.ndarray  # (M,) int64
    hit_mask: np.ndarray  # (K, I) bool, requests already servable
    steps: int = 0


def _init_state(scenario: Scenario) -> GreedyState:
    M, I = scenario.n_servers, scenario.n_models
    return GreedyState(
        x=np.zeros((M, I), dtype=bool),
        placed_blocks=np.zeros((M, scenario.library.n_blocks), dtype=bool),
        used_bytes=np.zeros(M, dtype=np.int64),
        hit_mask=np.zeros((scenario.n_users, I), dtype=bool),
    )


def marginal_gain(
    scenario: Scenario, rates: RateTable, state: GreedyState, m: int, i: int
) -> tuple[int, int]:
    """(hit-count gain in micro-units, extra bytes) of adding copy (m, i)."""
    if state.x[m, i]:
        raise ValueError(f"copy ({m}, {i}) is already placed")
    p = scenario.demand.p_units
    gain = int(p[rates.reach[m, :, i] & ~state.hit_mask[:, i], i].sum())
    lib = scenario.library
    new_blocks = lib.membership[i] & ~state.placed_blocks[m]
    return gain, int(lib.block_sizes[new_blocks].sum())


def _gain_matrix(scenario: Scenario, rates: RateTable, state: GreedyState) -> np.ndarray:
    """(M, I) hit-count gains for all candidate copies."""
    p_open = np.where(state.hit_mask, 0, scenario.demand.p_units)  # (K, I)
    return np.einsum("mki,ki->mi", rates.reach, p_open, dtype=np.int64)


def greedy_placement(scenario: Scenario, rates: RateTable, density: bool = False) -> np.ndarray:
    """Repeatedly place the feasible copy with maximum gain.

    Ties fall to smaller extra bytes, then smaller server id, then smaller
    model id.  Zero-gain copies are never placed, so the loop stops once no
    feasible copy improves the hit count.  ``density`` switches the rule to
    gain per extra byte (off by default).
    """
    lib = scenario.library
    state = _init_state(scenario)
    sizes = lib.block_sizes
    membership = lib.membership.astype(np.int64)
    p = scenario.demand.p_units

    # Full gain and extra-bytes matrices once; after each placement only the
    # placed model's gain column and the placed server's byte row change.
    gains = _gain_matrix(scenario, rates, state)
    inc = np.einsum("ij,mj->mi", membership, np.where(state.placed_blocks, 0, sizes))

    while True:
        feasible = (~state.x) & (state.used_bytes[:, None] + inc <= scenario.capacities[:, None])
        candidates = feasible & (gains > 0)
        if not candidates.any():
            break
        if density:
            score = np.where(candidates, gains / np.maximum(inc, 1), -1.0)
        else:
            score = np.where(candidates, gains, -1)
        best = score.max()
        ms, is_ = np.nonzero(score == best)
        order = np.lexsort((is_, ms, inc[ms, is_]))
        m, i = int(ms[order[0]]), int(is_[order[0]])

        state.x[m, i] = True
        state.used_bytes[m] += inc[m, i]
        state.placed_blocks[m] |= lib.membership[i]
        state.hit_mask[:, i] |= rates.reach[m, :, i]
        state.steps += 1

        p_open_i = np.where(state.hit_mask[:, i], 0, p[:, i])
        gains[:, i] = rates.reach[:, :, i] @ p_open_i
        inc[m] = membership @ np.where(state.placed_blocks[m], 0, sizes)
    return state.x


def independent_placement(scenario: Scenario, rates: RateTable) -> np.ndarray:
    """Greedy baseline with additive storage accounting.

    Every placed model pays its full download size, so block overlap gives
    no discount; the result is feasible under both accountings.
    """
    state = _init_state(scenario)
    sizes = scenario.library.model_sizes  # full size per model
    p = scenario.demand.p_units
    gains = _gain_matrix(scenario, rates, state)
    inc = np.broadcast_to(sizes, state.x.shape)

    while True:
        feasible = (~state.x) & (state.used_bytes[:, None] + inc <= scenario.capacities[:, None])
        candidates = feasible & (gains > 0)
        if not candidates.any():
            break
        score = np.where(candidates, gains, -1)
        best = score.max()
        ms, is_ = np.nonzero(score == best)
        order = np.lexsort((is_, ms, inc[ms, is_]))
        m, i = int(ms[order[0]]), int(is_[order[0]])

        state.x[m, i] = True
        state.used_bytes[m] += int(sizes[i])
        state.hit_mask[:, i] |= rates.reach[m, :, i]
        state.steps += 1

        p_open_i = np.where(state.hit_mask[:, i], 0, p[:, i])
        gains[:, i] = rates.reach[:, :, i] @ p_open_i
    return state.x


def rebuild_state(scenario: Scenario, rates: RateTable, x: np.ndarray) -> GreedyState:
    """Recompute the incremental bookkeeping for a given placement."""
    lib = scenario.library
    state = _init_state(scenario)
    state.x = np.asarray(x, dtype=bool).copy()
    state.placed_blocks = (state.x[:, :, None] & lib.membership[None]).any(axis=1)
    state.used_bytes = np.array(
        [lib.union_size_mask(state.x[m]) for m in range(scenario.n_servers)], dtype=np.int64
    )
    state.hit_mask = covered_requests(rates.reach, state.x)
    return state
