"""Brute-force placement oracle for desk-scale instances.

Enumerates, per server, every model subset whose block union fits the
capacity, then walks the cross product of rows scoring each full placement.
Guarded by a state budget and a wall-clock limit.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .objective import hit_count
from .radio import RateTable
from .scenario import Scenario


class OracleBudgetError(RuntimeError):
    def __init__(self, states_visited: int, reason: str):
        super().__init__(f"oracle aborted after {states_visited} states: {reason}")
        self.states_visited = states_visited


@dataclass(frozen=True)
class OracleBudget:
    max_states: int = 5_000_000
    time_limit_s: float = 300.0

    def __post_init__(self):
        if self.max_states <= 0 or self.time_limit_s <= 0:
            raise ValueError("oracle budget must be positive")


def feasible_rows(scenario: Scenario, m: int, budget: OracleBudget) -> list[np.ndarray]:
    """All model subsets (as bool rows) whose block union fits server m.

    DFS in model order; union size is monotone, so a branch that already
    exceeds the capacity is cut without visiting its supersets.
    """
    lib = scenario.library
    capacity = int(scenario.capacities[m])
    I = lib.n_models
    rows: list[np.ndarray] = []

    def extend(start: int, mask: np.ndarray, blocks: np.ndarray, used: int):
        rows.append(mask.copy())
        if len(rows) > budget.max_states:
            raise OracleBudgetError(len(rows), "per-server row enumeration over budget")
        for i in range(start, I):
            new_blocks = lib.membership[i] & ~blocks
            extra = int(lib.block_sizes[new_blocks].sum())
            if used + extra > capacity:
                continue
            mask[i] = True
            extend(i + 1, mask, blocks | lib.membership[i], used + extra)
            mask[i] = False

    extend(0, np.zeros(I, dtype=bool), np.zeros(lib.n_blocks, dtype=bool), 0)
    return rows


def exhaustive_search(
    scenario: Scenario, rates: RateTable, budget: OracleBudget = OracleBudget()
) -> tuple[np.ndarray, int, int]:
    """(optimal placement, optimal hit count in micro-units, states visited).

    Ties resolve to the lexicographically smallest flattened placement.
    """
    deadline = time.perf_counter() + budget.time_limit_s
    M, I = scenario.n_servers, scenario.n_models
    p = scenario.demand.p_units

    per_server = [feasible_rows(scenario, m, budget) for m in range(M)]
    reach = rates.reach

    best_count = -1
    best_key: tuple | None = None
    best_x = np.zeros((M, I), dtype=bool)
    states = 0
    # Earlier models weigh more so numeric row order matches lexicographic.
    weights = 1 << np.arange(I - 1, -1, -1, dtype=np.int64)

    def walk(m: int, rows_so_far: list[np.ndarray]):
        nonlocal best_count, best_key, best_x, states
        if m == M:
            states += 1
            if states > budget.max_states:
                raise OracleBudgetError(states, "placement enumeration over budget")
            if states % 4096 == 0 and time.perf_counter() > deadline:
                raise OracleBudgetError(states, "time limit exceeded")
            # Direct evaluation of the hit objective for this placement.
            x = np.array(rows_so_far, dtype=bool)
            covered = (reach & x[:, None, :]).any(axis=0)
            count = int(p[covered].sum())
            if count >= best_count:
                key = tuple(int(r @ weights) for r in rows_so_far)
                if count > best_count or key < best_key:
                    best_count = count
                    best_key = key
                    best_x = x
            return
        for row in per_server[m]:
            rows_so_far.append(row)
            walk(m + 1, rows_so_far)
            rows_so_far.pop()

    walk(0, [])
    return best_x, best_count, states


def max_feasible_cardinality(scenario: Scenario, budget: OracleBudget = OracleBudget()) -> int:
    """Largest number of placed copies any feasible placement can hold.

    The capacity constraints are per server, so the maximum decomposes into
    the per-server maxima over the enumerated feasible rows.
    """
    total = 0
    for m in range(scenario.n_servers):
        rows = feasible_rows(scenario, m, budget)
        total += max(int(r.sum()) for r in rows)
    return total


def verify_optimal(
    scenario: Scenario, rates: RateTable, x: np.ndarray, opt_count: int
) -> bool:
    """True iff the given placement attains the oracle's hit count."""
    return hit_count(scenario.demand.p_units, rates.reach, x) == opt_count
