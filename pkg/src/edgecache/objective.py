"""Cache-hit objective, storage feasibility and residual-utility bookkeeping.

All demand arithmetic happens in integer micro-units so the successive
solver's per-server contributions sum exactly to the hit count of the
union placement.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .library import ModelLibrary
from .radio import RateTable
from .scenario import Scenario


def storage_used(library: ModelLibrary, x: np.ndarray, m: int) -> int:
    """Bytes occupied on server m by the block union of its placed models."""
    return library.union_size_mask(np.asarray(x, dtype=bool)[m])


def placement_feasible(library: ModelLibrary, x: np.ndarray, capacities: np.ndarray) -> bool:
    return all(
        storage_used(library, x, m) <= int(capacities[m]) for m in range(x.shape[0])
    )


def covered_requests(reach: np.ndarray, x: np.ndarray) -> np.ndarray:
    """(K, I) bool: request (k, i) is servable by some placed reachable copy."""
    return (reach & np.asarray(x, dtype=bool)[:, None, :]).any(axis=0)


def hit_count(p_units: np.ndarray, reach: np.ndarray, x: np.ndarray) -> int:
    """Demand-weighted hits in exact micro-units."""
    return int(p_units[covered_requests(reach, x)].sum())


def hit_ratio(scenario: Scenario, rates: RateTable, x: np.ndarray) -> float:
    """Expected cache hit ratio: demand mass servable within deadline over
    total demand mass.  Uncovered users stay in the denominator."""
    p = scenario.demand.p_units
    if x.shape != (scenario.n_servers, scenario.n_models):
        raise ValueError("placement dimensions do not match the scenario")
    return hit_count(p, rates.reach, x) / scenario.demand.total_units


def new_served_mask(n_users: int, n_models: int) -> np.ndarray:
    """All-zero (K, I) mask: nothing is served by earlier-decided servers."""
    return np.zeros((n_users, n_models), dtype=bool)


def residual_utilities(
    scenario: Scenario, rates: RateTable, served: np.ndarray, m: int
) -> np.ndarray:
    """Per-model expected hits (micro-units) server m can still add, counting
    only requests no earlier-decided server satisfies."""
    p = scenario.demand.p_units
    active = rates.reach[m] & ~served  # (K, I)
    return np.where(active, p, 0).sum(axis=0).astype(np.int64)


def update_served(
    rates: RateTable, served: np.ndarray, m: int, placed: Iterable[int]
) -> np.ndarray:
    """Mark requests newly satisfied by the models placed on server m.

    Monotone and idempotent; never clears a bit.
    """
    out = served.copy()
    for i in placed:
        out[:, i] |= rates.reach[m, :, i]
    return out
