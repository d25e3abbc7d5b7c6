"""Successive per-server placement with a shared-block combination sweep.

Servers are decided in index order.  For one server, every subset of the
shared blocks that fits the capacity is tried as a pre-paid combination;
the models whose shared blocks all lie inside the combination reduce to an
additive knapsack over their specific-block bytes, solved exactly by the
value-axis DP.  Utilities can be floor-rounded to multiples of
epsilon * u_min, trading at most a (1 - epsilon) factor per server for a
much shorter DP value axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .knapsack import DEFAULT_DP_CELL_CAP, dp_select
from .library import ModelLibrary
from .objective import new_served_mask, residual_utilities, update_served
from .radio import RateTable
from .scenario import Scenario

DEFAULT_COMBINATION_CAP = 2 ** 20


class CombinationCapError(RuntimeError):
    """Too many shared blocks to enumerate; use the global greedy instead."""


@dataclass(frozen=True)
class Combination:
    """A subset of shared blocks assumed pre-cached on the server."""

    blocks: tuple[int, ...]  # sorted shared-block ids
    total_bytes: int  # size of the subset
    eligible: tuple[int, ...]  # models whose shared blocks all lie in the subset
    specific_bytes: tuple[int, ...]  # per eligible model, bytes outside the subset


def enumerate_combinations(
    library: ModelLibrary,
    capacity: int,
    cap: int = DEFAULT_COMBINATION_CAP,
    model_filter: np.ndarray | None = None,
) -> list[Combination]:
    """All shared-block subsets fitting the capacity, empty set included.

    ``model_filter`` optionally restricts the eligible lists to a boolean
    selection of models (utility pruning); sizes are unaffected.
    """
    shared = sorted(library.shared_blocks)
    beta = len(shared)
    if 2 ** beta > cap:
        raise CombinationCapError(
            f"2^{beta} shared-block combinations exceed the cap {cap}; "
            "route this library to the global greedy solver"
        )
    sizes = library.block_sizes
    model_ids = range(library.n_models)
    if model_filter is not None:
        model_ids = [i for i in model_ids if model_filter[i]]
    shared_sets = library.model_shared_sets

    out: list[Combination] = []
    for bits in range(2 ** beta):
        subset = tuple(shared[t] for t in range(beta) if bits >> t & 1)
        d_n = int(sizes[list(subset)].sum()) if subset else 0
        if d_n > capacity:
            continue
        sset = frozenset(subset)
        eligible = tuple(i for i in model_ids if shared_sets[i] <= sset)
        spec = tuple(int(library.model_specific_sizes[i]) for i in eligible)
        out.append(Combination(subset, d_n, eligible, spec))
    # Deterministic order: by size then lexicographic block tuple.
    out.sort(key=lambda c: (len(c.blocks), c.blocks))
    return out


@dataclass(frozen=True)
class Quantizer:
    """Utility quantization policy for the DP value axis.

    epsilon = 0 keeps utilities exact (reduced by their gcd, which leaves
    the selected sets unchanged); epsilon > 0 floors each utility to
    floor(u / (epsilon * u_min)) with u_min the smallest positive utility
    on the server.
    """

    epsilon: float = 0.0

    def __post_init__(self):
        if not 0 <= self.epsilon <= 1:
            raise ValueError("epsilon must lie in [0, 1]")

    @property
    def exact(self) -> bool:
        return self.epsilon == 0

    def quantize(self, utilities: np.ndarray, u_min: int) -> np.ndarray:
        """Map positive micro-unit utilities to DP integers."""
        utilities = np.asarray(utilities, dtype=np.int64)
        if self.exact:
            vals = utilities.copy()
        else:
            frac = Fraction(str(self.epsilon)) * u_min
            vals = (utilities * frac.denominator) // frac.numerator
        # Granularity reduction: divide by the gcd of the values.  This is
        # a pure rescaling of the value axis; selections are unchanged.
        positive = vals[vals > 0]
        if positive.size:
            g = int(np.gcd.reduce(positive))
            if g > 1:
                vals = vals // g
        return vals


@dataclass
class ServerSolution:
    placed: list[int]  # model ids cached on the server
    utility_units: int  # unrounded residual utility, micro-units
    combination: Combination | None


@dataclass
class SuccessiveResult:
    x: np.ndarray  # (M, I) bool
    contributions: list[int]  # per-server utility in micro-units
    served: np.ndarray  # final (K, I) served mask

    @property
    def total_units(self) -> int:
        return sum(self.contributions)


def solve_server(
    scenario: Scenario,
    rates: RateTable,
    served: np.ndarray,
    m: int,
    quantizer: Quantizer,
    combination_cap: int = DEFAULT_COMBINATION_CAP,
    dp_cell_cap: int = DEFAULT_DP_CELL_CAP,
) -> ServerSolution:
    """Best model set for server m given what earlier servers already serve.

    Every fitting shared-block combination is scored; within one, the DP
    maximizes quantized residual utility over specific-block bytes, and the
    winner is re-scored with unrounded utilities.  Ties prefer smaller
    combination size, then the lexicographically smaller block tuple.
    """
    lib = scenario.library
    capacity = int(scenario.capacities[m])
    util = residual_utilities(scenario, rates, served, m)
    positive = util > 0
    if not positive.any():
        return ServerSolution([], 0, None)
    u_min = int(util[positive].min())

    combos = enumerate_combinations(lib, capacity, combination_cap, model_filter=positive)
    best: ServerSolution | None = None
    best_key: tuple | None = None
    for combo in combos:
        ids = np.array(combo.eligible, dtype=np.int64)
        if ids.size == 0:
            score, chosen_ids = 0, []
        else:
            vals = quantizer.quantize(util[ids], u_min)
            keep = vals > 0
            ids = ids[keep]
            sizes = np.array(combo.specific_bytes, dtype=np.int64)[keep]
            if ids.size == 0:
                score, chosen_ids = 0, []
            else:
                _, chosen = dp_select(vals[keep], sizes, capacity - combo.total_bytes, dp_cell_cap)
                chosen_ids = [int(ids[c]) for c in chosen]
                score = int(util[chosen_ids].sum())
        key = (-score, combo.total_bytes, combo.blocks)
        if best_key is None or key < best_key:
            best_key = key
            best = ServerSolution(chosen_ids, score, combo)
    assert best is not None
    return best


def successive_placement(
    scenario: Scenario,
    rates: RateTable,
    epsilon: float = 0.0,
    combination_cap: int = DEFAULT_COMBINATION_CAP,
    dp_cell_cap: int = DEFAULT_DP_CELL_CAP,
) -> SuccessiveResult:
    """Decide servers one by one, each solving its residual sub-problem.

    The per-server contributions sum exactly (in micro-units) to the hit
    count of the union placement.
    """
    quantizer = Quantizer(epsilon)
    M, I = scenario.n_servers, scenario.n_models
    x = np.zeros((M, I), dtype=bool)
    served = new_served_mask(scenario.n_users, I)
    contributions: list[int] = []
    for m in range(M):
        sol = solve_server(
            scenario, rates, served, m, quantizer, combination_cap, dp_cell_cap
        )
        for i in sol.placed:
            x[m, i] = True
        contributions.append(sol.utility_units)
        served = update_served(rates, served, m, sol.placed)
    return SuccessiveResult(x, contributions, served)
