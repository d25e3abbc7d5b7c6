import itertools

import numpy as np
import pytest

from conftest import small_params
from edgecache.exhaustive import (
    OracleBudget,
    OracleBudgetError,
    exhaustive_search,
    feasible_rows,
    max_feasible_cardinality,
    verify_optimal,
)
from edgecache.generate import make_scenario
from edgecache.objective import hit_count, placement_feasible
from edgecache.radio import build_rate_table

TINY = small_params(n_models=4, n_users=4, requested_per_user=4)


def test_budget_validation():
    with pytest.raises(ValueError):
        OracleBudget(max_states=0)
    with pytest.raises(ValueError):
        OracleBudget(time_limit_s=0.0)


def test_feasible_rows_complete_and_sound():
    scenario = make_scenario(TINY, seed=1)
    lib = scenario.library
    rows = feasible_rows(scenario, 0, OracleBudget())
    seen = {tuple(r.tolist()) for r in rows}
    assert len(seen) == len(rows)
    capacity = int(scenario.capacities[0])
    # Exactly the subsets whose block union fits, empty set included.
    for bits in itertools.product([False, True], repeat=lib.n_models):
        mask = np.array(bits)
        fits = lib.union_size_mask(mask) <= capacity
        assert (tuple(bits) in seen) == fits


def test_exhaustive_beats_or_matches_any_feasible_placement():
    scenario = make_scenario(TINY, seed=2)
    rates = build_rate_table(scenario)
    best_x, best_count, states = exhaustive_search(scenario, rates)
    assert states > 0
    assert placement_feasible(scenario.library, best_x, scenario.capacities)
    assert verify_optimal(scenario, rates, best_x, best_count)
    p = scenario.demand.p_units
    rng = np.random.default_rng(0)
    for _ in range(200):
        x = rng.random(best_x.shape) < 0.4
        if placement_feasible(scenario.library, x, scenario.capacities):
            assert hit_count(p, rates.reach, x) <= best_count


def test_tie_break_is_lexicographic_minimum():
    scenario = make_scenario(TINY, seed=4)
    rates = build_rate_table(scenario)
    best_x, best_count, _ = exhaustive_search(scenario, rates)
    # Re-enumerate and keep every optimal placement; the oracle must return
    # the lexicographically smallest flattened matrix.
    per_server = [feasible_rows(scenario, m, OracleBudget()) for m in range(scenario.n_servers)]
    p = scenario.demand.p_units
    optima = []
    for combo in itertools.product(*per_server):
        x = np.array(combo)
        if hit_count(p, rates.reach, x) == best_count:
            optima.append(tuple(x.flatten().tolist()))
    assert tuple(best_x.flatten().tolist()) == min(optima)


def test_state_budget_enforced():
    scenario = make_scenario(TINY, seed=5)
    rates = build_rate_table(scenario)
    with pytest.raises(OracleBudgetError) as exc:
        exhaustive_search(scenario, rates, OracleBudget(max_states=10))
    assert exc.value.states_visited >= 10


def test_time_budget_enforced():
    scenario = make_scenario(small_params(n_models=8), seed=6)
    rates = build_rate_table(scenario)
    with pytest.raises(OracleBudgetError, match="time limit|over budget"):
        exhaustive_search(scenario, rates, OracleBudget(time_limit_s=1e-9))


def test_max_feasible_cardinality():
    scenario = make_scenario(TINY, seed=3)
    gamma = max_feasible_cardinality(scenario)
    per_server = [feasible_rows(scenario, m, OracleBudget()) for m in range(scenario.n_servers)]
    expect = sum(max(int(r.sum()) for r in rows) for rows in per_server)
    assert gamma == expect
    assert 0 <= gamma <= scenario.n_servers * scenario.n_models


def test_unbounded_capacity_places_everything_somewhere():
    params = small_params(n_models=4, n_users=4, requested_per_user=4, capacity=10 ** 12)
    scenario = make_scenario(params, seed=8)
    rates = build_rate_table(scenario)
    best_x, best_count, _ = exhaustive_search(scenario, rates)
    # With room for the full library on every server, the optimum equals
    # saturating every reachable request.
    x_full = np.ones_like(best_x)
    assert best_count == hit_count(scenario.demand.p_units, rates.reach, x_full)
