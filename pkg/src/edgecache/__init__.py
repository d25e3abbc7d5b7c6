"""Parameter-sharing model placement for wireless edge caches.

Models that share parameter blocks pay for each block once per server;
the solvers here maximize the demand-weighted cache hit ratio under
per-server storage budgets and delivery-latency deadlines.
"""

from .evaluate import evaluate_fading, mobility_series
from .exhaustive import OracleBudget, exhaustive_search, max_feasible_cardinality
from .generate import (
    LibraryParams,
    MobilityParams,
    ScenarioParams,
    TopologyParams,
    make_scenario,
    sample_demand,
    sample_topology,
    synth_library,
)
from .greedy import greedy_placement, independent_placement, marginal_gain
from .knapsack import dp_select
from .library import ModelLibrary, Placement, build_library
from .objective import hit_count, hit_ratio, residual_utilities, storage_used, update_served
from .radio import RadioParams, build_rate_table, default_radio_params, expected_rate
from .scenario import DemandMatrix, Scenario, load_scenario, save_scenario
from .successive import Quantizer, enumerate_combinations, solve_server, successive_placement

__all__ = [
    "DemandMatrix",
    "LibraryParams",
    "MobilityParams",
    "ModelLibrary",
    "OracleBudget",
    "Placement",
    "Quantizer",
    "RadioParams",
    "Scenario",
    "ScenarioParams",
    "TopologyParams",
    "build_library",
    "build_rate_table",
    "default_radio_params",
    "dp_select",
    "enumerate_combinations",
    "evaluate_fading",
    "exhaustive_search",
    "expected_rate",
    "greedy_placement",
    "hit_count",
    "hit_ratio",
    "independent_placement",
    "load_scenario",
    "make_scenario",
    "marginal_gain",
    "max_feasible_cardinality",
    "mobility_series",
    "residual_utilities",
    "sample_demand",
    "sample_topology",
    "save_scenario",
    "solve_server",
    "storage_used",
    "successive_placement",
    "synth_library",
    "update_served",
]
