"""Batch experiment runners: sweeps, mobility traces, oracle comparison.

Cell sub-seeds are derived by hashing (master seed, axis value, topology
index), so adding sweep values never perturbs existing cells.  CSV rows
are sorted before writing; with timing columns disabled the output is
byte-deterministic for a fixed config and seed.
"""

from __future__ import annotations

import csv
import hashlib
import math
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .evaluate import evaluate_fading, mobility_series
from .exhaustive import OracleBudget, OracleBudgetError, exhaustive_search, max_feasible_cardinality
from .generate import LibraryParams, MobilityParams, ScenarioParams, TopologyParams, make_scenario
from .greedy import greedy_placement, independent_placement
from .knapsack import DpResourceError
from .objective import hit_ratio, storage_used
from .radio import RadioParams, build_rate_table
from .successive import CombinationCapError, successive_placement


class ConfigError(ValueError):
    """Invalid experiment config; the message names the offending field."""


def derive_seed(master: int, *parts: Any) -> int:
    """Stable 63-bit sub-seed from the master seed and cell coordinates."""
    text = ":".join([str(master)] + [repr(p) for p in parts])
    digest = hashlib.blake2b(text.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1


@dataclass(frozen=True)
class SolverSpec:
    name: str  # successive | greedy | independent
    epsilon: float = 0.1
    density: bool = False

    @property
    def label(self) -> str:
        if self.name == "successive":
            return f"successive(eps={self.epsilon:g})"
        return self.name


def run_solver(spec: SolverSpec, scenario, rates) -> np.ndarray:
    if spec.name == "successive":
        return successive_placement(scenario, rates, epsilon=spec.epsilon).x
    if spec.name == "greedy":
        return greedy_placement(scenario, rates, density=spec.density)
    if spec.name == "independent":
        return independent_placement(scenario, rates)
    raise ConfigError(f"solvers: unknown solver {spec.name!r}")


@dataclass
class ExperimentConfig:
    axis: str  # capacity | n_servers | n_users
    values: list[float]
    scenario: ScenarioParams
    solvers: list[SolverSpec]
    n_topologies: int = 100
    n_fading: int = 1000
    seed: int = 0
    measure_time: bool = True
    mobility_pattern: str = "pedestrian"
    horizon_s: float = 7200.0
    slot_s: float = 5.0
    oracle_max_states: int = 5_000_000
    oracle_time_limit_s: float = 300.0

    AXES = ("capacity", "n_servers", "n_users")

    def __post_init__(self):
        if self.axis not in self.AXES:
            raise ConfigError(f"axis: must be one of {self.AXES}")
        if not self.values:
            raise ConfigError("values: must be non-empty")
        if not self.solvers:
            raise ConfigError("solvers: must be non-empty")
        if self.n_topologies < 1:
            raise ConfigError("n_topologies: must be at least 1")


def config_from_dict(d: dict) -> ExperimentConfig:
    try:
        topo = TopologyParams(
            n_servers=int(d.get("n_servers", 10)),
            n_users=int(d.get("n_users", 10)),
            area_side_m=float(d.get("area_side_m", 1000.0)),
            coverage_radius_m=float(d.get("coverage_radius_m", 275.0)),
            capacity_bytes=int(d.get("capacity_bytes", 10 ** 9)),
        )
        lib_cfg = d.get("library", {})
        lib = LibraryParams(
            n_models=int(lib_cfg.get("n_models", d.get("n_models", 30))),
            mode=lib_cfg.get("mode", "special"),
            n_roots=int(lib_cfg.get("n_roots", 2)),
            chain_len=int(lib_cfg.get("chain_len", 3)),
            shared_fraction=float(lib_cfg.get("shared_fraction", 0.7)),
            model_size_min=int(lib_cfg.get("model_size_min", 50 * 10 ** 6)),
            model_size_max=int(lib_cfg.get("model_size_max", 150 * 10 ** 6)),
            depth=int(lib_cfg.get("depth", 2)),
        )
        radio = RadioParams.from_config(d["radio"]) if "radio" in d else None
        scen = ScenarioParams(
            topology=topo,
            library=lib,
            zipf_s=float(d.get("zipf_s", 0.8)),
            split_inference=bool(d.get("split_inference", False)),
            per_user_ranking=bool(d.get("per_user_ranking", True)),
            requested_per_user=d.get("requested_per_user"),
            radio=radio,
        )
        for s in d.get("solvers", []):
            if s.get("name") not in ("successive", "greedy", "independent"):
                raise ConfigError(f"solvers: unknown solver {s.get('name')!r}")
        solvers = [
            SolverSpec(
                name=s["name"],
                epsilon=float(s.get("epsilon", 0.1)),
                density=bool(s.get("density", False)),
            )
            for s in d.get("solvers", [{"name": "greedy"}])
        ]
        return ExperimentConfig(
            axis=d.get("axis", "capacity"),
            values=[float(v) for v in d.get("values", [topo.capacity_bytes])],
            scenario=scen,
            solvers=solvers,
            n_topologies=int(d.get("n_topologies", 100)),
            n_fading=int(d.get("n_fading", 1000)),
            seed=int(d.get("seed", 0)),
            measure_time=bool(d.get("measure_time", True)),
            mobility_pattern=d.get("mobility_pattern", "pedestrian"),
            horizon_s=float(d.get("horizon_s", 7200.0)),
            slot_s=float(d.get("slot_s", 5.0)),
            oracle_max_states=int(d.get("oracle_max_states", 5_000_000)),
            oracle_time_limit_s=float(d.get("oracle_time_limit_s", 300.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid experiment config: {exc}") from exc


def _apply_axis(params: ScenarioParams, axis: str, value: float) -> ScenarioParams:
    topo = params.topology
    if axis == "capacity":
        topo = TopologyParams(topo.n_servers, topo.n_users, topo.area_side_m,
                              topo.coverage_radius_m, int(value))
    elif axis == "n_servers":
        topo = TopologyParams(int(value), topo.n_users, topo.area_side_m,
                              topo.coverage_radius_m, topo.capacity_bytes)
    elif axis == "n_users":
        topo = TopologyParams(topo.n_servers, int(value), topo.area_side_m,
                              topo.coverage_radius_m, topo.capacity_bytes)
    return ScenarioParams(
        topology=topo, library=params.library, zipf_s=params.zipf_s,
        deadline_range_s=params.deadline_range_s, split_inference=params.split_inference,
        per_user_ranking=params.per_user_ranking,
        requested_per_user=params.requested_per_user, radio=params.radio,
    )


def _fmt(v: float | None) -> str:
    if v is None:
        return ""
    if isinstance(v, float) and math.isnan(v):
        return "nan"
    return f"{v:.9g}"


SWEEP_COLUMNS = [
    "axis", "value", "solver", "mean_hit_ratio", "std_hit_ratio",
    "mean_solve_time_s", "mean_storage_utilization", "n_topologies",
    "seed_range", "reason",
]


def run_sweep(config: ExperimentConfig) -> list[dict]:
    """Per (axis value, solver): solve and evaluate over the topology seeds.

    Solver resource errors produce NaN rows with a reason instead of
    aborting the sweep.
    """
    rows = []
    for value in config.values:
        params = _apply_axis(config.scenario, config.axis, value)
        per_solver: dict[str, list] = {s.label: [] for s in config.solvers}
        reasons: dict[str, str] = {s.label: "" for s in config.solvers}
        for t in range(config.n_topologies):
            seed = derive_seed(config.seed, config.axis, value, t)
            scenario = make_scenario(params, seed)
            rates = build_rate_table(scenario)
            for spec in config.solvers:
                try:
                    t0 = time.perf_counter()
                    x = run_solver(spec, scenario, rates)
                    elapsed = time.perf_counter() - t0
                    if config.n_fading > 0:
                        ratio, _ = evaluate_fading(
                            scenario, x, config.n_fading, seed=derive_seed(seed, "fading")
                        )
                    else:
                        ratio = hit_ratio(scenario, rates, x)
                    util = float(np.mean([
                        storage_used(scenario.library, x, m) / max(int(scenario.capacities[m]), 1)
                        for m in range(scenario.n_servers)
                    ]))
                    per_solver[spec.label].append((ratio, elapsed, util))
                except (DpResourceError, CombinationCapError) as exc:
                    reasons[spec.label] = str(exc)
        for spec in config.solvers:
            cells = per_solver[spec.label]
            if cells:
                ratios = np.array([c[0] for c in cells])
                times = np.array([c[1] for c in cells])
                utils = np.array([c[2] for c in cells])
                rows.append({
                    "axis": config.axis, "value": _fmt(value), "solver": spec.label,
                    "mean_hit_ratio": _fmt(float(ratios.mean())),
                    "std_hit_ratio": _fmt(float(ratios.std())),
                    "mean_solve_time_s": _fmt(float(times.mean())) if config.measure_time else "",
                    "mean_storage_utilization": _fmt(float(utils.mean())),
                    "n_topologies": str(len(cells)),
                    "seed_range": f"0-{config.n_topologies - 1}",
                    "reason": reasons[spec.label],
                })
            else:
                rows.append({
                    "axis": config.axis, "value": _fmt(value), "solver": spec.label,
                    "mean_hit_ratio": "nan", "std_hit_ratio": "nan",
                    "mean_solve_time_s": "", "mean_storage_utilization": "nan",
                    "n_topologies": "0", "seed_range": f"0-{config.n_topologies - 1}",
                    "reason": reasons[spec.label] or "no successful cells",
                })
    rows.sort(key=lambda r: (r["axis"], float(r["value"]), r["solver"]))
    return rows


MOBILITY_COLUMNS = ["t_s", "solver", "mean_hit_ratio"]


def run_mobility(config: ExperimentConfig) -> list[dict]:
    """Place once at t=0 per topology, then track the hit ratio along a
    shared mobility trace without re-placing."""
    params = MobilityParams.preset(config.mobility_pattern, config.slot_s)
    series: dict[str, list[np.ndarray]] = {s.label: [] for s in config.solvers}
    for t in range(config.n_topologies):
        seed = derive_seed(config.seed, "mobility", t)
        scenario = make_scenario(config.scenario, seed)
        rates = build_rate_table(scenario)
        for spec in config.solvers:
            x = run_solver(spec, scenario, rates)
            pts = mobility_series(
                scenario, x, params, config.horizon_s, seed=derive_seed(seed, "trace")
            )
            series[spec.label].append(np.array([p.hit_ratio for p in pts]))
    rows = []
    n_slots = int(round(config.horizon_s / config.slot_s))
    for spec in config.solvers:
        mean = np.mean(series[spec.label], axis=0)
        for slot in range(n_slots + 1):
            rows.append({
                "t_s": _fmt(slot * config.slot_s),
                "solver": spec.label,
                "mean_hit_ratio": _fmt(float(mean[slot])),
            })
    rows.sort(key=lambda r: (r["solver"], float(r["t_s"])))
    return rows


ORACLE_COLUMNS = [
    "instance", "solver", "hit_ratio", "optimal_ratio", "ratio_to_optimal",
    "solve_time_s", "oracle_time_s", "speedup", "gamma", "gamma_bound_ok", "reason",
]


def run_oracle_compare(config: ExperimentConfig) -> list[dict]:
    """Solver-versus-brute-force comparison on small instances."""
    budget = OracleBudget(config.oracle_max_states, config.oracle_time_limit_s)
    rows = []
    for t in range(config.n_topologies):
        seed = derive_seed(config.seed, "oracle", t)
        scenario = make_scenario(config.scenario, seed)
        rates = build_rate_table(scenario)
        total = scenario.demand.total_units
        try:
            t0 = time.perf_counter()
            _, opt_count, _ = exhaustive_search(scenario, rates, budget)
            oracle_time = time.perf_counter() - t0
            gamma = max_feasible_cardinality(scenario, budget)
        except OracleBudgetError as exc:
            rows.append({
                "instance": str(t), "solver": "", "hit_ratio": "nan",
                "optimal_ratio": "nan", "ratio_to_optimal": "nan",
                "solve_time_s": "", "oracle_time_s": "", "speedup": "",
                "gamma": "", "gamma_bound_ok": "", "reason": str(exc),
            })
            continue
        opt_ratio = opt_count / total
        for spec in config.solvers:
            t0 = time.perf_counter()
            x = run_solver(spec, scenario, rates)
            solve_time = time.perf_counter() - t0
            ratio = hit_ratio(scenario, rates, x)
            rel = ratio / opt_ratio if opt_ratio > 0 else 1.0
            rows.append({
                "instance": str(t), "solver": spec.label,
                "hit_ratio": _fmt(ratio), "optimal_ratio": _fmt(opt_ratio),
                "ratio_to_optimal": _fmt(rel),
                "solve_time_s": _fmt(solve_time) if config.measure_time else "",
                "oracle_time_s": _fmt(oracle_time) if config.measure_time else "",
                "speedup": _fmt(oracle_time / solve_time) if config.measure_time and solve_time > 0 else "",
                "gamma": str(gamma),
                "gamma_bound_ok": str(opt_ratio == 0 or rel >= 1.0 / gamma - 1e-12),
                "reason": "",
            })
    rows.sort(key=lambda r: (int(r["instance"]), r["solver"]))
    return rows


def write_csv(path: str, rows: list[dict], columns: list[str]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def write_plot_data(path: str, rows: list[dict]) -> None:
    """Companion plot file: x, series, mean, std per sweep row."""
    cols = ["x", "series", "mean", "std"]
    out = [
        {"x": r["value"], "series": r["solver"], "mean": r["mean_hit_ratio"],
         "std": r["std_hit_ratio"]}
        for r in rows
    ]
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=cols, lineterminator="\n")
        writer.writeheader()
        writer.writerows(out)
