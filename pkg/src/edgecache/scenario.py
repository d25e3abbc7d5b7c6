"""Scenario container and its JSON round-trip.

Request probabilities are stored as exact integers on a 1e-6 grid
(micro-units), serialized as decimal strings with six fractional digits,
so demand arithmetic and the DP value axis stay exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .library import ModelLibrary, library_from_manifest, library_to_manifest
from .radio import RadioParams

PROB_UNIT = 10 ** 6  # micro-units per unit probability


class ScenarioError(ValueError):
    """Raised when a scenario file violates its invariants."""


@dataclass
class DemandMatrix:
    p_units: np.ndarray  # (K, I) int64 request probability in micro-units
    deadline_s: np.ndarray  # (K, I) float, end-to-end latency budget
    inference_s: np.ndarray  # (K, I) float, on-device inference latency

    def __post_init__(self):
        self.p_units = np.asarray(self.p_units, dtype=np.int64)
        self.deadline_s = np.asarray(self.deadline_s, dtype=np.float64)
        self.inference_s = np.asarray(self.inference_s, dtype=np.float64)
        if self.p_units.shape != self.deadline_s.shape or self.p_units.shape != self.inference_s.shape:
            raise ScenarioError("demand matrices must share one K x I shape")
        if (self.p_units < 0).any():
            raise ScenarioError("request probabilities must be non-negative")
        if self.p_units.sum() == 0:
            raise ScenarioError("total demand must be positive")
        if (self.deadline_s <= 0).any():
            raise ScenarioError("latency budgets must be positive")
        if (self.inference_s < 0).any():
            raise ScenarioError("inference latencies must be non-negative")

    @property
    def n_users(self) -> int:
        return self.p_units.shape[0]

    @property
    def n_models(self) -> int:
        return self.p_units.shape[1]

    @property
    def total_units(self) -> int:
        return int(self.p_units.sum())


@dataclass
class Scenario:
    area_side_m: float
    server_pos: np.ndarray  # (M, 2) meters
    user_pos: np.ndarray  # (K, 2) meters
    capacities: np.ndarray  # (M,) int64 bytes
    radio: RadioParams
    library: ModelLibrary
    demand: DemandMatrix

    def __post_init__(self):
        self.server_pos = np.asarray(self.server_pos, dtype=np.float64)
        self.user_pos = np.asarray(self.user_pos, dtype=np.float64)
        self.capacities = np.asarray(self.capacities, dtype=np.int64)
        if self.server_pos.shape != (self.n_servers, 2):
            raise ScenarioError("server positions must be (M, 2)")
        if self.user_pos.ndim != 2 or self.user_pos.shape[1] != 2:
            raise ScenarioError("user positions must be (K, 2)")
        if (self.capacities < 0).any():
            raise ScenarioError("capacities must be non-negative")
        if self.demand.n_users != self.n_users:
            raise ScenarioError("demand rows must match the user count")
        if self.demand.n_models != self.library.n_models:
            raise ScenarioError("demand columns must match the model count")

    @property
    def n_servers(self) -> int:
        return self.capacities.shape[0]

    @property
    def n_users(self) -> int:
        return self.user_pos.shape[0]

    @property
    def n_models(self) -> int:
        return self.library.n_models

    def with_user_positions(self, user_pos: np.ndarray) -> "Scenario":
        return Scenario(
            area_side_m=self.area_side_m,
            server_pos=self.server_pos,
            user_pos=np.asarray(user_pos, dtype=np.float64),
            capacities=self.capacities,
            radio=self.radio,
            library=self.library,
            demand=self.demand,
        )


def _prob_to_str(units: int) -> str:
    return f"{units // PROB_UNIT}.{units % PROB_UNIT:06d}"


def _prob_from_str(s: str) -> int:
    if "." in s:
        whole, frac = s.split(".", 1)
    else:
        whole, frac = s, ""
    if len(frac) > 6:
        raise ScenarioError(f"probability {s!r} has more than 6 fractional digits")
    return int(whole or "0") * PROB_UNIT + int(frac.ljust(6, "0") or "0")


def scenario_to_dict(sc: Scenario) -> dict:
    return {
        "area_side_m": sc.area_side_m,
        "servers": [
            {"id": m, "x": float(sc.server_pos[m, 0]), "y": float(sc.server_pos[m, 1]),
             "capacity_bytes": int(sc.capacities[m])}
            for m in range(sc.n_servers)
        ],
        "users": [
            {"id": k, "x": float(sc.user_pos[k, 0]), "y": float(sc.user_pos[k, 1])}
            for k in range(sc.n_users)
        ],
        "radio": sc.radio.to_config(),
        "library": library_to_manifest(sc.library),
        "demand": {
            "p": [[_prob_to_str(int(u)) for u in row] for row in sc.demand.p_units],
            "deadline_s": sc.demand.deadline_s.tolist(),
            "inference_s": sc.demand.inference_s.tolist(),
        },
    }


def scenario_from_dict(d: dict) -> Scenario:
    try:
        servers = sorted(d["servers"], key=lambda s: s["id"])
        users = sorted(d["users"], key=lambda u: u["id"])
        library = library_from_manifest(d["library"])
        demand = DemandMatrix(
            p_units=np.array(
                [[_prob_from_str(s) for s in row] for row in d["demand"]["p"]], dtype=np.int64
            ),
            deadline_s=np.array(d["demand"]["deadline_s"], dtype=np.float64),
            inference_s=np.array(d["demand"]["inference_s"], dtype=np.float64),
        )
        return Scenario(
            area_side_m=float(d["area_side_m"]),
            server_pos=np.array([[s["x"], s["y"]] for s in servers]),
            user_pos=np.array([[u["x"], u["y"]] for u in users]),
            capacities=np.array([s["capacity_bytes"] for s in servers], dtype=np.int64),
            radio=RadioParams.from_config(d["radio"]),
            library=library,
            demand=demand,
        )
    except KeyError as exc:
        raise ScenarioError(f"scenario file missing field {exc}") from exc


def save_scenario(sc: Scenario, path: str) -> None:
    with open(path, "w") as f:
        json.dump(scenario_to_dict(sc), f, indent=1)


def load_scenario(path: str) -> Scenario:
    with open(path) as f:
        return scenario_from_dict(json.load(f))
