"""Reproducible scenario sampling: topology, demand, libraries, mobility.

Everything is a pure function of (params, seed); rerunning with the same
seed gives bit-identical scenarios.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .library import ModelLibrary, build_library
from .radio import RadioParams, default_radio_params
from .scenario import PROB_UNIT, DemandMatrix, Scenario


@dataclass(frozen=True)
class TopologyParams:
    n_servers: int
    n_users: int
    area_side_m: float = 1000.0
    coverage_radius_m: float = 275.0
    capacity_bytes: int = 10 ** 9  # uniform per server

    def __post_init__(self):
        if min(self.n_servers, self.n_users) < 1:
            raise ValueError("need at least one server and one user")
        if self.area_side_m <= 0 or self.coverage_radius_m <= 0 or self.capacity_bytes < 0:
            raise ValueError("topology parameters must be positive")


@dataclass(frozen=True)
class LibraryParams:
    n_models: int
    mode: str = "special"  # "special" | "general"
    n_roots: int = 2  # ancestor chains (special mode)
    chain_len: int = 3  # shared blocks per ancestor chain
    shared_fraction: float = 0.7  # target fraction of bytes in shared blocks
    model_size_min: int = 50 * 10 ** 6
    model_size_max: int = 150 * 10 ** 6
    depth: int = 2  # derivation generations (general mode)
    specific_splits: int = 2  # specific blocks per model

    def __post_init__(self):
        if self.mode not in ("special", "general"):
            raise ValueError(f"unknown library mode {self.mode!r}")
        if not 0 <= self.shared_fraction < 1:
            raise ValueError("shared_fraction must lie in [0, 1)")
        if self.model_size_min <= 0 or self.model_size_max < self.model_size_min:
            raise ValueError("bad model size range")


def sample_topology(params: TopologyParams, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Server and user positions i.i.d. uniform on the square area."""
    server_pos = rng.uniform(0.0, params.area_side_m, size=(params.n_servers, 2))
    user_pos = rng.uniform(0.0, params.area_side_m, size=(params.n_users, 2))
    return server_pos, user_pos


def quantize_row(weights: np.ndarray, total_units: int = PROB_UNIT) -> np.ndarray:
    """Largest-remainder rounding of non-negative weights onto an integer
    grid so the row sums exactly to ``total_units``."""
    weights = np.asarray(weights, dtype=np.float64)
    scaled = weights / weights.sum() * total_units
    base = np.floor(scaled).astype(np.int64)
    deficit = total_units - int(base.sum())
    if deficit:
        remainders = scaled - base
        # Largest remainders win; ties go to the lower index.
        order = np.lexsort((np.arange(len(weights)), -remainders))
        base[order[:deficit]] += 1
    return base


def zipf_weights(s: float, n: int) -> np.ndarray:
    """Unnormalized rank^-s popularity weights for ranks 1..n."""
    if s < 0:
        raise ValueError("zipf exponent must be non-negative")
    return np.arange(1, n + 1, dtype=np.float64) ** (-s)


def sample_demand(
    zipf_s: float,
    n_users: int,
    n_models: int,
    rng: np.random.Generator,
    deadline_range_s: tuple[float, float] = (0.5, 1.0),
    split_inference: bool = False,
    per_user_ranking: bool = True,
    requested_per_user: int | None = None,
) -> DemandMatrix:
    """Zipf request probabilities on the exact 1e-6 grid plus latency budgets.

    Each user gets its own rank permutation unless ``per_user_ranking`` is
    off.  ``requested_per_user`` instead gives a uniform distribution over
    that many randomly chosen models (the small-instance benchmark shape).
    ``split_inference`` halves the sampled budget into download deadline and
    inference latency; by default inference latency is zero and the whole
    budget is the delivery deadline.
    """
    p = np.zeros((n_users, n_models), dtype=np.int64)
    if requested_per_user is not None:
        if not 1 <= requested_per_user <= n_models:
            raise ValueError("requested_per_user out of range")
        for k in range(n_users):
            chosen = rng.choice(n_models, size=requested_per_user, replace=False)
            p[k, np.sort(chosen)] = quantize_row(np.ones(requested_per_user))
    else:
        weights = zipf_weights(zipf_s, n_models)
        global_perm = rng.permutation(n_models)
        for k in range(n_users):
            perm = rng.permutation(n_models) if per_user_ranking else global_perm
            p[k, perm] = quantize_row(weights)

    budget = rng.uniform(deadline_range_s[0], deadline_range_s[1], size=(n_users, n_models))
    if split_inference:
        deadline = budget / 2.0
        inference = budget / 2.0
    else:
        deadline = budget
        inference = np.zeros_like(budget)
    return DemandMatrix(p_units=p, deadline_s=deadline, inference_s=inference)


def _split_bytes(total: int, parts: int, rng: np.random.Generator) -> list[int]:
    """Split ``total`` bytes into ``parts`` positive-ish integer chunks."""
    if parts <= 1 or total < parts:
        return [total]
    cuts = np.sort(rng.integers(1, total, size=parts - 1))
    edges = np.concatenate(([0], cuts, [total]))
    return [int(b - a) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def synth_library(params: LibraryParams, rng: np.random.Generator) -> ModelLibrary:
    """Synthetic parameter-sharing library.

    special mode: shared blocks form ``n_roots`` ancestor chains; every
    model takes a prefix of one chain plus fresh specific blocks, so the
    shared-block count stays fixed as the library grows.

    general mode: models derived later reuse block prefixes of earlier
    models across ``depth`` generations, so sharing grows with the library.
    """
    if params.mode == "special":
        return _synth_special(params, rng)
    return _synth_general(params, rng)


def _synth_special(params: LibraryParams, rng: np.random.Generator) -> ModelLibrary:
    mean_size = (params.model_size_min + params.model_size_max) / 2.0
    chain_block = max(1, int(round(params.shared_fraction * mean_size / params.chain_len)))

    blocks: list[tuple[int, int]] = []
    chains: list[list[int]] = []
    for _ in range(params.n_roots):
        chain = []
        for _ in range(params.chain_len):
            size = max(1, int(round(chain_block * rng.uniform(0.8, 1.2))))
            chain.append(len(blocks))
            blocks.append((len(blocks), size))
        chains.append(chain)

    models: list[tuple[int, list[int]]] = []
    for i in range(params.n_models):
        size = int(rng.integers(params.model_size_min, params.model_size_max + 1))
        chain = chains[int(rng.integers(params.n_roots))]
        target = int(params.shared_fraction * size)
        prefix, shared_bytes = [chain[0]], blocks[chain[0]][1]
        for j in chain[1:]:
            nxt = shared_bytes + blocks[j][1]
            if nxt > target:
                break
            prefix.append(j)
            shared_bytes = nxt
        specific_total = size - shared_bytes
        block_ids = list(prefix)
        if specific_total <= 0:
            warnings.warn(f"model {i} has no specific bytes (all blocks shared)")
        else:
            for chunk in _split_bytes(specific_total, params.specific_splits, rng):
                block_ids.append(len(blocks))
                blocks.append((len(blocks), chunk))
        models.append((i, block_ids))
    # Chain blocks past every model's prefix are unused; drop and renumber.
    used = sorted({j for _, bids in models for j in bids})
    remap = {j: t for t, j in enumerate(used)}
    blocks = [(remap[j], size) for j, size in blocks if j in remap]
    models = [(i, [remap[j] for j in bids]) for i, bids in models]
    return build_library(blocks, models)


def _synth_general(params: LibraryParams, rng: np.random.Generator) -> ModelLibrary:
    blocks: list[tuple[int, int]] = []
    model_blocks: list[list[int]] = []
    n_first = max(1, params.n_models // (params.depth + 1))

    for i in range(params.n_models):
        size = int(rng.integers(params.model_size_min, params.model_size_max + 1))
        block_ids: list[int] = []
        reused_bytes = 0
        if i >= n_first:
            parent = int(rng.integers(i))
            target = int(params.shared_fraction * size)
            for j in model_blocks[parent]:
                nxt = reused_bytes + blocks[j][1]
                if nxt > target:
                    break
                block_ids.append(j)
                reused_bytes = nxt
        fresh_total = size - reused_bytes
        if fresh_total > 0:
            for chunk in _split_bytes(fresh_total, params.specific_splits + 1, rng):
                block_ids.append(len(blocks))
                blocks.append((len(blocks), chunk))
        elif not block_ids:
            block_ids.append(len(blocks))
            blocks.append((len(blocks), size))
        model_blocks.append(block_ids)
    return build_library(blocks, [(i, b) for i, b in enumerate(model_blocks)])


@dataclass(frozen=True)
class ScenarioParams:
    topology: TopologyParams
    library: LibraryParams
    zipf_s: float = 0.8
    deadline_range_s: tuple[float, float] = (0.5, 1.0)
    split_inference: bool = False
    per_user_ranking: bool = True
    requested_per_user: int | None = None
    radio: RadioParams | None = None


def make_scenario(params: ScenarioParams, seed: int) -> Scenario:
    """Sample a full scenario from one seed."""
    ss = np.random.SeedSequence(seed)
    rng_topo, rng_lib, rng_demand = (np.random.default_rng(s) for s in ss.spawn(3))
    topo = params.topology
    server_pos, user_pos = sample_topology(topo, rng_topo)
    library = synth_library(params.library, rng_lib)
    demand = sample_demand(
        params.zipf_s,
        topo.n_users,
        library.n_models,
        rng_demand,
        deadline_range_s=params.deadline_range_s,
        split_inference=params.split_inference,
        per_user_ranking=params.per_user_ranking,
        requested_per_user=params.requested_per_user,
    )
    radio = params.radio or default_radio_params(topo.coverage_radius_m)
    return Scenario(
        area_side_m=topo.area_side_m,
        server_pos=server_pos,
        user_pos=user_pos,
        capacities=np.full(topo.n_servers, topo.capacity_bytes, dtype=np.int64),
        radio=radio,
        library=library,
        demand=demand,
    )


# --- mobility ---------------------------------------------------------------

MOBILITY_PRESETS = {
    "pedestrian": dict(speed_range=(0.5, 1.8), accel_range=(-0.3, 0.3),
                       turn_rate_range=(-math.pi / 4, math.pi / 4)),
    "bike": dict(speed_range=(2.0, 8.0), accel_range=(-1.0, 1.0),
                 turn_rate_range=(-math.pi / 3, math.pi / 3)),
    "vehicle": dict(speed_range=(5.5, 20.0), accel_range=(-3.0, 3.0),
                    turn_rate_range=(-math.pi / 2, math.pi / 2)),
}


@dataclass(frozen=True)
class MobilityParams:
    speed_range: tuple[float, float]
    accel_range: tuple[float, float]
    turn_rate_range: tuple[float, float]
    slot_s: float = 5.0

    @classmethod
    def preset(cls, pattern: str, slot_s: float = 5.0) -> "MobilityParams":
        if pattern not in MOBILITY_PRESETS:
            raise ValueError(f"unknown mobility pattern {pattern!r}")
        return cls(slot_s=slot_s, **MOBILITY_PRESETS[pattern])


@dataclass
class MobilityState:
    pos: np.ndarray  # (K, 2) meters
    speed: np.ndarray  # (K,) m/s
    heading: np.ndarray  # (K,) rad


def init_mobility(
    user_pos: np.ndarray, params: MobilityParams, rng: np.random.Generator
) -> MobilityState:
    k = user_pos.shape[0]
    return MobilityState(
        pos=np.asarray(user_pos, dtype=np.float64).copy(),
        speed=rng.uniform(*params.speed_range, size=k),
        heading=rng.uniform(0.0, math.pi, size=k),
    )


def mobility_step(
    state: MobilityState, params: MobilityParams, area_side_m: float, rng: np.random.Generator
) -> MobilityState:
    """Advance one slot: resample acceleration and turn rate, clamp speed,
    move, and reflect at the area boundary."""
    k = state.pos.shape[0]
    accel = rng.uniform(*params.accel_range, size=k)
    turn = rng.uniform(*params.turn_rate_range, size=k)
    speed = np.clip(state.speed + accel * params.slot_s, *params.speed_range)
    heading = state.heading + turn * params.slot_s
    step = speed[:, None] * params.slot_s * np.stack(
        [np.cos(heading), np.sin(heading)], axis=1
    )
    pos = state.pos + step
    # Reflective boundary; repeat in case a fast user overshoots twice.
    for _ in range(4):
        out = False
        for axis in range(2):
            low = pos[:, axis] < 0
            high = pos[:, axis] > area_side_m
            if low.any() or high.any():
                out = True
                pos[low, axis] = -pos[low, axis]
                pos[high, axis] = 2 * area_side_m - pos[high, axis]
                if axis == 0:
                    heading[low | high] = math.pi - heading[low | high]
                else:
                    heading[low | high] = -heading[low | high]
        if not out:
            break
    return MobilityState(pos=pos, speed=speed, heading=heading)
