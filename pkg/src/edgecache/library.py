"""Parameter-block model library and placement matrices.

Models are sets of parameter blocks; a block contained in two or more
models is classified as shared and is stored only once per server.  All
sizes are integer bytes so capacity comparisons are exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class LibraryError(ValueError):
    """Raised when a library manifest violates its invariants."""


@dataclass(frozen=True)
class ParameterBlock:
    id: int
    size_bytes: int


@dataclass(frozen=True)
class Model:
    id: int
    block_ids: frozenset[int]
    download_size: int  # sum of its blocks' sizes, bytes


class ModelLibrary:
    """Immutable catalog of parameter blocks and the models built from them.

    Derived indices (block -> models, shared-block set, membership matrix)
    are computed once at construction and shared read-only.
    """

    def __init__(self, blocks: Sequence[ParameterBlock], models: Sequence[Model]):
        self.blocks = tuple(blocks)
        self.models = tuple(models)
        self.block_sizes = np.array([b.size_bytes for b in self.blocks], dtype=np.int64)

        n_blocks = len(self.blocks)
        n_models = len(self.models)
        self.membership = np.zeros((n_models, n_blocks), dtype=bool)
        for mdl in self.models:
            for j in mdl.block_ids:
                self.membership[mdl.id, j] = True

        self.block_to_models: dict[int, frozenset[int]] = {
            j: frozenset(np.flatnonzero(self.membership[:, j]).tolist())
            for j in range(n_blocks)
        }
        self.shared_blocks = frozenset(
            j for j, owners in self.block_to_models.items() if len(owners) >= 2
        )
        self.shared_mask = np.zeros(n_blocks, dtype=bool)
        for j in self.shared_blocks:
            self.shared_mask[j] = True

        self.model_sizes = np.array([m.download_size for m in self.models], dtype=np.int64)
        # Per-model shared-block subset and its total size.
        self.model_shared_sets: tuple[frozenset[int], ...] = tuple(
            frozenset(m.block_ids & self.shared_blocks) for m in self.models
        )
        self.model_shared_sizes = np.array(
            [int(self.block_sizes[list(s)].sum()) if s else 0 for s in self.model_shared_sets],
            dtype=np.int64,
        )
        # Specific-block bytes of each model (exclusive blocks only).
        self.model_specific_sizes = self.model_sizes - self.model_shared_sizes

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def n_models(self) -> int:
        return len(self.models)

    @property
    def n_shared(self) -> int:
        return len(self.shared_blocks)

    def union_size(self, model_ids: Iterable[int]) -> int:
        """Total bytes of the union of all blocks of the given models.

        Shared blocks are counted once, so the result is at most the sum of
        the individual download sizes.
        """
        ids = list(model_ids)
        if not ids:
            return 0
        for i in ids:
            if not 0 <= i < self.n_models:
                raise LibraryError(f"unknown model id {i}")
        mask = self.membership[ids].any(axis=0)
        return int(self.block_sizes[mask].sum())

    def union_size_mask(self, model_mask: np.ndarray) -> int:
        """union_size for a boolean selection vector of length n_models."""
        if not model_mask.any():
            return 0
        mask = self.membership[model_mask].any(axis=0)
        return int(self.block_sizes[mask].sum())


def build_library(
    blocks: Sequence[tuple[int, int]],
    models: Sequence[tuple[int, Iterable[int]]],
) -> ModelLibrary:
    """Validate raw (id, size) / (id, block ids) pairs and build the catalog.

    Ids must be dense 0..n-1; every model needs at least one existing block.
    """
    block_ids = [bid for bid, _ in blocks]
    if sorted(block_ids) != list(range(len(blocks))):
        dupes = {b for b in block_ids if block_ids.count(b) > 1}
        if dupes:
            raise LibraryError(f"duplicate block id {min(dupes)}")
        raise LibraryError("block ids must be dense 0..J-1")
    for bid, size in blocks:
        if size <= 0:
            raise LibraryError(f"block {bid} has non-positive size {size}")

    model_ids = [mid for mid, _ in models]
    if sorted(model_ids) != list(range(len(models))):
        dupes = {m for m in model_ids if model_ids.count(m) > 1}
        if dupes:
            raise LibraryError(f"duplicate model id {min(dupes)}")
        raise LibraryError("model ids must be dense 0..I-1")

    size_by_id = {bid: size for bid, size in blocks}
    built_blocks = [ParameterBlock(bid, size_by_id[bid]) for bid in range(len(blocks))]

    built_models = []
    for mid, bids in sorted(models, key=lambda t: t[0]):
        bset = frozenset(bids)
        if not bset:
            raise LibraryError(f"model {mid} has no blocks")
        for j in bset:
            if j not in size_by_id:
                raise LibraryError(f"model {mid} references unknown block id {j}")
        built_models.append(
            Model(mid, bset, sum(size_by_id[j] for j in bset))
        )

    lib = ModelLibrary(built_blocks, built_models)
    referenced = lib.membership.any(axis=0)
    if not referenced.all():
        orphan = int(np.flatnonzero(~referenced)[0])
        raise LibraryError(f"block {orphan} belongs to no model")
    return lib


@dataclass
class Placement:
    """Binary server x model decision matrix."""

    x: np.ndarray  # (M, I) bool

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=bool)
        if self.x.ndim != 2:
            raise ValueError("placement must be a 2-d matrix")

    @property
    def n_servers(self) -> int:
        return self.x.shape[0]

    @property
    def n_models(self) -> int:
        return self.x.shape[1]

    def block_matrix(self, library: ModelLibrary) -> np.ndarray:
        """Derived (M, J) block placement: a block sits on a server iff some
        placed model contains it."""
        return (self.x[:, :, None] & library.membership[None, :, :]).any(axis=1)

    def to_dict(self) -> dict:
        return {"x": self.x.astype(int).tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Placement":
        return cls(np.array(d["x"], dtype=bool))


# --- manifest serialization -------------------------------------------------

def library_to_manifest(lib: ModelLibrary) -> dict:
    return {
        "blocks": [{"id": b.id, "size_bytes": b.size_bytes} for b in lib.blocks],
        "models": [{"id": m.id, "block_ids": sorted(m.block_ids)} for m in lib.models],
    }


def library_from_manifest(manifest: dict) -> ModelLibrary:
    try:
        blocks = [(b["id"], b["size_bytes"]) for b in manifest["blocks"]]
        models = [(m["id"], m["block_ids"]) for m in manifest["models"]]
    except (KeyError, TypeError) as exc:
        raise LibraryError(f"malformed library manifest: {exc}") from exc
    return build_library(blocks, models)


def save_library(lib: ModelLibrary, path: str) -> None:
    with open(path, "w") as f:
        json.dump(library_to_manifest(lib), f, indent=1)


def load_library(path: str) -> ModelLibrary:
    with open(path) as f:
        return library_from_manifest(json.load(f))
