"""Exact 0/1 knapsack over an integer value axis.

The table tracks, per value level, the minimum bytes needed to reach it;
the answer is the largest level whose cost fits the budget.  This layout
keeps the value axis small after utility quantization.
"""

from __future__ import annotations

import numpy as np

INF = np.int64(1) << 62

DEFAULT_DP_CELL_CAP = 10 ** 7


class DpResourceError(RuntimeError):
    """Value axis too large for the configured cell cap; raise epsilon."""


def dp_select(
    utilities: np.ndarray,
    sizes: np.ndarray,
    budget: int,
    cell_cap: int = DEFAULT_DP_CELL_CAP,
) -> tuple[int, list[int]]:
    """Pick the item subset maximizing total utility within a byte budget.

    ``utilities`` are positive integers (already quantized), ``sizes`` are
    non-negative bytes.  Returns (best total utility, chosen item indices).
    Backtracking prefers excluding the current item on ties, which still
    always keeps zero-size items with positive utility.
    """
    utilities = np.asarray(utilities, dtype=np.int64)
    sizes = np.asarray(sizes, dtype=np.int64)
    n = len(utilities)
    if n == 0 or budget < 0:
        return 0, []
    if (utilities <= 0).any():
        raise ValueError("utilities must be positive integers")
    if (sizes < 0).any():
        raise ValueError("sizes must be non-negative")

    total = int(utilities.sum())
    if (n + 1) * (total + 1) > cell_cap:
        raise DpResourceError(
            f"knapsack table would need {(n + 1) * (total + 1)} cells "
            f"(cap {cell_cap}); use a coarser utility quantization"
        )

    # t[e, w]: minimum bytes achieving value exactly w with the first e items.
    if (n + 1) * (total + 1) <= 8192:
        return _dp_small(utilities.tolist(), sizes.tolist(), budget, total)

    t = np.full((n + 1, total + 1), INF, dtype=np.int64)
    t[:, 0] = 0
    for e in range(1, n + 1):
        v = int(utilities[e - 1])
        s = int(sizes[e - 1])
        t[e] = t[e - 1]
        prev = t[e - 1, : total + 1 - v]
        cand = np.where(prev < INF, prev + s, INF)
        t[e, v:] = np.minimum(t[e - 1, v:], cand)

    reachable = np.flatnonzero(t[n] <= budget)
    best = int(reachable[-1]) if reachable.size else 0

    chosen: list[int] = []
    w = best
    for e in range(n, 0, -1):
        if t[e, w] == t[e - 1, w]:
            continue  # tie-break: exclude when skipping matches
        chosen.append(e - 1)
        w -= int(utilities[e - 1])
    chosen.reverse()
    return best, chosen


def _dp_small(utilities: list[int], sizes: list[int], budget: int, total: int) -> tuple[int, list[int]]:
    """Plain-list variant of the same recurrence for tiny tables, where
    array dispatch overhead dominates.  Semantics match the array path."""
    inf = int(INF)
    n = len(utilities)
    rows = [[inf] * (total + 1) for _ in range(n + 1)]
    for row in rows:
        row[0] = 0
    for e in range(1, n + 1):
        v, s = utilities[e - 1], sizes[e - 1]
        prev, cur = rows[e - 1], rows[e]
        cur[1:] = prev[1:]
        for w in range(v, total + 1):
            cand = prev[w - v]
            if cand < inf and cand + s < cur[w]:
                cur[w] = cand + s
    best = 0
    last = rows[n]
    for w in range(total, -1, -1):
        if last[w] <= budget:
            best = w
            break
    chosen: list[int] = []
    w = best
    for e in range(n, 0, -1):
        if rows[e][w] == rows[e - 1][w]:
            continue
        chosen.append(e - 1)
        w -= utilities[e - 1]
    chosen.reverse()
    return best, chosen
