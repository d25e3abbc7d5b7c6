import numpy as np
import pytest

# One pass/fail line per acceptance criterion, echoed in the terminal
# summary so they are visible without -s.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

from edgecache.generate import LibraryParams, ScenarioParams, TopologyParams, make_scenario
from edgecache.radio import build_rate_table


def small_params(
    capacity=140_000_000,
    n_servers=2,
    n_users=6,
    n_models=8,
    chain_len=1,
    requested_per_user=8,
    area=400.0,
    size_min=20_000_000,
    size_max=45_000_000,
    shared_fraction=0.5,
    mode="special",
):
    """Desk-scale instance family used across solver and oracle tests."""
    return ScenarioParams(
        topology=TopologyParams(
            n_servers=n_servers, n_users=n_users, area_side_m=area,
            capacity_bytes=capacity,
        ),
        library=LibraryParams(
            n_models=n_models, mode=mode, n_roots=2, chain_len=chain_len,
            shared_fraction=shared_fraction,
            model_size_min=size_min, model_size_max=size_max,
        ),
        requested_per_user=requested_per_user,
    )


@pytest.fixture
def small_scenario():
    sc = make_scenario(small_params(), seed=7)
    return sc, build_rate_table(sc)


def random_library_arrays(rng, n_blocks=6, n_models=5):
    """Raw (blocks, models) inputs with random overlap for property tests."""
    blocks = [(j, int(rng.integers(1, 100))) for j in range(n_blocks)]
    models = []
    for i in range(n_models):
        size = int(rng.integers(1, n_blocks + 1))
        models.append((i, rng.choice(n_blocks, size=size, replace=False).tolist()))
    # Every block must belong to some model.
    used = {j for _, bids in models for j in bids}
    for j in range(n_blocks):
        if j not in used:
            models[int(rng.integers(n_models))][1].append(j)
    return blocks, models
