"""Command-line front-end: scenario generation, solving, evaluation, sweeps."""

from __future__ import annotations

import json

import click

from .evaluate import evaluate_fading
from .exhaustive import OracleBudgetError
from .experiments import (
    MOBILITY_COLUMNS,
    ORACLE_COLUMNS,
    SWEEP_COLUMNS,
    ConfigError,
    SolverSpec,
    config_from_dict,
    run_mobility,
    run_oracle_compare,
    run_solver,
    run_sweep,
    write_csv,
    write_plot_data,
)
from .generate import make_scenario
from .library import Placement
from .objective import hit_ratio, storage_used
from .radio import build_rate_table
from .scenario import load_scenario, save_scenario


def _load_config(path: str):
    with open(path) as f:
        try:
            return config_from_dict(json.load(f))
        except ConfigError as exc:
            raise click.ClickException(f"config error: {exc}")


@click.group()
def main():
    """Parameter-sharing model placement for wireless edge caches."""


seed_option = click.option("--seed", type=int, default=0, show_default=True)
out_option = click.option("--out", type=click.Path(), required=True)
threads_option = click.option(
    "--threads", type=int, default=1, show_default=True,
    help="Accepted for interface stability; execution is sequential and "
    "results never depend on this value.",
)


@main.command("gen-scenario")
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@seed_option
@out_option
@threads_option
def gen_scenario(config_path, seed, out, threads):
    """Sample one scenario from the config's fixed parameters."""
    config = _load_config(config_path)
    scenario = make_scenario(config.scenario, seed)
    save_scenario(scenario, out)
    click.echo(f"wrote scenario with {scenario.n_servers} servers, "
               f"{scenario.n_users} users, {scenario.n_models} models to {out}")


@main.command()
@click.option("--scenario", "scenario_path", type=click.Path(exists=True), required=True)
@click.option("--solver", type=click.Choice(["successive", "greedy", "independent"]),
              default="greedy", show_default=True)
@click.option("--epsilon", type=float, default=0.1, show_default=True,
              help="Utility rounding factor for the successive solver (0 = exact).")
@out_option
@threads_option
def solve(scenario_path, solver, epsilon, out, threads):
    """Place models on servers and write the placement matrix."""
    scenario = load_scenario(scenario_path)
    rates = build_rate_table(scenario)
    x = run_solver(SolverSpec(solver, epsilon=epsilon), scenario, rates)
    with open(out, "w") as f:
        json.dump(Placement(x).to_dict(), f)
    click.echo(f"hit ratio {hit_ratio(scenario, rates, x):.6f}; placement written to {out}")


@main.command()
@click.option("--scenario", "scenario_path", type=click.Path(exists=True), required=True)
@click.option("--placement", "placement_path", type=click.Path(exists=True), required=True)
@click.option("--fading", type=int, default=0, show_default=True,
              help="Number of fading realizations (0 = expected-rate evaluation).")
@seed_option
@click.option("--out", type=click.Path(), default=None)
@threads_option
def evaluate(scenario_path, placement_path, fading, seed, out, threads):
    """Score a placement on a scenario."""
    scenario = load_scenario(scenario_path)
    rates = build_rate_table(scenario)
    with open(placement_path) as f:
        placement = Placement.from_dict(json.load(f))
    metrics = {
        "hit_ratio": hit_ratio(scenario, rates, placement.x),
        "storage_used_bytes": [
            storage_used(scenario.library, placement.x, m) for m in range(scenario.n_servers)
        ],
    }
    if fading > 0:
        mean, std = evaluate_fading(scenario, placement.x, fading, seed=seed)
        metrics["fading_mean_hit_ratio"] = mean
        metrics["fading_std_hit_ratio"] = std
    text = json.dumps(metrics, indent=1)
    if out:
        with open(out, "w") as f:
            f.write(text + "\n")
    click.echo(text)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@out_option
@click.option("--plot-out", type=click.Path(), default=None,
              help="Optional (x, series, mean, std) companion file.")
@threads_option
def sweep(config_path, out, plot_out, threads):
    """Run the configured sweep axis over topology seeds and write CSV."""
    rows = run_sweep(_load_config(config_path))
    write_csv(out, rows, SWEEP_COLUMNS)
    if plot_out:
        write_plot_data(plot_out, rows)
    click.echo(f"wrote {len(rows)} aggregated rows to {out}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@out_option
@threads_option
def mobility(config_path, out, threads):
    """Time series of the hit ratio under user mobility, placement fixed."""
    rows = run_mobility(_load_config(config_path))
    write_csv(out, rows, MOBILITY_COLUMNS)
    click.echo(f"wrote {len(rows)} time-series rows to {out}")


@main.command("oracle-compare")
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@out_option
@threads_option
def oracle_compare(config_path, out, threads):
    """Compare solvers against the brute-force optimum on small instances."""
    config = _load_config(config_path)
    n = config.scenario.topology.n_servers * config.scenario.library.n_models
    if 2 ** n > config.oracle_max_states * 16:
        raise click.ClickException(
            f"instance too large for the oracle budget (2^{n} placements)"
        )
    try:
        rows = run_oracle_compare(config)
    except OracleBudgetError as exc:
        raise click.ClickException(str(exc))
    write_csv(out, rows, ORACLE_COLUMNS)
    click.echo(f"wrote {len(rows)} comparison rows to {out}")


if __name__ == "__main__":
    main()
