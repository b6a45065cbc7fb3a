"""CLI entry point for swarm-ltl."""

from __future__ import annotations

import logging
import sys
from pathlib import Path
from typing import TYPE_CHECKING

import click

if TYPE_CHECKING:
    from swarm_ltl.sim import SimResult
    from swarm_ltl.world import Scenario

EXIT_INVALID = 1
EXIT_SYNTHESIS = 2
EXIT_RUNTIME = 3


@click.group()
def cli() -> None:
    """Swarm LTL: decentralized multi-agent coordination under local LTL tasks."""
    from swarm_ltl.config import get_log_level

    logging.basicConfig(
        level=getattr(logging, get_log_level(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _load_or_exit(path: Path) -> Scenario:
    from swarm_ltl.world import ScenarioError, load_scenario

    try:
        return load_scenario(path)
    except ScenarioError as exc:
        click.echo(str(exc), err=True)
        sys.exit(EXIT_INVALID)


@cli.command()
@click.argument("path", type=click.Path(path_type=Path))
def validate(path: Path) -> None:
    """Validate a scenario file."""
    from swarm_ltl.dynamics import initial_edges

    scenario = _load_or_exit(path)
    edges = sorted(
        (i + 1, j + 1)
        for i, j in initial_edges(scenario.initial_positions(), scenario.comm_radius)
    )
    click.echo(f"Scenario {scenario.name!r} is valid: {scenario.size} agent(s)")
    click.echo(f"r={scenario.comm_radius}  eps={scenario.hysteresis}  dt={scenario.dt}")
    click.echo("E(0) = {" + ", ".join(f"({i},{j})" for i, j in edges) + "}")


@cli.command()
@click.argument("path", type=click.Path(path_type=Path))
@click.option(
    "--dot",
    "dot_dir",
    type=click.Path(file_okay=False, path_type=Path),
    default=None,
    help="Write each agent's Büchi automaton as agent_<id>.dot here.",
)
def plan(path: Path, dot_dir: Path | None) -> None:
    """Synthesize and verify every agent's plan."""
    from swarm_ltl.buchi import to_dot, translate
    from swarm_ltl.plan import SynthesisError, synthesize_plan, verify_plan

    scenario = _load_or_exit(path)
    if dot_dir is not None:
        dot_dir.mkdir(parents=True, exist_ok=True)

    click.echo(f"{'Agent':<6} {'Verified':<9} {'Prefix':<30} Suffix")
    click.echo("-" * 80)
    for agent in scenario.agents:
        try:
            result = synthesize_plan(agent)
        except SynthesisError as exc:
            click.echo(f"Synthesis failed: {exc}", err=True)
            sys.exit(EXIT_SYNTHESIS)
        verified = verify_plan(result, agent.formula)
        prefix = " ".join(str(s) for s in result.prefix) or "-"
        suffix = " ".join(str(s) for s in result.suffix)
        click.echo(f"{agent.id:<6} {'yes' if verified else 'NO':<9} {prefix:<30} {suffix}")
        if dot_dir is not None:
            dot = to_dot(translate(agent.formula), name=f"agent_{agent.id}")
            (dot_dir / f"agent_{agent.id}.dot").write_text(dot, encoding="utf-8")
        if not verified:
            click.echo(f"Agent {agent.id}: plan fails verification", err=True)
            sys.exit(EXIT_SYNTHESIS)


def _print_summary(result: SimResult) -> None:
    click.echo(f"{'Start':>8} {'End':>8} {'Leader':>7} {'Region':<10} {'Service':<10} Done")
    click.echo("-" * 56)
    for interval in result.leaders:
        click.echo(
            f"{interval.start:>8.3f} {interval.end:>8.3f} {interval.leader:>7} "
            f"{interval.goal_region:<10} {interval.service:<10} "
            f"{'yes' if interval.completed else 'no'}"
        )
    click.echo("")
    for agent_id, trace in sorted(result.traces.items()):
        services = " ".join(f"{s.service}@{s.region}" for s in trace.services) or "-"
        click.echo(f"agent {agent_id}: {len(trace.services)} service(s): {services}")
    click.echo(
        f"\n{len(result.leaders)} leadership(s), {result.provisions} provision(s), "
        f"stopped on {result.termination} at t={result.end_time:.3f}s"
    )


@cli.command()
@click.argument("path", type=click.Path(path_type=Path))
@click.option("--dt", type=float, default=None, help="Integration step (s).")
@click.option("--duration", type=float, default=None, help="Simulated time (s).")
@click.option(
    "--out",
    type=click.Path(file_okay=False, path_type=Path),
    default=None,
    help="Bundle directory (default: under SWARM_LTL_OUTPUT_DIR).",
)
@click.option(
    "--tie-break",
    type=click.Choice(["high-id", "low-id"]),
    default=None,
    help="Election winner among equal urges.",
)
@click.option(
    "--tau-reset",
    type=click.Choice(["provision-time", "zero"]),
    default=None,
    help="Urge clock reset after a provision.",
)
@click.option("--seed", type=int, default=None, help="Recorded in the summary.")
@click.option(
    "--stop-after",
    type=int,
    default=None,
    help="Stop after this many service provisions.",
)
def run(
    path: Path,
    dt: float | None,
    duration: float | None,
    out: Path | None,
    tie_break: str | None,
    tau_reset: str | None,
    seed: int | None,
    stop_after: int | None,
) -> None:
    """Simulate a scenario and write a result bundle."""
    from swarm_ltl.bundle import LocalBundleStore, save_bundle, write_bundle
    from swarm_ltl.config import get_output_dir, resolve_sim_options
    from swarm_ltl.dynamics import IntegrationError
    from swarm_ltl.plan import SynthesisError
    from swarm_ltl.protocol import ProtocolError
    from swarm_ltl.sim import run as run_simulation

    scenario = _load_or_exit(path)
    try:
        options = resolve_sim_options(
            scenario,
            duration=duration,
            dt=dt,
            seed=seed,
            tie_break=tie_break,
            tau_reset=tau_reset,
            stop_after_provisions=stop_after,
        )
    except ValueError as exc:
        click.echo(f"Invalid options: {exc}", err=True)
        sys.exit(EXIT_INVALID)

    try:
        result = run_simulation(scenario, options)
    except SynthesisError as exc:
        click.echo(f"Synthesis failed: {exc}", err=True)
        sys.exit(EXIT_SYNTHESIS)
    except (IntegrationError, ProtocolError) as exc:
        click.echo(f"Run failed: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)

    if out is None:
        bundle = save_bundle(result, LocalBundleStore(get_output_dir()))
    else:
        bundle = out
        write_bundle(result, bundle)
    _print_summary(result)
    click.echo(f"Bundle: {bundle}")


@cli.command()
@click.argument("bundle", type=click.Path(path_type=Path))
@click.option(
    "--out",
    type=click.Path(file_okay=False, path_type=Path),
    default=None,
    help="Directory for the SVG files (default: the bundle).",
)
def plot(bundle: Path, out: Path | None) -> None:
    """Render trajectory and edge-distance SVGs from a bundle."""
    from swarm_ltl.bundle import BundleError
    from swarm_ltl.plotting import plot_bundle

    try:
        paths = plot_bundle(bundle, out)
    except BundleError as exc:
        click.echo(str(exc), err=True)
        sys.exit(EXIT_INVALID)
    for svg in paths:
        click.echo(f"Wrote {svg}")
