"""SVG rendering of result bundles."""

from __future__ import annotations

import logging
from collections import defaultdict
from typing import TYPE_CHECKING

import matplotlib as mpl

mpl.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Circle  # noqa: E402

from swarm_ltl.bundle import BundleError, read_csv_table  # noqa: E402
from swarm_ltl.world import ScenarioError, load_scenario  # noqa: E402

if TYPE_CHECKING:
    from pathlib import Path

    from matplotlib.figure import Figure

    from swarm_ltl.world import Scenario

logger = logging.getLogger(__name__)

AGENT_COLORS = ("tab:red", "tab:green", "tab:blue", "tab:cyan", "tab:orange", "tab:purple")

# fixed ids and no timestamp, so identical bundles give identical SVG bytes
mpl.rcParams["svg.hashsalt"] = "swarm-ltl"


def _color(agent_id: int) -> str:
    return AGENT_COLORS[(agent_id - 1) % len(AGENT_COLORS)]


def _save(fig: Figure, path: Path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _load_bundle_scenario(bundle: Path) -> Scenario:
    path = bundle / "scenario.json"
    if not path.is_file():
        msg = f"Bundle {bundle} is missing scenario.json"
        raise BundleError(msg)
    try:
        return load_scenario(path)
    except ScenarioError as exc:
        msg = f"Bundle {bundle} has an invalid scenario.json: {exc}"
        raise BundleError(msg) from exc


def _floats(rows: list[dict[str, str]], column: str) -> list[float]:
    try:
        return [float(row[column]) for row in rows]
    except (KeyError, ValueError) as exc:
        msg = f"Bad or missing column {column!r}: {exc}"
        raise BundleError(msg) from exc


def render_trajectories(scenario: Scenario, rows: list[dict[str, str]], path: Path) -> None:
    """Per-agent paths over the regions, each agent in its own color."""
    by_agent: dict[int, list[dict[str, str]]] = defaultdict(list)
    for row in rows:
        try:
            by_agent[int(row["agent"])].append(row)
        except (KeyError, ValueError) as exc:
            msg = f"traces.csv: bad agent column: {exc}"
            raise BundleError(msg) from exc

    fig, ax = plt.subplots(figsize=(6, 6))
    for agent in scenario.agents:
        color = _color(agent.id)
        for region in agent.regions:
            ax.add_patch(Circle(region.center, region.radius, color=color, alpha=0.15))
            ax.annotate(region.id, region.center, ha="center", va="center", fontsize=8)
        samples = by_agent.get(agent.id, [])
        if samples:
            xs, ys = _floats(samples, "x"), _floats(samples, "y")
            ax.plot(xs, ys, color=color, linewidth=1.2, label=f"agent {agent.id}")
            ax.plot(xs[0], ys[0], marker="o", color=color)
            ax.plot(xs[-1], ys[-1], marker="s", color=color)
    if scenario.workspace is not None:
        xmin, xmax, ymin, ymax = scenario.workspace
        ax.set_xlim(xmin, xmax)
        ax.set_ylim(ymin, ymax)
    else:
        ax.autoscale_view()
    ax.set_aspect("equal")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_title(f"{scenario.name}: trajectories")
    if by_agent:
        ax.legend(loc="upper right", fontsize=8)
    _save(fig, path)


def render_edge_distances(
    scenario: Scenario, rows: list[dict[str, str]], path: Path
) -> None:
    """Distances of the initially connected pairs against the radius r."""
    fig, ax = plt.subplots(figsize=(8, 4))
    if rows:
        times = _floats(rows, "t")
        first = rows[0]
        pairs = [c[2:] for c in first if c.startswith("e_") and first[c] == "1"]
        for pair in pairs:
            ax.plot(times, _floats(rows, f"d_{pair}"), linewidth=1.0, label=f"d_{pair}")
        if pairs:
            ax.legend(loc="upper right", fontsize=8)
    ax.axhline(scenario.comm_radius, color="black", linestyle="--", linewidth=1.0)
    ax.set_xlabel("t (s)")
    ax.set_ylabel("distance (m)")
    ax.set_title(f"{scenario.name}: pairwise distance of E(0) edges")
    _save(fig, path)


def plot_bundle(bundle: Path, out_dir: Path | None = None) -> list[Path]:
    """Render trajectories.svg and edge_distances.svg from the bundle CSVs."""
    if not bundle.is_dir():
        msg = f"Bundle directory {bundle} does not exist"
        raise BundleError(msg)
    scenario = _load_bundle_scenario(bundle)
    traces = read_csv_table(bundle, "traces.csv")
    edges = read_csv_table(bundle, "edges.csv")

    target = out_dir or bundle
    target.mkdir(parents=True, exist_ok=True)
    trajectories = target / "trajectories.svg"
    distances = target / "edge_distances.svg"
    render_trajectories(scenario, traces, trajectories)
    render_edge_distances(scenario, edges, distances)
    logger.info("Rendered %s and %s", trajectories, distances)
    return [trajectories, distances]
