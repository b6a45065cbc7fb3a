"""Result bundle store: one directory of CSV/JSON files per run."""

from __future__ import annotations

import csv
import json
import logging
from itertools import combinations
from typing import TYPE_CHECKING, Any, Protocol

import numpy as np
from slugify import slugify

from swarm_ltl.plan import format_plan
from swarm_ltl.world import dump_scenario

if TYPE_CHECKING:
    from collections.abc import Iterable
    from pathlib import Path

    from swarm_ltl.sim import SimResult

logger = logging.getLogger(__name__)

BUNDLE_FILES = (
    "scenario.json",
    "plans.txt",
    "traces.csv",
    "edges.csv",
    "lyapunov.csv",
    "messages.jsonl",
    "leaders.csv",
    "actions.csv",
    "summary.json",
)


class BundleError(ValueError):
    """Raised when a bundle directory is missing or unreadable."""


class BundleStore(Protocol):
    """Protocol for result bundle storage backends."""

    def create(self, name: str) -> Path: ...


class LocalBundleStore:
    """Local filesystem implementation of BundleStore.

    Directory layout: {root}/{slug(name)}, then {slug}_2, {slug}_3, ...
    """

    def __init__(self, root: Path) -> None:
        self.root = root

    def create(self, name: str) -> Path:
        """Create and return a fresh bundle directory for ``name``."""
        slug = self._slugify_name(name)
        self.root.mkdir(parents=True, exist_ok=True)
        path = self.root / slug

        # Handle reruns by appending numeric suffix
        counter = 1
        while path.exists():
            counter += 1
            path = self.root / f"{slug}_{counter}"

        path.mkdir()
        return path

    @staticmethod
    def _slugify_name(name: str) -> str:
        """Filesystem-safe slug of the scenario name, max 50 chars."""
        return str(slugify(name, max_length=50)) or "run"


def _num(value: float) -> str:
    return f"{value:.9f}"


def _write_csv(path: Path, header: list[str], rows: Iterable[list[Any]]) -> None:
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def pair_columns(n: int) -> list[tuple[int, int]]:
    """Agent id pairs (i, j), i < j, in column order."""
    return [(i + 1, j + 1) for i, j in combinations(range(n), 2)]


def write_bundle(result: SimResult, path: Path) -> None:
    """Write every bundle file of ``result`` into ``path``."""
    scenario = result.scenario
    ids = [a.id for a in scenario.agents]
    n = len(ids)
    path.mkdir(parents=True, exist_ok=True)

    (path / "scenario.json").write_text(dump_scenario(scenario), encoding="utf-8")

    plan_lines = [
        f"agent {agent_id}: {format_plan(plan)}"
        for agent_id, plan in sorted(result.plans.items())
    ]
    (path / "plans.txt").write_text("\n".join(plan_lines) + "\n", encoding="utf-8")

    _write_csv(
        path / "traces.csv",
        ["t", "agent", "x", "y", "b"],
        (
            [
                _num(t),
                agent_id,
                _num(result.positions[k, index, 0]),
                _num(result.positions[k, index, 1]),
                int(result.leader_flags[k, index]),
            ]
            for k, t in enumerate(result.times)
            for index, agent_id in enumerate(ids)
        ),
    )

    pairs = pair_columns(n)
    header = ["t"]
    for i, j in pairs:
        header.extend([f"d_{i}_{j}", f"e_{i}_{j}"])
    edge_rows = []
    for k, t in enumerate(result.times):
        row: list[Any] = [_num(t)]
        positions = result.positions[k]
        for i, j in pairs:
            d = float(np.linalg.norm(positions[i - 1] - positions[j - 1]))
            row.extend([_num(d), int((i - 1, j - 1) in result.edges[k])])
        edge_rows.append(row)
    _write_csv(path / "edges.csv", header, edge_rows)

    leader_by_step = [
        ids[int(np.argmax(flags))] if flags.any() else 0 for flags in result.leader_flags
    ]
    _write_csv(
        path / "lyapunov.csv",
        ["t", "V", "leader"],
        (
            [_num(t), _num(v), leader]
            for t, v, leader in zip(result.times, result.lyapunov, leader_by_step, strict=True)
        ),
    )

    with (path / "messages.jsonl").open("w", encoding="utf-8") as handle:
        for record in result.messages:
            handle.write(json.dumps(record.to_json(), sort_keys=True) + "\n")

    _write_csv(
        path / "leaders.csv",
        ["start", "end", "leader", "goal_region", "service", "completed"],
        (
            [_num(i.start), _num(i.end), i.leader, i.goal_region, i.service, int(i.completed)]
            for i in result.leaders
        ),
    )

    actions = sorted(
        ((a, agent_id) for agent_id, trace in result.traces.items() for a in trace.actions),
        key=lambda item: (item[0].time, item[1]),
    )
    _write_csv(
        path / "actions.csv",
        ["t", "agent", "kind", "service", "provider", "label", "region"],
        (
            [_num(a.time), agent_id, a.kind, a.service, a.provider, a.label, a.region]
            for a, agent_id in actions
        ),
    )

    summary = {
        "scenario": scenario.name,
        "termination": result.termination,
        "end_time": result.end_time,
        "dt": result.options.dt,
        "duration": result.options.duration,
        "seed": result.options.seed,
        "tie_break": result.options.tie_break,
        "tau_reset": result.options.tau_reset,
        "samples": len(result.times),
        "provisions": result.provisions,
        "leaderships": {
            str(agent_id): sum(1 for i in result.leaders if i.leader == agent_id)
            for agent_id in ids
        },
        "services": {
            str(agent_id): len(trace.services)
            for agent_id, trace in sorted(result.traces.items())
        },
    }
    (path / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    logger.info("Wrote result bundle to %s", path)


def read_csv_table(bundle: Path, name: str) -> list[dict[str, str]]:
    """Rows of ``bundle/name`` as dicts keyed by header."""
    path = bundle / name
    if not path.is_file():
        msg = f"Bundle {bundle} is missing {name}"
        raise BundleError(msg)
    try:
        with path.open(newline="", encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            if reader.fieldnames is None:
                msg = f"{path} has no header row"
                raise BundleError(msg)
            rows = list(reader)
    except (OSError, csv.Error, UnicodeDecodeError) as exc:
        msg = f"Cannot read {path}: {exc}"
        raise BundleError(msg) from exc
    for number, row in enumerate(rows, start=2):
        if None in row or any(value is None for value in row.values()):
            msg = f"{path} line {number}: wrong number of fields"
            raise BundleError(msg)
    return rows


def read_summary(bundle: Path) -> dict[str, Any]:
    path = bundle / "summary.json"
    if not path.is_file():
        msg = f"Bundle {bundle} is missing summary.json"
        raise BundleError(msg)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        msg = f"Cannot read {path}: {exc}"
        raise BundleError(msg) from exc
    if not isinstance(data, dict):
        msg = f"{path} is not a JSON object"
        raise BundleError(msg)
    return data


def save_bundle(result: SimResult, store: BundleStore) -> Path:
    """Write ``result`` into a fresh bundle from ``store`` and return its path."""
    path = store.create(result.scenario.name)
    write_bundle(result, path)
    return path
