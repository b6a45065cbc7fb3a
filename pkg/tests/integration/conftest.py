"""Shared fixtures for integration tests."""

from __future__ import annotations

import json
from pathlib import Path
from typing import TYPE_CHECKING, Any

import pytest

from swarm_ltl.config import SimOptions
from swarm_ltl.sim import run
from swarm_ltl.world import load_scenario

if TYPE_CHECKING:
    from collections.abc import Callable

    from swarm_ltl.sim import SimResult
    from swarm_ltl.world import Scenario

SCENARIO_DIR = Path(__file__).resolve().parents[2] / "scenarios"


@pytest.fixture(scope="module")
def team() -> Scenario:
    return load_scenario(SCENARIO_DIR / "four_robot_team.json")


@pytest.fixture(scope="module")
def team_run(team: Scenario) -> SimResult:
    """The full 35 s run of the shipped scenario, shared by the module."""
    return run(team, SimOptions(duration=team.duration, dt=team.dt))


def _recurring_team_data(n_agents: int) -> dict[str, Any]:
    """Line of agents 1 m apart; each one's task is to visit its own region forever.

    The regions ring the middle of the line so every leader reaches its
    goal in a few seconds.
    """
    middle = (n_agents - 1) / 2
    agents = []
    for agent_id in range(1, n_agents + 1):
        offset = 0.2 if agent_id % 2 else -0.2
        agents.append(
            {
                "id": agent_id,
                "position": [float(agent_id - 1), 0.0],
                "formula": f"G F (p_{agent_id} & r_{agent_id})",
                "regions": [
                    {
                        "id": f"r_{agent_id}",
                        "center": [middle + offset, offset],
                        "radius": 0.5,
                        "services": [f"p{agent_id}"],
                    }
                ],
                "services": [{"id": f"p{agent_id}", "action": f"p_{agent_id}"}],
            }
        )
    return {
        "name": f"recurring team of {n_agents}",
        "global": {"comm_radius": 1.5, "hysteresis": 0.1, "dt": 0.005, "duration": 120.0},
        "agents": agents,
    }


@pytest.fixture
def recurring_team(tmp_path: Path) -> Callable[[int], Scenario]:
    def _load(n_agents: int) -> Scenario:
        path = tmp_path / "recurring.json"
        path.write_text(json.dumps(_recurring_team_data(n_agents)), encoding="utf-8")
        return load_scenario(path)

    return _load
