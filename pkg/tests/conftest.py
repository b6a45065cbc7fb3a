"""Shared test fixtures."""

from __future__ import annotations

import copy
import json
from pathlib import Path
from typing import TYPE_CHECKING, Any

import pytest

from swarm_ltl.world import Scenario, load_scenario

if TYPE_CHECKING:
    from collections.abc import Callable

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "scenarios"


@pytest.fixture
def four_robot_path() -> Path:
    """The shipped four-robot scenario file."""
    return SCENARIO_DIR / "four_robot_team.json"


@pytest.fixture
def four_robot(four_robot_path: Path) -> Scenario:
    return load_scenario(four_robot_path)


@pytest.fixture
def write_scenario(tmp_path: Path) -> Callable[..., Path]:
    """Write a scenario dict as JSON under tmp_path and return its path."""

    def _write(data: dict[str, Any], name: str = "scenario.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(data, indent=2), encoding="utf-8")
        return path

    return _write


_SINGLE_AGENT: dict[str, Any] = {
    "name": "single agent",
    "global": {"comm_radius": 1.5, "hysteresis": 0.1, "dt": 0.005, "duration": 0.1},
    "agents": [
        {
            "id": 1,
            "position": [0.0, 0.0],
            "formula": "p & r_a",
            "regions": [
                {"id": "r_a", "center": [0.0, 0.0], "radius": 0.5, "services": ["p"]}
            ],
            "services": [{"id": "p", "action": "p"}],
        }
    ],
}

_MUTUAL_PAIR: dict[str, Any] = {
    "name": "mutual pair",
    "global": {"comm_radius": 1.5, "hysteresis": 0.1, "dt": 0.005, "duration": 12.0},
    "agents": [
        {
            "id": 1,
            "position": [0.0, 0.0],
            "formula": "G F (a & r_1)",
            "regions": [
                {"id": "r_1", "center": [0.0, 0.3], "radius": 0.3, "services": ["a"]}
            ],
            "services": [
                {"id": "a", "action": "a", "cooperation": [{"agent": 2, "action": "h_2"}]}
            ],
        },
        {
            "id": 2,
            "position": [1.0, 0.0],
            "formula": "G F (b & r_2)",
            "regions": [
                {"id": "r_2", "center": [1.0, 0.3], "radius": 0.3, "services": ["b"]}
            ],
            "services": [
                {"id": "b", "action": "b", "cooperation": [{"agent": 1, "action": "h_1"}]}
            ],
        },
    ],
}


@pytest.fixture
def single_agent_data() -> dict[str, Any]:
    """One agent whose only region contains its start position."""
    return copy.deepcopy(_SINGLE_AGENT)


@pytest.fixture
def single_agent(
    write_scenario: Callable[..., Path], single_agent_data: dict[str, Any]
) -> Scenario:
    return load_scenario(write_scenario(single_agent_data))


@pytest.fixture
def mutual_pair_data() -> dict[str, Any]:
    """Two agents that each need the other to cooperate."""
    return copy.deepcopy(_MUTUAL_PAIR)


@pytest.fixture
def mutual_pair(
    write_scenario: Callable[..., Path], mutual_pair_data: dict[str, Any]
) -> Scenario:
    return load_scenario(write_scenario(mutual_pair_data, "pair.json"))


@pytest.fixture
def four_robot_data(four_robot_path: Path) -> dict[str, Any]:
    data: dict[str, Any] = json.loads(four_robot_path.read_text(encoding="utf-8"))
    return data
