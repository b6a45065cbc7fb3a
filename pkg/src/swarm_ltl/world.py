"""Scenario model: agents, regions, services and team parameters."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING, Any

import numpy as np
from pydantic import ValidationError

from swarm_ltl.dynamics import initial_edges, is_connected
from swarm_ltl.ltl import FormulaSyntaxError, Letter, atoms, parse
from swarm_ltl.models import (
    AgentModel,
    CooperationModel,
    GlobalModel,
    RegionModel,
    ScenarioModel,
    ServiceModel,
)

if TYPE_CHECKING:
    from collections.abc import Iterable
    from pathlib import Path

    from numpy.typing import NDArray

    from swarm_ltl.ltl import Formula

logger = logging.getLogger(__name__)

_RESERVED_ATOMS = {"true", "false", "U"}


class ScenarioError(ValueError):
    """Raised when a scenario file is malformed or violates an invariant."""

    def __init__(self, diagnostics: list[str]) -> None:
        super().__init__("Invalid scenario:\n  " + "\n  ".join(diagnostics))
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class Region:
    id: str
    owner: int
    center: tuple[float, float]
    radius: float
    services: frozenset[str]


@dataclass(frozen=True)
class Cooperation:
    agent: int
    action: str


@dataclass(frozen=True)
class ServiceSpec:
    """A service: the provider's action plus simultaneous cooperating actions."""

    id: str
    provider: int
    action: str
    cooperation: tuple[Cooperation, ...] = ()

    @property
    def cooperators(self) -> tuple[int, ...]:
        return tuple(c.agent for c in self.cooperation)

    @property
    def labels(self) -> frozenset[str]:
        return frozenset({self.action, *(c.action for c in self.cooperation)})


@dataclass(frozen=True)
class AgentSpec:
    id: int
    position: tuple[float, float]
    formula_text: str
    regions: tuple[Region, ...]
    services: tuple[ServiceSpec, ...]

    @cached_property
    def formula(self) -> Formula:
        return parse(self.formula_text)

    def region(self, region_id: str) -> Region:
        for region in self.regions:
            if region.id == region_id:
                return region
        msg = f"Agent {self.id} has no region {region_id!r}"
        raise KeyError(msg)

    def service(self, service_id: str) -> ServiceSpec:
        for service in self.services:
            if service.id == service_id:
                return service
        msg = f"Agent {self.id} has no service {service_id!r}"
        raise KeyError(msg)

    def feasible_pairs(self) -> list[tuple[ServiceSpec, Region]]:
        """(service, region) pairs where the region's labeling offers the service."""
        return [
            (service, region)
            for region in self.regions
            for service in self.services
            if service.id in region.services
        ]


def service_letter(service: ServiceSpec, region: Region) -> Letter:
    """Atoms true when ``service`` is provided in ``region``."""
    return service.labels | {region.id}


@dataclass(frozen=True)
class Scenario:
    name: str
    agents: tuple[AgentSpec, ...]
    comm_radius: float
    hysteresis: float
    r_min: float = 0.2
    dt: float = 0.005
    duration: float = 35.0
    seed: int = 0
    workspace: tuple[float, float, float, float] | None = None

    @property
    def size(self) -> int:
        return len(self.agents)

    def agent(self, agent_id: int) -> AgentSpec:
        return self.agents[agent_id - 1]

    def initial_positions(self) -> NDArray[np.float64]:
        return np.array([a.position for a in self.agents], dtype=float)


def region_contains(region: Region, point: Iterable[float]) -> bool:
    """Closed-ball membership."""
    x, y = point
    return math.hypot(x - region.center[0], y - region.center[1]) <= region.radius


def _format_pydantic_errors(exc: ValidationError, raw: Any) -> list[str]:
    """One line per schema error; agent entries are named by their id."""
    agents = raw.get("agents") if isinstance(raw, dict) else None
    diagnostics = []
    for error in exc.errors():
        loc = list(error["loc"])
        prefix = ""
        if len(loc) >= 2 and loc[0] == "agents" and isinstance(loc[1], int):
            index = loc[1]
            entry = agents[index] if isinstance(agents, list) else None
            agent_id = entry.get("id") if isinstance(entry, dict) else None
            prefix = f"agent {agent_id}: " if agent_id is not None else f"agents[{index}]: "
            loc = loc[2:]
        location = ".".join(str(part) for part in loc) or "scenario"
        diagnostics.append(f"{prefix}{location}: {error['msg']}")
    return diagnostics


def _atom_problem(label: str) -> str | None:
    if label in _RESERVED_ATOMS or set(label) <= {"X", "F", "G"}:
        return f"label {label!r} collides with formula syntax"
    return None


def _check_agent(agent: AgentModel, model: ScenarioModel) -> list[str]:
    where = f"agent {agent.id}"
    problems: list[str] = []
    glob = model.global_
    ids = {a.id for a in model.agents}
    service_ids = [s.id for s in agent.services]

    if len(set(service_ids)) != len(service_ids):
        problems.append(f"{where}: duplicate service ids")
    try:
        parse(agent.formula)
    except FormulaSyntaxError as exc:
        problems.append(f"{where}: formula: {exc}")

    for region in agent.regions:
        if region.radius < glob.r_min:
            problems.append(
                f"{where}: region {region.id}: radius {region.radius} "
                f"below r_min {glob.r_min}"
            )
        problem = _atom_problem(region.id)
        if problem:
            problems.append(f"{where}: region {region.id}: {problem}")
        for service_id in region.services:
            if service_id not in service_ids:
                problems.append(
                    f"{where}: region {region.id}: unknown service {service_id!r}"
                )

    for service in agent.services:
        for label in (service.action, *(c.action for c in service.cooperation)):
            problem = _atom_problem(label)
            if problem:
                problems.append(f"{where}: service {service.id}: {problem}")
        partners = [c.agent for c in service.cooperation]
        if agent.id in partners:
            problems.append(f"{where}: service {service.id}: provider cooperates with itself")
        if len(set(partners)) != len(partners):
            problems.append(f"{where}: service {service.id}: duplicate cooperator")
        problems.extend(
            f"{where}: service {service.id}: unknown cooperator {p}"
            for p in partners
            if p not in ids
        )
    return problems


def _build(model: ScenarioModel) -> Scenario:
    agents = []
    for a in sorted(model.agents, key=lambda a: a.id):
        regions = tuple(
            Region(
                id=r.id,
                owner=a.id,
                center=r.center,
                radius=r.radius,
                services=frozenset(r.services),
            )
            for r in a.regions
        )
        services = tuple(
            ServiceSpec(
                id=s.id,
                provider=a.id,
                action=s.action,
                cooperation=tuple(Cooperation(c.agent, c.action) for c in s.cooperation),
            )
            for s in a.services
        )
        agents.append(
            AgentSpec(
                id=a.id,
                position=a.position,
                formula_text=a.formula,
                regions=regions,
                services=services,
            )
        )
    glob = model.global_
    return Scenario(
        name=model.name,
        agents=tuple(agents),
        comm_radius=glob.comm_radius,
        hysteresis=glob.hysteresis,
        r_min=glob.r_min,
        dt=glob.dt,
        duration=glob.duration,
        seed=glob.seed,
        workspace=glob.workspace,
    )


def validate_scenario(model: ScenarioModel) -> Scenario:
    """Check cross-field invariants and build the runtime scenario."""
    glob = model.global_
    problems: list[str] = []

    if not glob.hysteresis < glob.comm_radius:
        problems.append(
            f"global.hysteresis: eps={glob.hysteresis} must be below "
            f"comm_radius r={glob.comm_radius}"
        )
    ids = sorted(a.id for a in model.agents)
    if ids != list(range(1, len(ids) + 1)):
        problems.append(f"agents: ids must be 1..{len(ids)}, got {ids}")

    seen_regions: dict[str, int] = {}
    for agent in model.agents:
        for region in agent.regions:
            if region.id in seen_regions:
                problems.append(
                    f"agent {agent.id}: region id {region.id!r} already used by "
                    f"agent {seen_regions[region.id]}"
                )
            seen_regions.setdefault(region.id, agent.id)
        problems.extend(_check_agent(agent, model))

    if problems:
        raise ScenarioError(problems)

    scenario = _build(model)

    for agent in scenario.agents:
        letters: dict[Letter, str] = {}
        for service, region in agent.feasible_pairs():
            letter = service_letter(service, region)
            pair = f"{service.id}@{region.id}"
            if letter in letters:
                problems.append(
                    f"agent {agent.id}: {pair} and {letters[letter]} yield the "
                    "same letter"
                )
            letters[letter] = pair
        unused = atoms(agent.formula) - {label for letter in letters for label in letter}
        if unused:
            logger.warning(
                "Agent %d formula mentions atoms no service provides: %s",
                agent.id,
                ", ".join(sorted(unused)),
            )

    positions = scenario.initial_positions()
    if not is_connected(scenario.size, initial_edges(positions, scenario.comm_radius)):
        problems.append(
            f"agents: initial configuration is disconnected at r={scenario.comm_radius}"
        )

    if problems:
        raise ScenarioError(problems)
    return scenario


def load_scenario(path: Path) -> Scenario:
    """Read, parse and fully validate a JSON scenario file."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        msg = f"{path}: {exc.strerror or exc}"
        raise ScenarioError([msg]) from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        msg = f"{path}: not valid JSON: {exc}"
        raise ScenarioError([msg]) from exc
    try:
        model = ScenarioModel.model_validate(raw)
    except ValidationError as exc:
        raise ScenarioError(_format_pydantic_errors(exc, raw)) from exc
    scenario = validate_scenario(model)
    logger.debug("Loaded scenario %s with %d agents", scenario.name, scenario.size)
    return scenario


def to_model(scenario: Scenario) -> ScenarioModel:
    agents = tuple(
        AgentModel(
            id=agent.id,
            position=agent.position,
            formula=agent.formula_text,
            regions=tuple(
                RegionModel(
                    id=r.id,
                    center=r.center,
                    radius=r.radius,
                    services=tuple(s.id for s in agent.services if s.id in r.services),
                )
                for r in agent.regions
            ),
            services=tuple(
                ServiceModel(
                    id=s.id,
                    action=s.action,
                    cooperation=tuple(
                        CooperationModel(agent=c.agent, action=c.action)
                        for c in s.cooperation
                    ),
                )
                for s in agent.services
            ),
        )
        for agent in scenario.agents
    )
    return ScenarioModel(
        name=scenario.name,
        global_=GlobalModel(
            comm_radius=scenario.comm_radius,
            hysteresis=scenario.hysteresis,
            r_min=scenario.r_min,
            dt=scenario.dt,
            duration=scenario.duration,
            seed=scenario.seed,
            workspace=scenario.workspace,
        ),
        agents=agents,
    )


def dump_scenario(scenario: Scenario) -> str:
    return to_model(scenario).model_dump_json(indent=2, by_alias=True) + "\n"


def save_scenario(scenario: Scenario, path: Path) -> None:
    path.write_text(dump_scenario(scenario), encoding="utf-8")
