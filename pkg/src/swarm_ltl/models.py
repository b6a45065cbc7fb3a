"""Scenario file schema."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field

from swarm_ltl.ltl import ATOM_PATTERN


class _Schema(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)


class CooperationModel(_Schema):
    """A cooperating action another agent must perform alongside a service."""

    agent: int = Field(ge=1)
    action: str = Field(pattern=ATOM_PATTERN)


class ServiceModel(_Schema):
    """A service the agent can provide, with its cooperation set."""

    id: str = Field(min_length=1)
    action: str = Field(pattern=ATOM_PATTERN)
    cooperation: tuple[CooperationModel, ...] = ()


class RegionModel(_Schema):
    """A circular region of interest; its id doubles as the region atom."""

    id: str = Field(pattern=ATOM_PATTERN)
    center: tuple[float, float]
    radius: float = Field(gt=0)
    services: tuple[str, ...] = ()


class AgentModel(_Schema):
    id: int = Field(ge=1)
    position: tuple[float, float]
    formula: str = Field(min_length=1)
    regions: tuple[RegionModel, ...] = Field(min_length=1)
    services: tuple[ServiceModel, ...] = Field(min_length=1)


class GlobalModel(_Schema):
    """Team-wide parameters. Distances in meters, times in seconds."""

    comm_radius: float = Field(gt=0)
    hysteresis: float = Field(gt=0)
    r_min: float = Field(default=0.2, gt=0)
    dt: float = Field(default=0.005, gt=0)
    duration: float = Field(default=35.0, ge=0)
    seed: int = 0
    workspace: tuple[float, float, float, float] | None = None


class ScenarioModel(_Schema):
    """Top-level scenario document."""

    name: str = Field(min_length=1)
    global_: GlobalModel = Field(alias="global")
    agents: tuple[AgentModel, ...] = Field(min_length=1)
