"""Configuration via environment variables and run options."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Literal, cast

from dotenv import load_dotenv

if TYPE_CHECKING:
    from swarm_ltl.world import Scenario

load_dotenv()

TieBreak = Literal["high-id", "low-id"]
TauReset = Literal["provision-time", "zero"]

TIE_BREAKS: tuple[TieBreak, ...] = ("high-id", "low-id")
TAU_RESETS: tuple[TauReset, ...] = ("provision-time", "zero")


@dataclass(frozen=True)
class SimOptions:
    """Options of one simulation run."""

    duration: float
    dt: float
    seed: int = 0
    tie_break: TieBreak = "high-id"
    tau_reset: TauReset = "provision-time"
    stop_after_provisions: int | None = None

    def __post_init__(self) -> None:
        if not self.dt > 0:
            msg = f"dt must be positive, got {self.dt}"
            raise ValueError(msg)
        if not self.duration >= 0:
            msg = f"duration must be non-negative, got {self.duration}"
            raise ValueError(msg)
        if self.tie_break not in TIE_BREAKS:
            msg = f"tie_break must be one of {list(TIE_BREAKS)}, got {self.tie_break!r}"
            raise ValueError(msg)
        if self.tau_reset not in TAU_RESETS:
            msg = f"tau_reset must be one of {list(TAU_RESETS)}, got {self.tau_reset!r}"
            raise ValueError(msg)
        if self.stop_after_provisions is not None and self.stop_after_provisions < 1:
            msg = (
                "stop_after_provisions must be at least 1, "
                f"got {self.stop_after_provisions}"
            )
            raise ValueError(msg)

    @property
    def n_steps(self) -> int:
        return round(self.duration / self.dt)


_VALID_LOG_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}


def get_log_level() -> str:
    """Return the log level from LOG_LEVEL env var, defaulting to INFO."""
    level = os.environ.get("LOG_LEVEL", "INFO").upper()
    if level not in _VALID_LOG_LEVELS:
        valid = sorted(_VALID_LOG_LEVELS)
        msg = f"Invalid LOG_LEVEL: {level!r}. Must be one of {valid}"
        raise ValueError(msg)
    return level


def get_output_dir() -> Path:
    """Return SWARM_LTL_OUTPUT_DIR, defaulting to ./results.

    Always resolves to an absolute path.
    """
    return Path(os.environ.get("SWARM_LTL_OUTPUT_DIR", "./results")).resolve()


def get_tie_break() -> TieBreak:
    """Election tie-break direction from SWARM_LTL_TIE_BREAK (default high-id)."""
    value = os.environ.get("SWARM_LTL_TIE_BREAK", "high-id").lower()
    if value not in TIE_BREAKS:
        msg = f"Invalid SWARM_LTL_TIE_BREAK: {value!r}. Must be one of {list(TIE_BREAKS)}"
        raise ValueError(msg)
    return cast("TieBreak", value)


def get_tau_reset() -> TauReset:
    """Urge reset rule from SWARM_LTL_TAU_RESET (default provision-time)."""
    value = os.environ.get("SWARM_LTL_TAU_RESET", "provision-time").lower()
    if value not in TAU_RESETS:
        msg = f"Invalid SWARM_LTL_TAU_RESET: {value!r}. Must be one of {list(TAU_RESETS)}"
        raise ValueError(msg)
    return cast("TauReset", value)


def resolve_sim_options(
    scenario: Scenario,
    *,
    duration: float | None = None,
    dt: float | None = None,
    seed: int | None = None,
    tie_break: str | None = None,
    tau_reset: str | None = None,
    stop_after_provisions: int | None = None,
) -> SimOptions:
    """Explicit overrides win, then the environment, then the scenario file."""
    return SimOptions(
        duration=scenario.duration if duration is None else duration,
        dt=scenario.dt if dt is None else dt,
        seed=scenario.seed if seed is None else seed,
        tie_break=cast("TieBreak", tie_break or get_tie_break()),
        tau_reset=cast("TauReset", tau_reset or get_tau_reset()),
        stop_after_provisions=stop_after_provisions,
    )
