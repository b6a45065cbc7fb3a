"""Tests for swarm_ltl.config."""

from __future__ import annotations

from typing import TYPE_CHECKING

import pytest

from swarm_ltl.config import (
    SimOptions,
    get_log_level,
    get_output_dir,
    get_tau_reset,
    get_tie_break,
    resolve_sim_options,
)

if TYPE_CHECKING:
    from pathlib import Path

    from swarm_ltl.world import Scenario


class TestGetLogLevel:
    """Tests for get_log_level()."""

    def test_default_info(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.delenv("LOG_LEVEL", raising=False)
        assert get_log_level() == "INFO"

    def test_lowercase_accepted(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("LOG_LEVEL", "debug")
        assert get_log_level() == "DEBUG"

    def test_invalid_raises(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("LOG_LEVEL", "LOUD")
        with pytest.raises(ValueError, match="LOG_LEVEL"):
            get_log_level()


class TestGetOutputDir:
    """Tests for get_output_dir()."""

    def test_default_is_absolute(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.delenv("SWARM_LTL_OUTPUT_DIR", raising=False)
        path = get_output_dir()
        assert path.is_absolute()
        assert path.name == "results"

    def test_custom(self, monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
        monkeypatch.setenv("SWARM_LTL_OUTPUT_DIR", str(tmp_path / "runs"))
        assert get_output_dir() == (tmp_path / "runs").resolve()


class TestProtocolSettings:
    """Tests for get_tie_break() and get_tau_reset()."""

    def test_defaults(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.delenv("SWARM_LTL_TIE_BREAK", raising=False)
        monkeypatch.delenv("SWARM_LTL_TAU_RESET", raising=False)
        assert get_tie_break() == "high-id"
        assert get_tau_reset() == "provision-time"

    def test_custom(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("SWARM_LTL_TIE_BREAK", "LOW-ID")
        monkeypatch.setenv("SWARM_LTL_TAU_RESET", "zero")
        assert get_tie_break() == "low-id"
        assert get_tau_reset() == "zero"

    def test_invalid_tie_break(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("SWARM_LTL_TIE_BREAK", "random")
        with pytest.raises(ValueError, match="SWARM_LTL_TIE_BREAK"):
            get_tie_break()

    def test_invalid_tau_reset(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("SWARM_LTL_TAU_RESET", "never")
        with pytest.raises(ValueError, match="SWARM_LTL_TAU_RESET"):
            get_tau_reset()


class TestSimOptions:
    """Tests for SimOptions."""

    def test_step_count(self) -> None:
        assert SimOptions(duration=35.0, dt=0.005).n_steps == 7000
        assert SimOptions(duration=0.0, dt=0.005).n_steps == 0

    @pytest.mark.parametrize(
        ("changes", "field"),
        [
            ({"dt": 0.0}, "dt"),
            ({"duration": -1.0}, "duration"),
            ({"tie_break": "random"}, "tie_break"),
            ({"tau_reset": "never"}, "tau_reset"),
            ({"stop_after_provisions": 0}, "stop_after_provisions"),
        ],
    )
    def test_invalid(self, changes: dict[str, object], field: str) -> None:
        values: dict[str, object] = {"duration": 1.0, "dt": 0.005, **changes}
        with pytest.raises(ValueError, match=field):
            SimOptions(**values)  # type: ignore[arg-type]


class TestResolveSimOptions:
    """Tests for resolve_sim_options()."""

    def test_scenario_defaults(
        self, monkeypatch: pytest.MonkeyPatch, four_robot: Scenario
    ) -> None:
        monkeypatch.delenv("SWARM_LTL_TIE_BREAK", raising=False)
        monkeypatch.delenv("SWARM_LTL_TAU_RESET", raising=False)
        options = resolve_sim_options(four_robot)
        assert (options.duration, options.dt, options.seed) == (35.0, 0.005, 0)
        assert options.tie_break == "high-id"
        assert options.stop_after_provisions is None

    def test_environment_then_overrides(
        self, monkeypatch: pytest.MonkeyPatch, four_robot: Scenario
    ) -> None:
        monkeypatch.setenv("SWARM_LTL_TIE_BREAK", "low-id")
        assert resolve_sim_options(four_robot).tie_break == "low-id"
        options = resolve_sim_options(
            four_robot, tie_break="high-id", duration=2.0, dt=0.01, seed=9
        )
        assert options.tie_break == "high-id"
        assert (options.duration, options.dt, options.seed) == (2.0, 0.01, 9)

    def test_invalid_override(self, four_robot: Scenario) -> None:
        with pytest.raises(ValueError, match="dt must be positive"):
            resolve_sim_options(four_robot, dt=-0.1)
