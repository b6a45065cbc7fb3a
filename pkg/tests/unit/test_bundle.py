"""Tests for swarm_ltl.bundle."""

from __future__ import annotations

import json
from typing import TYPE_CHECKING

import pytest

from swarm_ltl.bundle import (
    BUNDLE_FILES,
    BundleError,
    LocalBundleStore,
    pair_columns,
    read_csv_table,
    read_summary,
    save_bundle,
    write_bundle,
)
from swarm_ltl.config import SimOptions
from swarm_ltl.sim import run
from swarm_ltl.world import load_scenario

if TYPE_CHECKING:
    from pathlib import Path

    from swarm_ltl.world import Scenario


class TestLocalBundleStore:
    """Tests for LocalBundleStore."""

    def test_creates_slugged_directory(self, tmp_path: Path) -> None:
        path = LocalBundleStore(tmp_path / "results").create("Four Robot Team!")
        assert path == tmp_path / "results" / "four-robot-team"
        assert path.is_dir()

    def test_reruns_get_suffix(self, tmp_path: Path) -> None:
        store = LocalBundleStore(tmp_path)
        first = store.create("demo")
        second = store.create("demo")
        third = store.create("demo")
        assert (first.name, second.name, third.name) == ("demo", "demo_2", "demo_3")

    def test_slug_truncated(self, tmp_path: Path) -> None:
        path = LocalBundleStore(tmp_path).create("x" * 80)
        assert len(path.name) <= 50

    def test_unsluggable_name(self, tmp_path: Path) -> None:
        assert LocalBundleStore(tmp_path).create("???").name == "run"


class TestSaveBundle:
    """Tests for save_bundle()."""

    def test_uses_the_given_store(self, single_agent: Scenario, tmp_path: Path) -> None:
        class _FixedStore:
            def __init__(self, path: Path) -> None:
                self.path = path
                self.names: list[str] = []

            def create(self, name: str) -> Path:
                self.names.append(name)
                self.path.mkdir()
                return self.path

        store = _FixedStore(tmp_path / "fixed")
        result = run(single_agent, SimOptions(duration=0.01, dt=0.005))

        path = save_bundle(result, store)

        assert path == tmp_path / "fixed"
        assert store.names == ["single agent"]
        assert (path / "summary.json").is_file()

    def test_local_store_rerun(self, single_agent: Scenario, tmp_path: Path) -> None:
        result = run(single_agent, SimOptions(duration=0.01, dt=0.005))
        store = LocalBundleStore(tmp_path)
        first = save_bundle(result, store)
        second = save_bundle(result, store)
        assert (first.name, second.name) == ("single-agent", "single-agent_2")


class TestWriteBundle:
    """Tests for write_bundle()."""

    def test_writes_every_file(self, single_agent: Scenario, tmp_path: Path) -> None:
        result = run(single_agent, SimOptions(duration=0.05, dt=0.005))
        bundle = tmp_path / "bundle"
        write_bundle(result, bundle)
        assert sorted(p.name for p in bundle.iterdir()) == sorted(BUNDLE_FILES)

        traces = read_csv_table(bundle, "traces.csv")
        assert len(traces) == 10
        assert traces[0] == {
            "t": "0.000000000",
            "agent": "1",
            "x": "0.000000000",
            "y": "0.000000000",
            "b": "1",
        }

        actions = read_csv_table(bundle, "actions.csv")
        assert actions[0]["t"] == "0.010000000"
        assert actions[0]["kind"] == "provide"

        summary = read_summary(bundle)
        assert summary["termination"] == "duration"
        assert summary["samples"] == 10
        assert summary["services"] == {"1": result.provisions}

        plans = (bundle / "plans.txt").read_text(encoding="utf-8")
        assert plans == "agent 1: (p@r_a)^w\n"

        assert load_scenario(bundle / "scenario.json") == single_agent

        first_message = json.loads(
            (bundle / "messages.jsonl").read_text(encoding="utf-8").splitlines()[0]
        )
        assert first_message == {
            "t": 0.0,
            "round": 1,
            "sender": 1,
            "kind": "ready",
            "to": "all",
        }

    def test_edge_columns(self, mutual_pair: Scenario, tmp_path: Path) -> None:
        result = run(mutual_pair, SimOptions(duration=0.01, dt=0.005))
        write_bundle(result, tmp_path)
        rows = read_csv_table(tmp_path, "edges.csv")
        assert list(rows[0]) == ["t", "d_1_2", "e_1_2"]
        assert rows[0]["d_1_2"] == "1.000000000"
        assert rows[0]["e_1_2"] == "1"

    def test_same_result_same_bytes(self, mutual_pair: Scenario, tmp_path: Path) -> None:
        options = SimOptions(duration=0.5, dt=0.005)
        write_bundle(run(mutual_pair, options), tmp_path / "a")
        write_bundle(run(mutual_pair, options), tmp_path / "b")
        for name in BUNDLE_FILES:
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


class TestReadCsvTable:
    """Tests for read_csv_table()."""

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(BundleError, match="missing edges.csv"):
            read_csv_table(tmp_path, "edges.csv")

    def test_short_row(self, tmp_path: Path) -> None:
        (tmp_path / "edges.csv").write_text("t,d_1_2,e_1_2\n0.0,1.0\n", encoding="utf-8")
        with pytest.raises(BundleError, match="line 2"):
            read_csv_table(tmp_path, "edges.csv")

    def test_long_row(self, tmp_path: Path) -> None:
        (tmp_path / "edges.csv").write_text("t,d_1_2\n0.0,1.0,9\n", encoding="utf-8")
        with pytest.raises(BundleError, match="wrong number of fields"):
            read_csv_table(tmp_path, "edges.csv")

    def test_empty_file(self, tmp_path: Path) -> None:
        (tmp_path / "edges.csv").write_text("", encoding="utf-8")
        with pytest.raises(BundleError, match="no header"):
            read_csv_table(tmp_path, "edges.csv")


class TestReadSummary:
    """Tests for read_summary()."""

    def test_not_json(self, tmp_path: Path) -> None:
        (tmp_path / "summary.json").write_text("[1, 2", encoding="utf-8")
        with pytest.raises(BundleError, match="Cannot read"):
            read_summary(tmp_path)

    def test_not_an_object(self, tmp_path: Path) -> None:
        (tmp_path / "summary.json").write_text("[1, 2]", encoding="utf-8")
        with pytest.raises(BundleError, match="not a JSON object"):
            read_summary(tmp_path)


class TestPairColumns:
    """Tests for pair_columns()."""

    def test_order(self) -> None:
        assert pair_columns(3) == [(1, 2), (1, 3), (2, 3)]
