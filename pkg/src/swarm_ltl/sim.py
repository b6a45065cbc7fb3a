"""Closed-loop engine: plan synthesis, election protocol and motion."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np

from swarm_ltl.buchi import reaches_accepting_sink, translate
from swarm_ltl.dynamics import SwarmState, initial_edges, lyapunov, step
from swarm_ltl.plan import SynthesisError, synthesize_plan, verify_plan
from swarm_ltl.protocol import (
    ActionEvent,
    Directive,
    Message,
    Outcome,
    ProtocolError,
    ProtocolState,
    Ready,
    execute_due,
    handle_message,
    initial_state,
    poll,
)
from swarm_ltl.world import region_contains

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from swarm_ltl.config import SimOptions
    from swarm_ltl.dynamics import EdgeSet
    from swarm_ltl.ltl import Formula
    from swarm_ltl.plan import ServicePlan
    from swarm_ltl.world import Scenario

logger = logging.getLogger(__name__)

_TIME_ATOL = 1e-9


@dataclass(frozen=True)
class ActionRecord:
    time: float
    kind: str
    service: str
    provider: int
    label: str
    region: str


@dataclass(frozen=True)
class ServiceRecord:
    time: float
    service: str
    region: str


@dataclass(frozen=True, eq=False)
class Trace:
    """One agent's trajectory samples, executed actions and provided services."""

    agent_id: int
    times: NDArray[np.float64]
    positions: NDArray[np.float64]
    actions: tuple[ActionRecord, ...] = ()
    services: tuple[ServiceRecord, ...] = ()

    @property
    def action_times(self) -> list[float]:
        return [a.time for a in self.actions]

    @property
    def service_times(self) -> list[float]:
        return [s.time for s in self.services]

    def position_at(self, time: float) -> NDArray[np.float64] | None:
        hits = np.flatnonzero(np.isclose(self.times, time, rtol=0.0, atol=_TIME_ATOL))
        if hits.size == 0:
            return None
        return np.asarray(self.positions[int(hits[0])], dtype=float)

    def action_at(self, time: float) -> ActionRecord | None:
        for action in self.actions:
            if abs(action.time - time) <= _TIME_ATOL:
                return action
        return None


@dataclass(frozen=True)
class LeaderInterval:
    start: float
    end: float
    leader: int
    goal_region: str
    service: str
    completed: bool


@dataclass(frozen=True)
class MessageRecord:
    time: float
    round: int
    sender: int
    kind: str
    recipient: int | None
    payload: dict[str, Any]

    def to_json(self) -> dict[str, Any]:
        return {
            "t": self.time,
            "round": self.round,
            "sender": self.sender,
            "kind": self.kind,
            "to": self.recipient if self.recipient is not None else "all",
            **self.payload,
        }


@dataclass(frozen=True, eq=False)
class SimResult:
    """Everything a run produced, sampled once per outer step."""

    scenario: Scenario
    options: SimOptions
    plans: dict[int, ServicePlan]
    traces: dict[int, Trace]
    times: NDArray[np.float64]
    positions: NDArray[np.float64]
    leader_flags: NDArray[np.float64]
    edges: tuple[EdgeSet, ...]
    lyapunov: NDArray[np.float64]
    leaders: tuple[LeaderInterval, ...]
    messages: tuple[MessageRecord, ...]
    termination: str
    end_time: float

    @property
    def provisions(self) -> int:
        return sum(len(t.services) for t in self.traces.values())


@dataclass(frozen=True)
class TraceValidation:
    violations: list[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class ProgressReport:
    steps: int
    prefix_consistent: bool
    first_mismatch: int | None
    finite_task_satisfied: bool
    cycles: float


class _Engine:
    """Mutable bookkeeping of one run."""

    def __init__(self, scenario: Scenario, options: SimOptions) -> None:
        self.scenario = scenario
        self.options = options
        self.ids = [a.id for a in scenario.agents]
        self.plans: dict[int, ServicePlan] = {}
        self.states: dict[int, ProtocolState] = {}
        positions = scenario.initial_positions()
        self.swarm = SwarmState(
            positions=positions,
            edges=initial_edges(positions, scenario.comm_radius),
        )
        self.times: list[float] = []
        self.samples: list[NDArray[np.float64]] = []
        self.flags: list[NDArray[np.float64]] = []
        self.edge_history: list[EdgeSet] = []
        self.v_history: list[float] = []
        self.actions: dict[int, list[ActionRecord]] = {i: [] for i in self.ids}
        self.services: dict[int, list[ServiceRecord]] = {i: [] for i in self.ids}
        self.messages: list[MessageRecord] = []
        self.leaders: list[LeaderInterval] = []
        self.current: LeaderInterval | None = None
        self.provisions = 0
        self.max_rounds = 8 * len(self.ids) + 8

    def synthesize(self) -> None:
        for agent in self.scenario.agents:
            plan = synthesize_plan(agent)
            if not verify_plan(plan, agent.formula):
                msg = f"Agent {agent.id}: synthesized plan fails verification"
                raise SynthesisError(msg, agent.id)
            self.plans[agent.id] = plan
            self.states[agent.id] = initial_state(agent.id, len(self.ids), plan)

    def _absorb(self, agent_id: int, outcome: Outcome, now: float) -> None:
        self.states[agent_id] = outcome.state
        for event in outcome.events:
            self._record(event, now)
        if outcome.directive is not None and outcome.directive.is_leader:
            self._install_leader(outcome.directive, now)

    def _record(self, event: ActionEvent, now: float) -> None:
        self.actions[event.agent].append(
            ActionRecord(
                time=event.time,
                kind=event.kind,
                service=event.service,
                provider=event.provider,
                label=event.label,
                region=event.region,
            )
        )
        if event.kind == "provide":
            self.services[event.agent].append(
                ServiceRecord(time=event.time, service=event.service, region=event.region)
            )
            self.provisions += 1
            if self.current is not None and self.current.leader == event.agent:
                self.current = LeaderInterval(
                    start=self.current.start,
                    end=now,
                    leader=self.current.leader,
                    goal_region=self.current.goal_region,
                    service=self.current.service,
                    completed=True,
                )

    def _install_leader(self, directive: Directive, now: float) -> None:
        self._close_interval(now)
        self.current = LeaderInterval(
            start=now,
            end=now,
            leader=directive.leader,
            goal_region=directive.region or "",
            service=directive.service or "",
            completed=False,
        )
        self.swarm = self.swarm.with_leader(directive.leader - 1, directive.goal)

    def _close_interval(self, now: float) -> None:
        if self.current is not None:
            c = self.current
            self.leaders.append(
                LeaderInterval(c.start, now, c.leader, c.goal_region, c.service, c.completed)
            )
            self.current = None

    def deliver(self, outbox: list[Message], now: float) -> None:
        """Reliable synchronous delivery in rounds, ascending sender id."""
        round_no = 0
        while outbox:
            round_no += 1
            if round_no > self.max_rounds:
                msg = f"messages still in flight after {self.max_rounds} rounds"
                raise ProtocolError(msg, outbox[0].sender, now)
            logger.debug("t=%.3f: round %d, %d message(s)", now, round_no, len(outbox))
            following: list[Message] = []
            for message in sorted(outbox, key=lambda m: m.sender):
                self.messages.append(
                    MessageRecord(
                        time=now,
                        round=round_no,
                        sender=message.sender,
                        kind=message.kind,
                        recipient=message.recipient,
                        payload=message.payload(),
                    )
                )
                recipients = (
                    self.ids if message.recipient is None else [message.recipient]
                )
                for agent_id in recipients:
                    if agent_id not in self.states:
                        msg = f"message {message.kind} addressed to unknown agent {agent_id}"
                        raise ProtocolError(msg, message.sender, now)
                    outcome = handle_message(
                        self.states[agent_id],
                        message,
                        now,
                        self.scenario,
                        tie_break=self.options.tie_break,
                    )
                    self._absorb(agent_id, outcome, now)
                    following.extend(outcome.outgoing)
            outbox = following

    def sample(self, now: float) -> None:
        self.times.append(now)
        self.samples.append(self.swarm.positions.copy())
        self.flags.append(self.swarm.leader_flags)
        self.edge_history.append(self.swarm.edges)
        self.v_history.append(lyapunov(self.swarm, self.scenario.comm_radius))

    def run(self) -> tuple[str, float]:
        dt = self.options.dt
        stop_after = self.options.stop_after_provisions
        for k in range(self.options.n_steps):
            now = k * dt
            outbox: list[Message] = []
            if k == 0:
                outbox.extend(Ready(sender=i) for i in self.ids)
            # the leader settles provide-or-defer before helpers act
            provided: set[tuple[int, str]] = set()
            for agent_id in self.ids:
                outcome = poll(
                    self.states[agent_id],
                    now,
                    self.swarm.positions,
                    self.scenario,
                    step=dt,
                    tau_reset=self.options.tau_reset,
                )
                self._absorb(agent_id, outcome, now)
                outbox.extend(outcome.outgoing)
                provided.update(
                    (e.provider, e.service) for e in outcome.events if e.kind == "provide"
                )
            for agent_id in self.ids:
                due = execute_due(self.states[agent_id], now, provided=provided)
                self._absorb(agent_id, due, now)
            self.deliver(outbox, now)
            self.sample(now)
            if stop_after is not None and self.provisions >= stop_after:
                self._close_interval(now)
                return "provisions", now
            self.swarm = step(
                self.swarm,
                dt,
                r=self.scenario.comm_radius,
                eps=self.scenario.hysteresis,
                now=now,
            )
        end = self.options.n_steps * dt
        self._close_interval(end)
        return "duration", end

    def result(self, termination: str, end_time: float) -> SimResult:
        n = len(self.ids)
        times = np.asarray(self.times, dtype=float)
        positions = (
            np.stack(self.samples) if self.samples else np.empty((0, n, 2), dtype=float)
        )
        flags = np.stack(self.flags) if self.flags else np.empty((0, n), dtype=float)
        traces = {
            agent_id: Trace(
                agent_id=agent_id,
                times=times,
                positions=positions[:, index, :],
                actions=tuple(self.actions[agent_id]),
                services=tuple(self.services[agent_id]),
            )
            for index, agent_id in enumerate(self.ids)
        }
        return SimResult(
            scenario=self.scenario,
            options=self.options,
            plans=dict(self.plans),
            traces=traces,
            times=times,
            positions=positions,
            leader_flags=flags,
            edges=tuple(self.edge_history),
            lyapunov=np.asarray(self.v_history, dtype=float),
            leaders=tuple(self.leaders),
            messages=tuple(self.messages),
            termination=termination,
            end_time=end_time,
        )


def run(scenario: Scenario, options: SimOptions) -> SimResult:
    """Synthesize every agent's plan, then run the closed loop.

    Steps are k*dt for k < round(duration/dt). Each step polls leaders,
    fires the cooperating actions of services provided at that step,
    delivers messages until quiescent, records a sample and integrates to
    the next step.
    """
    engine = _Engine(scenario, options)
    engine.synthesize()
    termination, end_time = engine.run()
    result = engine.result(termination, end_time)
    logger.info(
        "Run %s finished (%s) at t=%.3fs: %d leadership(s), %d provision(s)",
        scenario.name,
        termination,
        end_time,
        len(result.leaders),
        result.provisions,
    )
    return result


def _strictly_increasing(values: list[float]) -> bool:
    return all(a < b for a, b in zip(values, values[1:], strict=False))


def validate_trace(
    trace: Trace, scenario: Scenario, traces: dict[int, Trace]
) -> TraceValidation:
    """Check every provision of ``trace`` against location and cooperation rules.

    Every cooperating action must match a provision by its provider at the
    same time.
    """
    violations: list[str] = []
    agent = scenario.agent(trace.agent_id)
    who = f"agent {trace.agent_id}"

    if not _strictly_increasing(trace.action_times):
        violations.append(f"{who}: action times are not strictly increasing")
    if not _strictly_increasing(trace.service_times):
        violations.append(f"{who}: service times are not strictly increasing")

    for record in trace.services:
        when = f"{who} t={record.time:.3f} {record.service}@{record.region}"
        action = trace.action_at(record.time)
        if action is None:
            violations.append(f"{when}: service time is not an action time")
            continue
        try:
            service = agent.service(record.service)
            region = agent.region(record.region)
        except KeyError as exc:
            violations.append(f"{when}: {exc.args[0]}")
            continue
        if action.kind != "provide" or action.label != service.action:
            violations.append(f"{when}: provider did not execute {service.action}")
        if service.id not in region.services:
            violations.append(f"{when}: region does not offer the service")
        position = trace.position_at(record.time)
        if position is None or not region_contains(region, position):
            violations.append(f"{when}: provider outside the region")

        for coop in service.cooperation:
            partner = traces.get(coop.agent)
            helper = partner.action_at(record.time) if partner else None
            if helper is None or helper.label != coop.action:
                violations.append(
                    f"{when}: cooperator {coop.agent} did not execute {coop.action}"
                )
                continue
            spot = partner.position_at(record.time) if partner else None
            if spot is None or not region_contains(region, spot):
                violations.append(f"{when}: cooperator {coop.agent} outside the region")

    for action in trace.actions:
        if action.kind != "cooperate":
            continue
        partner = traces.get(action.provider)
        served = partner is not None and any(
            abs(s.time - action.time) <= _TIME_ATOL and s.service == action.service
            for s in partner.services
        )
        if not served:
            violations.append(
                f"{who} t={action.time:.3f} {action.label}: "
                f"agent {action.provider} did not provide {action.service}"
            )

    return TraceValidation(violations)


def check_progress(trace: Trace, plan: ServicePlan, formula: Formula) -> ProgressReport:
    """Compare the provided services with the plan's unrolling."""
    provided = [(s.service, s.region) for s in trace.services]
    expected = plan.unroll(len(provided))
    first_mismatch = next(
        (
            index
            for index, (got, want) in enumerate(zip(provided, expected, strict=True))
            if got != (want.service, want.region)
        ),
        None,
    )
    consistent = first_mismatch is None
    satisfied = False
    if consistent:
        letters = [s.letter for s in expected]
        satisfied = reaches_accepting_sink(translate(formula), letters)
    cycles = max(0, len(provided) - len(plan.prefix)) / len(plan.suffix)
    return ProgressReport(
        steps=len(provided),
        prefix_consistent=consistent,
        first_mismatch=first_mismatch,
        finite_task_satisfied=satisfied,
        cycles=cycles,
    )
