"""Urge-based leader election and the per-agent coordination state machine.

Each agent owns a ``ProtocolState``. The engine feeds it messages through
``handle_message``, lets the leader check its goal through ``poll`` and
fires due cooperating actions through ``execute_due``. All three are pure:
they return a new state plus outgoing messages, a motion directive and
action events.
"""

from __future__ import annotations

import logging
import sys
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Any, ClassVar, Literal

from swarm_ltl.world import region_contains

if sys.version_info >= (3, 11):
    from enum import StrEnum
else:  # pragma: no cover - Python 3.10 fallback matching enum.StrEnum
    from enum import Enum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__

if TYPE_CHECKING:
    from collections.abc import Collection, Iterable

    import numpy as np
    from numpy.typing import NDArray

    from swarm_ltl.config import TauReset, TieBreak
    from swarm_ltl.plan import PlanStep, ServicePlan
    from swarm_ltl.world import Region, Scenario

logger = logging.getLogger(__name__)

# scheduled times are k*dt floats; compare with slack
_TIME_SLACK = 1e-9


class ProtocolError(RuntimeError):
    """Raised on a message the state machine cannot accept."""

    def __init__(self, message: str, agent_id: int, time: float) -> None:
        super().__init__(f"Agent {agent_id} at t={time:.3f}s: {message}")
        self.agent_id = agent_id
        self.time = time


class Phase(StrEnum):
    WAIT_READY = "wait-ready"
    ELECTING = "electing"
    LEADING = "leading"
    FOLLOWING = "following"


@dataclass(frozen=True, order=True)
class Urge:
    """Time since the agent's last provision, with its id as tie-breaker."""

    elapsed: float
    agent_id: int

    def __post_init__(self) -> None:
        if self.elapsed < 0:
            msg = f"Urge elapsed time must be non-negative, got {self.elapsed}"
            raise ValueError(msg)


def _urge_key(urge: Urge, tie_break: TieBreak) -> tuple[float, int]:
    return (urge.elapsed, urge.agent_id if tie_break == "high-id" else -urge.agent_id)


def compare_urge(a: Urge, b: Urge, tie_break: TieBreak = "high-id") -> int:
    """Lexicographic comparison: -1, 0 or 1."""
    ka, kb = _urge_key(a, tie_break), _urge_key(b, tie_break)
    return (ka > kb) - (ka < kb)


def elect(
    urges: Iterable[Urge], tie_break: TieBreak = "high-id", *, now: float = 0.0
) -> int:
    """Id of the agent with the strongest urge; ``now`` stamps any ProtocolError."""
    collected = list(urges)
    if not collected:
        msg = "Cannot elect a leader from no urges"
        raise ValueError(msg)
    ids = [u.agent_id for u in collected]
    if len(set(ids)) != len(ids):
        duplicate = next(i for i in ids if ids.count(i) > 1)
        msg = f"duplicate urge from agent {duplicate}"
        raise ProtocolError(msg, duplicate, now)
    return max(collected, key=lambda u: _urge_key(u, tie_break)).agent_id


# ---------------------------------------------------------------------------
# Messages
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Message:
    """Broadcast to every agent, the sender included, unless ``recipient`` is set."""

    kind: ClassVar[str] = "message"

    sender: int

    @property
    def recipient(self) -> int | None:
        return None

    def payload(self) -> dict[str, Any]:
        return {}


@dataclass(frozen=True)
class Ready(Message):
    kind: ClassVar[str] = "ready"


@dataclass(frozen=True)
class InitElect(Message):
    kind: ClassVar[str] = "init_elect"

    time: float

    def payload(self) -> dict[str, Any]:
        return {"time": self.time}


@dataclass(frozen=True)
class Me(Message):
    kind: ClassVar[str] = "me"

    urge: Urge

    def payload(self) -> dict[str, Any]:
        return {"elapsed": self.urge.elapsed, "agent": self.urge.agent_id}


@dataclass(frozen=True)
class FinishElect(Message):
    kind: ClassVar[str] = "finish_elect"

    leader: int

    def payload(self) -> dict[str, Any]:
        return {"leader": self.leader}


@dataclass(frozen=True)
class ExecuteRequest(Message):
    """Directed at one cooperator: perform ``action`` at ``scheduled``."""

    kind: ClassVar[str] = "execute_request"

    target: int
    service: str
    action: str
    region: str
    scheduled: float

    @property
    def recipient(self) -> int | None:
        return self.target

    def payload(self) -> dict[str, Any]:
        return {
            "to": self.target,
            "service": self.service,
            "action": self.action,
            "region": self.region,
            "scheduled": self.scheduled,
        }


# ---------------------------------------------------------------------------
# State
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScheduledAction:
    time: float
    provider: int
    service: str
    action: str
    region: str


@dataclass(frozen=True)
class PendingProvision:
    step: PlanStep
    scheduled: float


@dataclass(frozen=True)
class ActionEvent:
    """An executed action: the provider's own (provide) or a helper's (cooperate)."""

    time: float
    agent: int
    kind: Literal["provide", "cooperate"]
    service: str
    provider: int
    label: str
    region: str


@dataclass(frozen=True)
class Directive:
    """Motion instruction issued when an election round completes."""

    agent_id: int
    leader: int
    goal: tuple[float, float] | None = None
    region: str | None = None
    service: str | None = None

    @property
    def is_leader(self) -> bool:
        return self.agent_id == self.leader


@dataclass(frozen=True)
class ProtocolState:
    agent_id: int
    n_agents: int
    plan: ServicePlan
    phase: Phase = Phase.WAIT_READY
    tau: float = 0.0
    leader: int | None = None
    ready: frozenset[int] = frozenset()
    urges: tuple[Urge, ...] = ()
    finished: frozenset[int] = frozenset()
    pending: PendingProvision | None = None
    scheduled: tuple[ScheduledAction, ...] = ()

    @property
    def b(self) -> int:
        return 1 if self.phase is Phase.LEADING else 0

    def urge(self, now: float) -> Urge:
        return Urge(elapsed=max(0.0, now - self.tau), agent_id=self.agent_id)


@dataclass(frozen=True)
class Outcome:
    state: ProtocolState
    outgoing: tuple[Message, ...] = ()
    directive: Directive | None = None
    events: tuple[ActionEvent, ...] = ()


def initial_state(agent_id: int, n_agents: int, plan: ServicePlan) -> ProtocolState:
    return ProtocolState(agent_id=agent_id, n_agents=n_agents, plan=plan)


def advance_service(
    state: ProtocolState, now: float, tau_reset: TauReset = "provision-time"
) -> ProtocolState:
    """Move to the next plan step and reset the urge clock."""
    tau = now if tau_reset == "provision-time" else 0.0
    return replace(state, plan=state.plan.advanced(), tau=tau)


def handle_message(
    state: ProtocolState,
    message: Message,
    now: float,
    scenario: Scenario,
    *,
    tie_break: TieBreak = "high-id",
) -> Outcome:
    """Apply one received message."""
    me = state.agent_id
    if not 1 <= message.sender <= state.n_agents:
        msg = f"message {message.kind} from unknown agent {message.sender}"
        raise ProtocolError(msg, me, now)

    if isinstance(message, Ready):
        ready = state.ready | {message.sender}
        state = replace(state, ready=ready)
        if (
            state.phase is Phase.WAIT_READY
            and len(ready) == state.n_agents
            and me == state.n_agents
        ):
            return Outcome(state, (InitElect(sender=me, time=now),))
        return Outcome(state)

    if isinstance(message, InitElect):
        if state.phase is Phase.ELECTING:
            msg = f"init_elect from agent {message.sender} during an election"
            raise ProtocolError(msg, me, now)
        state = replace(
            state,
            phase=Phase.ELECTING,
            leader=None,
            urges=(),
            finished=frozenset(),
            pending=None,
        )
        return Outcome(state, (Me(sender=me, urge=state.urge(now)),))

    if isinstance(message, Me):
        if state.phase is not Phase.ELECTING:
            msg = f"me from agent {message.sender} outside an election"
            raise ProtocolError(msg, me, now)
        if any(u.agent_id == message.urge.agent_id for u in state.urges):
            msg = f"second urge from agent {message.urge.agent_id}"
            raise ProtocolError(msg, me, now)
        urges = (*state.urges, message.urge)
        state = replace(state, urges=urges)
        if len(urges) < state.n_agents:
            return Outcome(state)
        leader = elect(urges, tie_break, now=now)
        state = replace(state, leader=leader)
        return Outcome(state, (FinishElect(sender=me, leader=leader),))

    if isinstance(message, FinishElect):
        if state.phase is not Phase.ELECTING:
            msg = f"finish_elect from agent {message.sender} outside an election"
            raise ProtocolError(msg, me, now)
        if state.leader is None or message.leader != state.leader:
            msg = (
                f"agent {message.sender} elected {message.leader}, "
                f"this agent elected {state.leader}"
            )
            raise ProtocolError(msg, me, now)
        finished = state.finished | {message.sender}
        state = replace(state, finished=finished)
        if len(finished) < state.n_agents:
            return Outcome(state)
        return _finish_election(state, now, scenario)

    if isinstance(message, ExecuteRequest):
        if message.target != me:
            return Outcome(state)
        action = ScheduledAction(
            time=message.scheduled,
            provider=message.sender,
            service=message.service,
            action=message.action,
            region=message.region,
        )
        return Outcome(replace(state, scheduled=(*state.scheduled, action)))

    msg = f"unsupported message {message!r}"
    raise ProtocolError(msg, me, now)


def _finish_election(state: ProtocolState, now: float, scenario: Scenario) -> Outcome:
    leader = state.leader
    if leader is None:
        msg = "election finished without a leader"
        raise ProtocolError(msg, state.agent_id, now)
    if leader != state.agent_id:
        state = replace(state, phase=Phase.FOLLOWING)
        return Outcome(state, directive=Directive(agent_id=state.agent_id, leader=leader))

    step = state.plan.next_step
    region = scenario.agent(state.agent_id).region(step.region)
    logger.info(
        "t=%.3f: agent %d elected leader, goal %s for service %s",
        now,
        leader,
        region.id,
        step.service,
    )
    state = replace(state, phase=Phase.LEADING)
    directive = Directive(
        agent_id=state.agent_id,
        leader=leader,
        goal=region.center,
        region=region.id,
        service=step.service,
    )
    return Outcome(state, directive=directive)


def _participants_inside(
    participants: Iterable[int], region: Region, positions: NDArray[np.float64]
) -> bool:
    return all(region_contains(region, positions[p - 1]) for p in participants)


def poll(
    state: ProtocolState,
    now: float,
    positions: NDArray[np.float64],
    scenario: Scenario,
    *,
    step: float,
    tau_reset: TauReset = "provision-time",
) -> Outcome:
    """Leader-side progress check, run once per engine step.

    Once the leader and the service's cooperators are inside the goal
    region, execute requests go out for the next step. At that step the
    leader re-checks, provides the service and starts a new election.
    """
    if state.phase is not Phase.LEADING:
        return Outcome(state)

    me = state.agent_id
    agent = scenario.agent(me)
    plan_step = state.plan.next_step
    service = agent.service(plan_step.service)
    region = agent.region(plan_step.region)
    participants = (me, *service.cooperators)

    if state.pending is None:
        if not _participants_inside(participants, region, positions):
            return Outcome(state)
        scheduled = now + step
        requests = tuple(
            ExecuteRequest(
                sender=me,
                target=c.agent,
                service=service.id,
                action=c.action,
                region=region.id,
                scheduled=scheduled,
            )
            for c in service.cooperation
        )
        pending = PendingProvision(step=plan_step, scheduled=scheduled)
        return Outcome(replace(state, pending=pending), requests)

    if now + _TIME_SLACK < state.pending.scheduled:
        return Outcome(state)

    if not _participants_inside(participants, region, positions):
        logger.warning(
            "t=%.3f: agent %d deferred %s at %s, a participant left the region",
            now,
            me,
            service.id,
            region.id,
        )
        return Outcome(replace(state, pending=None))

    event = ActionEvent(
        time=now,
        agent=me,
        kind="provide",
        service=service.id,
        provider=me,
        label=service.action,
        region=region.id,
    )
    logger.info("t=%.3f: agent %d provided %s at %s", now, me, service.id, region.id)
    state = advance_service(replace(state, pending=None), now, tau_reset)
    return Outcome(state, (InitElect(sender=me, time=now),), events=(event,))


def execute_due(
    state: ProtocolState, now: float, *, provided: Collection[tuple[int, str]]
) -> Outcome:
    """Fire cooperating actions whose scheduled time has come.

    ``provided`` holds the (provider, service) pairs provided at ``now``.
    A due action whose provider deferred is dropped without being executed.
    """
    due = [a for a in state.scheduled if a.time <= now + _TIME_SLACK]
    if not due:
        return Outcome(state)
    waiting = tuple(a for a in state.scheduled if a.time > now + _TIME_SLACK)
    fired = [a for a in due if (a.provider, a.service) in provided]
    for action in due:
        if (action.provider, action.service) not in provided:
            logger.info(
                "t=%.3f: agent %d dropped %s, agent %d deferred %s",
                now,
                state.agent_id,
                action.action,
                action.provider,
                action.service,
            )
    events = tuple(
        ActionEvent(
            time=now,
            agent=state.agent_id,
            kind="cooperate",
            service=a.service,
            provider=a.provider,
            label=a.action,
            region=a.region,
        )
        for a in fired
    )
    return Outcome(replace(state, scheduled=waiting), events=events)
