"""Per-agent offline plan synthesis and verification."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

from swarm_ltl.buchi import accepts_lasso, find_accepting_lasso, translate
from swarm_ltl.ltl import LassoWord, Letter, eval_lasso, normalize_lasso, to_string
from swarm_ltl.world import service_letter

if TYPE_CHECKING:
    from swarm_ltl.ltl import Formula
    from swarm_ltl.world import AgentSpec

logger = logging.getLogger(__name__)


class SynthesisError(RuntimeError):
    """Raised when an agent's task has no plan over its feasible letters."""

    def __init__(self, message: str, agent_id: int) -> None:
        super().__init__(message)
        self.agent_id = agent_id


@dataclass(frozen=True)
class PlanStep:
    service: str
    region: str
    letter: Letter

    def __str__(self) -> str:
        return f"{self.service}@{self.region}"


@dataclass(frozen=True)
class ServicePlan:
    """Prefix-suffix service sequence with a cursor to the next step.

    After the last suffix step the cursor wraps to the first suffix step.
    """

    agent_id: int
    prefix: tuple[PlanStep, ...]
    suffix: tuple[PlanStep, ...]
    cursor: int = 0

    def __post_init__(self) -> None:
        if not self.suffix:
            msg = f"Agent {self.agent_id}: plan suffix must be nonempty"
            raise ValueError(msg)
        if not 0 <= self.cursor < len(self.prefix) + len(self.suffix):
            msg = f"Agent {self.agent_id}: plan cursor {self.cursor} out of range"
            raise ValueError(msg)

    @property
    def steps(self) -> tuple[PlanStep, ...]:
        return self.prefix + self.suffix

    @property
    def next_step(self) -> PlanStep:
        return self.steps[self.cursor]

    def advanced(self) -> ServicePlan:
        cursor = self.cursor + 1
        if cursor == len(self.steps):
            cursor = len(self.prefix)
        return replace(self, cursor=cursor)

    def unroll(self, count: int) -> list[PlanStep]:
        """The first ``count`` steps of prefix . suffix^omega."""
        steps = list(self.prefix[:count])
        while len(steps) < count:
            steps.extend(self.suffix[: count - len(steps)])
        return steps

    def word(self) -> LassoWord:
        return LassoWord(
            prefix=tuple(s.letter for s in self.prefix),
            cycle=tuple(s.letter for s in self.suffix),
        )


def _letter_map(agent: AgentSpec) -> dict[Letter, PlanStep]:
    return {
        service_letter(service, region): PlanStep(
            service=service.id,
            region=region.id,
            letter=service_letter(service, region),
        )
        for service, region in agent.feasible_pairs()
    }


def agent_letters(agent: AgentSpec) -> frozenset[Letter]:
    """One letter per feasible (service, region) pair of the agent."""
    return frozenset(_letter_map(agent))


def synthesize_plan(agent: AgentSpec, formula: Formula | None = None) -> ServicePlan:
    """Shortest accepted prefix-suffix plan of the agent's task."""
    task = agent.formula if formula is None else formula
    steps = _letter_map(agent)
    automaton = translate(task)
    lasso = find_accepting_lasso(automaton, steps)
    if lasso is None:
        msg = (
            f"Agent {agent.id}: task {to_string(task)} is unrealizable "
            f"with its {len(steps)} feasible service/region pair(s)"
        )
        raise SynthesisError(msg, agent.id)
    word = lasso.word()
    prefix, cycle = normalize_lasso(word.prefix, word.cycle)
    plan = ServicePlan(
        agent_id=agent.id,
        prefix=tuple(steps[letter] for letter in prefix),
        suffix=tuple(steps[letter] for letter in cycle),
    )
    logger.info("Agent %d plan: %s", agent.id, format_plan(plan))
    return plan


def verify_plan(plan: ServicePlan, formula: Formula) -> bool:
    """Both the direct semantics and the automaton accept the plan's word."""
    word = plan.word()
    return eval_lasso(formula, word) and accepts_lasso(translate(formula), word)


def format_plan(plan: ServicePlan) -> str:
    prefix = " ".join(str(s) for s in plan.prefix)
    suffix = " ".join(str(s) for s in plan.suffix)
    return f"{prefix} ({suffix})^w" if prefix else f"({suffix})^w"
