"""Büchi automata from LTL: tableau translation, lasso acceptance and search."""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING

import networkx as nx

from swarm_ltl.ltl import (
    And,
    Atom,
    FalseBool,
    Formula,
    Letter,
    LassoWord,
    Next,
    Not,
    Or,
    Release,
    TrueBool,
    Until,
    subformulas,
    to_nnf,
    to_string,
)

if TYPE_CHECKING:
    from collections.abc import Iterable, Iterator, Sequence

logger = logging.getLogger(__name__)

MAX_CLOSURE = 64

Cube = tuple[frozenset[str], frozenset[str]]
_DegState = tuple[frozenset[Formula], int]


class FormulaTooLargeError(ValueError):
    """Raised when a formula's closure exceeds MAX_CLOSURE subformulas."""


def letter_key(letter: Letter) -> tuple[str, ...]:
    """Canonical ordering key for letters."""
    return tuple(sorted(letter))


@dataclass(frozen=True)
class Guard:
    """Transition label in disjunctive normal form.

    Each cube is a (positive, negative) pair of atom sets. No cubes means
    false; a single empty cube means true.
    """

    cubes: tuple[Cube, ...]

    @classmethod
    def true(cls) -> Guard:
        return cls(((frozenset(), frozenset()),))

    @classmethod
    def of(cls, cubes: Iterable[Cube]) -> Guard:
        unique = set(cubes)
        if (frozenset(), frozenset()) in unique:
            return cls.true()
        ordered = sorted(unique, key=lambda c: (sorted(c[0]), sorted(c[1])))
        return cls(tuple(ordered))

    @property
    def is_true(self) -> bool:
        return self.cubes == ((frozenset(), frozenset()),)

    def holds(self, letter: Letter) -> bool:
        return any(pos <= letter and not (neg & letter) for pos, neg in self.cubes)

    def __str__(self) -> str:
        if not self.cubes:
            return "false"
        if self.is_true:
            return "true"
        terms = []
        for pos, neg in self.cubes:
            literals = [*sorted(pos), *(f"!{a}" for a in sorted(neg))]
            terms.append(" & ".join(literals))
        return " | ".join(terms)


@dataclass(frozen=True)
class Transition:
    source: int
    guard: Guard
    target: int


@dataclass(frozen=True)
class BuchiAutomaton:
    """State-based Büchi automaton over set-letters."""

    states: tuple[int, ...]
    initial: int
    transitions: tuple[Transition, ...]
    accepting: frozenset[int]
    names: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        known = set(self.states)
        if self.initial not in known:
            msg = f"Initial state {self.initial} is not a state"
            raise ValueError(msg)
        if not self.accepting <= known:
            msg = "Accepting states must be a subset of states"
            raise ValueError(msg)
        for t in self.transitions:
            if t.source not in known or t.target not in known:
                msg = f"Transition {t.source}->{t.target} has an unknown endpoint"
                raise ValueError(msg)

    @cached_property
    def out_edges(self) -> dict[int, tuple[Transition, ...]]:
        edges: dict[int, list[Transition]] = {s: [] for s in self.states}
        for t in self.transitions:
            edges[t.source].append(t)
        return {s: tuple(sorted(ts, key=lambda t: t.target)) for s, ts in edges.items()}

    def successors(self, state: int, letter: Letter) -> list[int]:
        """Targets reachable from ``state`` on ``letter``, ascending."""
        return [t.target for t in self.out_edges[state] if t.guard.holds(letter)]

    def is_accepting_sink(self, state: int) -> bool:
        """Accepting state that loops to itself on every letter."""
        return state in self.accepting and any(
            t.target == state and t.guard.is_true for t in self.out_edges[state]
        )


@dataclass(frozen=True)
class Lasso:
    """Accepting run fragment: prefix path then a cycle back to its first state."""

    prefix: tuple[tuple[int, Letter], ...]
    cycle: tuple[tuple[int, Letter], ...]

    def __post_init__(self) -> None:
        if not self.cycle:
            msg = "Lasso cycle must be nonempty"
            raise ValueError(msg)

    def word(self) -> LassoWord:
        return LassoWord(
            prefix=tuple(letter for _, letter in self.prefix),
            cycle=tuple(letter for _, letter in self.cycle),
        )


# ---------------------------------------------------------------------------
# Tableau translation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Cover:
    pos: frozenset[str]
    neg: frozenset[str]
    successor: frozenset[Formula]
    pending: frozenset[Formula]


def _expand(
    todo: tuple[Formula, ...],
    pos: frozenset[str],
    neg: frozenset[str],
    successor: frozenset[Formula],
    pending: frozenset[Formula],
    done: frozenset[Formula],
) -> Iterator[_Cover]:
    while todo:
        head, todo = todo[0], todo[1:]
        if head in done:
            continue
        done = done | {head}
        if isinstance(head, TrueBool):
            continue
        if isinstance(head, FalseBool):
            return
        if isinstance(head, Atom):
            if head.label in neg:
                return
            pos = pos | {head.label}
        elif isinstance(head, Not):
            label = head.operand.label  # type: ignore[attr-defined]
            if label in pos:
                return
            neg = neg | {label}
        elif isinstance(head, And):
            todo = (head.left, head.right, *todo)
        elif isinstance(head, Next):
            successor = successor | {head.operand}
        elif isinstance(head, Or):
            yield from _expand((head.left, *todo), pos, neg, successor, pending, done)
            yield from _expand((head.right, *todo), pos, neg, successor, pending, done)
            return
        elif isinstance(head, Until):
            # fulfilled now, or hold left and postpone
            yield from _expand((head.right, *todo), pos, neg, successor, pending, done)
            yield from _expand(
                (head.left, *todo),
                pos,
                neg,
                successor | {head},
                pending | {head},
                done,
            )
            return
        elif isinstance(head, Release):
            yield from _expand(
                (head.left, head.right, *todo), pos, neg, successor, pending, done
            )
            yield from _expand(
                (head.right, *todo), pos, neg, successor | {head}, pending, done
            )
            return
        else:
            msg = f"Formula is not in negation normal form: {to_string(head)}"
            raise TypeError(msg)
    yield _Cover(pos, neg, successor, pending)


def _obligations(formulas: Iterable[Formula]) -> frozenset[Formula]:
    return frozenset(f for f in formulas if not isinstance(f, TrueBool))


def _set_key(obligations: frozenset[Formula]) -> tuple[str, ...]:
    return tuple(sorted(to_string(f) for f in obligations))


class _Tableau:
    """Generalized automaton over obligation sets, expanded lazily."""

    def __init__(self) -> None:
        self._covers: dict[frozenset[Formula], tuple[_Cover, ...]] = {}

    def covers(self, obligations: frozenset[Formula]) -> tuple[_Cover, ...]:
        cached = self._covers.get(obligations)
        if cached is None:
            todo = tuple(sorted(obligations, key=to_string))
            found = {
                c
                for c in _expand(
                    todo, frozenset(), frozenset(), frozenset(), frozenset(), frozenset()
                )
                if FalseBool() not in c.successor
            }
            cached = tuple(
                sorted(
                    found,
                    key=lambda c: (
                        sorted(c.pos),
                        sorted(c.neg),
                        _set_key(c.successor),
                        _set_key(c.pending),
                    ),
                )
            )
            self._covers[obligations] = cached
        return cached


def translate(formula: Formula) -> BuchiAutomaton:
    """Translate ``formula`` into a language-equivalent Büchi automaton.

    Tableau expansion of the NNF yields a generalized automaton with one
    transition-based acceptance set per Until; the sets are degeneralized
    with a level counter processed in canonical Until order.
    """
    nnf = to_nnf(formula)
    closure = set(subformulas(nnf))
    if len(closure) > MAX_CLOSURE:
        msg = (
            f"Formula closure has {len(closure)} subformulas, "
            f"more than the supported {MAX_CLOSURE}"
        )
        raise FormulaTooLargeError(msg)

    untils = sorted((f for f in closure if isinstance(f, Until)), key=to_string)
    levels = len(untils)
    tableau = _Tableau()

    start: _DegState = (_obligations([nnf]), 0)
    seen: set[_DegState] = {start}
    queue: deque[_DegState] = deque([start])
    edges: dict[tuple[_DegState, _DegState], list[Cube]] = {}

    while queue:
        state = queue.popleft()
        obligations, level = state
        for cover in tableau.covers(obligations):
            j = 0 if level == levels else level
            while j < levels and untils[j] not in cover.pending:
                j += 1
            target: _DegState = (_obligations(cover.successor), j)
            edges.setdefault((state, target), []).append((cover.pos, cover.neg))
            if target not in seen:
                seen.add(target)
                queue.append(target)

    ordered = sorted(seen, key=lambda s: (s != start, s[1], _set_key(s[0])))
    ids = {s: index for index, s in enumerate(ordered)}
    transitions = tuple(
        sorted(
            (
                Transition(ids[src], Guard.of(cubes), ids[dst])
                for (src, dst), cubes in edges.items()
            ),
            key=lambda t: (t.source, t.target),
        )
    )
    names = tuple(
        "{" + ", ".join(_set_key(s[0])) + f"}} #{s[1]}" for s in ordered
    )
    automaton = BuchiAutomaton(
        states=tuple(range(len(ordered))),
        initial=ids[start],
        transitions=transitions,
        accepting=frozenset(ids[s] for s in ordered if s[1] == levels),
        names=names,
    )
    logger.debug(
        "Translated %s: %d states, %d transitions, %d acceptance levels",
        to_string(formula),
        len(automaton.states),
        len(automaton.transitions),
        levels,
    )
    return automaton


# ---------------------------------------------------------------------------
# Acceptance and search
# ---------------------------------------------------------------------------


def accepts_lasso(automaton: BuchiAutomaton, word: LassoWord) -> bool:
    """True iff some run over ``word`` visits accepting states infinitely often."""
    letters = word.letters
    start = (automaton.initial, 0)
    product: nx.DiGraph = nx.DiGraph()
    product.add_node(start)
    queue: deque[tuple[int, int]] = deque([start])
    while queue:
        state, position = queue.popleft()
        nxt = word.successor(position)
        for target in automaton.successors(state, letters[position]):
            node = (target, nxt)
            if node not in product:
                queue.append(node)
            product.add_edge((state, position), node)

    for component in nx.strongly_connected_components(product):
        nontrivial = len(component) > 1 or any(
            product.has_edge(n, n) for n in component
        )
        if nontrivial and any(q in automaton.accepting for q, _ in component):
            return True
    return False


def _bfs_parents(
    automaton: BuchiAutomaton, source: int, letters: Sequence[Letter]
) -> tuple[dict[int, tuple[int, Letter]], dict[int, int]]:
    """Breadth-first parents and depths from ``source``.

    Ties go to the earlier-queued parent, then the smaller letter, then the
    smaller target id.
    """
    parents: dict[int, tuple[int, Letter]] = {}
    depth = {source: 0}
    queue: deque[int] = deque([source])
    while queue:
        state = queue.popleft()
        for letter in letters:
            for target in automaton.successors(state, letter):
                if target not in depth:
                    depth[target] = depth[state] + 1
                    parents[target] = (state, letter)
                    queue.append(target)
    return parents, depth


def _path_to(
    parents: dict[int, tuple[int, Letter]], source: int, target: int
) -> list[tuple[int, Letter]]:
    path: list[tuple[int, Letter]] = []
    node = target
    while node != source:
        parent, letter = parents[node]
        path.append((parent, letter))
        node = parent
    path.reverse()
    return path


def _shortest_cycle(
    automaton: BuchiAutomaton, state: int, letters: Sequence[Letter]
) -> list[tuple[int, Letter]] | None:
    """Shortest nonempty path from ``state`` back to itself."""
    parents: dict[int, tuple[int, Letter]] = {}
    queue: deque[int] = deque()
    visited: set[int] = set()
    for letter in letters:
        for target in automaton.successors(state, letter):
            if target == state:
                return [(state, letter)]
            if target not in visited:
                visited.add(target)
                parents[target] = (state, letter)
                queue.append(target)
    while queue:
        node = queue.popleft()
        for letter in letters:
            for target in automaton.successors(node, letter):
                if target == state:
                    return [*_path_to(parents, state, node), (node, letter)]
                if target not in visited:
                    visited.add(target)
                    parents[target] = (node, letter)
                    queue.append(target)
    return None


def find_accepting_lasso(
    automaton: BuchiAutomaton, letters: Iterable[Letter]
) -> Lasso | None:
    """Shortest-prefix, then shortest-cycle accepting lasso over ``letters``.

    Returns None when no accepted word uses only the given letters.
    """
    alphabet = sorted(set(letters), key=letter_key)
    if not alphabet:
        return None
    parents, depth = _bfs_parents(automaton, automaton.initial, alphabet)

    best: tuple[int, int, int] | None = None
    best_cycle: list[tuple[int, Letter]] = []
    for state in sorted(s for s in depth if s in automaton.accepting):
        cycle = _shortest_cycle(automaton, state, alphabet)
        if cycle is None:
            continue
        key = (depth[state], len(cycle), state)
        if best is None or key < best:
            best, best_cycle = key, cycle
    if best is None:
        return None
    target = best[2]
    prefix = _path_to(parents, automaton.initial, target)
    return Lasso(prefix=tuple(prefix), cycle=tuple(best_cycle))


def reaches_accepting_sink(automaton: BuchiAutomaton, letters: Sequence[Letter]) -> bool:
    """True iff some run reading the finite ``letters`` ends in an accepting sink.

    Every infinite continuation of such a word is accepted.
    """
    current = {automaton.initial}
    for letter in letters:
        current = {t for s in current for t in automaton.successors(s, letter)}
        if not current:
            return False
    return any(automaton.is_accepting_sink(s) for s in current)


def to_dot(automaton: BuchiAutomaton, name: str = "buchi") -> str:
    """Render the automaton as Graphviz DOT text."""
    lines = [f'digraph "{name}" {{', "  rankdir=LR;", '  init [shape=point, label=""];']
    for state in automaton.states:
        shape = "doublecircle" if state in automaton.accepting else "circle"
        tooltip = automaton.names[state] if automaton.names else ""
        tooltip = tooltip.replace('"', '\\"')
        lines.append(f'  q{state} [shape={shape}, tooltip="{tooltip}"];')
    lines.append(f"  init -> q{automaton.initial};")
    for t in automaton.transitions:
        label = str(t.guard).replace('"', '\\"')
        lines.append(f'  q{t.source} -> q{t.target} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
