"""LTL formulas: syntax tree, parser, negation normal form and lasso semantics."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from collections.abc import Iterable, Iterator, Sequence

Letter = frozenset[str]

ATOM_PATTERN = r"^[A-Za-z_][A-Za-z0-9_]*$"

_KEYWORDS = {"true", "false", "X", "F", "G", "U"}


class FormulaSyntaxError(ValueError):
    """Raised when formula text does not match the grammar."""

    def __init__(self, message: str, position: int) -> None:
        super().__init__(f"{message} at position {position}")
        self.position = position


@dataclass(frozen=True)
class Formula:
    """Base class for LTL syntax tree nodes."""

    def __str__(self) -> str:
        return to_string(self)


@dataclass(frozen=True)
class TrueBool(Formula):
    pass


@dataclass(frozen=True)
class FalseBool(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    label: str


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True)
class Next(Formula):
    operand: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    operand: Formula


@dataclass(frozen=True)
class Always(Formula):
    operand: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Release(Formula):
    """Dual of Until. Produced by to_nnf only; the parser never emits it."""

    left: Formula
    right: Formula


@dataclass(frozen=True)
class LassoWord:
    """Ultimately periodic word ``prefix . cycle^omega`` over set-letters."""

    prefix: tuple[Letter, ...]
    cycle: tuple[Letter, ...]

    def __post_init__(self) -> None:
        if not self.cycle:
            msg = "LassoWord cycle must contain at least one letter"
            raise ValueError(msg)

    @classmethod
    def of(
        cls, prefix: Iterable[Iterable[str]], cycle: Iterable[Iterable[str]]
    ) -> LassoWord:
        """Build a word from plain iterables of atom labels."""
        return cls(
            prefix=tuple(frozenset(letter) for letter in prefix),
            cycle=tuple(frozenset(letter) for letter in cycle),
        )

    @cached_property
    def letters(self) -> tuple[Letter, ...]:
        return self.prefix + self.cycle

    def successor(self, position: int) -> int:
        """Index of the position after ``position`` in the folded word."""
        nxt = position + 1
        return nxt if nxt < len(self.letters) else len(self.prefix)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_]*)|(.))")


@dataclass(frozen=True)
class _Token:
    kind: str  # "atom", "op", "true", "false", "end"
    text: str
    position: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:  # only trailing whitespace left
            break
        if match.group(1) is not None:
            word = match.group(1)
            start = match.start(1)
            if word in ("true", "false"):
                tokens.append(_Token(word, word, start))
            elif word in _KEYWORDS:
                tokens.append(_Token("op", word, start))
            elif set(word) <= {"X", "F", "G"}:
                # "GF" and friends: a run of unary operators
                tokens.extend(
                    _Token("op", ch, start + offset) for offset, ch in enumerate(word)
                )
            else:
                tokens.append(_Token("atom", word, start))
        elif match.group(2) is not None:
            char = match.group(2)
            start = match.start(2)
            if char not in "!&|()":
                msg = f"Unexpected character {char!r}"
                raise FormulaSyntaxError(msg, start)
            tokens.append(_Token("op", char, start))
        pos = match.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    """Recursive descent over: or > and > until (right assoc) > unary > primary."""

    def __init__(self, tokens: list[_Token]) -> None:
        self._tokens = tokens
        self._index = 0

    def _peek(self) -> _Token:
        return self._tokens[self._index]

    def _advance(self) -> _Token:
        token = self._tokens[self._index]
        self._index += 1
        return token

    def _at_op(self, text: str) -> bool:
        token = self._peek()
        return token.kind == "op" and token.text == text

    def parse(self) -> Formula:
        formula = self._or()
        token = self._peek()
        if token.kind != "end":
            msg = f"Unexpected token {token.text!r}"
            raise FormulaSyntaxError(msg, token.position)
        return formula

    def _or(self) -> Formula:
        left = self._and()
        while self._at_op("|"):
            self._advance()
            left = Or(left, self._and())
        return left

    def _and(self) -> Formula:
        left = self._until()
        while self._at_op("&"):
            self._advance()
            left = And(left, self._until())
        return left

    def _until(self) -> Formula:
        left = self._unary()
        if self._at_op("U"):
            self._advance()
            return Until(left, self._until())
        return left

    def _unary(self) -> Formula:
        token = self._peek()
        if token.kind == "op" and token.text in ("!", "X", "F", "G"):
            self._advance()
            operand = self._unary()
            if token.text == "!":
                return Not(operand)
            if token.text == "X":
                return Next(operand)
            if token.text == "F":
                return Eventually(operand)
            return Always(operand)
        return self._primary()

    def _primary(self) -> Formula:
        token = self._advance()
        if token.kind == "atom":
            return Atom(token.text)
        if token.kind == "true":
            return TrueBool()
        if token.kind == "false":
            return FalseBool()
        if token.kind == "op" and token.text == "(":
            inner = self._or()
            closing = self._advance()
            if not (closing.kind == "op" and closing.text == ")"):
                msg = "Expected ')'"
                raise FormulaSyntaxError(msg, closing.position)
            return inner
        if token.kind == "end":
            msg = "Unexpected end of formula"
            raise FormulaSyntaxError(msg, token.position)
        msg = f"Unexpected token {token.text!r}"
        raise FormulaSyntaxError(msg, token.position)


def parse(text: str) -> Formula:
    """Parse formula text into its syntax tree.

    Grammar: atoms, ``true``, ``false``, ``!``, ``&``, ``|``, ``X``, ``U``,
    ``F``, ``G`` and parentheses. Unary operators bind tighter than binary
    ones; ``U`` is right-associative and binds tighter than ``&``, which
    binds tighter than ``|``. A word made only of X/F/G letters (``GF``) is
    read as that run of unary operators.
    """
    if not text.strip():
        msg = "Empty formula"
        raise FormulaSyntaxError(msg, 0)
    return _Parser(_tokenize(text)).parse()


# ---------------------------------------------------------------------------
# Printing and traversal
# ---------------------------------------------------------------------------


def to_string(formula: Formula) -> str:
    """Render a formula; ``parse(to_string(f)) == f`` when f has no Release."""
    if isinstance(formula, TrueBool):
        return "true"
    if isinstance(formula, FalseBool):
        return "false"
    if isinstance(formula, Atom):
        return formula.label
    if isinstance(formula, Not):
        return f"!{to_string(formula.operand)}"
    if isinstance(formula, Next):
        return f"X {to_string(formula.operand)}"
    if isinstance(formula, Eventually):
        return f"F {to_string(formula.operand)}"
    if isinstance(formula, Always):
        return f"G {to_string(formula.operand)}"
    if isinstance(formula, And):
        return f"({to_string(formula.left)} & {to_string(formula.right)})"
    if isinstance(formula, Or):
        return f"({to_string(formula.left)} | {to_string(formula.right)})"
    if isinstance(formula, Until):
        return f"({to_string(formula.left)} U {to_string(formula.right)})"
    if isinstance(formula, Release):
        return f"({to_string(formula.left)} R {to_string(formula.right)})"
    msg = f"Unsupported LTL construct: {formula!r}"
    raise TypeError(msg)


def children(formula: Formula) -> tuple[Formula, ...]:
    if isinstance(formula, (Not, Next, Eventually, Always)):
        return (formula.operand,)
    if isinstance(formula, (And, Or, Until, Release)):
        return (formula.left, formula.right)
    return ()


def subformulas(formula: Formula) -> Iterator[Formula]:
    """Yield every node of the tree, parents before children."""
    stack = [formula]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def atoms(formula: Formula) -> frozenset[str]:
    return frozenset(node.label for node in subformulas(formula) if isinstance(node, Atom))


# ---------------------------------------------------------------------------
# Negation normal form
# ---------------------------------------------------------------------------


def to_nnf(formula: Formula) -> Formula:
    """Push negations to the atoms and rewrite F/G via U and R."""
    if isinstance(formula, (TrueBool, FalseBool, Atom)):
        return formula
    if isinstance(formula, Not):
        return _negate(formula.operand)
    if isinstance(formula, And):
        return And(to_nnf(formula.left), to_nnf(formula.right))
    if isinstance(formula, Or):
        return Or(to_nnf(formula.left), to_nnf(formula.right))
    if isinstance(formula, Next):
        return Next(to_nnf(formula.operand))
    if isinstance(formula, Until):
        return Until(to_nnf(formula.left), to_nnf(formula.right))
    if isinstance(formula, Release):
        return Release(to_nnf(formula.left), to_nnf(formula.right))
    if isinstance(formula, Eventually):
        return Until(TrueBool(), to_nnf(formula.operand))
    if isinstance(formula, Always):
        return Release(FalseBool(), to_nnf(formula.operand))
    msg = f"Unsupported LTL construct: {formula!r}"
    raise TypeError(msg)


def _negate(formula: Formula) -> Formula:
    """NNF of ``!formula``."""
    if isinstance(formula, TrueBool):
        return FalseBool()
    if isinstance(formula, FalseBool):
        return TrueBool()
    if isinstance(formula, Atom):
        return Not(formula)
    if isinstance(formula, Not):
        return to_nnf(formula.operand)
    if isinstance(formula, And):
        return Or(_negate(formula.left), _negate(formula.right))
    if isinstance(formula, Or):
        return And(_negate(formula.left), _negate(formula.right))
    if isinstance(formula, Next):
        return Next(_negate(formula.operand))
    if isinstance(formula, Until):
        return Release(_negate(formula.left), _negate(formula.right))
    if isinstance(formula, Release):
        return Until(_negate(formula.left), _negate(formula.right))
    if isinstance(formula, Eventually):
        return Release(FalseBool(), _negate(formula.operand))
    if isinstance(formula, Always):
        return Until(TrueBool(), _negate(formula.operand))
    msg = f"Unsupported LTL construct: {formula!r}"
    raise TypeError(msg)


def is_nnf(formula: Formula) -> bool:
    for node in subformulas(formula):
        if isinstance(node, (Eventually, Always)):
            return False
        if isinstance(node, Not) and not isinstance(node.operand, Atom):
            return False
    return True


# ---------------------------------------------------------------------------
# Semantics over lasso words
# ---------------------------------------------------------------------------


def eval_lasso(formula: Formula, word: LassoWord) -> bool:
    """Truth of ``formula`` at the first position of ``word``.

    Every subformula is evaluated at each position of prefix + cycle, with
    the cycle folded back onto itself; Until/Eventually take least and
    Release/Always greatest fixed points around the fold.
    """
    return _Evaluator(word).values(formula)[0]


class _Evaluator:
    def __init__(self, word: LassoWord) -> None:
        self._letters = word.letters
        self._size = len(self._letters)
        self._succ = [word.successor(i) for i in range(self._size)]
        self._memo: dict[Formula, list[bool]] = {}

    def values(self, formula: Formula) -> list[bool]:
        cached = self._memo.get(formula)
        if cached is None:
            cached = self._compute(formula)
            self._memo[formula] = cached
        return cached

    def _compute(self, formula: Formula) -> list[bool]:
        n = self._size
        if isinstance(formula, TrueBool):
            return [True] * n
        if isinstance(formula, FalseBool):
            return [False] * n
        if isinstance(formula, Atom):
            return [formula.label in letter for letter in self._letters]
        if isinstance(formula, Not):
            return [not v for v in self.values(formula.operand)]
        if isinstance(formula, And):
            left, right = self.values(formula.left), self.values(formula.right)
            return [a and b for a, b in zip(left, right, strict=True)]
        if isinstance(formula, Or):
            left, right = self.values(formula.left), self.values(formula.right)
            return [a or b for a, b in zip(left, right, strict=True)]
        if isinstance(formula, Next):
            inner = self.values(formula.operand)
            return [inner[self._succ[i]] for i in range(n)]
        if isinstance(formula, Until):
            return self._fixpoint(
                self.values(formula.left), self.values(formula.right), least=True
            )
        if isinstance(formula, Release):
            return self._fixpoint(
                self.values(formula.left), self.values(formula.right), least=False
            )
        if isinstance(formula, Eventually):
            return self._fixpoint([True] * n, self.values(formula.operand), least=True)
        if isinstance(formula, Always):
            return self._fixpoint([False] * n, self.values(formula.operand), least=False)
        msg = f"Unsupported LTL construct: {formula!r}"
        raise TypeError(msg)

    def _fixpoint(self, left: list[bool], right: list[bool], *, least: bool) -> list[bool]:
        # least:    v[i] = right[i] or (left[i] and v[succ i])     (Until)
        # greatest: v[i] = right[i] and (left[i] or v[succ i])     (Release)
        vals = [not least] * self._size
        changed = True
        while changed:
            changed = False
            for i in reversed(range(self._size)):
                later = vals[self._succ[i]]
                new = (right[i] or (left[i] and later)) if least else (
                    right[i] and (left[i] or later)
                )
                if new != vals[i]:
                    vals[i] = new
                    changed = True
        return vals


def normalize_lasso(
    prefix: Sequence[Letter], cycle: Sequence[Letter]
) -> tuple[tuple[Letter, ...], tuple[Letter, ...]]:
    """Shortest prefix/cycle split describing the same infinite word."""
    pre = list(prefix)
    cyc = list(cycle)
    if not cyc:
        msg = "cycle must be nonempty"
        raise ValueError(msg)
    for period in range(1, len(cyc) + 1):
        if len(cyc) % period == 0 and cyc == cyc[:period] * (len(cyc) // period):
            cyc = cyc[:period]
            break
    while pre and pre[-1] == cyc[-1]:
        pre.pop()
        cyc = [cyc[-1], *cyc[:-1]]
    return tuple(pre), tuple(cyc)
