"""Tests for swarm_ltl.ltl."""

from __future__ import annotations

import pytest

from swarm_ltl.ltl import (
    Always,
    And,
    Atom,
    Eventually,
    FalseBool,
    FormulaSyntaxError,
    LassoWord,
    Next,
    Not,
    Or,
    Release,
    TrueBool,
    Until,
    atoms,
    eval_lasso,
    is_nnf,
    normalize_lasso,
    parse,
    to_nnf,
    to_string,
)
from tests.sampling import sample_cases

a, b, c = Atom("a"), Atom("b"), Atom("c")


class TestParse:
    """Tests for parse()."""

    def test_always_eventually(self) -> None:
        assert parse("G F (a & r1)") == Always(Eventually(And(a, Atom("r1"))))

    def test_glued_unary_run(self) -> None:
        assert parse("GF a") == Always(Eventually(a))
        assert parse("XXa") == Atom("XXa")

    def test_precedence(self) -> None:
        assert parse("!a & b") == And(Not(a), b)
        assert parse("a | b & c") == Or(a, And(b, c))
        assert parse("a U b & c") == And(Until(a, b), c)
        assert parse("X a U b") == Until(Next(a), b)

    def test_until_is_right_associative(self) -> None:
        assert parse("a U b U c") == Until(a, Until(b, c))

    def test_and_is_left_associative(self) -> None:
        assert parse("a & b & c") == And(And(a, b), c)

    def test_constants(self) -> None:
        assert parse("true") == TrueBool()
        assert parse("!false") == Not(FalseBool())

    def test_empty_formula(self) -> None:
        with pytest.raises(FormulaSyntaxError) as excinfo:
            parse("   ")
        assert excinfo.value.position == 0

    def test_dangling_operator(self) -> None:
        with pytest.raises(FormulaSyntaxError, match="end of formula") as excinfo:
            parse("a &")
        assert excinfo.value.position == 3

    def test_unclosed_parenthesis(self) -> None:
        with pytest.raises(FormulaSyntaxError, match=r"Expected '\)'"):
            parse("(a & b")

    def test_bad_character(self) -> None:
        with pytest.raises(FormulaSyntaxError) as excinfo:
            parse("a $ b")
        assert excinfo.value.position == 2

    def test_trailing_token(self) -> None:
        with pytest.raises(FormulaSyntaxError, match="Unexpected token"):
            parse("a b")


class TestToString:
    """Tests for to_string()."""

    @pytest.mark.parametrize(
        "text",
        [
            "G F ((l_H & h_H & r_11) & X (u_H & r_12))",
            "F ((t_1 & r_21) & F (t_2 & s & r_22))",
            "!(a U b) | X !c",
            "a U b U c",
            "true & !false",
        ],
    )
    def test_reparses_to_same_tree(self, text: str) -> None:
        formula = parse(text)
        assert parse(to_string(formula)) == formula

    def test_release_is_printed(self) -> None:
        assert to_string(Release(a, b)) == "(a R b)"


class TestAtoms:
    """Tests for atoms()."""

    def test_collects_labels(self) -> None:
        assert atoms(parse("G (a | X b) & true")) == {"a", "b"}


class TestToNnf:
    """Tests for to_nnf()."""

    def test_negated_always(self) -> None:
        assert to_nnf(parse("!G a")) == Until(TrueBool(), Not(a))

    def test_double_negation(self) -> None:
        assert to_nnf(Not(Not(a))) == a

    def test_negated_until(self) -> None:
        assert to_nnf(parse("!(a U b)")) == Release(Not(a), Not(b))

    def test_eventually_and_always(self) -> None:
        assert to_nnf(parse("F a")) == Until(TrueBool(), a)
        assert to_nnf(parse("G a")) == Release(FalseBool(), a)

    def test_negated_constants(self) -> None:
        assert to_nnf(Not(TrueBool())) == FalseBool()
        assert to_nnf(Not(FalseBool())) == TrueBool()

    def test_result_is_nnf(self) -> None:
        assert is_nnf(to_nnf(parse("!(G (!a | b) | X !F c)")))
        assert not is_nnf(parse("!X a"))

    def test_preserves_semantics_on_random_cases(self) -> None:
        for formula, word in sample_cases(seed=7, count=1000, max_closure=40):
            nnf = to_nnf(formula)
            assert is_nnf(nnf)
            assert eval_lasso(nnf, word) == eval_lasso(formula, word), (
                f"{to_string(formula)} on {word}"
            )


class TestEvalLasso:
    """Tests for eval_lasso()."""

    def test_always_eventually_on_alternating_cycle(self) -> None:
        word = LassoWord.of([], [{"a"}, {"b"}])
        assert eval_lasso(parse("G F a"), word)
        assert eval_lasso(parse("G F b"), word)
        assert not eval_lasso(parse("G a"), word)

    def test_eventually_in_prefix_only(self) -> None:
        word = LassoWord.of([{"a"}], [set()])
        assert eval_lasso(parse("F a"), word)
        assert not eval_lasso(parse("G F a"), word)
        assert eval_lasso(parse("F G !a"), word)

    def test_next_wraps_into_cycle(self) -> None:
        word = LassoWord.of([{"a"}], [{"b"}])
        assert eval_lasso(parse("X b"), word)
        assert eval_lasso(parse("X X b"), word)
        assert not eval_lasso(parse("X a"), word)

    def test_until_and_release(self) -> None:
        word = LassoWord.of([{"a"}, {"a"}], [{"b"}])
        assert eval_lasso(parse("a U b"), word)
        assert not eval_lasso(parse("a U c"), word)
        assert eval_lasso(Release(FalseBool(), TrueBool()), word)
        assert eval_lasso(parse("!(a U c)"), word)

    def test_constants(self) -> None:
        word = LassoWord.of([], [set()])
        assert eval_lasso(TrueBool(), word)
        assert not eval_lasso(FalseBool(), word)

    def test_eventually_matches_any_letter(self) -> None:
        for _, word in sample_cases(seed=11, count=200):
            assert eval_lasso(parse("F a"), word) == any("a" in x for x in word.letters)
            cycle_all = all("a" in x for x in word.cycle)
            assert eval_lasso(parse("F G a"), word) == cycle_all

    def test_same_word_under_another_split(self) -> None:
        for formula, word in sample_cases(seed=31, count=300):
            expected = eval_lasso(formula, word)
            unrolled = LassoWord(word.prefix + word.cycle, word.cycle)
            rotated = LassoWord(
                word.prefix + word.cycle[:1], word.cycle[1:] + word.cycle[:1]
            )
            doubled = LassoWord(word.prefix, word.cycle + word.cycle)
            assert eval_lasso(formula, unrolled) == expected, (formula, word)
            assert eval_lasso(formula, rotated) == expected, (formula, word)
            assert eval_lasso(formula, doubled) == expected, (formula, word)

    def test_empty_cycle_rejected(self) -> None:
        with pytest.raises(ValueError, match="cycle"):
            LassoWord.of([{"a"}], [])


class TestNormalizeLasso:
    """Tests for normalize_lasso()."""

    def test_collapses_cycle_power(self) -> None:
        x, y = frozenset({"x"}), frozenset({"y"})
        assert normalize_lasso([], [x, y, x, y]) == ((), (x, y))

    def test_rotates_shared_tail_into_cycle(self) -> None:
        x, y = frozenset({"x"}), frozenset({"y"})
        assert normalize_lasso([x, y], [x, y]) == ((), (x, y))
        assert normalize_lasso([y, x], [y]) == ((y, x), (y,))

    def test_same_word(self) -> None:
        for formula, word in sample_cases(seed=3, count=200):
            prefix, cycle = normalize_lasso(word.prefix, word.cycle)
            folded = LassoWord(prefix=prefix, cycle=cycle)
            assert eval_lasso(formula, folded) == eval_lasso(formula, word)
            assert len(folded.letters) <= len(word.letters)
