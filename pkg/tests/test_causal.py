"""Tests for ioncoupler.causal module."""

from __future__ import annotations

import json
import logging
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ioncoupler.causal import (
    EXTENDED_FORWARD_CHAIN,
    MISMATCHED_INDICES,
    UNDEFINED_IN_TABLE,
    Arrow,
    CausalRelation,
    NoRelation,
    Term,
    check_derivation,
    closure,
    compose,
    compose_with_rule,
    describe,
    flip,
    invert,
    parse_relation,
)
from ioncoupler.errors import CausalParseError, CausalStructureError, NonInvertibleError

DATA_DIR = Path(__file__).parent / "data"

F, B, BI = Arrow.FORWARD, Arrow.BACKWARD, Arrow.BIDIRECTIONAL
DEFINED_PAIRS = {(F, F), (F, B), (B, F), (B, B), (BI, F), (BI, B), (F, BI), (B, BI), (BI, BI)}
ONE_WAY_OR_UNKNOWN = [a for a in Arrow if a is not BI]


def rel(text: str) -> CausalRelation:
    return parse_relation(text)


labels = st.from_regex(r"[A-Za-z][A-Za-z0-9]{0,5}", fullmatch=True)
relations = st.builds(
    lambda left, arrow, right: CausalRelation(Term(left), arrow, Term(right)),
    labels,
    st.sampled_from(list(Arrow)),
    labels,
)


# --- parsing ---


class TestParseRelation:
    @pytest.mark.parametrize(
        ("text", "arrow"),
        [
            ("y ->= f", Arrow.FORWARD),
            ("y <-= f", Arrow.BACKWARD),
            ("y <->= f", Arrow.BIDIRECTIONAL),
            ("f ~corr= g", Arrow.CORRELATION),
            ("f ~join= g", Arrow.COMMON_EFFECT),
            ("f ?= g", Arrow.UNKNOWN),
            ("y →= f", Arrow.FORWARD),
            ("y ← f", Arrow.BACKWARD),
            ("y ↔= f", Arrow.BIDIRECTIONAL),
            ("f ⌒⌒= g", Arrow.CORRELATION),
            ("f >-<= g", Arrow.COMMON_EFFECT),
        ],
    )
    def test_arrows(self, text, arrow):
        assert rel(text).arrow is arrow

    def test_labels_kept_verbatim(self):
        relation = rel("  V_par ->= x-1  ")
        assert relation.left == Term("V_par")
        assert relation.right == Term("x-1")

    def test_no_spaces_needed(self):
        assert rel("a->=b") == rel("a ->= b")

    def test_subscript_index(self):
        term = rel("x_12 ->= y").left
        assert term.name == "x"
        assert term.index == "12"
        assert rel("x ->= y").left.index is None

    def test_str(self):
        assert str(rel("y →= f")) == "y ->= f"

    @pytest.mark.parametrize(
        ("text", "message", "offset"),
        [
            ("a b", "missing arrow", 3),
            ("a =>= b", "unknown arrow '=>='", 2),
            ("->= b", "empty left label", 0),
            ("a b ->= c", "unexpected text before arrow", 2),
            ("a ->=", "empty right label", 5),
            ("a ->= b c", "trailing garbage", 8),
            ("a ->= b ->= c", "trailing garbage", 8),
        ],
    )
    def test_errors(self, text, message, offset):
        with pytest.raises(CausalParseError) as info:
            parse_relation(text)
        assert str(info.value) == f"{message} at byte offset {offset}"
        assert info.value.offset == offset

    def test_offset_counts_bytes(self):
        with pytest.raises(CausalParseError) as info:
            parse_relation("α ->=")
        assert info.value.offset == 6

    def test_parse_error_is_validation_error(self):
        with pytest.raises(ValueError):
            parse_relation("")

    @given(relations)
    def test_printed_form_parses_back(self, relation):
        assert parse_relation(str(relation)) == relation


# --- single-relation rewrites ---


class TestRewrites:
    def test_describe(self):
        assert describe(rel("y ->= f")) == "y causes f; y is the independent variable"
        assert describe(rel("y <-= f")) == "f causes y; f is the independent variable"
        assert "common cause" in describe(rel("f ~corr= g"))
        assert "unknown" in describe(rel("f ?= g"))

    def test_flip(self):
        assert flip(rel("a ->= b")) == rel("b <-= a")
        assert flip(rel("a ~join= b")) == rel("b ~join= a")

    def test_invert_symmetric(self):
        assert invert(rel("a <->= b")) == rel("b <->= a")

    @pytest.mark.parametrize("text", ["a ->= b", "a <-= b"])
    def test_invert_one_way(self, text):
        with pytest.raises(NonInvertibleError, match="cannot be inverted"):
            invert(rel(text))

    @given(relations)
    def test_flip_preserves_meaning(self, relation):
        assert flip(flip(relation)) == relation
        assert flip(relation).canonical_key() == relation.canonical_key()


# --- composition ---


class TestCompose:
    @pytest.mark.parametrize(
        ("first", "second", "expected"),
        [
            ("y ->= f", "y ->= g", "f ~corr= g"),
            ("y ->= f", "y <-= g", "g ->= f"),
            ("y <-= f", "y ->= g", "g <-= f"),
            ("y <-= f", "y <-= g", "f ~join= g"),
            ("y <->= f", "y ->= g", "f ->= g"),
            ("y <->= f", "y <-= g", "g ->= f"),
            ("y ->= f", "y <->= g", "g ->= f"),
            ("y <-= f", "y <->= g", "f ->= g"),
            ("y <->= f", "y <->= g", "f <->= g"),
        ],
    )
    def test_table(self, first, second, expected):
        assert compose(rel(first), rel(second)) == rel(expected)

    def test_shared_variable_on_either_side(self):
        assert compose(rel("V ->= z"), rel("z ->= Q")) == rel("Q <-= V")

    def test_rule_name(self):
        _, rule = compose_with_rule(rel("y ->= f"), rel("y ->= g"))
        assert rule == "y causes both"

    def test_no_shared_variable(self):
        with pytest.raises(CausalStructureError, match="share no variable"):
            compose(rel("a ->= b"), rel("c ->= d"))

    def test_mismatched_indices(self):
        result = compose(rel("x_1 ->= f"), rel("x_2 ->= g"))
        assert isinstance(result, NoRelation)
        assert result.annotation == MISMATCHED_INDICES

    @pytest.mark.parametrize("first", ["y ~corr= f", "y ~join= f", "y ?= f"])
    def test_undefined_in_table(self, first):
        result = compose(rel(first), rel("y ->= g"))
        assert isinstance(result, NoRelation)
        assert result.annotation == UNDEFINED_IN_TABLE

    @pytest.mark.parametrize("second_arrow", list(Arrow))
    @pytest.mark.parametrize("first_arrow", list(Arrow))
    def test_every_arrow_pair(self, first_arrow, second_arrow):
        first = CausalRelation(Term("y"), first_arrow, Term("f"))
        second = CausalRelation(Term("y"), second_arrow, Term("g"))
        result = compose(first, second)
        if (first_arrow, second_arrow) in DEFINED_PAIRS:
            assert isinstance(result, CausalRelation)
            assert {result.left, result.right} == {Term("f"), Term("g")}
        else:
            assert isinstance(result, NoRelation)
            assert result.annotation == UNDEFINED_IN_TABLE

    @pytest.mark.parametrize("second_arrow", ONE_WAY_OR_UNKNOWN)
    @pytest.mark.parametrize("first_arrow", ONE_WAY_OR_UNKNOWN)
    @pytest.mark.parametrize(
        "orientation", [(False, False), (False, True), (True, False), (True, True)]
    )
    def test_no_bidirectional_without_bidirectional_input(
        self, first_arrow, second_arrow, orientation
    ):
        first = CausalRelation(Term("y"), first_arrow, Term("f"))
        second = CausalRelation(Term("y"), second_arrow, Term("g"))
        first = flip(first) if orientation[0] else first
        second = flip(second) if orientation[1] else second
        result = compose(first, second)
        assert not (isinstance(result, CausalRelation) and result.arrow is Arrow.BIDIRECTIONAL)


# --- closure ---


class TestClosure:
    def test_voltage_charge_chain(self):
        derivation = closure([rel("V_par ->= z"), rel("z ->= Q")])
        found = derivation.lookup(rel("V_par ->= Q"))
        assert found is not None
        assert found.rule == EXTENDED_FORWARD_CHAIN
        assert found.parents == (rel("V_par ->= z"), rel("z ->= Q"))
        assert derivation.lookup(rel("z ~corr= Q")) is not None
        assert derivation.lookup(rel("z ~join= V_par")) is not None
        assert derivation.lookup(rel("V_par <->= Q")) is None

    def test_premise_lookup(self):
        derivation = closure([rel("a ->= b")])
        found = derivation.lookup(rel("b <-= a"))
        assert found is not None
        assert found.rule == "premise"

    def test_no_self_relations(self):
        derivation = closure([rel("a <->= b"), rel("b <->= a")])
        assert all(d.relation.left != d.relation.right for d in derivation.conclusions)

    def test_disjoint_premises(self):
        assert closure([rel("a ->= b"), rel("c ->= d")]).conclusions == ()

    def test_reaches_fixpoint_by_default(self):
        chain = [rel("a ->= b"), rel("b ->= c"), rel("c ->= d"), rel("d ->= e")]
        derivation = closure(chain)
        assert derivation.saturated
        assert derivation.lookup(rel("a ->= e")) is not None

    def test_round_limit_is_reported(self, caplog):
        chain = [rel("a ->= b"), rel("b ->= c"), rel("c ->= d"), rel("d ->= e")]
        with caplog.at_level(logging.WARNING, logger="ioncoupler.causal"):
            derivation = closure(chain, max_rounds=1)
        assert not derivation.saturated
        assert "fixpoint" in caplog.text

    def test_voltage_charge_has_one_causal_conclusion(self):
        script = (DATA_DIR / "voltage_charge.causal").read_text("utf-8")
        premises = [
            rel(line.removeprefix("premise "))
            for line in script.splitlines()
            if line.startswith("premise ")
        ]
        arrows = [d.relation.arrow for d in closure(premises).conclusions]
        assert sum(a in (Arrow.FORWARD, Arrow.BACKWARD) for a in arrows) == 1
        assert Arrow.BIDIRECTIONAL not in arrows


# --- derivation scripts ---


class TestCheckDerivation:
    def test_voltage_charge_script(self):
        report = check_derivation((DATA_DIR / "voltage_charge.causal").read_text("utf-8"))
        assert [v.verdict for v in report.verdicts] == ["DERIVABLE", "NOT-DERIVABLE"]
        assert report.verdicts[0].rule == EXTENDED_FORWARD_CHAIN
        assert not report.all_derivable
        assert report.errors == ()

    def test_text_output(self):
        report = check_derivation("premise a ->= b\nclaim b <-= a\n")
        assert report.to_text() == "DERIVABLE: b <-= a (premise)\n"
        assert report.all_derivable

    def test_json_output(self):
        report = check_derivation("premise a ->= b\npremise b ->= c\nclaim a ->= c\n")
        doc = json.loads(report.to_json())
        assert doc["claims"][0]["verdict"] == "DERIVABLE"
        assert doc["claims"][0]["from"] == ["a ->= b", "b ->= c"]
        assert doc["premises"] == ["a ->= b", "b ->= c"]

    def test_errors_reported_per_line(self):
        script = (
            "premise a ->= b\npremis b ->= c\nclaim a =>= c\n"
            "  # only a comment\nclaim a ->= b\n"
        )
        report = check_derivation(script)
        assert [(e.line, e.offset) for e in report.errors] == [(2, 0), (3, 8)]
        assert "unknown arrow" in report.errors[1].message
        assert [v.verdict for v in report.verdicts] == ["DERIVABLE"]

    def test_empty_script(self):
        report = check_derivation("")
        assert report.verdicts == ()
        assert report.all_derivable


class TestClosureProperties:
    one_way = st.builds(
        lambda left, arrow, right: CausalRelation(Term(left), arrow, Term(right)),
        st.sampled_from(["a", "b", "c", "d"]),
        st.sampled_from([Arrow.FORWARD, Arrow.BACKWARD, Arrow.CORRELATION, Arrow.COMMON_EFFECT]),
        st.sampled_from(["a", "b", "c", "d"]),
    ).filter(lambda r: r.left != r.right)

    @given(st.lists(one_way, min_size=1, max_size=5))
    def test_no_bidirectional_conclusion_from_one_way_premises(self, premises):
        derivation = closure(premises)
        assert all(d.relation.arrow is not Arrow.BIDIRECTIONAL for d in derivation.conclusions)

    @given(st.lists(one_way, min_size=1, max_size=5))
    def test_every_conclusion_names_its_parents(self, premises):
        for derived in closure(premises).conclusions:
            assert len(derived.parents) == 2
            assert derived.rule
