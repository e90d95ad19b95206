"""Proof-tree construction and report rendering."""

from __future__ import annotations

import json

import pytest

from orgrisk.engine import ASSERTED, fact, infer
from orgrisk.explain import (
    FactNotFoundError,
    explain,
    render_proof_tree,
    render_report,
    report_document,
)
from orgrisk.model import (
    Activity,
    Agent,
    Characteristic,
    CharacteristicKind,
    Evaluation,
    Form,
    Incentive,
    IncentiveKind,
    Operator,
    OrgModel,
    Relation,
    RelationKind,
    State,
    Value,
)

from genmodels import random_model


class TestExplain:
    def test_cooperation_risk_proof_shape(self, flood_result):
        tree = explain(flood_result, fact("CooperationRisk", "pr", "wim"))
        assert tree.rule == "cooperation-risk-shirking"
        assert [c.root.predicate for c in tree.children] == \
            ["EpistemicallyDependentOn", "ShirkRisk"]
        epistemic = tree.children[0]
        assert epistemic.root == fact("EpistemicallyDependentOn", "wim", "pr", "e_wim")
        premise_predicates = {c.root.predicate for c in epistemic.children}
        assert "PredictiveNeed" in premise_predicates
        assert "HasIncentive" in premise_predicates
        assert "SubjectOf" in premise_predicates
        predictive = next(c for c in epistemic.children
                          if c.root.predicate == "PredictiveNeed")
        assert fact("DependsOn", "a_sewer", "a_review") in \
            {c.root for c in predictive.children}
        shirk = tree.children[1]
        assert shirk.root == fact("ShirkRisk", "pr", "a_review")
        assert {c.rule for c in shirk.children} == {ASSERTED}

    def test_asserted_fact_is_a_single_node(self, flood_result):
        tree = explain(flood_result, fact("DependsOn", "a_sewer", "a_review"))
        assert tree.rule == ASSERTED
        assert tree.children == ()
        assert tree.depth() == 0

    def test_every_leaf_is_asserted(self, flood_result):
        def leaves(tree):
            if not tree.children:
                yield tree
            for child in tree.children:
                yield from leaves(child)

        for f in flood_result.all_facts():
            for leaf in leaves(explain(flood_result, f)):
                assert leaf.rule == ASSERTED

    def test_minimal_depth_proof_is_chosen(self):
        # RewardDependentOn is derivable via outcome dependence (depth 2) and
        # via epistemic dependence (depth 3); explain must pick the former.
        model = OrgModel.build(
            agents=[Agent("a1"), Agent("a2"), Agent("boss")],
            characteristics=[Characteristic("sc", "c", CharacteristicKind.STATE)],
            states=[State("s", Form.ATOMIC, "sc", Operator.GE, Value.number(1))],
            activities=[Activity("w1", performers=("a1",)),
                        Activity("w2", performers=("a2",))],
            evaluations=[Evaluation("e", evaluators=("boss",),
                                    evaluatees=("a1", "a2"), target="s",
                                    subjects=("w1",), incentives=("r",))],
            incentives=[Incentive("r", IncentiveKind.REWARD, "e", ("a1", "a2"))],
            relations=[Relation.make(RelationKind.DEPENDS_ON, ("w1", "w2"))],
        )
        result = infer(model)
        reward = fact("RewardDependentOn", "a1", "a2", "e")
        rules = {d.rule for d in result.derivations_for(reward)}
        assert rules == {"reward-dependence-outcome", "reward-dependence-epistemic"}
        tree = explain(result, reward)
        assert tree.rule == "reward-dependence-outcome"
        assert tree.depth() == 2

    def test_unknown_fact(self, flood_result):
        with pytest.raises(FactNotFoundError):
            explain(flood_result, fact("ShirkRisk", "city", "a_review"))

    def test_text_rendering_is_indented(self, flood_result):
        text = render_proof_tree(explain(flood_result,
                                         fact("ShirkRisk", "pr", "a_review")))
        lines = text.splitlines()
        assert lines[0].startswith("ShirkRisk(pr, a_review)")
        assert lines[1].startswith("  Performs(pr, a_review)")


class TestReport:
    def test_flood_counts(self, flood_result):
        counts = report_document(flood_result)["counts"]
        assert counts == {
            "coordinationNeeds": 2,
            "coordinationRisks": 2,
            "freeRidingRisks": 0,
            "shirkRisks": 2,
            "subGoalOptimizationRisks": 1,
            "cooperationRisks": 2,
            "strategicSubstitutes": 0,
        }

    def test_counts_match_fact_store(self, flood_result):
        doc = report_document(flood_result)
        for key, predicate in (("coordinationNeeds", "CoordinationNeed"),
                               ("cooperationRisks", "CooperationRisk"),
                               ("shirkRisks", "ShirkRisk")):
            assert doc["counts"][key] == len(flood_result.facts_for(predicate))

    def test_covers_every_risk_fact_exactly_once(self, small_corpus):
        from orgrisk.engine import S2, S3
        for model in small_corpus[:20]:
            result = infer(model)
            doc = report_document(result)
            reported = []
            for key in ("coordinationRisks", "freeRidingRisks", "shirkRisks",
                        "subGoalOptimizationRisks", "cooperationRisks"):
                reported += [tuple([e["fact"]["predicate"]] + e["fact"]["args"])
                             for e in doc["sections"][key]]
            expected = sorted((f.predicate,) + f.args
                              for f in sorted(result.strata[S2] | result.strata[S3]))
            assert sorted(reported) == expected

    def test_cooperation_clauses_are_named(self, flood_result):
        entries = report_document(flood_result)["sections"]["cooperationRisks"]
        clauses = {tuple(e["fact"]["args"]): e["clauses"] for e in entries}
        assert clauses[("pr", "wim")] == ["shirking"]
        assert clauses[("rm", "wim")] == ["sub-goal optimization"]

    def test_empty_model_has_empty_sections(self):
        doc = report_document(infer(OrgModel.build()))
        assert all(entries == [] for entries in doc["sections"].values())

    def test_structured_report_round_trips(self, flood_result):
        text = render_report(flood_result, "structured")
        assert json.loads(text) == report_document(flood_result)

    def test_rendering_is_deterministic(self, flood_result):
        assert render_report(flood_result, "text") == \
            render_report(flood_result, "text")
        assert render_report(flood_result, "structured") == \
            render_report(flood_result, "structured")

    def test_text_report_names_the_findings(self, flood_result):
        text = render_report(flood_result, "text")
        assert "SubGoalOptimizationRisk(rm, wim, s_flood_likelihood)" in text
        assert "ShirkRisk(pr, a_review)" in text
        assert "CoordinationRisk(rm, wim)" in text

    def test_unknown_format(self, flood_result):
        with pytest.raises(ValueError):
            render_report(flood_result, "yaml")
