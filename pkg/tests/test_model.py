"""Core model helpers and structural validation."""

from __future__ import annotations

import random

import pytest

from orgrisk.model import (
    Activity,
    Agent,
    AgentKind,
    Characteristic,
    CharacteristicKind,
    Evaluation,
    Form,
    Goal,
    Incentive,
    IncentiveKind,
    Operator,
    OrgModel,
    Relation,
    RelationKind,
    Severity,
    State,
    Task,
    UnknownEntityError,
    Value,
    contributors_to,
    evaluatee_individuals,
    is_sole_contributor,
    members_of,
    validate_model,
)

from genmodels import model_lists, random_model


def _agents(*specs):
    return [Agent(i, k) for i, k in specs]


def nested_collectives() -> OrgModel:
    """C contains a and D; D contains b."""
    return OrgModel.build(
        agents=_agents(("a", AgentKind.INDIVIDUAL), ("b", AgentKind.INDIVIDUAL),
                       ("C", AgentKind.COLLECTIVE), ("D", AgentKind.COLLECTIVE)),
        relations=[
            Relation.make(RelationKind.MEMBER_OF, ("a", "C")),
            Relation.make(RelationKind.MEMBER_OF, ("D", "C")),
            Relation.make(RelationKind.MEMBER_OF, ("b", "D")),
        ],
    )


class TestMembersOf:
    def test_transitive_closure(self):
        model = nested_collectives()
        assert members_of(model, "C") == {"a", "D", "b"}

    def test_individual_has_no_members(self):
        model = nested_collectives()
        assert members_of(model, "a") == frozenset()

    def test_flood_units_are_atomic(self, flood_model):
        for unit in ("rm", "wim", "pr"):
            assert members_of(flood_model, unit) == frozenset()

    def test_unknown_entity(self):
        with pytest.raises(UnknownEntityError):
            members_of(nested_collectives(), "ghost")

    def test_monotone_under_new_edges(self, small_corpus):
        for model in small_corpus:
            collectives = [a for a in model.agents.values()
                           if a.kind is AgentKind.COLLECTIVE]
            others = [a for a in model.agents.values() if a.kind is AgentKind.INDIVIDUAL]
            if not collectives or not others:
                continue
            before = {c.id: members_of(model, c.id) for c in collectives}
            lists = model_lists(model)
            lists["relations"].append(Relation.make(
                RelationKind.MEMBER_OF, (others[0].id, collectives[-1].id)))
            extended = OrgModel.build(**lists)
            for c in collectives:
                assert before[c.id] <= members_of(extended, c.id)


def joint_state_model() -> OrgModel:
    """State st is caused by activities of x and of y."""
    return OrgModel.build(
        agents=_agents(("x", AgentKind.INDIVIDUAL), ("y", AgentKind.INDIVIDUAL)),
        characteristics=[Characteristic("sc", "level", CharacteristicKind.STATE)],
        states=[State("st", Form.ATOMIC, "sc", Operator.GE, Value.number(1)),
                State("lonely", Form.ATOMIC, "sc", Operator.GE, Value.number(2))],
        activities=[Activity("wx", performers=("x",), causes=("st",)),
                    Activity("wy", performers=("y",), causes=("st",))],
    )


class TestContributors:
    def test_activity_contributors_are_performers(self, flood_model):
        assert contributors_to(flood_model, "a_sewer") == {"wim"}

    def test_state_without_causes(self):
        assert contributors_to(joint_state_model(), "lonely") == frozenset()

    def test_state_unions_causing_performers(self):
        assert contributors_to(joint_state_model(), "st") == {"x", "y"}

    def test_complex_state_inherits_child_contributors(self):
        model = OrgModel.build(
            agents=_agents(("x", AgentKind.INDIVIDUAL)),
            characteristics=[Characteristic("sc", "level", CharacteristicKind.STATE)],
            states=[State("leaf", Form.ATOMIC, "sc", Operator.EQ, Value.of_bool(True)),
                    State("leaf2", Form.ATOMIC, "sc", Operator.EQ, Value.of_bool(False)),
                    State("both", Form.CONJUNCTION, children=("leaf", "leaf2"))],
            activities=[Activity("w", performers=("x",), causes=("leaf",))],
        )
        assert contributors_to(model, "both") == {"x"}

    def test_unknown_subject(self):
        with pytest.raises(UnknownEntityError):
            contributors_to(joint_state_model(), "nope")


class TestSoleContributor:
    def test_flood_review_is_sole(self, flood_model):
        assert is_sole_contributor(flood_model, "pr", "a_review")

    def test_shared_subject_is_not_sole(self):
        assert not is_sole_contributor(joint_state_model(), "x", "st")

    def test_non_contributor_is_not_sole(self):
        assert not is_sole_contributor(joint_state_model(), "x", "lonely")

    def test_implies_singleton_contributors(self, small_corpus):
        for model in small_corpus:
            subjects = list(model.activities) + list(model.states)
            for agent in model.agents:
                for subject in subjects:
                    if is_sole_contributor(model, agent, subject):
                        assert contributors_to(model, subject) == {agent}


def collective_evaluation() -> OrgModel:
    model = nested_collectives()
    lists = model_lists(model)
    lists["characteristics"] = [Characteristic("sc", "x", CharacteristicKind.STATE)]
    lists["states"] = [State("s", Form.ATOMIC, "sc", Operator.EQ, Value.of_bool(True))]
    lists["evaluations"] = [Evaluation("e", evaluators=("a",), evaluatees=("C",),
                                       target="s")]
    return OrgModel.build(**lists)


class TestEvaluateeIndividuals:
    def test_direct_individuals(self):
        model = joint_state_model()
        lists = model_lists(model)
        lists["evaluations"] = [Evaluation("e", evaluators=("x",),
                                           evaluatees=("x", "y"), target="st")]
        extended = OrgModel.build(**lists)
        assert evaluatee_individuals(extended, "e") == {"x", "y"}

    def test_collective_expands_to_members(self):
        assert evaluatee_individuals(collective_evaluation(), "e") == {"C", "a", "D", "b"}

    def test_flood_city_evaluation(self, flood_model):
        assert evaluatee_individuals(flood_model, "e_rm") == {"rm"}


class TestValidateModel:
    def test_flood_scenario_is_clean(self, flood_model):
        assert validate_model(flood_model) == []

    def test_recipient_must_be_evaluatee(self):
        model = OrgModel.build(
            agents=_agents(("x", AgentKind.INDIVIDUAL), ("y", AgentKind.INDIVIDUAL)),
            characteristics=[Characteristic("sc", "x", CharacteristicKind.STATE)],
            states=[State("s", Form.ATOMIC, "sc", Operator.EQ, Value.of_bool(True))],
            evaluations=[Evaluation("e1", evaluators=("x",), evaluatees=("y",),
                                    target="s", incentives=("r1",))],
            incentives=[Incentive("r1", IncentiveKind.REWARD, "e1", ("x",))],
        )
        codes = [v.code for v in validate_model(model)
                 if v.severity is Severity.ERROR]
        assert codes == ["INCENTIVE_RECIPIENT_NOT_EVALUATEE"]

    def test_membership_cycle(self):
        model = OrgModel.build(
            agents=_agents(("C", AgentKind.COLLECTIVE), ("D", AgentKind.COLLECTIVE)),
            relations=[Relation.make(RelationKind.MEMBER_OF, ("C", "D")),
                       Relation.make(RelationKind.MEMBER_OF, ("D", "C"))],
        )
        assert any(v.code == "MEMBERSHIP_CYCLE" and v.severity is Severity.ERROR
                   for v in validate_model(model))

    def test_member_of_individual_rejected(self):
        model = OrgModel.build(
            agents=_agents(("a", AgentKind.INDIVIDUAL), ("b", AgentKind.INDIVIDUAL)),
            relations=[Relation.make(RelationKind.MEMBER_OF, ("a", "b"))],
        )
        assert any(v.code == "MEMBER_OF_NON_COLLECTIVE" for v in validate_model(model))

    def test_unknown_reference(self):
        model = OrgModel.build(goals=[Goal("g", "missing")])
        violations = validate_model(model)
        assert [v.code for v in violations] == ["UNKNOWN_REFERENCE"]

    def test_depends_on_mixed_kinds(self):
        model = OrgModel.build(
            agents=_agents(("x", AgentKind.INDIVIDUAL)),
            characteristics=[Characteristic("sc", "x", CharacteristicKind.STATE)],
            states=[State("s", Form.ATOMIC, "sc", Operator.EQ, Value.of_bool(True))],
            goals=[Goal("g", "s")],
            tasks=[Task("t", "x", "g")],
            activities=[Activity("w", performers=("x",))],
            relations=[Relation.make(RelationKind.DEPENDS_ON, ("t", "w"))],
        )
        assert any(v.code == "DEPENDS_ON_KIND_MISMATCH" for v in validate_model(model))

    def test_state_form_violations(self):
        model = OrgModel.build(
            characteristics=[Characteristic("sc", "x", CharacteristicKind.STATE)],
            states=[State("half", Form.ATOMIC, "sc", None, None),
                    State("thin", Form.CONJUNCTION, children=("half", "half"))],
        )
        codes = {v.code for v in validate_model(model)}
        assert "STATE_FORM_INVALID" in codes  # atomic missing operator/value
        assert "STATE_FORM_INVALID" in {v.code for v in validate_model(model)
                                        if "thin" in v.entity_ids}

    def test_composition_cycle(self):
        model = OrgModel.build(
            states=[State("p", Form.CONJUNCTION, children=("q", "r")),
                    State("q", Form.CONJUNCTION, children=("p", "r")),
                    State("r", Form.DISJUNCTION, children=("p", "q"))],
        )
        assert any(v.code == "STATE_COMPOSITION_CYCLE" for v in validate_model(model))

    def test_performer_mismatch_is_warning(self):
        model = OrgModel.build(
            agents=_agents(("x", AgentKind.INDIVIDUAL), ("y", AgentKind.INDIVIDUAL)),
            characteristics=[Characteristic("sc", "x", CharacteristicKind.STATE)],
            states=[State("s", Form.ATOMIC, "sc", Operator.EQ, Value.of_bool(True))],
            goals=[Goal("g", "s")],
            tasks=[Task("t", "x", "g")],
            activities=[Activity("w", performers=("y",), part_of_task="t")],
        )
        violations = validate_model(model)
        assert [v.code for v in violations] == ["TASK_PERFORMER_MISMATCH"]
        assert violations[0].severity is Severity.WARNING

    def test_idempotent_and_pure(self, small_corpus):
        for model in small_corpus[:20]:
            assert validate_model(model) == validate_model(model)

    def test_random_models_resolve_every_reference(self):
        # valid models have no UNKNOWN_REFERENCE by construction
        for seed in range(20):
            model = random_model(random.Random(1000 + seed))
            assert not any(v.code == "UNKNOWN_REFERENCE" for v in validate_model(model))

    def test_duplicate_id_rejected_at_construction(self):
        with pytest.raises(ValueError, match="duplicate"):
            OrgModel.build(agents=[Agent("x"), Agent("x")])
