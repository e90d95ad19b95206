"""Stratified forward-chaining inference over an organizational model.

Derivation proceeds through four strata, each run to fixpoint before the
next starts:

  S0  asserted relations, structural facts read off the model, and closures
      (transitive membership, state composition);
  S1  positive dependence: predictive needs, outcome/epistemic/reward
      dependence, coordination needs;
  S2  risks that quantify over absence (negation as failure against the
      completed S0/S1 store): coordination, free-riding, shirking,
      sub-goal optimization;
  S3  cooperation risks aggregated from S1/S2.

Every derived fact carries one or more Derivations (rule name plus premise
facts), terminating in asserted facts, so any conclusion can be explained.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping

from .model import (
    AgentKind,
    IncentiveKind,
    OrgModel,
    RelationKind,
    Severity,
    Violation,
    validate_model,
)

S0, S1, S2, S3 = range(4)
STRATUM_COUNT = 4

# predicate names
PREDICTIVE_NEED = "PredictiveNeed"
OUTCOME_DEPENDENT_ON = "OutcomeDependentOn"
EPISTEMICALLY_DEPENDENT_ON = "EpistemicallyDependentOn"
REWARD_DEPENDENT_ON = "RewardDependentOn"
COORDINATION_NEED = "CoordinationNeed"
COORDINATION_RISK = "CoordinationRisk"
FREE_RIDING_RISK = "FreeRidingRisk"
SHIRK_RISK = "ShirkRisk"
SUBGOAL_OPTIMIZATION_RISK = "SubGoalOptimizationRisk"
COOPERATION_RISK = "CooperationRisk"

DEPENDS_ON = "DependsOn"
STRATEGIC_COMPLEMENTS = "StrategicComplements"
STRATEGIC_SUBSTITUTES = "StrategicSubstitutes"
MEMBER_OF = "MemberOf"
MEMBER = "Member"
PERFORMS = "Performs"
HAS_TASK = "HasTask"
CAUSES = "Causes"
DESIRED_STATE = "DesiredState"
COMPONENT_OF = "ComponentOf"
COMPONENT_IN = "ComponentIn"
EVALUATEE_OF = "EvaluateeOf"
SUBJECT_OF = "SubjectOf"
TARGET_OF = "TargetOf"
HAS_INCENTIVE = "HasIncentive"
IS_REWARD = "IsReward"
RECIPIENT_OF = "RecipientOf"
PARTICIPANT_IN = "ParticipantIn"

#: predicates derived by the built-in S1-S3 rules
DERIVED_PREDICATES = (
    PREDICTIVE_NEED, OUTCOME_DEPENDENT_ON, EPISTEMICALLY_DEPENDENT_ON,
    REWARD_DEPENDENT_ON, COORDINATION_NEED, COORDINATION_RISK,
    FREE_RIDING_RISK, SHIRK_RISK, SUBGOAL_OPTIMIZATION_RISK, COOPERATION_RISK,
)

_AGENT = ("agent",)
_WORK = ("task", "activity")
_EVALUATION = ("evaluation",)
_STATE = ("state",)
_ACTIVITY = ("activity",)
_TASK = ("task",)
_GOAL = ("goal",)
_INCENTIVE = ("incentive",)
_MECHANISM = ("mechanism",)
_SUBJECT = ("activity", "state")
_TARGET = ("state", "spec")

#: expected entity kinds per argument position, used to type-check facts
PREDICATE_SORTS: dict[str, tuple[tuple[str, ...], ...]] = {
    MEMBER_OF: (_AGENT, _AGENT),
    MEMBER: (_AGENT, _AGENT),
    PERFORMS: (_AGENT, _ACTIVITY),
    HAS_TASK: (_AGENT, _TASK),
    CAUSES: (_ACTIVITY, _STATE),
    DESIRED_STATE: (_GOAL, _STATE),
    COMPONENT_OF: (_STATE, _STATE),
    COMPONENT_IN: (_STATE, _STATE),
    EVALUATEE_OF: (_AGENT, _EVALUATION),
    SUBJECT_OF: (_SUBJECT, _EVALUATION),
    TARGET_OF: (_TARGET, _EVALUATION),
    HAS_INCENTIVE: (_EVALUATION, _INCENTIVE),
    IS_REWARD: (_INCENTIVE,),
    RECIPIENT_OF: (_AGENT, _INCENTIVE),
    PARTICIPANT_IN: (_AGENT, _MECHANISM),
    DEPENDS_ON: (_WORK, _WORK),
    STRATEGIC_COMPLEMENTS: (_WORK, _WORK, _STATE),
    STRATEGIC_SUBSTITUTES: (_WORK, _WORK, _STATE),
    PREDICTIVE_NEED: (_AGENT, _AGENT, _WORK, _WORK),
    OUTCOME_DEPENDENT_ON: (_AGENT, _AGENT, _EVALUATION),
    EPISTEMICALLY_DEPENDENT_ON: (_AGENT, _AGENT, _EVALUATION),
    REWARD_DEPENDENT_ON: (_AGENT, _AGENT, _EVALUATION),
    COORDINATION_NEED: (_AGENT, _AGENT),
    COORDINATION_RISK: (_AGENT, _AGENT),
    COOPERATION_RISK: (_AGENT, _AGENT),
    FREE_RIDING_RISK: (_AGENT, _EVALUATION),
    SHIRK_RISK: (_AGENT, _WORK),
    SUBGOAL_OPTIMIZATION_RISK: (_AGENT, _AGENT, _STATE),
}

ASSERTED = "asserted"


class InvalidModelError(Exception):
    """Inference refused: the model has Error-level violations."""

    def __init__(self, violations: list[Violation]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


class InvalidStratumError(ValueError):
    """Domain rules may extend only the positive strata S0 and S1."""


@dataclass(frozen=True, order=True)
class Fact:
    predicate: str
    args: tuple[str, ...]

    def __str__(self) -> str:
        return f"{self.predicate}({', '.join(self.args)})"


def fact(predicate: str, *args: str) -> Fact:
    return Fact(predicate, tuple(args))


def fact_id(f: Fact) -> str:
    """Stable content-hash identifier for a fact."""
    return hashlib.sha256(str(f).encode("utf-8")).hexdigest()


def check_fact(model: OrgModel, f: Fact) -> None:
    """Raise ValueError unless the fact's arity and argument sorts fit the model."""
    sorts = PREDICATE_SORTS.get(f.predicate)
    if sorts is None:
        return  # extension-defined predicate: no sort contract
    if len(f.args) != len(sorts):
        raise ValueError(f"{f.predicate} takes {len(sorts)} arguments, got {len(f.args)}")
    for arg, allowed in zip(f.args, sorts):
        kind = model.entity_kind(arg)
        if kind not in allowed:
            raise ValueError(
                f"{f}: argument {arg!r} must be {' or '.join(allowed)}, found {kind}")


@dataclass(frozen=True)
class Derivation:
    fact: Fact
    rule: str
    premises: tuple[Fact, ...] = ()

    def sort_key(self) -> tuple:
        return (self.rule, self.premises)


class FactStore:
    """Monotone fact set with per-fact stratum and all distinct derivations."""

    def __init__(self) -> None:
        self._facts: set[Fact] = set()
        self._by_predicate: dict[str, set[Fact]] = {}
        self._stratum: dict[Fact, int] = {}
        self._derivations: dict[Fact, list[Derivation]] = {}
        self._seen: set[tuple[Fact, str, tuple[Fact, ...]]] = set()

    def add(self, f: Fact, rule: str, premises: tuple[Fact, ...], stratum: int) -> bool:
        """Record fact and derivation; True iff the fact itself is new."""
        new = f not in self._facts
        if new:
            self._facts.add(f)
            self._by_predicate.setdefault(f.predicate, set()).add(f)
            self._stratum[f] = stratum
            self._derivations[f] = []
        key = (f, rule, premises)
        if key not in self._seen:
            self._seen.add(key)
            self._derivations[f].append(Derivation(f, rule, premises))
        return new

    def __contains__(self, f: Fact) -> bool:
        return f in self._facts

    def __len__(self) -> int:
        return len(self._facts)

    def facts_for(self, predicate: str) -> tuple[Fact, ...]:
        return tuple(sorted(self._by_predicate.get(predicate, ())))

    def all_facts(self) -> tuple[Fact, ...]:
        return tuple(sorted(self._facts))

    def stratum_of(self, f: Fact) -> int:
        return self._stratum[f]

    def derivations_for(self, f: Fact) -> tuple[Derivation, ...]:
        return tuple(self._derivations.get(f, ()))


class FactView:
    """Read-only store access handed to domain rules."""

    def __init__(self, store: FactStore):
        self._store = store

    def facts_for(self, predicate: str) -> tuple[Fact, ...]:
        return self._store.facts_for(predicate)

    def all_facts(self) -> tuple[Fact, ...]:
        return self._store.all_facts()

    def __contains__(self, f: Fact) -> bool:
        return f in self._store


#: a rule body yields Fact or (Fact, premises)
RuleBody = Callable[[OrgModel, FactView], Iterable]


@dataclass(frozen=True)
class DomainRule:
    """Extension rule contributing positive facts at stratum S0 or S1."""

    name: str
    stratum: int
    body: RuleBody

    def __post_init__(self) -> None:
        if self.stratum not in (S0, S1):
            raise InvalidStratumError(
                f"domain rule {self.name!r} must run at stratum S0 or S1")


# -- store-side helpers (all enumeration in canonical sorted order) -------


def _expanded_evaluatees(store: FactStore, evaluation_id: str) -> dict[str, tuple[Fact, ...]]:
    """Agent -> premise witness for membership in the evaluatee closure."""
    out: dict[str, tuple[Fact, ...]] = {}
    direct = [f for f in store.facts_for(EVALUATEE_OF) if f.args[1] == evaluation_id]
    for f in direct:
        out.setdefault(f.args[0], (f,))
    for m in store.facts_for(MEMBER):
        agent, collective = m.args
        if agent in out:
            continue
        for f in direct:
            if f.args[0] == collective:
                out[agent] = (m, f)
                break
    return out


def _recipient_witness(store: FactStore, agent_id: str,
                       incentive_id: str) -> tuple[Fact, ...] | None:
    direct = fact(RECIPIENT_OF, agent_id, incentive_id)
    if direct in store:
        return (direct,)
    for m in store.facts_for(MEMBER):
        if m.args[0] != agent_id:
            continue
        via = fact(RECIPIENT_OF, m.args[1], incentive_id)
        if via in store:
            return (m, via)
    return None


def _covers_witnesses(store: FactStore, evaluation_id: str,
                      work_id: str) -> list[tuple[Fact, ...]]:
    """All ways a subject of the evaluation covers the work (itself, or a
    state the work causes)."""
    out: list[tuple[Fact, ...]] = []
    direct = fact(SUBJECT_OF, work_id, evaluation_id)
    if direct in store:
        out.append((direct,))
    for c in store.facts_for(CAUSES):
        if c.args[0] != work_id:
            continue
        subject = fact(SUBJECT_OF, c.args[1], evaluation_id)
        if subject in store:
            out.append((subject, c))
    return out


def _covers(store: FactStore, evaluation_id: str, work_id: str) -> bool:
    return bool(_covers_witnesses(store, evaluation_id, work_id))


def _holders(store: FactStore, work_id: str) -> list[tuple[str, Fact]]:
    """Agents performing the activity or having the task, with witness fact."""
    out = [(f.args[0], f) for f in store.facts_for(PERFORMS) if f.args[1] == work_id]
    out += [(f.args[0], f) for f in store.facts_for(HAS_TASK) if f.args[1] == work_id]
    return sorted(out)


def _contributors(store: FactStore, subject_id: str,
                  memo: dict[str, frozenset[str]], visiting: set[str]) -> frozenset[str]:
    if subject_id in memo:
        return memo[subject_id]
    if subject_id in visiting:
        return frozenset()
    visiting.add(subject_id)
    out: set[str] = set()
    out.update(f.args[0] for f in store.facts_for(PERFORMS) if f.args[1] == subject_id)
    causing = [f.args[0] for f in store.facts_for(CAUSES) if f.args[1] == subject_id]
    for activity in causing:
        out.update(f.args[0] for f in store.facts_for(PERFORMS) if f.args[1] == activity)
    for comp in store.facts_for(COMPONENT_OF):
        if comp.args[1] == subject_id:
            out.update(_contributors(store, comp.args[0], memo, visiting))
    visiting.discard(subject_id)
    memo[subject_id] = frozenset(out)
    return memo[subject_id]


def _pair(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


# -- built-in rules -------------------------------------------------------

Firing = tuple[Fact, tuple[Fact, ...]]


def _rule_membership_closure(model: OrgModel, store: FactStore) -> Iterator[Firing]:
    for m in store.facts_for(MEMBER_OF):
        yield fact(MEMBER, *m.args), (m,)
    for inner in store.facts_for(MEMBER):
        agent, middle = inner.args
        for outer in store.facts_for(MEMBER_OF):
            if outer.args[0] == middle and outer.args[1] != agent:
                yield fact(MEMBER, agent, outer.args[1]), (inner, outer)


def _rule_component_closure(model: OrgModel, store: FactStore) -> Iterator[Firing]:
    for c in store.facts_for(COMPONENT_OF):
        yield fact(COMPONENT_IN, *c.args), (c,)
    for inner in store.facts_for(COMPONENT_IN):
        child, middle = inner.args
        for outer in store.facts_for(COMPONENT_OF):
            if outer.args[0] == middle and outer.args[1] != child:
                yield fact(COMPONENT_IN, child, outer.args[1]), (inner, outer)


def _rule_predictive_need(model: OrgModel, store: FactStore) -> Iterator[Firing]:
    for dep in store.facts_for(DEPENDS_ON):
        w1, w2 = dep.args
        for a1, h1 in _holders(store, w1):
            for a2, h2 in _holders(store, w2):
                if a1 != a2:
                    yield fact(PREDICTIVE_NEED, a1, a2, w1, w2), (dep, h1, h2)


def _rule_outcome_dependence(model: OrgModel, store: FactStore) -> Iterator[Firing]:
    for evaluation_id in sorted(model.evaluations):
        entries = _expanded_evaluatees(store, evaluation_id)
        individuals = [a for a in sorted(entries)
                       if model.agents[a].kind is AgentKind.INDIVIDUAL]
        for a1 in individuals:
            for a2 in individuals:
                if a1 != a2:
                    yield (fact(OUTCOME_DEPENDENT_ON, a1, a2, evaluation_id),
                           entries[a1] + entries[a2])


def _rule_epistemic_dependence(model: OrgModel, store: FactStore) -> Iterator[Firing]:
    for pn in store.facts_for(PREDICTIVE_NEED):
        a1, a2, w1, _w2 = pn.args
        for evaluation_id in sorted(model.evaluations):
            covers = _covers_witnesses(store, evaluation_id, w1)
            if not covers:
                continue
            for hi in store.facts_for(HAS_INCENTIVE):
                if hi.args[0] != evaluation_id:
                    continue
                received = _recipient_witness(store, a1, hi.args[1])
                if received is None:
                    continue
                for cover in covers:
                    yield (fact(EPISTEMICALLY_DEPENDENT_ON, a1, a2, evaluation_id),
                           (pn, hi) + received + cover)


def _rule_reward_dependence_outcome(model: OrgModel, store: FactStore) -> Iterator[Firing]:
    for od in store.facts_for(OUTCOME_DEPENDENT_ON):
        a1, a2, evaluation_id = od.args
        for hi in store.facts_for(HAS_INCENTIVE):
            if hi.args[0] != evaluation_id:
                continue
            reward = fact(IS_REWARD, hi.args[1])
            if reward not in store:
                continue
            r1 = _recipient_witness(store, a1, hi.args[1])
            r2 = _recipient_witness(store, a2, hi.args[1])
            if r1 and r2:
                yield (fact(REWARD_DEPENDENT_ON, a1, a2, evaluation_id),
                       (od, hi, reward) + r1 + r2)


def _rule_reward_dependence_epistemic(model: OrgModel, store: FactStore) -> Iterator[Firing]:
    for ed in store.facts_for(EPISTEMICALLY_DEPENDENT_ON):
        yield fact(REWARD_DEPENDENT_ON, *ed.args), (ed,)


def _rule_coordination_need(model: OrgModel, store: FactStore) -> Iterator[Firing]:
    for ed in store.facts_for(EPISTEMICALLY_DEPENDENT_ON):
        yield fact(COORDINATION_NEED, *_pair(ed.args[0], ed.args[1])), (ed,)


def _rule_coordination_risk(model: OrgModel, store: FactStore) -> Iterator[Firing]:
    participants: dict[str, set[str]] = {}
    for p in store.facts_for(PARTICIPANT_IN):
        participants.setdefault(p.args[1], set()).add(p.args[0])
    for need in store.facts_for(COORDINATION_NEED):
        a, b = need.args
        if not any(a in group and b in group for group in participants.values()):
            yield fact(COORDINATION_RISK, a, b), (need,)


def _rule_free_riding_risk(model: OrgModel, store: FactStore) -> Iterator[Firing]:
    memo: dict[str, frozenset[str]] = {}
    for evaluation_id in sorted(model.evaluations):
        entries = _expanded_evaluatees(store, evaluation_id)
        individuals = [a for a in sorted(entries)
                       if model.agents[a].kind is AgentKind.INDIVIDUAL]
        if len(individuals) < 2:
            continue
        subjects = model.evaluations[evaluation_id].subjects
        for agent_id in sorted(entries):
            if any(_contributors(store, s, memo, set()) == {agent_id} for s in subjects):
                continue
            other = next(a for a in individuals if a != agent_id) \
                if agent_id in individuals else individuals[0]
            yield (fact(FREE_RIDING_RISK, agent_id, evaluation_id),
                   entries[agent_id] + entries[other])


def _evaluations_naming(store: FactStore, model: OrgModel, agent_id: str) -> list[str]:
    return [e for e in sorted(model.evaluations)
            if agent_id in _expanded_evaluatees(store, e)]


def _rule_shirk_risk(model: OrgModel, store: FactStore) -> Iterator[Firing]:
    for pf in store.facts_for(PERFORMS):
        agent_id, activity_id = pf.args
        if not any(_covers(store, e, activity_id)
                   for e in _evaluations_naming(store, model, agent_id)):
            yield fact(SHIRK_RISK, agent_id, activity_id), (pf,)
    for ht in store.facts_for(HAS_TASK):
        agent_id, task_id = ht.args
        goal_id = model.tasks[task_id].goal
        desired = model.goals[goal_id].desired_state
        coverage = {desired} | {f.args[0] for f in store.facts_for(COMPONENT_IN)
                                if f.args[1] == desired}
        evaluated = False
        for e in _evaluations_naming(store, model, agent_id):
            ev = model.evaluations[e]
            if ev.target in coverage or set(ev.subjects) & coverage:
                evaluated = True
                break
        if not evaluated:
            yield (fact(SHIRK_RISK, agent_id, task_id),
                   (ht, fact(DESIRED_STATE, goal_id, desired)))


def _goal_witness(store: FactStore, state_id: str) -> tuple[Fact, ...] | None:
    """Premises showing the state is a goal's desired state or a component of one."""
    for ds in store.facts_for(DESIRED_STATE):
        if ds.args[1] == state_id:
            return (ds,)
    for ds in store.facts_for(DESIRED_STATE):
        comp = fact(COMPONENT_IN, state_id, ds.args[1])
        if comp in store:
            return (ds, comp)
    return None


def _state_evaluated(store: FactStore, model: OrgModel, state_id: str) -> bool:
    """Some evaluation holds agents answerable for the state: its target or a
    subject is the state or a complex state containing it."""
    for e in sorted(model.evaluations):
        ev = model.evaluations[e]
        for x in (ev.target,) + ev.subjects:
            if x == state_id or fact(COMPONENT_IN, state_id, x) in store:
                return True
    return False


def _individual_work_witness(store: FactStore, model: OrgModel, agent_id: str,
                             work_id: str) -> tuple[Fact, ...] | None:
    """Premises of an evaluation covering the agent's work, if one exists."""
    for e in sorted(model.evaluations):
        entries = _expanded_evaluatees(store, e)
        if agent_id not in entries:
            continue
        covers = _covers_witnesses(store, e, work_id)
        if covers:
            return entries[agent_id] + covers[0]
    return None


def _rule_subgoal_optimization_risk(model: OrgModel, store: FactStore) -> Iterator[Firing]:
    for sc in store.facts_for(STRATEGIC_COMPLEMENTS):
        w1, w2, state_id = sc.args
        goal = _goal_witness(store, state_id)
        if goal is None or _state_evaluated(store, model, state_id):
            continue
        for x, y in ((w1, w2), (w2, w1)):
            for a1, h1 in _holders(store, x):
                for a2, h2 in _holders(store, y):
                    if a1 == a2:
                        continue
                    e1 = _individual_work_witness(store, model, a1, x)
                    e2 = _individual_work_witness(store, model, a2, y)
                    if e1 is None or e2 is None:
                        continue
                    first, second = _pair(a1, a2)
                    yield (fact(SUBGOAL_OPTIMIZATION_RISK, first, second, state_id),
                           (sc, h1, h2) + goal + e1 + e2)


def _rule_cooperation_free_riding(model: OrgModel, store: FactStore) -> Iterator[Firing]:
    for fr in store.facts_for(FREE_RIDING_RISK):
        rider, evaluation_id = fr.args
        entries = _expanded_evaluatees(store, evaluation_id)
        for other in sorted(entries):
            if other != rider:
                yield (fact(COOPERATION_RISK, *_pair(rider, other)),
                       (fr,) + entries[other])


def _rule_cooperation_shirking(model: OrgModel, store: FactStore) -> Iterator[Firing]:
    for ed in store.facts_for(EPISTEMICALLY_DEPENDENT_ON):
        a1, a2, evaluation_id = ed.args
        for pn in store.facts_for(PREDICTIVE_NEED):
            if pn.args[0] != a1 or pn.args[1] != a2:
                continue
            w1, w2 = pn.args[2], pn.args[3]
            shirk = fact(SHIRK_RISK, a2, w2)
            if shirk in store and _covers(store, evaluation_id, w1):
                yield fact(COOPERATION_RISK, *_pair(a1, a2)), (ed, shirk)


def _rule_cooperation_subgoal(model: OrgModel, store: FactStore) -> Iterator[Firing]:
    for sg in store.facts_for(SUBGOAL_OPTIMIZATION_RISK):
        yield fact(COOPERATION_RISK, sg.args[0], sg.args[1]), (sg,)


@dataclass(frozen=True)
class _BuiltinRule:
    name: str
    stratum: int
    body: Callable[[OrgModel, FactStore], Iterator[Firing]]


BUILTIN_RULES: tuple[_BuiltinRule, ...] = (
    _BuiltinRule("membership-closure", S0, _rule_membership_closure),
    _BuiltinRule("component-closure", S0, _rule_component_closure),
    _BuiltinRule("predictive-need", S1, _rule_predictive_need),
    _BuiltinRule("outcome-dependence", S1, _rule_outcome_dependence),
    _BuiltinRule("epistemic-dependence", S1, _rule_epistemic_dependence),
    _BuiltinRule("reward-dependence-outcome", S1, _rule_reward_dependence_outcome),
    _BuiltinRule("reward-dependence-epistemic", S1, _rule_reward_dependence_epistemic),
    _BuiltinRule("coordination-need", S1, _rule_coordination_need),
    _BuiltinRule("coordination-risk", S2, _rule_coordination_risk),
    _BuiltinRule("free-riding-risk", S2, _rule_free_riding_risk),
    _BuiltinRule("shirk-risk", S2, _rule_shirk_risk),
    _BuiltinRule("subgoal-optimization-risk", S2, _rule_subgoal_optimization_risk),
    _BuiltinRule("cooperation-risk-free-riding", S3, _rule_cooperation_free_riding),
    _BuiltinRule("cooperation-risk-shirking", S3, _rule_cooperation_shirking),
    _BuiltinRule("cooperation-risk-subgoal", S3, _rule_cooperation_subgoal),
)


def base_facts(model: OrgModel) -> list[Fact]:
    """Structural facts read off the asserted model (stratum S0 leaves)."""
    out: list[Fact] = []
    for rel in model.relations:
        name = rel.kind.value
        out.append(fact(name, *rel.args))
    for activity in model.activities.values():
        for p in activity.performers:
            out.append(fact(PERFORMS, p, activity.id))
        for s in activity.causes:
            out.append(fact(CAUSES, activity.id, s))
    for task in model.tasks.values():
        out.append(fact(HAS_TASK, task.agent, task.id))
    for goal in model.goals.values():
        out.append(fact(DESIRED_STATE, goal.id, goal.desired_state))
    for state in model.states.values():
        for child in state.children:
            out.append(fact(COMPONENT_OF, child, state.id))
    for ev in model.evaluations.values():
        for a in ev.evaluatees:
            out.append(fact(EVALUATEE_OF, a, ev.id))
        for s in ev.subjects:
            out.append(fact(SUBJECT_OF, s, ev.id))
        out.append(fact(TARGET_OF, ev.target, ev.id))
    for inc in model.incentives.values():
        out.append(fact(HAS_INCENTIVE, inc.evaluation, inc.id))
        if inc.kind is IncentiveKind.REWARD:
            out.append(fact(IS_REWARD, inc.id))
        for r in inc.recipients:
            out.append(fact(RECIPIENT_OF, r, inc.id))
    for mech in model.mechanisms.values():
        for p in mech.participants:
            out.append(fact(PARTICIPANT_IN, p, mech.id))
    return sorted(set(out))


@dataclass(frozen=True)
class InferenceResult:
    """Fixpoint-closed fact store partitioned by stratum, with provenance."""

    model: OrgModel
    strata: tuple[frozenset[Fact], ...]
    derivations: Mapping[Fact, tuple[Derivation, ...]]

    @property
    def facts(self) -> frozenset[Fact]:
        return frozenset().union(*self.strata)

    def all_facts(self) -> tuple[Fact, ...]:
        return tuple(sorted(self.facts))

    def facts_for(self, predicate: str) -> tuple[Fact, ...]:
        return tuple(sorted(f for f in self.facts if f.predicate == predicate))

    def derived_facts(self) -> frozenset[Fact]:
        """Facts produced by S1-S3 rules (asserted/closure stratum excluded)."""
        return frozenset().union(*self.strata[S1:])

    def stratum_of(self, f: Fact) -> int:
        for i, stratum in enumerate(self.strata):
            if f in stratum:
                return i
        raise KeyError(f)

    def derivations_for(self, f: Fact) -> tuple[Derivation, ...]:
        return self.derivations[f]

    def __contains__(self, f: Fact) -> bool:
        return any(f in stratum for stratum in self.strata)

    def by_id(self) -> dict[str, Fact]:
        return {fact_id(f): f for f in self.all_facts()}

    def to_document(self) -> dict:
        """Canonical JSON-compatible form: facts, strata, derivation index."""
        facts = []
        for f in self.all_facts():
            facts.append({
                "id": fact_id(f),
                "predicate": f.predicate,
                "args": list(f.args),
                "stratum": self.stratum_of(f),
            })
        derivations = {}
        for f in self.all_facts():
            entries = sorted(self.derivations_for(f), key=Derivation.sort_key)
            derivations[fact_id(f)] = [
                {"rule": d.rule, "premises": [fact_id(p) for p in d.premises]}
                for d in entries
            ]
        return {"facts": facts, "derivations": derivations}


class InferenceEngine:
    """Runs the built-in rules plus registered domain rules to fixpoint.

    Engines are immutable; :meth:`register` returns a new engine. ``infer``
    is a pure function of the model, so one engine may serve concurrent
    callers.
    """

    def __init__(self, rules: Iterable[DomainRule] = ()):
        self._extensions = tuple(rules)
        for rule in self._extensions:
            if rule.stratum not in (S0, S1):
                raise InvalidStratumError(
                    f"domain rule {rule.name!r} must run at stratum S0 or S1")

    @property
    def domain_rules(self) -> tuple[DomainRule, ...]:
        return self._extensions

    def register(self, rule: DomainRule) -> InferenceEngine:
        return InferenceEngine(self._extensions + (rule,))

    def infer(self, model: OrgModel) -> InferenceResult:
        violations = validate_model(model)
        errors = [v for v in violations if v.severity is Severity.ERROR]
        if errors:
            raise InvalidModelError(errors)

        store = FactStore()
        for f in base_facts(model):
            store.add(f, ASSERTED, (), S0)

        view = FactView(store)
        by_stratum: dict[int, list] = {s: [] for s in range(STRATUM_COUNT)}
        for rule in BUILTIN_RULES:
            by_stratum[rule.stratum].append((rule.name, rule.body, False))
        for rule in self._extensions:
            by_stratum[rule.stratum].append((rule.name, rule.body, True))
        for stratum in by_stratum.values():
            stratum.sort(key=lambda r: r[0])

        for stratum in range(STRATUM_COUNT):
            changed = True
            while changed:
                changed = False
                for name, body, is_extension in by_stratum[stratum]:
                    firings = []
                    source = body(model, view) if is_extension else body(model, store)
                    for item in source:
                        if isinstance(item, Fact):
                            f, premises = item, ()
                        else:
                            f, premises = item[0], tuple(item[1])
                        if is_extension:
                            check_fact(model, f)
                            for p in premises:
                                if p not in store:
                                    raise ValueError(
                                        f"rule {name!r} cites premise {p} "
                                        "that is not in the store")
                        firings.append((f, premises))
                    for f, premises in sorted(firings):
                        if store.add(f, name, premises, stratum):
                            changed = True

        strata = tuple(
            frozenset(f for f in store.all_facts() if store.stratum_of(f) == s)
            for s in range(STRATUM_COUNT)
        )
        derivations = {f: store.derivations_for(f) for f in store.all_facts()}
        return InferenceResult(model, strata, derivations)


def infer(model: OrgModel, rules: Iterable[DomainRule] = ()) -> InferenceResult:
    """Derive the full dependence and risk closure of a validated model."""
    return InferenceEngine(rules).infer(model)


def register_domain_rule(engine: InferenceEngine, rule: DomainRule) -> InferenceEngine:
    """Engine with the extension rule installed (the input engine is unchanged)."""
    return engine.register(rule)
