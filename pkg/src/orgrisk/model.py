"""Typed in-memory organizational model: agents, work, evaluations, incentives.

The model is immutable after construction. Structural problems are reported
as :class:`Violation` records by :func:`validate_model`, never as exceptions,
so partially-broken field data can still be loaded and inspected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping


class UnknownEntityError(LookupError):
    """A reference names an entity that is not in the model."""


class AgentKind(str, Enum):
    INDIVIDUAL = "Individual"
    COLLECTIVE = "Collective"


class IncentiveKind(str, Enum):
    REWARD = "Reward"
    SANCTION = "Sanction"


class Form(str, Enum):
    ATOMIC = "Atomic"
    CONJUNCTION = "Conjunction"
    DISJUNCTION = "Disjunction"


class Operator(str, Enum):
    LE = "LE"
    GE = "GE"
    EQ = "EQ"
    NE = "NE"


class CharacteristicKind(str, Enum):
    ACTIVITY = "activity"
    STATE = "state"


class RelationKind(str, Enum):
    MEMBER_OF = "MemberOf"
    DEPENDS_ON = "DependsOn"
    STRATEGIC_COMPLEMENTS = "StrategicComplements"
    STRATEGIC_SUBSTITUTES = "StrategicSubstitutes"


#: Relation kinds that are symmetric in their first two arguments and are
#: therefore stored with those arguments in lexicographic order.
SYMMETRIC_RELATIONS = frozenset(
    {RelationKind.STRATEGIC_COMPLEMENTS, RelationKind.STRATEGIC_SUBSTITUTES}
)

RELATION_ARITY = {
    RelationKind.MEMBER_OF: 2,
    RelationKind.DEPENDS_ON: 2,
    RelationKind.STRATEGIC_COMPLEMENTS: 3,
    RelationKind.STRATEGIC_SUBSTITUTES: 3,
}


def _ids(values: Iterable[str]) -> tuple[str, ...]:
    return tuple(sorted(set(values)))


@dataclass(frozen=True)
class Value:
    """Tagged scalar: exactly one of a number (with optional unit), text, or boolean."""

    num: float | int | None = None
    unit: str | None = None
    text: str | None = None
    boolean: bool | None = None

    def __post_init__(self) -> None:
        tags = [v is not None for v in (self.num, self.text, self.boolean)]
        if sum(tags) != 1:
            raise ValueError("value must carry exactly one of num/text/boolean")
        if self.unit is not None and self.num is None:
            raise ValueError("unit is only meaningful for numeric values")

    @classmethod
    def number(cls, num: float | int, unit: str | None = None) -> Value:
        return cls(num=num, unit=unit)

    @classmethod
    def of_text(cls, text: str) -> Value:
        return cls(text=text)

    @classmethod
    def of_bool(cls, flag: bool) -> Value:
        return cls(boolean=flag)


@dataclass(frozen=True)
class Agent:
    id: str
    kind: AgentKind = AgentKind.INDIVIDUAL
    name: str = ""


@dataclass(frozen=True)
class Goal:
    """A desired state of affairs, identified by the state that realizes it."""

    id: str
    desired_state: str


@dataclass(frozen=True)
class Task:
    """An agent's intention to contribute effort towards a goal."""

    id: str
    agent: str
    goal: str


@dataclass(frozen=True)
class Activity:
    """A concrete operation agents perform; may cause states and consume resources."""

    id: str
    performers: tuple[str, ...] = ()
    part_of_task: str | None = None
    causes: tuple[str, ...] = ()
    enabled_by: tuple[str, ...] = ()
    requires: tuple[str, ...] = ()
    produces: tuple[str, ...] = ()
    characteristics: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        for f in ("performers", "causes", "enabled_by", "requires", "produces", "characteristics"):
            object.__setattr__(self, f, _ids(getattr(self, f)))


@dataclass(frozen=True)
class Characteristic:
    """A measurable dimension of an activity's performance or of a state."""

    id: str
    name: str
    applies_to: CharacteristicKind


@dataclass(frozen=True)
class State:
    """Atomic (characteristic, operator, value) or a conjunction/disjunction of states."""

    id: str
    form: Form = Form.ATOMIC
    characteristic: str | None = None
    operator: Operator | None = None
    value: Value | None = None
    children: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "children", _ids(self.children))


@dataclass(frozen=True)
class PerformanceSpec:
    """Specification of activity-characteristic values; same shape as State."""

    id: str
    form: Form = Form.ATOMIC
    characteristic: str | None = None
    operator: Operator | None = None
    value: Value | None = None
    children: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "children", _ids(self.children))


@dataclass(frozen=True)
class Evaluation:
    """An appraisal of evaluatees' work against exactly one target standard."""

    id: str
    evaluators: tuple[str, ...] = ()
    evaluatees: tuple[str, ...] = ()
    target: str = ""
    subjects: tuple[str, ...] = ()
    incentives: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        for f in ("evaluators", "evaluatees", "subjects", "incentives"):
            object.__setattr__(self, f, _ids(getattr(self, f)))


@dataclass(frozen=True)
class Incentive:
    id: str
    kind: IncentiveKind
    evaluation: str
    recipients: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "recipients", _ids(self.recipients))


@dataclass(frozen=True)
class CoordinationMechanism:
    """An asserted arrangement through which participants exchange information."""

    id: str
    participants: tuple[str, ...] = ()
    description: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "participants", _ids(self.participants))


@dataclass(frozen=True)
class Resource:
    id: str
    name: str = ""


@dataclass(frozen=True)
class Relation:
    kind: RelationKind
    args: tuple[str, ...]

    @classmethod
    def make(cls, kind: RelationKind | str, args: Iterable[str]) -> Relation:
        kind = RelationKind(kind)
        args = tuple(args)
        if len(args) != RELATION_ARITY[kind]:
            raise ValueError(f"{kind.value} takes {RELATION_ARITY[kind]} arguments, got {len(args)}")
        if kind in SYMMETRIC_RELATIONS:
            args = tuple(sorted(args[:2])) + args[2:]
        return cls(kind, args)


#: Entity-kind names as used in documents, violations, and interventions.
ENTITY_KINDS = (
    "agent",
    "goal",
    "task",
    "activity",
    "state",
    "spec",
    "characteristic",
    "resource",
    "evaluation",
    "incentive",
    "mechanism",
)


@dataclass(frozen=True)
class OrgModel:
    """The asserted world: entities keyed by id plus asserted relations.

    Construct via :meth:`build`, which normalizes ordering and enforces the
    single model-wide id namespace.
    """

    agents: Mapping[str, Agent] = field(default_factory=dict)
    goals: Mapping[str, Goal] = field(default_factory=dict)
    tasks: Mapping[str, Task] = field(default_factory=dict)
    activities: Mapping[str, Activity] = field(default_factory=dict)
    states: Mapping[str, State] = field(default_factory=dict)
    specs: Mapping[str, PerformanceSpec] = field(default_factory=dict)
    characteristics: Mapping[str, Characteristic] = field(default_factory=dict)
    resources: Mapping[str, Resource] = field(default_factory=dict)
    evaluations: Mapping[str, Evaluation] = field(default_factory=dict)
    incentives: Mapping[str, Incentive] = field(default_factory=dict)
    mechanisms: Mapping[str, CoordinationMechanism] = field(default_factory=dict)
    relations: tuple[Relation, ...] = ()

    @classmethod
    def build(
        cls,
        *,
        agents: Iterable[Agent] = (),
        goals: Iterable[Goal] = (),
        tasks: Iterable[Task] = (),
        activities: Iterable[Activity] = (),
        states: Iterable[State] = (),
        specs: Iterable[PerformanceSpec] = (),
        characteristics: Iterable[Characteristic] = (),
        resources: Iterable[Resource] = (),
        evaluations: Iterable[Evaluation] = (),
        incentives: Iterable[Incentive] = (),
        mechanisms: Iterable[CoordinationMechanism] = (),
        relations: Iterable[Relation] = (),
    ) -> OrgModel:
        groups = {
            "agents": agents,
            "goals": goals,
            "tasks": tasks,
            "activities": activities,
            "states": states,
            "specs": specs,
            "characteristics": characteristics,
            "resources": resources,
            "evaluations": evaluations,
            "incentives": incentives,
            "mechanisms": mechanisms,
        }
        seen: set[str] = set()
        built: dict[str, dict] = {}
        for name, items in groups.items():
            table: dict = {}
            for item in items:
                if item.id in seen:
                    raise ValueError(f"duplicate entity id {item.id!r}")
                seen.add(item.id)
                table[item.id] = item
            built[name] = dict(sorted(table.items()))
        rels = tuple(sorted(set(Relation.make(r.kind, r.args) for r in relations),
                            key=lambda r: (r.kind.value, r.args)))
        return cls(relations=rels, **built)

    # -- lookups ---------------------------------------------------------

    def _tables(self) -> dict[str, Mapping]:
        return {
            "agent": self.agents,
            "goal": self.goals,
            "task": self.tasks,
            "activity": self.activities,
            "state": self.states,
            "spec": self.specs,
            "characteristic": self.characteristics,
            "resource": self.resources,
            "evaluation": self.evaluations,
            "incentive": self.incentives,
            "mechanism": self.mechanisms,
        }

    def entity_kind(self, entity_id: str) -> str | None:
        for kind, table in self._tables().items():
            if entity_id in table:
                return kind
        return None

    def has(self, entity_id: str) -> bool:
        return self.entity_kind(entity_id) is not None

    def require(self, entity_id: str, kinds: Iterable[str] | None = None) -> object:
        kind = self.entity_kind(entity_id)
        if kind is None or (kinds is not None and kind not in tuple(kinds)):
            raise UnknownEntityError(entity_id)
        return self._tables()[kind][entity_id]

    def is_work(self, entity_id: str) -> bool:
        return entity_id in self.tasks or entity_id in self.activities

    def relations_of(self, kind: RelationKind) -> tuple[Relation, ...]:
        return tuple(r for r in self.relations if r.kind is kind)

    def member_edges(self) -> tuple[tuple[str, str], ...]:
        """(member, collective) pairs from asserted MemberOf relations."""
        return tuple(r.args for r in self.relations_of(RelationKind.MEMBER_OF))  # type: ignore[return-value]


# -- navigation helpers --------------------------------------------------


def members_of(model: OrgModel, collective_id: str) -> frozenset[str]:
    """Transitive members of a collective; individuals have no members."""
    model.require(collective_id, ("agent",))
    inverse: dict[str, list[str]] = {}
    for member, coll in model.member_edges():
        inverse.setdefault(coll, []).append(member)
    out: set[str] = set()
    frontier = [collective_id]
    while frontier:
        current = frontier.pop()
        for member in inverse.get(current, ()):
            if member not in out:
                out.add(member)
                frontier.append(member)
    return frozenset(out)


def _state_contributors(model: OrgModel, state_id: str, visiting: set[str]) -> frozenset[str]:
    if state_id in visiting:  # defensive: composition cycles are validation errors
        return frozenset()
    visiting.add(state_id)
    out: set[str] = set()
    for activity in model.activities.values():
        if state_id in activity.causes:
            out.update(activity.performers)
    state = model.states.get(state_id)
    if state is not None:
        for child in state.children:
            out.update(_state_contributors(model, child, visiting))
    visiting.discard(state_id)
    return frozenset(out)


def contributors_to(model: OrgModel, subject_id: str) -> frozenset[str]:
    """Agents contributing to an activity (its performers) or a state.

    A state's contributors are the performers of activities that cause it;
    for complex states, contribution to any child counts.
    """
    kind = model.entity_kind(subject_id)
    if kind == "activity":
        return frozenset(model.activities[subject_id].performers)
    if kind == "state":
        return _state_contributors(model, subject_id, set())
    raise UnknownEntityError(subject_id)


def is_sole_contributor(model: OrgModel, agent_id: str, subject_id: str) -> bool:
    """True iff the agent is the only contributor to the subject.

    Contribution is counted at the granularity of the asserted performer: a
    collective performer is one contributor, not its members.
    """
    model.require(agent_id, ("agent",))
    return contributors_to(model, subject_id) == frozenset({agent_id})


def evaluatee_individuals(model: OrgModel, evaluation_id: str) -> frozenset[str]:
    """Direct evaluatees plus the transitive members of collective evaluatees."""
    evaluation = model.require(evaluation_id, ("evaluation",))
    out: set[str] = set(evaluation.evaluatees)  # type: ignore[union-attr]
    for agent_id in evaluation.evaluatees:  # type: ignore[union-attr]
        agent = model.agents.get(agent_id)
        if agent is not None and agent.kind is AgentKind.COLLECTIVE:
            out.update(members_of(model, agent_id))
    return frozenset(out)


# -- validation ----------------------------------------------------------


class Severity(str, Enum):
    ERROR = "Error"
    WARNING = "Warning"


@dataclass(frozen=True)
class Violation:
    severity: Severity
    code: str
    message: str
    entity_ids: tuple[str, ...] = ()

    def sort_key(self) -> tuple:
        return (self.entity_ids[0] if self.entity_ids else "", self.code, self.message)

    def __str__(self) -> str:
        ids = ", ".join(self.entity_ids)
        return f"{self.severity.value} {self.code} [{ids}]: {self.message}"


def _cycles(edges: dict[str, Iterable[str]]) -> list[tuple[str, ...]]:
    """Distinct node sets lying on directed cycles, each sorted, list sorted."""
    found: set[frozenset[str]] = set()
    for start in edges:
        stack = [(start, (start,))]
        while stack:
            node, path = stack.pop()
            for succ in edges.get(node, ()):
                if succ == start:
                    found.add(frozenset(path))
                elif succ not in path:
                    stack.append((succ, path + (succ,)))
    return sorted(tuple(sorted(group)) for group in found)


class _Checker:
    def __init__(self, model: OrgModel):
        self.model = model
        self.violations: list[Violation] = []

    def add(self, severity: Severity, code: str, message: str, *entity_ids: str) -> None:
        self.violations.append(Violation(severity, code, message, tuple(entity_ids)))

    def ref(self, owner: str, field_name: str, ref: str, kinds: tuple[str, ...]) -> bool:
        """Check one reference; True iff it resolves to an allowed kind."""
        actual = self.model.entity_kind(ref)
        if actual is None:
            self.add(Severity.ERROR, "UNKNOWN_REFERENCE",
                     f"{field_name} references unknown entity {ref!r}", owner, ref)
            return False
        if actual not in kinds:
            self.add(Severity.ERROR, "REFERENCE_KIND",
                     f"{field_name} must reference {' or '.join(kinds)}, found {actual} {ref!r}",
                     owner, ref)
            return False
        return True

    def characteristic_ref(self, owner: str, field_name: str, ref: str,
                           applies_to: CharacteristicKind) -> bool:
        if not self.ref(owner, field_name, ref, ("characteristic",)):
            return False
        if self.model.characteristics[ref].applies_to is not applies_to:
            self.add(Severity.ERROR, "CHARACTERISTIC_KIND_MISMATCH",
                     f"{field_name} needs a {applies_to.value} characteristic, "
                     f"{ref!r} applies to {self.model.characteristics[ref].applies_to.value}",
                     owner, ref)
            return False
        return True


def _check_composition(checker: _Checker, kind_label: str, table: Mapping,
                       child_kind: str, form_code: str, cycle_code: str,
                       characteristic_kind: CharacteristicKind) -> None:
    for item in table.values():
        atomic_fields = (item.characteristic, item.operator, item.value)
        if item.form is Form.ATOMIC:
            if item.children or any(v is None for v in atomic_fields):
                checker.add(Severity.ERROR, form_code,
                            f"atomic {kind_label} needs characteristic/operator/value "
                            "and no children", item.id)
            elif item.characteristic is not None:
                checker.characteristic_ref(item.id, f"{kind_label}.characteristic",
                                           item.characteristic, characteristic_kind)
        else:
            if any(v is not None for v in atomic_fields) or len(item.children) < 2:
                checker.add(Severity.ERROR, form_code,
                            f"complex {kind_label} needs >=2 children and no atomic fields",
                            item.id)
            for child in item.children:
                checker.ref(item.id, f"{kind_label}.children", child, (child_kind,))
    edges = {item.id: [c for c in item.children if c in table] for item in table.values()}
    for group in _cycles(edges):
        checker.add(Severity.ERROR, cycle_code,
                    "composition cycle through " + ", ".join(group), *group)


def validate_model(model: OrgModel) -> list[Violation]:
    """All invariant violations, deterministically ordered; empty iff valid.

    Errors indicate breaches that block inference (dangling references,
    cycles, malformed shapes); Warnings flag suspicious but workable data.
    """
    c = _Checker(model)

    for goal in model.goals.values():
        c.ref(goal.id, "goal.desiredState", goal.desired_state, ("state",))

    for task in model.tasks.values():
        c.ref(task.id, "task.agent", task.agent, ("agent",))
        c.ref(task.id, "task.goal", task.goal, ("goal",))

    for act in model.activities.values():
        if not act.performers:
            c.add(Severity.ERROR, "ACTIVITY_NO_PERFORMERS",
                  "activity has no performers", act.id)
        for p in act.performers:
            c.ref(act.id, "activity.performers", p, ("agent",))
        for s in act.causes:
            c.ref(act.id, "activity.causes", s, ("state",))
        for s in act.enabled_by:
            c.ref(act.id, "activity.enabledBy", s, ("state",))
        for r in act.requires:
            c.ref(act.id, "activity.requires", r, ("resource",))
        for r in act.produces:
            c.ref(act.id, "activity.produces", r, ("resource",))
        for ch in act.characteristics:
            c.characteristic_ref(act.id, "activity.characteristics", ch,
                                 CharacteristicKind.ACTIVITY)
        if act.part_of_task is not None and c.ref(act.id, "activity.partOfTask",
                                                  act.part_of_task, ("task",)):
            task = model.tasks[act.part_of_task]
            if model.entity_kind(task.agent) == "agent":
                allowed = {task.agent} | set(members_of(model, task.agent))
                strays = sorted(set(act.performers) - allowed)
                if strays:
                    c.add(Severity.WARNING, "TASK_PERFORMER_MISMATCH",
                          f"performers {', '.join(strays)} are not the agent of task "
                          f"{task.id!r} or members of it", act.id, *strays)

    _check_composition(c, "state", model.states, "state",
                       "STATE_FORM_INVALID", "STATE_COMPOSITION_CYCLE",
                       CharacteristicKind.STATE)
    _check_composition(c, "spec", model.specs, "spec",
                       "SPEC_FORM_INVALID", "SPEC_COMPOSITION_CYCLE",
                       CharacteristicKind.ACTIVITY)

    member_adj: dict[str, list[str]] = {}
    for rel in model.relations:
        kind = rel.kind
        if kind is RelationKind.MEMBER_OF:
            member, coll = rel.args
            ok_m = c.ref("relation", "MemberOf.member", member, ("agent",))
            ok_c = c.ref("relation", "MemberOf.collective", coll, ("agent",))
            if ok_c and model.agents[coll].kind is not AgentKind.COLLECTIVE:
                c.add(Severity.ERROR, "MEMBER_OF_NON_COLLECTIVE",
                      f"{coll!r} has members but is not a Collective", coll, member)
            if ok_m and ok_c:
                member_adj.setdefault(member, []).append(coll)
        elif kind is RelationKind.DEPENDS_ON:
            a, b = rel.args
            kinds = tuple(model.entity_kind(x) for x in rel.args)
            for x, k in zip(rel.args, kinds):
                if k not in ("task", "activity"):
                    c.add(Severity.ERROR, "RELATION_ARG_INVALID",
                          f"DependsOn argument {x!r} is not a task or activity", x)
            if kinds[0] in ("task", "activity") and kinds[1] in ("task", "activity") \
                    and kinds[0] != kinds[1]:
                c.add(Severity.ERROR, "DEPENDS_ON_KIND_MISMATCH",
                      f"DependsOn endpoints {a!r}, {b!r} mix tasks and activities", a, b)
        else:
            w1, w2, s = rel.args
            for x in (w1, w2):
                if model.entity_kind(x) not in ("task", "activity"):
                    c.add(Severity.ERROR, "RELATION_ARG_INVALID",
                          f"{kind.value} argument {x!r} is not a task or activity", x)
            if model.entity_kind(s) != "state":
                c.add(Severity.ERROR, "RELATION_ARG_INVALID",
                      f"{kind.value} argument {s!r} is not a state", s)

    # membership cycles: edge member -> collective
    for group in _cycles(member_adj):
        c.add(Severity.ERROR, "MEMBERSHIP_CYCLE",
              "membership cycle through " + ", ".join(group), *group)

    for ev in model.evaluations.values():
        if not ev.evaluators:
            c.add(Severity.ERROR, "EVALUATION_NO_EVALUATORS",
                  "evaluation has no evaluators", ev.id)
        if not ev.evaluatees:
            c.add(Severity.ERROR, "EVALUATION_NO_EVALUATEES",
                  "evaluation has no evaluatees", ev.id)
        for a in ev.evaluators:
            c.ref(ev.id, "evaluation.evaluators", a, ("agent",))
        for a in ev.evaluatees:
            c.ref(ev.id, "evaluation.evaluatees", a, ("agent",))
        c.ref(ev.id, "evaluation.target", ev.target, ("state", "spec"))
        evaluatee_ok = all(model.entity_kind(a) == "agent" for a in ev.evaluatees)
        expanded = evaluatee_individuals(model, ev.id) if evaluatee_ok else frozenset()
        for subj in ev.subjects:
            if not c.ref(ev.id, "evaluation.subjects", subj, ("activity", "state")):
                continue
            if not evaluatee_ok:
                continue
            if model.entity_kind(subj) == "activity":
                performed = bool(set(model.activities[subj].performers) & expanded)
            else:
                performed = any(
                    subj in act.causes and set(act.performers) & expanded
                    for act in model.activities.values()
                )
            if not performed:
                c.add(Severity.WARNING, "EVALUATION_SUBJECT_NOT_EVALUATEE_WORK",
                      f"subject {subj!r} is not work of any evaluatee", ev.id, subj)
        for inc_id in ev.incentives:
            if c.ref(ev.id, "evaluation.incentives", inc_id, ("incentive",)):
                if model.incentives[inc_id].evaluation != ev.id:
                    c.add(Severity.ERROR, "INCENTIVE_LINK_MISMATCH",
                          f"incentive {inc_id!r} is listed by {ev.id!r} but belongs to "
                          f"{model.incentives[inc_id].evaluation!r}", ev.id, inc_id)

    for inc in model.incentives.values():
        if not inc.recipients:
            c.add(Severity.ERROR, "INCENTIVE_NO_RECIPIENTS",
                  "incentive has no recipients", inc.id)
        ev_ok = c.ref(inc.id, "incentive.evaluation", inc.evaluation, ("evaluation",))
        if ev_ok and inc.id not in model.evaluations[inc.evaluation].incentives:
            c.add(Severity.ERROR, "INCENTIVE_LINK_MISMATCH",
                  f"incentive {inc.id!r} names evaluation {inc.evaluation!r} which does "
                  "not list it", inc.id, inc.evaluation)
        for r in inc.recipients:
            if not c.ref(inc.id, "incentive.recipients", r, ("agent",)):
                continue
            if ev_ok:
                ev = model.evaluations[inc.evaluation]
                if all(model.entity_kind(a) == "agent" for a in ev.evaluatees):
                    if r not in evaluatee_individuals(model, ev.id):
                        c.add(Severity.ERROR, "INCENTIVE_RECIPIENT_NOT_EVALUATEE",
                              f"recipient {r!r} is not an evaluatee of {ev.id!r}",
                              inc.id, r)

    for mech in model.mechanisms.values():
        if len(mech.participants) < 2:
            c.add(Severity.ERROR, "MECHANISM_TOO_FEW_PARTICIPANTS",
                  "coordination mechanism needs at least two participants", mech.id)
        for p in mech.participants:
            c.ref(mech.id, "mechanism.participants", p, ("agent",))

    return sorted(set(c.violations), key=Violation.sort_key)


def has_errors(violations: Iterable[Violation]) -> bool:
    return any(v.severity is Severity.ERROR for v in violations)
