"""Declarative what-if interventions and inference diffs.

An intervention is an ordered list of primitive operations on a model.
Application is atomic: either the whole list applies and the result passes
validation with no Errors, or the base model is returned untouched via an
exception. Diffs compare the derived (S1-S3) fact sets of two inference
results; asserted/closure facts are excluded so a diff reads as "which
dependencies and risks changed".
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence, Union

from .engine import DERIVED_PREDICATES, Fact, InferenceResult
from .model import OrgModel, Relation, Severity, Violation, validate_model
from .scenario import (
    FORMAT_VERSION,
    KEY_BY_KIND,
    ParseIssue,
    ScenarioParseError,
    _Reader,
    document_to_model,
    model_to_document,
    read_relation_record,
)


class UnknownTargetError(LookupError):
    """An operation names an entity or relation that is not in the model."""


class WouldInvalidateError(Exception):
    """Applying the intervention would leave Error-level violations."""

    def __init__(self, violations: Sequence[Violation] | Sequence[ParseIssue]):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in violations))


@dataclass(frozen=True)
class AddEntity:
    kind: str
    record: Mapping[str, Any]  # entity record in document form, including "id"


@dataclass(frozen=True)
class RemoveEntity:
    kind: str
    id: str


@dataclass(frozen=True)
class AddRelation:
    kind: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class RemoveRelation:
    kind: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class ModifyField:
    kind: str
    id: str
    field: str
    value: Any


Op = Union[AddEntity, RemoveEntity, AddRelation, RemoveRelation, ModifyField]


@dataclass(frozen=True)
class Intervention:
    ops: tuple[Op, ...] = ()

    def __add__(self, other: Intervention) -> Intervention:
        return Intervention(self.ops + other.ops)


def _relation_record(kind: str, args: Sequence[str]) -> dict:
    return {"kind": kind, "args": list(args)}


def _apply_op(doc: dict, op: Op) -> None:
    entities = doc["entities"]
    if isinstance(op, AddEntity):
        key = KEY_BY_KIND.get(op.kind)
        if key is None:
            raise UnknownTargetError(f"unknown entity kind {op.kind!r}")
        entities[key].append(dict(op.record))
        return
    if isinstance(op, RemoveEntity):
        key = KEY_BY_KIND.get(op.kind)
        if key is None:
            raise UnknownTargetError(f"unknown entity kind {op.kind!r}")
        records = entities[key]
        remaining = [r for r in records if r.get("id") != op.id]
        if len(remaining) == len(records):
            raise UnknownTargetError(f"no {op.kind} with id {op.id!r}")
        entities[key][:] = remaining
        return
    if isinstance(op, AddRelation):
        doc["relations"].append(_relation_record(op.kind, op.args))
        return
    if isinstance(op, RemoveRelation):
        wanted = Relation.make(op.kind, op.args)
        relations = doc["relations"]
        for i, rec in enumerate(relations):
            try:
                existing = Relation.make(rec["kind"], rec["args"])
            except ValueError:
                continue
            if existing == wanted:
                del relations[i]
                return
        raise UnknownTargetError(f"no relation {op.kind}({', '.join(op.args)})")
    if isinstance(op, ModifyField):
        key = KEY_BY_KIND.get(op.kind)
        if key is None:
            raise UnknownTargetError(f"unknown entity kind {op.kind!r}")
        for rec in entities[key]:
            if rec.get("id") == op.id:
                if op.value is None:
                    rec.pop(op.field, None)
                else:
                    rec[op.field] = op.value
                return
        raise UnknownTargetError(f"no {op.kind} with id {op.id!r}")
    raise TypeError(f"unknown operation {op!r}")


def apply_intervention(base: OrgModel, intervention: Intervention) -> OrgModel:
    """New model with all operations applied; the base model is never mutated.

    Raises UnknownTargetError for removals/modifications of missing targets
    and WouldInvalidateError when the outcome has Error-level violations.
    """
    doc = model_to_document(base)
    for op in intervention.ops:
        _apply_op(doc, op)
    try:
        model = document_to_model(doc)
    except ScenarioParseError as exc:
        raise WouldInvalidateError(exc.issues) from exc
    violations = validate_model(model)
    errors = [v for v in violations if v.severity is Severity.ERROR]
    if errors:
        raise WouldInvalidateError(errors)
    return model


# -- diffs -----------------------------------------------------------------


@dataclass(frozen=True)
class InferenceDiff:
    added: tuple[Fact, ...]
    removed: tuple[Fact, ...]
    unchanged_counts: Mapping[str, int] = field(default_factory=dict)

    @property
    def empty(self) -> bool:
        return not self.added and not self.removed

    def to_document(self) -> dict:
        def render(facts: tuple[Fact, ...]) -> list[dict]:
            return [{"predicate": f.predicate, "args": list(f.args)} for f in facts]
        return {
            "added": render(self.added),
            "removed": render(self.removed),
            "unchangedCounts": dict(sorted(self.unchanged_counts.items())),
        }


def diff_inferences(before: InferenceResult, after: InferenceResult) -> InferenceDiff:
    """Set difference of the derived fact sets, in canonical order."""
    old = before.derived_facts()
    new = after.derived_facts()
    unchanged: dict[str, int] = {p: 0 for p in DERIVED_PREDICATES}
    for f in old & new:
        unchanged[f.predicate] = unchanged.get(f.predicate, 0) + 1
    return InferenceDiff(
        added=tuple(sorted(new - old)),
        removed=tuple(sorted(old - new)),
        unchanged_counts=unchanged,
    )


def render_diff(diff: InferenceDiff, format: str = "text") -> str:
    if format == "structured":
        return json.dumps(diff.to_document(), indent=2, sort_keys=True,
                          ensure_ascii=False) + "\n"
    if format != "text":
        raise ValueError(f"unknown diff format {format!r}")
    if diff.empty:
        return "no changes\n"
    lines = []
    for f in diff.added:
        lines.append(f"+ {f}")
    for f in diff.removed:
        lines.append(f"- {f}")
    return "\n".join(lines) + "\n"


# -- intervention templates -------------------------------------------------


def add_coordination_mechanism(mechanism_id: str, participants: Sequence[str],
                               description: str = "") -> Intervention:
    """Assert a coordination mechanism covering the given participants."""
    record: dict[str, Any] = {"id": mechanism_id, "participants": sorted(participants)}
    if description:
        record["description"] = description
    return Intervention((AddEntity("mechanism", record),))


def add_individual_evaluation(evaluation_id: str, evaluator: str, evaluatee: str,
                              target: str, subjects: Sequence[str] = (),
                              reward_id: str | None = None) -> Intervention:
    """Evaluate one agent's work against a target, optionally with a reward."""
    record: dict[str, Any] = {
        "id": evaluation_id,
        "evaluators": [evaluator],
        "evaluatees": [evaluatee],
        "target": target,
    }
    if subjects:
        record["subjects"] = sorted(subjects)
    ops: list[Op] = [AddEntity("evaluation", record)]
    if reward_id is not None:
        record["incentives"] = [reward_id]
        ops.append(AddEntity("incentive", {
            "id": reward_id, "kind": "Reward", "evaluation": evaluation_id,
            "recipients": [evaluatee],
        }))
    return Intervention(tuple(ops))


def add_joint_evaluation(evaluation_id: str, evaluators: Sequence[str],
                         evaluatees: Sequence[str], target: str,
                         subjects: Sequence[str] = (),
                         reward_id: str | None = None) -> Intervention:
    """Hold several agents collectively answerable for one target; a shared
    reward raises incentive breadth across all evaluatees."""
    record: dict[str, Any] = {
        "id": evaluation_id,
        "evaluators": sorted(evaluators),
        "evaluatees": sorted(evaluatees),
        "target": target,
    }
    if subjects:
        record["subjects"] = sorted(subjects)
    ops: list[Op] = [AddEntity("evaluation", record)]
    if reward_id is not None:
        record["incentives"] = [reward_id]
        ops.append(AddEntity("incentive", {
            "id": reward_id, "kind": "Reward", "evaluation": evaluation_id,
            "recipients": sorted(evaluatees),
        }))
    return Intervention(tuple(ops))


_TEMPLATES = {
    "add-coordination-mechanism": add_coordination_mechanism,
    "add-individual-evaluation": add_individual_evaluation,
    "add-joint-evaluation": add_joint_evaluation,
}


def _read_op(r: _Reader, raw: Any, loc: str) -> list[Op]:
    rec = r.obj(raw, loc)
    if rec is None:
        return []
    if "template" in rec:
        name = rec.get("template")
        template = _TEMPLATES.get(name)
        if template is None:
            r.fail(loc, "UNKNOWN_TEMPLATE", f"unknown template {name!r}")
            return []
        params = rec.get("params", {})
        if not isinstance(params, dict):
            r.fail(f"{loc}.params", "WRONG_TYPE", "expected object")
            return []
        try:
            return list(template(**{k: v for k, v in params.items()}).ops)
        except TypeError as exc:
            r.fail(f"{loc}.params", "BAD_TEMPLATE_PARAMS", str(exc))
            return []
    op_name = rec.get("op")
    if op_name == "AddEntity":
        kind = r.string(rec, "kind", loc, None)
        payload = rec.get("payload")
        if kind is None or not isinstance(payload, dict):
            r.fail(loc, "BAD_OP", "AddEntity requires 'kind' and object 'payload'")
            return []
        return [AddEntity(kind, payload)]
    if op_name == "RemoveEntity":
        kind = r.string(rec, "kind", loc, None)
        ident = r.string(rec, "id", loc, None)
        if kind is None or ident is None:
            r.fail(loc, "BAD_OP", "RemoveEntity requires 'kind' and 'id'")
            return []
        return [RemoveEntity(kind, ident)]
    if op_name in ("AddRelation", "RemoveRelation"):
        rel = read_relation_record(r, rec.get("relation"), f"{loc}.relation")
        if rel is None:
            return []
        cls = AddRelation if op_name == "AddRelation" else RemoveRelation
        return [cls(rel.kind.value, rel.args)]
    if op_name == "ModifyField":
        kind = r.string(rec, "kind", loc, None)
        ident = r.string(rec, "id", loc, None)
        field_name = r.string(rec, "field", loc, None)
        if kind is None or ident is None or field_name is None:
            r.fail(loc, "BAD_OP", "ModifyField requires 'kind', 'id' and 'field'")
            return []
        return [ModifyField(kind, ident, field_name, rec.get("value"))]
    r.fail(loc, "BAD_OP", f"unknown op {op_name!r}")
    return []


def parse_ops(raw_ops: Any, r: _Reader | None = None) -> Intervention:
    """Parse an array of op / template records into a primitive intervention."""
    reader = r or _Reader()
    ops: list[Op] = []
    if not isinstance(raw_ops, list):
        reader.fail("ops", "WRONG_TYPE", "expected array of operations")
    else:
        for i, raw in enumerate(raw_ops):
            ops.extend(_read_op(reader, raw, f"ops[{i}]"))
    if reader.issues and r is None:
        raise ScenarioParseError(reader.issues)
    return Intervention(tuple(ops))


def parse_intervention(text: str) -> Intervention:
    """Parse an intervention document: {formatVersion, ops: [...]}."""
    reader = _Reader()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError([ParseIssue(
            f"line {exc.lineno} column {exc.colno}", "INVALID_JSON", exc.msg)]) from exc
    root = reader.obj(doc, "$")
    if root is None:
        raise ScenarioParseError(reader.issues)
    if root.get("formatVersion") != FORMAT_VERSION:
        reader.fail("formatVersion", "UNSUPPORTED_VERSION",
                    f"expected {FORMAT_VERSION!r}, got {root.get('formatVersion')!r}")
    intervention = parse_ops(root.get("ops", []), reader)
    if reader.issues:
        raise ScenarioParseError(reader.issues)
    return intervention
