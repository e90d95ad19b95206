"""Canonical scenario document format (`.orgm`): parsing, serialization, fixtures.

A scenario document is a JSON object with `formatVersion`, `entities`
(arrays per entity kind) and `relations`. Serialization is canonical:
keys sorted, records sorted by id, symmetric relation endpoints ordered,
so equal models always produce byte-identical documents.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Callable

from .model import (
    Activity,
    Agent,
    AgentKind,
    Characteristic,
    CharacteristicKind,
    CoordinationMechanism,
    Evaluation,
    Form,
    Goal,
    Incentive,
    IncentiveKind,
    Operator,
    OrgModel,
    PerformanceSpec,
    Relation,
    RelationKind,
    Resource,
    State,
    Task,
    Value,
)

FORMAT_VERSION = "1.0"

#: document array name per entity kind, in canonical order
KIND_KEYS = (
    ("agent", "agents"),
    ("goal", "goals"),
    ("task", "tasks"),
    ("activity", "activities"),
    ("state", "states"),
    ("spec", "specs"),
    ("characteristic", "characteristics"),
    ("resource", "resources"),
    ("evaluation", "evaluations"),
    ("incentive", "incentives"),
    ("mechanism", "mechanisms"),
)
KEY_BY_KIND = dict(KIND_KEYS)


@dataclass(frozen=True)
class ParseIssue:
    location: str
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.location}: {self.code}: {self.message}"


class ScenarioParseError(Exception):
    """Raised with the complete list of syntax/schema issues; never partial."""

    def __init__(self, issues: list[ParseIssue]):
        self.issues = list(issues)
        super().__init__("; ".join(str(i) for i in issues))


class _Reader:
    """Schema reader that accumulates every issue instead of stopping."""

    def __init__(self) -> None:
        self.issues: list[ParseIssue] = []

    def fail(self, location: str, code: str, message: str) -> None:
        self.issues.append(ParseIssue(location, code, message))

    def obj(self, value: Any, loc: str) -> dict | None:
        if not isinstance(value, dict):
            self.fail(loc, "WRONG_TYPE", f"expected object, got {type(value).__name__}")
            return None
        return value

    def record(self, value: Any, loc: str, required: tuple[str, ...],
               optional: tuple[str, ...]) -> dict | None:
        rec = self.obj(value, loc)
        if rec is None:
            return None
        ok = True
        for key in rec:
            if key not in required and key not in optional:
                self.fail(f"{loc}.{key}", "UNKNOWN_FIELD", f"unknown field {key!r}")
                ok = False
        for key in required:
            if key not in rec:
                self.fail(loc, "MISSING_FIELD", f"missing required field {key!r}")
                ok = False
        return rec if ok else None

    def string(self, rec: dict, key: str, loc: str, default: str | None = "") -> str | None:
        if key not in rec:
            return default
        if not isinstance(rec[key], str):
            self.fail(f"{loc}.{key}", "WRONG_TYPE", "expected string")
            return default
        return rec[key]

    def string_list(self, rec: dict, key: str, loc: str) -> list[str]:
        if key not in rec:
            return []
        value = rec[key]
        if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
            self.fail(f"{loc}.{key}", "WRONG_TYPE", "expected array of strings")
            return []
        return value

    def enum(self, rec: dict, key: str, loc: str, enum_type, default=None):
        raw = rec.get(key)
        if raw is None:
            return default
        try:
            return enum_type(raw)
        except ValueError:
            allowed = ", ".join(e.value for e in enum_type)
            self.fail(f"{loc}.{key}", "BAD_ENUM", f"{raw!r} is not one of: {allowed}")
            return default

    def value(self, rec: dict, key: str, loc: str) -> Value | None:
        if key not in rec:
            return None
        raw = self.obj(rec[key], f"{loc}.{key}")
        if raw is None:
            return None
        tags = [t for t in ("num", "text", "bool") if t in raw]
        extra = [k for k in raw if k not in ("num", "unit", "text", "bool")]
        if len(tags) != 1 or extra:
            self.fail(f"{loc}.{key}", "BAD_VALUE",
                      "value must carry exactly one of num/text/bool (unit only with num)")
            return None
        try:
            if tags[0] == "num":
                if not isinstance(raw["num"], (int, float)) or isinstance(raw["num"], bool):
                    raise ValueError("num must be a number")
                unit = raw.get("unit")
                if unit is not None and not isinstance(unit, str):
                    raise ValueError("unit must be a string")
                return Value.number(raw["num"], unit)
            if tags[0] == "text":
                if not isinstance(raw["text"], str):
                    raise ValueError("text must be a string")
                return Value.of_text(raw["text"])
            if not isinstance(raw["bool"], bool):
                raise ValueError("bool must be a boolean")
            return Value.of_bool(raw["bool"])
        except ValueError as exc:
            self.fail(f"{loc}.{key}", "BAD_VALUE", str(exc))
            return None


def _read_agent(r: _Reader, rec: dict, loc: str) -> Agent | None:
    kind = r.enum(rec, "kind", loc, AgentKind, AgentKind.INDIVIDUAL)
    name = r.string(rec, "name", loc)
    return Agent(rec["id"], kind, name or "")


def _read_goal(r: _Reader, rec: dict, loc: str) -> Goal | None:
    desired = r.string(rec, "desiredState", loc, None)
    if desired is None:
        r.fail(loc, "MISSING_FIELD", "missing required field 'desiredState'")
        return None
    return Goal(rec["id"], desired)


def _read_task(r: _Reader, rec: dict, loc: str) -> Task | None:
    agent = r.string(rec, "agent", loc, None)
    goal = r.string(rec, "goal", loc, None)
    if agent is None or goal is None:
        r.fail(loc, "MISSING_FIELD", "task requires 'agent' and 'goal'")
        return None
    return Task(rec["id"], agent, goal)


def _read_activity(r: _Reader, rec: dict, loc: str) -> Activity | None:
    return Activity(
        rec["id"],
        performers=tuple(r.string_list(rec, "performers", loc)),
        part_of_task=r.string(rec, "partOfTask", loc, None),
        causes=tuple(r.string_list(rec, "causes", loc)),
        enabled_by=tuple(r.string_list(rec, "enabledBy", loc)),
        requires=tuple(r.string_list(rec, "requires", loc)),
        produces=tuple(r.string_list(rec, "produces", loc)),
        characteristics=tuple(r.string_list(rec, "characteristics", loc)),
    )


def _read_characteristic(r: _Reader, rec: dict, loc: str) -> Characteristic | None:
    applies = r.enum(rec, "appliesTo", loc, CharacteristicKind, None)
    if applies is None:
        r.fail(loc, "MISSING_FIELD", "characteristic requires 'appliesTo'")
        return None
    return Characteristic(rec["id"], r.string(rec, "name", loc) or "", applies)


def _read_composite(cls):
    def read(r: _Reader, rec: dict, loc: str):
        return cls(
            rec["id"],
            form=r.enum(rec, "form", loc, Form, Form.ATOMIC),
            characteristic=r.string(rec, "characteristic", loc, None),
            operator=r.enum(rec, "operator", loc, Operator, None),
            value=r.value(rec, "value", loc),
            children=tuple(r.string_list(rec, "children", loc)),
        )
    return read


def _read_evaluation(r: _Reader, rec: dict, loc: str) -> Evaluation | None:
    target = r.string(rec, "target", loc, None)
    if target is None:
        r.fail(loc, "MISSING_FIELD", "evaluation requires exactly one 'target'")
        return None
    return Evaluation(
        rec["id"],
        evaluators=tuple(r.string_list(rec, "evaluators", loc)),
        evaluatees=tuple(r.string_list(rec, "evaluatees", loc)),
        target=target,
        subjects=tuple(r.string_list(rec, "subjects", loc)),
        incentives=tuple(r.string_list(rec, "incentives", loc)),
    )


def _read_incentive(r: _Reader, rec: dict, loc: str) -> Incentive | None:
    kind = r.enum(rec, "kind", loc, IncentiveKind, None)
    evaluation = r.string(rec, "evaluation", loc, None)
    if kind is None or evaluation is None:
        r.fail(loc, "MISSING_FIELD", "incentive requires 'kind' and 'evaluation'")
        return None
    return Incentive(rec["id"], kind, evaluation,
                     tuple(r.string_list(rec, "recipients", loc)))


def _read_mechanism(r: _Reader, rec: dict, loc: str) -> CoordinationMechanism | None:
    return CoordinationMechanism(
        rec["id"],
        participants=tuple(r.string_list(rec, "participants", loc)),
        description=r.string(rec, "description", loc) or "",
    )


def _read_resource(r: _Reader, rec: dict, loc: str) -> Resource | None:
    return Resource(rec["id"], r.string(rec, "name", loc) or "")


_FIELDS: dict[str, tuple[tuple[str, ...], tuple[str, ...], Callable]] = {
    "agent": (("id",), ("kind", "name"), _read_agent),
    "goal": (("id", "desiredState"), (), _read_goal),
    "task": (("id", "agent", "goal"), (), _read_task),
    "activity": (("id",), ("performers", "partOfTask", "causes", "enabledBy",
                           "requires", "produces", "characteristics"), _read_activity),
    "state": (("id",), ("form", "characteristic", "operator", "value", "children"),
              _read_composite(State)),
    "spec": (("id",), ("form", "characteristic", "operator", "value", "children"),
             _read_composite(PerformanceSpec)),
    "characteristic": (("id", "appliesTo"), ("name",), _read_characteristic),
    "resource": (("id",), ("name",), _read_resource),
    "evaluation": (("id", "target"), ("evaluators", "evaluatees", "subjects",
                                      "incentives"), _read_evaluation),
    "incentive": (("id", "kind", "evaluation"), ("recipients",), _read_incentive),
    "mechanism": (("id",), ("participants", "description"), _read_mechanism),
}


def read_entity_record(r: _Reader, kind: str, raw: Any, loc: str):
    """Parse one entity record of the given kind; None (with issues) on failure."""
    required, optional, build = _FIELDS[kind]
    rec = r.record(raw, loc, required, optional)
    if rec is None:
        return None
    ident = r.string(rec, "id", loc, None)
    if not ident:
        r.fail(loc, "MISSING_FIELD", "record has no usable 'id'")
        return None
    return build(r, rec, loc)


def read_relation_record(r: _Reader, raw: Any, loc: str) -> Relation | None:
    rec = r.record(raw, loc, ("kind", "args"), ())
    if rec is None:
        return None
    kind = r.enum(rec, "kind", loc, RelationKind, None)
    args = r.string_list(rec, "args", loc)
    if kind is None:
        return None
    try:
        return Relation.make(kind, args)
    except ValueError as exc:
        r.fail(loc, "BAD_RELATION", str(exc))
        return None


def document_to_model(doc: Any) -> OrgModel:
    """Build an OrgModel from a parsed document; raises ScenarioParseError."""
    r = _Reader()
    root = r.obj(doc, "$")
    if root is None:
        raise ScenarioParseError(r.issues)
    version = root.get("formatVersion")
    if version != FORMAT_VERSION:
        r.fail("formatVersion", "UNSUPPORTED_VERSION",
               f"expected {FORMAT_VERSION!r}, got {version!r}")
    for key in root:
        if key not in ("formatVersion", "entities", "relations"):
            r.fail(key, "UNKNOWN_FIELD", f"unknown top-level field {key!r}")

    groups: dict[str, list] = {kind: [] for kind, _ in KIND_KEYS}
    id_locations: dict[str, list[str]] = {}
    entities = root.get("entities", {})
    if r.obj(entities, "entities") is not None:
        for key in entities:
            if key not in KEY_BY_KIND.values():
                r.fail(f"entities.{key}", "UNKNOWN_FIELD", f"unknown entity kind {key!r}")
        for kind, key in KIND_KEYS:
            items = entities.get(key, [])
            if not isinstance(items, list):
                r.fail(f"entities.{key}", "WRONG_TYPE", "expected array")
                continue
            for i, raw in enumerate(items):
                loc = f"entities.{key}[{i}]"
                entity = read_entity_record(r, kind, raw, loc)
                if entity is not None:
                    id_locations.setdefault(entity.id, []).append(loc)
                    groups[kind].append(entity)

    for ident, locations in sorted(id_locations.items()):
        if len(locations) > 1:
            for loc in locations:
                r.fail(loc, "DUPLICATE_ID", f"id {ident!r} is used more than once")

    relations: list[Relation] = []
    raw_relations = root.get("relations", [])
    if not isinstance(raw_relations, list):
        r.fail("relations", "WRONG_TYPE", "expected array")
    else:
        for i, raw in enumerate(raw_relations):
            rel = read_relation_record(r, raw, f"relations[{i}]")
            if rel is not None:
                relations.append(rel)

    if r.issues:
        raise ScenarioParseError(r.issues)
    return OrgModel.build(
        agents=groups["agent"], goals=groups["goal"], tasks=groups["task"],
        activities=groups["activity"], states=groups["state"], specs=groups["spec"],
        characteristics=groups["characteristic"], resources=groups["resource"],
        evaluations=groups["evaluation"], incentives=groups["incentive"],
        mechanisms=groups["mechanism"], relations=relations,
    )


def parse_scenario(text: str) -> OrgModel:
    """Parse a scenario document; reports all issues at once, never a partial model."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError([ParseIssue(
            f"line {exc.lineno} column {exc.colno}", "INVALID_JSON", exc.msg)]) from exc
    return document_to_model(doc)


# -- serialization -------------------------------------------------------


def _value_record(value: Value) -> dict:
    if value.num is not None:
        rec: dict[str, Any] = {"num": value.num}
        if value.unit is not None:
            rec["unit"] = value.unit
        return rec
    if value.text is not None:
        return {"text": value.text}
    return {"bool": value.boolean}


def _composite_record(item: State | PerformanceSpec) -> dict:
    rec: dict[str, Any] = {"id": item.id, "form": item.form.value}
    if item.characteristic is not None:
        rec["characteristic"] = item.characteristic
    if item.operator is not None:
        rec["operator"] = item.operator.value
    if item.value is not None:
        rec["value"] = _value_record(item.value)
    if item.children:
        rec["children"] = list(item.children)
    return rec


def entity_to_record(kind: str, entity: Any) -> dict:
    """Canonical document record for one entity (empty optionals omitted)."""
    if kind == "agent":
        rec = {"id": entity.id, "kind": entity.kind.value}
        if entity.name:
            rec["name"] = entity.name
        return rec
    if kind == "goal":
        return {"id": entity.id, "desiredState": entity.desired_state}
    if kind == "task":
        return {"id": entity.id, "agent": entity.agent, "goal": entity.goal}
    if kind == "activity":
        rec = {"id": entity.id, "performers": list(entity.performers)}
        if entity.part_of_task is not None:
            rec["partOfTask"] = entity.part_of_task
        for key, values in (("causes", entity.causes), ("enabledBy", entity.enabled_by),
                            ("requires", entity.requires), ("produces", entity.produces),
                            ("characteristics", entity.characteristics)):
            if values:
                rec[key] = list(values)
        return rec
    if kind in ("state", "spec"):
        return _composite_record(entity)
    if kind == "characteristic":
        rec = {"id": entity.id, "appliesTo": entity.applies_to.value}
        if entity.name:
            rec["name"] = entity.name
        return rec
    if kind == "resource":
        rec = {"id": entity.id}
        if entity.name:
            rec["name"] = entity.name
        return rec
    if kind == "evaluation":
        rec = {"id": entity.id, "target": entity.target}
        for key, values in (("evaluators", entity.evaluators),
                            ("evaluatees", entity.evaluatees),
                            ("subjects", entity.subjects),
                            ("incentives", entity.incentives)):
            if values:
                rec[key] = list(values)
        return rec
    if kind == "incentive":
        return {"id": entity.id, "kind": entity.kind.value,
                "evaluation": entity.evaluation, "recipients": list(entity.recipients)}
    if kind == "mechanism":
        rec = {"id": entity.id, "participants": list(entity.participants)}
        if entity.description:
            rec["description"] = entity.description
        return rec
    raise ValueError(f"unknown entity kind {kind!r}")


def model_to_document(model: OrgModel) -> dict:
    tables = {
        "agent": model.agents, "goal": model.goals, "task": model.tasks,
        "activity": model.activities, "state": model.states, "spec": model.specs,
        "characteristic": model.characteristics, "resource": model.resources,
        "evaluation": model.evaluations, "incentive": model.incentives,
        "mechanism": model.mechanisms,
    }
    entities = {}
    for kind, key in KIND_KEYS:
        entities[key] = [entity_to_record(kind, tables[kind][i])
                         for i in sorted(tables[kind])]
    relations = [{"kind": rel.kind.value, "args": list(rel.args)}
                 for rel in model.relations]
    return {"formatVersion": FORMAT_VERSION, "entities": entities,
            "relations": relations}


def serialize_scenario(model: OrgModel) -> str:
    """Canonical UTF-8 document; a pure function of model content."""
    doc = model_to_document(model)
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


# -- bundled fixtures ----------------------------------------------------


def fixture_path(filename: str) -> Path:
    """Path of a data file bundled with the package."""
    path = Path(str(resources.files(__package__) / "fixtures" / filename))
    if not path.exists():
        raise FileNotFoundError(filename)
    return path


def load_flood_scenario() -> OrgModel:
    """The bundled municipal flood-programme scenario."""
    return parse_scenario(fixture_path("flood_scenario.orgm").read_text("utf-8"))
