"""Proof trees and deterministic risk reports over inference results."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from .engine import (
    ASSERTED,
    COOPERATION_RISK,
    COORDINATION_NEED,
    COORDINATION_RISK,
    FREE_RIDING_RISK,
    SHIRK_RISK,
    STRATEGIC_SUBSTITUTES,
    SUBGOAL_OPTIMIZATION_RISK,
    Derivation,
    Fact,
    InferenceResult,
    fact_id,
)
from .scenario import serialize_scenario


class FactNotFoundError(LookupError):
    """The requested fact is not part of the inference result."""


@dataclass(frozen=True)
class ProofTree:
    """One derivation of a fact, expanded recursively to asserted leaves."""

    root: Fact
    rule: str
    children: tuple[ProofTree, ...] = ()

    def depth(self) -> int:
        return 0 if not self.children else 1 + max(c.depth() for c in self.children)

    def to_document(self) -> dict:
        return {
            "fact": {"predicate": self.root.predicate, "args": list(self.root.args)},
            "factId": fact_id(self.root),
            "rule": self.rule,
            "children": [c.to_document() for c in self.children],
        }


_UNREACHABLE = float("inf")


def _min_depth(result: InferenceResult, f: Fact, memo: dict, visiting: set) -> float:
    if f in memo:
        return memo[f]
    if f in visiting:
        return _UNREACHABLE
    visiting.add(f)
    best = _UNREACHABLE
    for d in result.derivations_for(f):
        if d.rule == ASSERTED:
            best = 0
            break
        depth = 1 + max(
            (_min_depth(result, p, memo, visiting) for p in d.premises), default=0)
        best = min(best, depth)
    visiting.discard(f)
    memo[f] = best
    return best


def _derivation_depth(result: InferenceResult, d: Derivation, memo: dict) -> float:
    if d.rule == ASSERTED:
        return 0
    return 1 + max((_min_depth(result, p, memo, set()) for p in d.premises), default=0)


def explain(result: InferenceResult, f: Fact) -> ProofTree:
    """Minimal-depth proof of the fact, ties broken by canonical order."""
    if f not in result:
        raise FactNotFoundError(str(f))
    memo: dict[Fact, float] = {}

    def build(node: Fact) -> ProofTree:
        derivations = sorted(
            result.derivations_for(node),
            key=lambda d: (_derivation_depth(result, d, memo), d.rule, d.premises),
        )
        best = derivations[0]
        if best.rule == ASSERTED:
            return ProofTree(node, ASSERTED)
        children = tuple(build(p) for p in sorted(best.premises))
        return ProofTree(node, best.rule, children)

    return build(f)


def render_proof_tree(tree: ProofTree, indent: int = 0) -> str:
    lines = [f"{'  ' * indent}{tree.root}  [{tree.rule}]"]
    for child in tree.children:
        lines.append(render_proof_tree(child, indent + 1))
    return "\n".join(lines)


# -- risk report ----------------------------------------------------------

_CLAUSES = {
    "cooperation-risk-free-riding": "free-riding",
    "cooperation-risk-shirking": "shirking",
    "cooperation-risk-subgoal": "sub-goal optimization",
}

_SECTIONS = (
    ("coordinationNeeds", COORDINATION_NEED, "Coordination needs"),
    ("coordinationRisks", COORDINATION_RISK, "Coordination risks"),
    ("freeRidingRisks", FREE_RIDING_RISK, "Free-riding risks"),
    ("shirkRisks", SHIRK_RISK, "Shirk risks"),
    ("subGoalOptimizationRisks", SUBGOAL_OPTIMIZATION_RISK, "Sub-goal optimization risks"),
    ("cooperationRisks", COOPERATION_RISK, "Cooperation risks"),
    ("strategicSubstitutes", STRATEGIC_SUBSTITUTES, "Strategic substitutes (informational)"),
)


def _entry_text(result: InferenceResult, f: Fact) -> str:
    a = f.args
    if f.predicate == COORDINATION_NEED:
        return (f"{a[0]} and {a[1]} need to coordinate: at least one depends "
                "epistemically on the other.")
    if f.predicate == COORDINATION_RISK:
        return (f"{a[0]} and {a[1]} need to coordinate, but no coordination "
                "mechanism covers them both.")
    if f.predicate == FREE_RIDING_RISK:
        return (f"{a[0]} shares evaluation {a[1]} with other evaluatees but is "
                "sole contributor to none of its subjects.")
    if f.predicate == SHIRK_RISK:
        return (f"{a[0]} cannot be held to account for {a[1]}: no evaluation "
                f"of {a[0]} covers it.")
    if f.predicate == SUBGOAL_OPTIMIZATION_RISK:
        return (f"{a[0]} and {a[1]} hold complementary work toward {a[2]} but "
                f"are evaluated only on their individual work; nothing "
                f"evaluates {a[2]}.")
    if f.predicate == COOPERATION_RISK:
        clauses = ", ".join(cooperation_clauses(result, f))
        return f"Cooperation between {a[0]} and {a[1]} is at risk ({clauses})."
    if f.predicate == STRATEGIC_SUBSTITUTES:
        return (f"{a[0]} and {a[1]} are strategic substitutes with respect "
                f"to {a[2]}.")
    return str(f)


def cooperation_clauses(result: InferenceResult, f: Fact) -> tuple[str, ...]:
    """Triggering clause names for a cooperation risk, sorted."""
    rules = {d.rule for d in result.derivations_for(f)}
    return tuple(sorted(_CLAUSES[r] for r in rules if r in _CLAUSES))


def model_fingerprint(result: InferenceResult) -> str:
    digest = hashlib.sha256(serialize_scenario(result.model).encode("utf-8"))
    return digest.hexdigest()[:12]


def report_document(result: InferenceResult) -> dict:
    """Structured risk report covering every S2/S3 fact exactly once."""
    sections: dict[str, list[dict]] = {}
    counts: dict[str, int] = {}
    for key, predicate, _title in _SECTIONS:
        entries = []
        for f in result.facts_for(predicate):
            entry = {
                "fact": {"predicate": f.predicate, "args": list(f.args)},
                "factId": fact_id(f),
                "text": _entry_text(result, f),
            }
            if predicate == COOPERATION_RISK:
                entry["clauses"] = list(cooperation_clauses(result, f))
            entries.append(entry)
        sections[key] = entries
        counts[key] = len(entries)
    return {"modelId": model_fingerprint(result), "sections": sections,
            "counts": counts}


def render_report(result: InferenceResult, format: str = "text") -> str:
    """Deterministic report; ``text`` for humans, ``structured`` for machines."""
    doc = report_document(result)
    if format == "structured":
        return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if format != "text":
        raise ValueError(f"unknown report format {format!r}")
    lines = [f"Risk report for model {doc['modelId']}"]
    for key, _predicate, title in _SECTIONS:
        entries = doc["sections"][key]
        lines.append(f"{title} ({len(entries)}):")
        for entry in entries:
            f = entry["fact"]
            rendered = f"{f['predicate']}({', '.join(f['args'])})"
            lines.append(f"  - {rendered}: {entry['text']}")
    return "\n".join(lines) + "\n"
