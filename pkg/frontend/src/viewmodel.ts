/** Pure view-model transforms. Every displayed fact, badge, and diff row is
 * derived from service responses; the UI performs no inference of its own. */

import type {
  DiffResponse,
  FactRecord,
  FactRef,
  InferResponse,
  InterventionRecord,
  ReportDocument,
  ScenarioDocument,
} from "./types.js";
import { factLabel, sameFact } from "./types.js";

// -- scenario graph --------------------------------------------------------

export type NodeKind = "agent" | "activity" | "evaluation";

export interface GraphNode {
  id: string;
  kind: NodeKind;
  label: string;
}

export interface GraphEdge {
  source: string;
  target: string;
  label: string;
  origin: "asserted" | "derived";
}

/** Risk badge attached to one node or to an unordered pair of agent nodes. */
export interface RiskBadge {
  predicate: string;
  fact: FactRef;
  factId: string;
  nodes: string[]; // one id (node badge) or two (pair badge)
  clause: string;  // colour key: free-riding | shirking | sub-goal optimization | coordination
}

export interface GraphModel {
  nodes: GraphNode[];
  edges: GraphEdge[];
  badges: RiskBadge[];
}

const DERIVED_EDGE_PREDICATES: Record<string, string> = {
  PredictiveNeed: "predicts",
  OutcomeDependentOn: "outcome",
  EpistemicallyDependentOn: "epistemic",
  RewardDependentOn: "reward",
  CoordinationNeed: "coordination need",
};

const RISK_CLAUSES: Record<string, string> = {
  FreeRidingRisk: "free-riding",
  ShirkRisk: "shirking",
  SubGoalOptimizationRisk: "sub-goal optimization",
  CoordinationRisk: "coordination",
};

function cooperationClause(report: ReportDocument, fact: FactRef): string {
  const entry = report.sections.cooperationRisks?.find((e) => sameFact(e.fact, fact));
  return entry?.clauses?.[0] ?? "shirking";
}

export function buildGraph(
  scenario: ScenarioDocument,
  inference: InferResponse,
): GraphModel {
  const nodes: GraphNode[] = [];
  const nodeIds = new Set<string>();
  const push = (id: string, kind: NodeKind, label: string) => {
    if (!nodeIds.has(id)) {
      nodeIds.add(id);
      nodes.push({ id, kind, label });
    }
  };
  for (const agent of scenario.entities.agents ?? []) {
    push(agent.id, "agent", agent.name || agent.id);
  }
  for (const activity of scenario.entities.activities ?? []) {
    push(activity.id, "activity", activity.id);
  }
  for (const evaluation of scenario.entities.evaluations ?? []) {
    push(evaluation.id, "evaluation", evaluation.id);
  }

  const edges: GraphEdge[] = [];
  const edge = (
    source: string,
    target: string,
    label: string,
    origin: "asserted" | "derived",
  ) => {
    if (nodeIds.has(source) && nodeIds.has(target)) {
      edges.push({ source, target, label, origin });
    }
  };
  for (const activity of scenario.entities.activities ?? []) {
    for (const performer of activity.performers ?? []) {
      edge(performer, activity.id, "performs", "asserted");
    }
  }
  for (const evaluation of scenario.entities.evaluations ?? []) {
    for (const evaluatee of evaluation.evaluatees ?? []) {
      edge(evaluation.id, evaluatee, "evaluates", "asserted");
    }
    for (const subject of evaluation.subjects ?? []) {
      edge(evaluation.id, subject, "subject", "asserted");
    }
  }
  for (const relation of scenario.relations ?? []) {
    const [a, b] = relation.args;
    edge(a, b, relation.kind, "asserted");
  }
  for (const fact of inference.facts) {
    const label = DERIVED_EDGE_PREDICATES[fact.predicate];
    if (label) {
      edge(fact.args[0], fact.args[1], label, "derived");
    }
  }

  const badges: RiskBadge[] = [];
  for (const fact of inference.facts) {
    const { predicate, args, id } = fact;
    if (predicate === "ShirkRisk" || predicate === "FreeRidingRisk") {
      badges.push({ predicate, fact, factId: id, nodes: [args[0]],
                    clause: RISK_CLAUSES[predicate] });
    } else if (predicate === "CoordinationRisk") {
      badges.push({ predicate, fact, factId: id, nodes: [args[0], args[1]],
                    clause: RISK_CLAUSES[predicate] });
    } else if (predicate === "SubGoalOptimizationRisk") {
      badges.push({ predicate, fact, factId: id, nodes: [args[0], args[1]],
                    clause: RISK_CLAUSES[predicate] });
    } else if (predicate === "CooperationRisk") {
      badges.push({ predicate, fact, factId: id, nodes: [args[0], args[1]],
                    clause: cooperationClause(inference.report, fact) });
    }
  }
  return { nodes, edges, badges };
}

/** Badge totals per report section key; must equal the report's own counts. */
export function badgeCounts(graph: GraphModel): Record<string, number> {
  const keys: Record<string, string> = {
    CoordinationRisk: "coordinationRisks",
    FreeRidingRisk: "freeRidingRisks",
    ShirkRisk: "shirkRisks",
    SubGoalOptimizationRisk: "subGoalOptimizationRisks",
    CooperationRisk: "cooperationRisks",
  };
  const counts: Record<string, number> = {
    coordinationRisks: 0,
    freeRidingRisks: 0,
    shirkRisks: 0,
    subGoalOptimizationRisks: 0,
    cooperationRisks: 0,
  };
  for (const badge of graph.badges) {
    counts[keys[badge.predicate]] += 1;
  }
  return counts;
}

/** Deterministic ring layout: agents inside, activities, then evaluations. */
export function layoutGraph(
  graph: GraphModel,
  width: number,
  height: number,
): Record<string, { x: number; y: number }> {
  const rings: Record<NodeKind, number> = { agent: 0.42, activity: 0.72, evaluation: 1.0 };
  const centre = { x: width / 2, y: height / 2 };
  const radius = Math.min(width, height) * 0.42;
  const layout: Record<string, { x: number; y: number }> = {};
  for (const kind of ["agent", "activity", "evaluation"] as NodeKind[]) {
    const ids = graph.nodes.filter((n) => n.kind === kind).map((n) => n.id).sort();
    ids.forEach((id, index) => {
      const angle = (2 * Math.PI * index) / Math.max(ids.length, 1) - Math.PI / 2;
      layout[id] = {
        x: Math.round(centre.x + radius * rings[kind] * Math.cos(angle)),
        y: Math.round(centre.y + radius * rings[kind] * Math.sin(angle)),
      };
    });
  }
  return layout;
}

// -- view state -------------------------------------------------------------

export interface ViewState {
  sessionId: string;
  activeBranch: string;
  selectedFactId: string | null;
  graphLayout: Record<string, { x: number; y: number }>;
  pendingInterventions: InterventionRecord[];
}

export function createViewState(sessionId: string): ViewState {
  return {
    sessionId,
    activeBranch: "default",
    selectedFactId: null,
    graphLayout: {},
    pendingInterventions: [],
  };
}

/** Select a fact; a fact id not present in the displayed inference is stale
 * and clears the selection. */
export function selectFact(
  state: ViewState,
  inference: InferResponse,
  factId: string | null,
): ViewState {
  const known = factId !== null && inference.facts.some((f) => f.id === factId);
  return { ...state, selectedFactId: known ? factId : null };
}

export function queueIntervention(
  state: ViewState,
  record: InterventionRecord,
): ViewState {
  return { ...state, pendingInterventions: [...state.pendingInterventions, record] };
}

export function clearInterventions(state: ViewState): ViewState {
  return { ...state, pendingInterventions: [] };
}

// -- diff view ---------------------------------------------------------------

export interface DiffRow {
  sign: "+" | "-";
  label: string;
  predicate: string;
}

export function diffRows(diff: DiffResponse): DiffRow[] {
  const added = diff.added.map<DiffRow>((f) => ({
    sign: "+", label: factLabel(f), predicate: f.predicate,
  }));
  const removed = diff.removed.map<DiffRow>((f) => ({
    sign: "-", label: factLabel(f), predicate: f.predicate,
  }));
  return [...added, ...removed];
}

/** The fact set the graph should display for a branch: base facts with the
 * branch diff applied. A null diff (or an empty one) is the base state. */
export function displayedFacts(
  base: FactRecord[],
  diff: DiffResponse | null,
): FactRef[] {
  if (diff === null) {
    return base.map(({ predicate, args }) => ({ predicate, args }));
  }
  const kept = base
    .filter((f) => !diff.removed.some((r) => sameFact(r, f)))
    .map(({ predicate, args }) => ({ predicate, args }));
  return [...kept, ...diff.added];
}

// -- intervention templates ---------------------------------------------------

export interface TemplateField {
  name: string;
  label: string;
  list?: boolean;
  optional?: boolean;
}

export interface TemplateSpec {
  name: string;
  title: string;
  fields: TemplateField[];
}

export const templateCatalogue: TemplateSpec[] = [
  {
    name: "add-individual-evaluation",
    title: "Evaluate one agent's work",
    fields: [
      { name: "evaluation_id", label: "evaluation id" },
      { name: "evaluator", label: "evaluator" },
      { name: "evaluatee", label: "evaluatee" },
      { name: "target", label: "target state/spec" },
      { name: "subjects", label: "subjects", list: true, optional: true },
      { name: "reward_id", label: "reward id", optional: true },
    ],
  },
  {
    name: "add-joint-evaluation",
    title: "Hold agents jointly accountable",
    fields: [
      { name: "evaluation_id", label: "evaluation id" },
      { name: "evaluators", label: "evaluators", list: true },
      { name: "evaluatees", label: "evaluatees", list: true },
      { name: "target", label: "target state/spec" },
      { name: "subjects", label: "subjects", list: true, optional: true },
      { name: "reward_id", label: "shared reward id", optional: true },
    ],
  },
  {
    name: "add-coordination-mechanism",
    title: "Assert a coordination mechanism",
    fields: [
      { name: "mechanism_id", label: "mechanism id" },
      { name: "participants", label: "participants", list: true },
      { name: "description", label: "description", optional: true },
    ],
  },
];

export function buildTemplateRecord(
  spec: TemplateSpec,
  raw: Record<string, string>,
): InterventionRecord {
  const params: Record<string, unknown> = {};
  for (const field of spec.fields) {
    const value = (raw[field.name] ?? "").trim();
    if (!value) {
      if (!field.optional) {
        throw new Error(`missing required field '${field.label}'`);
      }
      continue;
    }
    params[field.name] = field.list
      ? value.split(",").map((v) => v.trim()).filter(Boolean)
      : value;
  }
  return { template: spec.name, params };
}
