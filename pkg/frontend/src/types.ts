/** Wire types for the orgrisk HTTP API and scenario documents. */

export interface FactRef {
  predicate: string;
  args: string[];
}

export interface FactRecord extends FactRef {
  id: string;
  stratum: number;
}

export interface DerivationRecord {
  rule: string;
  premises: string[]; // fact ids
}

export interface ValidationRecord {
  severity: "Error" | "Warning";
  code: string;
  message: string;
  entityIds: string[];
}

export interface ReportEntry {
  fact: FactRef;
  factId: string;
  text: string;
  clauses?: string[];
}

export interface ReportDocument {
  modelId: string;
  counts: Record<string, number>;
  sections: Record<string, ReportEntry[]>;
}

export interface InferResponse {
  facts: FactRecord[];
  derivations: Record<string, DerivationRecord[]>;
  report: ReportDocument;
}

export interface SessionResponse {
  sessionId: string;
  validation: ValidationRecord[];
}

export interface ProofTreeDoc {
  fact: FactRef;
  factId: string;
  rule: string;
  children: ProofTreeDoc[];
}

export interface DiffResponse {
  branch: string;
  added: FactRef[];
  removed: FactRef[];
  unchangedCounts: Record<string, number>;
}

/** Intervention request entries: either a primitive op or a template call. */
export type InterventionRecord =
  | { op: "AddEntity"; kind: string; payload: Record<string, unknown> }
  | { op: "RemoveEntity"; kind: string; id: string }
  | { op: "AddRelation"; relation: RelationRecord }
  | { op: "RemoveRelation"; relation: RelationRecord }
  | { op: "ModifyField"; kind: string; id: string; field: string; value: unknown }
  | { template: string; params: Record<string, unknown> };

export interface RelationRecord {
  kind: string;
  args: string[];
}

export interface AgentRecord {
  id: string;
  kind?: "Individual" | "Collective";
  name?: string;
  [key: string]: unknown;
}

export interface ActivityRecord {
  id: string;
  performers?: string[];
  partOfTask?: string;
  causes?: string[];
  [key: string]: unknown;
}

export interface EvaluationRecord {
  id: string;
  target: string;
  evaluators?: string[];
  evaluatees?: string[];
  subjects?: string[];
  incentives?: string[];
  [key: string]: unknown;
}

export interface ScenarioDocument {
  formatVersion: string;
  entities: {
    agents?: AgentRecord[];
    activities?: ActivityRecord[];
    evaluations?: EvaluationRecord[];
    [key: string]: { id: string; [key: string]: unknown }[] | undefined;
  };
  relations?: RelationRecord[];
}

export function factLabel(fact: FactRef): string {
  return `${fact.predicate}(${fact.args.join(", ")})`;
}

export function sameFact(a: FactRef, b: FactRef): boolean {
  return a.predicate === b.predicate && a.args.length === b.args.length &&
    a.args.every((x, i) => x === b.args[i]);
}
