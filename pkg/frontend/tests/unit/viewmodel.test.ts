import { describe, expect, it } from "vitest";

import type {
  DiffResponse,
  FactRecord,
  InferResponse,
  ScenarioDocument,
} from "../../src/types.js";
import {
  badgeCounts,
  buildGraph,
  buildTemplateRecord,
  clearInterventions,
  createViewState,
  diffRows,
  displayedFacts,
  layoutGraph,
  queueIntervention,
  selectFact,
  templateCatalogue,
} from "../../src/viewmodel.js";

const scenario: ScenarioDocument = {
  formatVersion: "1.0",
  entities: {
    agents: [
      { id: "pr", kind: "Individual", name: "Parks" },
      { id: "wim", kind: "Individual", name: "Water" },
    ],
    activities: [
      { id: "a_review", performers: ["pr"] },
      { id: "a_sewer", performers: ["wim"] },
    ],
    evaluations: [
      { id: "e_wim", target: "s", evaluatees: ["wim"], subjects: ["a_sewer"] },
    ],
  },
  relations: [{ kind: "DependsOn", args: ["a_sewer", "a_review"] }],
};

let counter = 0;
const fact = (predicate: string, ...args: string[]): FactRecord => ({
  id: `f${counter++}`,
  predicate,
  args,
  stratum: 2,
});

function inference(): InferResponse {
  const facts = [
    fact("EpistemicallyDependentOn", "wim", "pr", "e_wim"),
    fact("ShirkRisk", "pr", "a_review"),
    fact("ShirkRisk", "pr", "t_review"),
    fact("CoordinationRisk", "pr", "wim"),
    fact("CooperationRisk", "pr", "wim"),
  ];
  return {
    facts,
    derivations: {},
    report: {
      modelId: "m",
      counts: {
        coordinationNeeds: 1,
        coordinationRisks: 1,
        freeRidingRisks: 0,
        shirkRisks: 2,
        subGoalOptimizationRisks: 0,
        cooperationRisks: 1,
        strategicSubstitutes: 0,
      },
      sections: {
        cooperationRisks: [{
          fact: { predicate: "CooperationRisk", args: ["pr", "wim"] },
          factId: facts[4].id,
          text: "",
          clauses: ["shirking"],
        }],
      },
    },
  };
}

describe("buildGraph", () => {
  it("includes agents, activities and evaluations as nodes", () => {
    const graph = buildGraph(scenario, inference());
    expect(graph.nodes.map((n) => n.id).sort()).toEqual(
      ["a_review", "a_sewer", "e_wim", "pr", "wim"]);
  });

  it("distinguishes asserted from derived edges", () => {
    const graph = buildGraph(scenario, inference());
    const asserted = graph.edges.filter((e) => e.origin === "asserted");
    const derived = graph.edges.filter((e) => e.origin === "derived");
    expect(asserted.some((e) => e.label === "DependsOn")).toBe(true);
    expect(asserted.some((e) => e.label === "performs")).toBe(true);
    expect(derived).toEqual([
      { source: "wim", target: "pr", label: "epistemic", origin: "derived" },
    ]);
  });

  it("badges risks on nodes and pairs", () => {
    const graph = buildGraph(scenario, inference());
    const shirk = graph.badges.filter((b) => b.predicate === "ShirkRisk");
    expect(shirk).toHaveLength(2);
    expect(shirk.every((b) => b.nodes.length === 1 && b.nodes[0] === "pr")).toBe(true);
    const coop = graph.badges.find((b) => b.predicate === "CooperationRisk");
    expect(coop?.nodes).toEqual(["pr", "wim"]);
    expect(coop?.clause).toBe("shirking");
  });

  it("badge counts equal the report counts", () => {
    const infer = inference();
    const counts = badgeCounts(buildGraph(scenario, infer));
    for (const key of Object.keys(counts)) {
      expect(counts[key]).toBe(infer.report.counts[key]);
    }
  });
});

describe("layoutGraph", () => {
  it("is deterministic and covers every node", () => {
    const graph = buildGraph(scenario, inference());
    const first = layoutGraph(graph, 720, 520);
    const second = layoutGraph(graph, 720, 520);
    expect(first).toEqual(second);
    for (const node of graph.nodes) {
      expect(first[node.id]).toBeDefined();
    }
  });
});

describe("view state", () => {
  it("only selects facts present in the displayed inference", () => {
    const infer = inference();
    let state = createViewState("sess");
    state = selectFact(state, infer, infer.facts[1].id);
    expect(state.selectedFactId).toBe(infer.facts[1].id);
    state = selectFact(state, infer, "stale-id");
    expect(state.selectedFactId).toBeNull();
  });

  it("queues and clears pending interventions", () => {
    let state = createViewState("sess");
    state = queueIntervention(state, { template: "add-coordination-mechanism",
                                       params: {} });
    expect(state.pendingInterventions).toHaveLength(1);
    state = clearInterventions(state);
    expect(state.pendingInterventions).toEqual([]);
  });
});

describe("diff view", () => {
  const diff: DiffResponse = {
    branch: "b",
    added: [{ predicate: "FreeRidingRisk", args: ["pr", "e_joint"] }],
    removed: [{ predicate: "CooperationRisk", args: ["pr", "wim"] }],
    unchangedCounts: {},
  };

  it("renders added and removed rows with signs", () => {
    expect(diffRows(diff)).toEqual([
      { sign: "+", label: "FreeRidingRisk(pr, e_joint)", predicate: "FreeRidingRisk" },
      { sign: "-", label: "CooperationRisk(pr, wim)", predicate: "CooperationRisk" },
    ]);
  });

  it("submit then revert restores the base fact set", () => {
    const base = inference().facts;
    const afterSubmit = displayedFacts(base, diff);
    expect(afterSubmit.some((f) => f.predicate === "CooperationRisk")).toBe(false);
    expect(afterSubmit.some((f) => f.predicate === "FreeRidingRisk")).toBe(true);
    const reverted = displayedFacts(base, null);
    expect(reverted).toEqual(
      base.map(({ predicate, args }) => ({ predicate, args })));
    const emptyDiff: DiffResponse = { branch: "b", added: [], removed: [],
                                      unchangedCounts: {} };
    expect(displayedFacts(base, emptyDiff)).toEqual(reverted);
  });
});

describe("templates", () => {
  it("builds records from form values", () => {
    const spec = templateCatalogue.find(
      (t) => t.name === "add-individual-evaluation")!;
    const record = buildTemplateRecord(spec, {
      evaluation_id: "e_pr",
      evaluator: "city",
      evaluatee: "pr",
      target: "s_plans_accommodated",
      subjects: "a_review",
      reward_id: "",
    });
    expect(record).toEqual({
      template: "add-individual-evaluation",
      params: {
        evaluation_id: "e_pr",
        evaluator: "city",
        evaluatee: "pr",
        target: "s_plans_accommodated",
        subjects: ["a_review"],
      },
    });
  });

  it("rejects missing required fields", () => {
    const spec = templateCatalogue.find(
      (t) => t.name === "add-coordination-mechanism")!;
    expect(() => buildTemplateRecord(spec, { mechanism_id: "m" }))
      .toThrow(/participants/);
  });

  it("splits list fields on commas", () => {
    const spec = templateCatalogue.find(
      (t) => t.name === "add-coordination-mechanism")!;
    const record = buildTemplateRecord(spec, {
      mechanism_id: "m",
      participants: "rm, wim",
    });
    expect(record).toEqual({
      template: "add-coordination-mechanism",
      params: { mechanism_id: "m", participants: ["rm", "wim"] },
    });
  });
});
