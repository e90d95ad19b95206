/** Browser wiring: upload a scenario, render graph/report, drill into proofs,
 * and run what-if branches. All state lives in a single ViewState. */

import { ApiError, createClient, type ApiClient } from "./api.js";
import {
  renderDiffRows,
  renderGraphSvg,
  renderProofTree,
  renderReportSections,
  renderValidation,
} from "./render.js";
import type {
  DiffResponse,
  InferResponse,
  InterventionRecord,
  ScenarioDocument,
  ValidationRecord,
} from "./types.js";
import {
  buildGraph,
  buildTemplateRecord,
  clearInterventions,
  createViewState,
  diffRows,
  layoutGraph,
  queueIntervention,
  selectFact,
  templateCatalogue,
  type ViewState,
} from "./viewmodel.js";

interface AppContext {
  client: ApiClient;
  state: ViewState | null;
  scenario: ScenarioDocument | null;
  inference: InferResponse | null;
  lastDiff: DiffResponse | null;
}

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

function showError(message: string): void {
  $("status").textContent = message;
  $("status").className = "status error";
}

function showStatus(message: string): void {
  $("status").textContent = message;
  $("status").className = "status";
}

function describeApiError(error: unknown): string {
  if (error instanceof ApiError) {
    const payload = error.payload as {
      errors?: { message: string }[];
      violations?: { message?: string; code?: string }[];
    } | null;
    const details = payload?.errors ?? payload?.violations ?? [];
    const lines = details
      .map((d) => ("message" in d && d.message) ? d.message : JSON.stringify(d))
      .join("; ");
    return `request failed (${error.status})${lines ? ": " + lines : ""}`;
  }
  return String(error);
}

function renderGraphPane(ctx: AppContext): void {
  if (!ctx.scenario || !ctx.inference || !ctx.state) {
    $("graph").innerHTML =
      '<p class="empty-hint">Load a scenario to see its dependency graph.</p>';
    return;
  }
  const graph = buildGraph(ctx.scenario, ctx.inference);
  if (Object.keys(ctx.state.graphLayout).length === 0) {
    ctx.state = { ...ctx.state, graphLayout: layoutGraph(graph, 720, 520) };
  }
  if (graph.nodes.length === 0) {
    $("graph").innerHTML = '<p class="empty-hint">Scenario has no entities yet.</p>';
    return;
  }
  $("graph").innerHTML = renderGraphSvg(graph, ctx.state.graphLayout);
  $("report").innerHTML = renderReportSections(ctx.inference.report);
}

async function openProof(ctx: AppContext, factId: string): Promise<void> {
  if (!ctx.state || !ctx.inference) return;
  ctx.state = selectFact(ctx.state, ctx.inference, factId);
  if (ctx.state.selectedFactId === null) {
    $("proof").innerHTML =
      '<p class="empty-hint">That fact is stale; re-run inference.</p>';
    return;
  }
  try {
    const tree = await ctx.client.explainFact(ctx.state.sessionId, factId);
    $("proof").innerHTML = renderProofTree(tree);
  } catch (error) {
    if (error instanceof ApiError && error.status === 404) {
      $("proof").innerHTML =
        '<p class="empty-hint">That fact is stale; re-run inference.</p>';
    } else {
      showError(describeApiError(error));
    }
  }
}

function renderPending(ctx: AppContext): void {
  const items = (ctx.state?.pendingInterventions ?? [])
    .map((op) => `<li><code>${JSON.stringify(op)}</code></li>`)
    .join("");
  $("pending").innerHTML = items || '<li class="empty-hint">none</li>';
}

function renderTemplateForm(): void {
  const select = $<HTMLSelectElement>("template-select");
  const spec = templateCatalogue.find((t) => t.name === select.value);
  if (!spec) return;
  $("template-fields").innerHTML = spec.fields
    .map((f) =>
      `<label>${f.label}${f.optional ? "" : " *"}` +
      `<input name="${f.name}" placeholder="${f.list ? "comma,separated" : ""}">` +
      `</label>`)
    .join("");
}

async function submitWhatIf(ctx: AppContext): Promise<void> {
  if (!ctx.state) return;
  const branch = $<HTMLInputElement>("branch-name").value.trim() || "default";
  ctx.state = { ...ctx.state, activeBranch: branch };
  try {
    const diff = await ctx.client.runWhatIf(
      ctx.state.sessionId, branch, ctx.state.pendingInterventions);
    ctx.lastDiff = diff;
    $("diff").innerHTML = renderDiffRows(diffRows(diff));
    showStatus(`branch '${branch}': ${diff.added.length} added, ` +
               `${diff.removed.length} removed`);
  } catch (error) {
    showError(describeApiError(error));
  }
}

async function revertBranch(ctx: AppContext): Promise<void> {
  if (!ctx.state) return;
  ctx.state = clearInterventions(ctx.state);
  renderPending(ctx);
  const diff = await ctx.client.runWhatIf(
    ctx.state.sessionId, ctx.state.activeBranch, []);
  ctx.lastDiff = diff;
  $("diff").innerHTML = renderDiffRows(diffRows(diff));
  showStatus("branch reverted to base");
}

async function loadScenario(ctx: AppContext): Promise<void> {
  let doc: ScenarioDocument;
  try {
    doc = JSON.parse($<HTMLTextAreaElement>("scenario-input").value);
  } catch (error) {
    showError(`scenario is not valid JSON: ${error}`);
    return;
  }
  try {
    const session = await ctx.client.uploadScenario(doc);
    ctx.scenario = doc;
    ctx.state = createViewState(session.sessionId);
    ctx.lastDiff = null;
    $("validation").innerHTML = renderValidation(
      session.validation as ValidationRecord[]);
    ctx.inference = await ctx.client.runInference(session.sessionId);
    renderGraphPane(ctx);
    renderPending(ctx);
    $("diff").innerHTML = "";
    $("proof").innerHTML = '<p class="empty-hint">Select a fact to explain.</p>';
    showStatus(`session ${session.sessionId} ready`);
  } catch (error) {
    showError(describeApiError(error));
  }
}

export function startApp(): void {
  const ctx: AppContext = {
    client: createClient($<HTMLInputElement>("server-url").value),
    state: null,
    scenario: null,
    inference: null,
    lastDiff: null,
  };

  $("server-url").addEventListener("change", () => {
    ctx.client = createClient($<HTMLInputElement>("server-url").value);
  });
  $("load-button").addEventListener("click", () => void loadScenario(ctx));

  const select = $<HTMLSelectElement>("template-select");
  select.innerHTML = templateCatalogue
    .map((t) => `<option value="${t.name}">${t.title}</option>`)
    .join("");
  renderTemplateForm();
  select.addEventListener("change", renderTemplateForm);

  $("queue-button").addEventListener("click", () => {
    if (!ctx.state) return;
    const spec = templateCatalogue.find((t) => t.name === select.value);
    if (!spec) return;
    const raw: Record<string, string> = {};
    $("template-fields").querySelectorAll("input").forEach((input) => {
      raw[input.name] = input.value;
    });
    try {
      ctx.state = queueIntervention(ctx.state, buildTemplateRecord(spec, raw));
      renderPending(ctx);
    } catch (error) {
      showError(String(error));
    }
  });

  $("queue-raw-button").addEventListener("click", () => {
    if (!ctx.state) return;
    try {
      const record = JSON.parse(
        $<HTMLTextAreaElement>("raw-op").value) as InterventionRecord;
      ctx.state = queueIntervention(ctx.state, record);
      renderPending(ctx);
    } catch (error) {
      showError(`raw op is not valid JSON: ${error}`);
    }
  });

  $("submit-button").addEventListener("click", () => void submitWhatIf(ctx));
  $("revert-button").addEventListener("click", () => void revertBranch(ctx));
  $("clear-button").addEventListener("click", () => {
    if (ctx.state) {
      ctx.state = clearInterventions(ctx.state);
      renderPending(ctx);
    }
  });

  document.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const factLink = target.closest<HTMLElement>("[data-fact-id]");
    if (factLink?.dataset.factId) {
      event.preventDefault();
      void openProof(ctx, factLink.dataset.factId);
    }
  });

  renderGraphPane(ctx);
}

if (typeof document !== "undefined" && document.getElementById("load-button")) {
  startApp();
}
