/** HTML/SVG string renderers. Pure functions of view-model data so they can
 * be unit-tested without a DOM; the app assigns the output via innerHTML. */

import type { ProofTreeDoc, ReportDocument, ValidationRecord } from "./types.js";
import { factLabel } from "./types.js";
import type { DiffRow, GraphModel, RiskBadge } from "./viewmodel.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Fixed three-colour scheme keyed to the cooperation-risk clauses; the
 * coordination colour marks unmitigated coordination needs. */
export const CLAUSE_COLOURS: Record<string, string> = {
  "free-riding": "#d4a017",
  "shirking": "#c0392b",
  "sub-goal optimization": "#8e44ad",
  "coordination": "#2471a3",
};

const NODE_STYLE: Record<string, { fill: string; shape: "circle" | "rect" }> = {
  agent: { fill: "#2c3e50", shape: "circle" },
  activity: { fill: "#1e8449", shape: "rect" },
  evaluation: { fill: "#7d6608", shape: "rect" },
};

export function renderGraphSvg(
  graph: GraphModel,
  layout: Record<string, { x: number; y: number }>,
  width = 720,
  height = 520,
): string {
  const parts: string[] = [];
  parts.push(
    `<svg viewBox="0 0 ${width} ${height}" xmlns="http://www.w3.org/2000/svg" ` +
    `class="scenario-graph" role="img">`,
  );
  for (const edge of graph.edges) {
    const a = layout[edge.source];
    const b = layout[edge.target];
    if (!a || !b) continue;
    const dash = edge.origin === "derived" ? ' stroke-dasharray="6 4"' : "";
    const colour = edge.origin === "derived" ? "#2471a3" : "#95a5a6";
    parts.push(
      `<g class="edge ${edge.origin}">` +
      `<line x1="${a.x}" y1="${a.y}" x2="${b.x}" y2="${b.y}" ` +
      `stroke="${colour}" stroke-width="1.4"${dash}></line>` +
      `<text x="${(a.x + b.x) / 2}" y="${(a.y + b.y) / 2 - 4}" ` +
      `font-size="9" fill="${colour}">${escapeHtml(edge.label)}</text></g>`,
    );
  }
  for (const badge of graph.badges.filter((b) => b.nodes.length === 2)) {
    const a = layout[badge.nodes[0]];
    const b = layout[badge.nodes[1]];
    if (!a || !b) continue;
    const colour = CLAUSE_COLOURS[badge.clause] ?? "#c0392b";
    const mx = (a.x + b.x) / 2;
    const my = (a.y + b.y) / 2;
    parts.push(
      `<g class="badge pair-badge" data-fact-id="${badge.factId}">` +
      `<line x1="${a.x}" y1="${a.y}" x2="${b.x}" y2="${b.y}" ` +
      `stroke="${colour}" stroke-width="2.5" opacity="0.55"></line>` +
      `<circle cx="${mx}" cy="${my}" r="9" fill="${colour}"></circle>` +
      `<title>${escapeHtml(factLabel(badge.fact))}</title>` +
      `<text x="${mx + 12}" y="${my + 3}" font-size="10" fill="${colour}">` +
      `${escapeHtml(badge.predicate)}</text></g>`,
    );
  }
  for (const node of graph.nodes) {
    const at = layout[node.id];
    if (!at) continue;
    const style = NODE_STYLE[node.kind];
    const shape = style.shape === "circle"
      ? `<circle cx="${at.x}" cy="${at.y}" r="14" fill="${style.fill}"></circle>`
      : `<rect x="${at.x - 16}" y="${at.y - 11}" width="32" height="22" rx="4" ` +
        `fill="${style.fill}"></rect>`;
    parts.push(
      `<g class="node ${node.kind}" data-entity-id="${escapeHtml(node.id)}">` +
      shape +
      `<title>${escapeHtml(node.label)}</title>` +
      `<text x="${at.x}" y="${at.y + 26}" font-size="10" text-anchor="middle" ` +
      `fill="#2c3e50">${escapeHtml(node.id)}</text></g>`,
    );
  }
  for (const badge of graph.badges.filter((b) => b.nodes.length === 1)) {
    const at = layout[badge.nodes[0]];
    if (!at) continue;
    const colour = CLAUSE_COLOURS[badge.clause] ?? "#c0392b";
    const offset = nodeBadgeOffset(graph.badges, badge);
    parts.push(
      `<g class="badge node-badge" data-fact-id="${badge.factId}">` +
      `<circle cx="${at.x + 14 + offset}" cy="${at.y - 14}" r="6" ` +
      `fill="${colour}"></circle>` +
      `<title>${escapeHtml(factLabel(badge.fact))}</title></g>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}

function nodeBadgeOffset(all: RiskBadge[], badge: RiskBadge): number {
  const siblings = all.filter(
    (b) => b.nodes.length === 1 && b.nodes[0] === badge.nodes[0],
  );
  return siblings.indexOf(badge) * 14;
}

export function renderProofTree(tree: ProofTreeDoc): string {
  const label = escapeHtml(factLabel(tree.fact));
  if (tree.children.length === 0) {
    const entity = tree.fact.args[0] ?? "";
    return (
      `<div class="proof-leaf" data-fact-id="${tree.factId}">` +
      `<a href="#" class="entity-link" data-entity-id="${escapeHtml(entity)}">` +
      `${label}</a> <span class="rule">[${escapeHtml(tree.rule)}]</span></div>`
    );
  }
  const children = tree.children.map(renderProofTree).join("");
  return (
    `<details class="proof-node" data-fact-id="${tree.factId}" open>` +
    `<summary>${label} <span class="rule">[${escapeHtml(tree.rule)}]</span>` +
    `</summary><div class="proof-children">${children}</div></details>`
  );
}

export function renderReportSections(report: ReportDocument): string {
  const titles: Record<string, string> = {
    coordinationNeeds: "Coordination needs",
    coordinationRisks: "Coordination risks",
    freeRidingRisks: "Free-riding risks",
    shirkRisks: "Shirk risks",
    subGoalOptimizationRisks: "Sub-goal optimization risks",
    cooperationRisks: "Cooperation risks",
    strategicSubstitutes: "Strategic substitutes (informational)",
  };
  const parts: string[] = [];
  for (const [key, title] of Object.entries(titles)) {
    const entries = report.sections[key] ?? [];
    parts.push(`<section class="report-section" data-section="${key}">`);
    parts.push(`<h3>${escapeHtml(title)} (${entries.length})</h3><ul>`);
    for (const entry of entries) {
      const clause = entry.clauses?.length
        ? ` <span class="clauses">[${escapeHtml(entry.clauses.join(", "))}]</span>`
        : "";
      parts.push(
        `<li><a href="#" class="fact-link" data-fact-id="${entry.factId}">` +
        `${escapeHtml(factLabel(entry.fact))}</a>${clause}<br>` +
        `<small>${escapeHtml(entry.text)}</small></li>`,
      );
    }
    parts.push("</ul></section>");
  }
  return parts.join("");
}

export function renderDiffRows(rows: DiffRow[]): string {
  if (rows.length === 0) {
    return '<p class="diff-empty">no changes</p>';
  }
  const body = rows
    .map((row) => {
      const cls = row.sign === "+" ? "diff-added" : "diff-removed";
      return `<li class="${cls}">${row.sign} ${escapeHtml(row.label)}</li>`;
    })
    .join("");
  return `<ul class="diff-rows">${body}</ul>`;
}

export function renderValidation(records: ValidationRecord[]): string {
  if (records.length === 0) return "";
  const items = records
    .map((v) =>
      `<li class="${v.severity.toLowerCase()}">${escapeHtml(v.severity)} ` +
      `${escapeHtml(v.code)}: ${escapeHtml(v.message)}</li>`)
    .join("");
  return `<div class="validation-banner"><ul>${items}</ul></div>`;
}
