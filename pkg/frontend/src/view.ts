// DOM builders for the console panels. Pure functions from state to
// elements; wiring lives in main.ts. Answer text, witness values, optimum
// and note strings all come straight from the service documents.

import type { QueryRecord } from "./state.js";
import type {
  ConstraintRow,
  ErrorPayload,
  InstanceRow,
  SolveResult,
} from "./types.js";
import { isTimeout } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  cls?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function describeParams(params: QueryRecord["params"]): string {
  const parts: string[] = ["solve"];
  if (params.project && params.project.length > 0) {
    parts.push(`project=[${params.project.join(", ")}]`);
  }
  if (params.minimize) parts.push(`minimize=${params.minimize}`);
  return parts.join(" ");
}

/** Witness table: one row per feature, one column per instance. A cell is
 * marked changed when it differs from the first instance's value for the
 * same feature, which is the factual column in two-instance queries. */
export function witnessTable(
  witness: Record<string, Record<string, string>>,
): HTMLTableElement {
  const names = Object.keys(witness);
  const features: string[] = [];
  for (const inst of names) {
    for (const f of Object.keys(witness[inst] ?? {})) {
      if (!features.includes(f)) features.push(f);
    }
  }
  const table = el("table", "witness");
  const head = table.createTHead().insertRow();
  head.appendChild(el("th", undefined, "feature"));
  for (const inst of names) head.appendChild(el("th", undefined, inst));
  const body = table.createTBody();
  for (const f of features) {
    const row = body.insertRow();
    row.appendChild(el("th", undefined, f));
    const baseline = names.length > 0 ? witness[names[0]!]?.[f] : undefined;
    names.forEach((inst, i) => {
      const value = witness[inst]?.[f];
      const cell = row.insertCell();
      cell.textContent = value ?? "";
      const comparable = value !== undefined && baseline !== undefined;
      if (i > 0 && names.length > 1 && comparable && value !== baseline) {
        cell.classList.add("changed");
      }
    });
  }
  return table;
}

function memberBlock(
  rows: { text: string }[],
  witness: Record<string, Record<string, string>> | undefined,
  index: number,
): HTMLElement {
  const block = el("div", "member");
  block.appendChild(el("div", "member-title", `answer ${index + 1}`));
  const rules = el("div", "rules");
  if (rows.length === 0) {
    rules.appendChild(el("div", "rule", "true"));
  }
  for (const row of rows) {
    rules.appendChild(el("div", "rule", row.text));
  }
  block.appendChild(rules);
  if (witness) block.appendChild(witnessTable(witness));
  return block;
}

export function answerView(
  record: QueryRecord | null,
  historical: boolean,
  stale: boolean,
): HTMLElement {
  const panel = el("div", "answer-view");
  if (record === null) {
    panel.appendChild(
      el("div", "empty", "no answer yet; declare instances and solve"),
    );
    return panel;
  }
  const tags = el("div", "tags");
  tags.appendChild(el("span", "query", describeParams(record.params)));
  if (historical) tags.appendChild(el("span", "tag historical", "history"));
  if (!historical && stale) {
    tags.appendChild(
      el("span", "tag stale", "session changed; solve again to refresh"),
    );
  }
  panel.appendChild(tags);

  const result: SolveResult = record.result;
  if (isTimeout(result)) {
    panel.appendChild(
      el(
        "div",
        "timeout",
        `solve budget exhausted after ${result.solved_members} members`,
      ),
    );
    return panel;
  }
  if (result.members.length === 0) {
    panel.appendChild(el("div", "empty no-solution", "no solution"));
    return panel;
  }
  result.members.forEach((rows, i) => {
    panel.appendChild(memberBlock(rows, result.witnesses?.[i], i));
  });
  if (result.min !== undefined) {
    const line = el("div", "optimum", `min = ${result.min}`);
    if (result.attained === false) {
      line.appendChild(el("span", "tag unattained", "infimum not attained"));
    }
    panel.appendChild(line);
  }
  if (result.note) {
    panel.appendChild(el("div", "note", `note: ${result.note}`));
  }
  return panel;
}

/** Inline constraint error, with a caret under the offending column. */
export function constraintErrorView(
  err: ErrorPayload,
  source: string,
): HTMLElement {
  const box = el("div", "constraint-error");
  const where =
    err.column !== undefined ? ` (column ${err.column})` : "";
  box.appendChild(el("div", "message", `${err.message}${where}`));
  if (err.column !== undefined && source !== "") {
    const line =
      err.line !== undefined && err.line > 1
        ? source.split("\n")[err.line - 1] ?? source
        : source.split("\n")[0] ?? source;
    const caret = " ".repeat(Math.max(0, err.column - 1)) + "^";
    const pre = el("pre", "caret");
    pre.textContent = `${line}\n${caret}`;
    box.appendChild(pre);
  }
  return box;
}

export function constraintList(
  constraints: ConstraintRow[],
  disabled: boolean,
  onRetract: (cid: number) => void,
): HTMLElement {
  const list = el("div", "constraint-list");
  if (constraints.length === 0) {
    list.appendChild(el("div", "empty", "no constraints"));
    return list;
  }
  for (const c of constraints) {
    const row = el("div", "constraint");
    row.appendChild(el("code", undefined, c.text));
    const btn = el("button", "retract", "retract");
    btn.disabled = disabled;
    btn.addEventListener("click", () => onRetract(c.id));
    row.appendChild(btn);
    list.appendChild(row);
  }
  return list;
}

export function instanceList(instances: InstanceRow[]): HTMLElement {
  const list = el("div", "instance-list");
  if (instances.length === 0) {
    list.appendChild(el("div", "empty", "no instances declared"));
    return list;
  }
  for (const inst of instances) {
    const extra = inst.minconf !== undefined ? `, minconf ${inst.minconf}` : "";
    list.appendChild(
      el(
        "div",
        "instance",
        `${inst.name}: ${inst.model_id} = ${inst.label}${extra}`,
      ),
    );
  }
  return list;
}

export function historyStrip(
  history: QueryRecord[],
  viewing: number | null,
  onPick: (index: number | null) => void,
): HTMLElement {
  const strip = el("div", "history-strip");
  history.forEach((rec, i) => {
    const btn = el("button", "history-entry", `#${rec.seq} ${describeParams(rec.params)}`);
    if (viewing === i) btn.classList.add("active");
    btn.addEventListener("click", () => onPick(i));
    strip.appendChild(btn);
  });
  if (history.length > 0 && viewing !== null) {
    const live = el("button", "history-entry live", "latest");
    live.addEventListener("click", () => onPick(null));
    strip.appendChild(live);
  }
  return strip;
}

/** Slider notches map to twentieths; whole one collapses to "1". */
export function minconfLabel(notch: number): string | undefined {
  if (notch <= 0) return undefined;
  if (notch >= 20) return "1";
  return `${notch}/20`;
}
