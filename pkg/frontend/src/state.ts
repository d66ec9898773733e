import type { CounterMap, IrResponse, VersionsInfo } from "./types.js";

export interface SelectionEvent {
  kind: "scd" | "sentence";
  id: number;
}

/** Client-side mirror of the current session; no model logic lives here. */
export interface SessionState {
  queryText: string;
  lastResponse: IrResponse | null;
  selections: SelectionEvent[];
  version: number;
  digest: string;
  counters: CounterMap;
}

export function initialState(): SessionState {
  return {
    queryText: "",
    lastResponse: null,
    selections: [],
    version: 0,
    digest: "",
    counters: {},
  };
}

export function canSubmit(state: SessionState): boolean {
  return state.queryText.trim().length > 0;
}

export function recordResponse(state: SessionState, response: IrResponse): SessionState {
  return { ...state, lastResponse: response };
}

export function recordSelection(state: SessionState, event: SelectionEvent): SessionState {
  return { ...state, selections: [...state.selections, event] };
}

export function recordVersion(state: SessionState, info: VersionsInfo): SessionState {
  return { ...state, version: info.current, digest: info.digest };
}

export function counterFor(counters: CounterMap, kind: "scd" | "sentence", id: number) {
  return counters[`${kind}:${id}`] ?? { rc: 0, sc: 0 };
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/**
 * Render the ranked list for the last response. Pure: the output cards
 * correspond 1:1 to the response entries.
 */
export function renderEntries(state: SessionState): string {
  const response = state.lastResponse;
  if (response === null) {
    return "";
  }
  if (response.entries.length === 0) {
    return '<p class="empty">No matching descriptions for this query.</p>';
  }
  return response.entries
    .map((entry) => {
      const counters = counterFor(state.counters, "scd", entry.scdId);
      const sentences = entry.sentences
        .map(
          (s) =>
            `<li data-window-id="${s.windowId}">` +
            `<button class="select-sentence" data-window-id="${s.windowId}">select</button> ` +
            `<button class="faulty-sentence" data-window-id="${s.windowId}">faulty sentence</button> ` +
            `<button class="faulty-association" data-window-id="${s.windowId}">wrong topic</button> ` +
            `<span class="doc">${escapeHtml(s.docId)}</span>: ${escapeHtml(s.text)}</li>`,
        )
        .join("");
      const related = entry.related
        .map((r) => `<li>${escapeHtml(r.kind)} &rarr; SCD ${r.scdId} (${escapeHtml(r.factor)})</li>`)
        .join("");
      return (
        `<article class="scd-card" data-scd-id="${entry.scdId}">` +
        `<h3>${escapeHtml(entry.label ?? "(unlabeled)")}` +
        ` <small>score ${entry.score.toFixed(4)}</small></h3>` +
        `<p class="counters">responses ${counters.rc}, selections ${counters.sc} ` +
        `<button class="select-scd" data-scd-id="${entry.scdId}">select SCD</button></p>` +
        `<ul class="sentences">${sentences}</ul>` +
        (related ? `<ul class="related">${related}</ul>` : "") +
        `</article>`
      );
    })
    .join("");
}

export function renderVersionList(info: VersionsInfo): string {
  return info.versions
    .map((v) => {
      const current = v === info.current ? " (current)" : "";
      return (
        `<li data-version="${v}">version ${v}${current} ` +
        `<button class="restore" data-version="${v}">restore</button></li>`
      );
    })
    .join("");
}

export function renderIfiSummary(applied: { op: string; windowId: number; scdId: number }[]): string {
  if (applied.length === 0) {
    return "<p>No maintenance actions were necessary.</p>";
  }
  return (
    "<ul>" +
    applied
      .map((a) =>
        a.op === "fresh"
          ? `<li>removed sentence ${a.windowId} (from SCD ${a.scdId})</li>`
          : `<li>reassigned sentence ${a.windowId} out of SCD ${a.scdId}</li>`,
      )
      .join("") +
    "</ul>"
  );
}
