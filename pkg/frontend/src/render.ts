// DOM rendering: a full redraw from (state, suggestions), so identical
// state always produces an identical document.

import type { EntityHit } from "./api.js";
import { latestResults, type ChipSlot, type UiState } from "./state.js";

export type ViewRefs = {
  errorBanner: HTMLElement;
  noticeBanner: HTMLElement;
  searchInput: HTMLInputElement;
  slotSelect: HTMLSelectElement;
  suggestionList: HTMLElement;
  anchorName: HTMLElement;
  positiveChips: HTMLElement;
  negativeChips: HTMLElement;
  kInput: HTMLInputElement;
  typeFilterInput: HTMLInputElement;
  stepButton: HTMLButtonElement;
  backButton: HTMLButtonElement;
  breadcrumb: HTMLElement;
  resultsBody: HTMLElement;
  sessionLabel: HTMLElement;
};

export function buildSkeleton(root: HTMLElement): ViewRefs {
  root.innerHTML = `
    <div id="error-banner" class="banner banner-error" hidden></div>
    <div id="notice-banner" class="banner banner-notice"></div>
    <header>
      <h1>Embedding-space browser</h1>
      <span id="session-label" class="session-label"></span>
    </header>
    <section class="picker">
      <label for="entity-search">Find entity</label>
      <input id="entity-search" autocomplete="off" placeholder="type a name…" />
      <select id="slot-select" aria-label="Where the picked entity goes">
        <option value="anchor">as anchor</option>
        <option value="positive">as positive bias</option>
        <option value="negative">as negative bias</option>
      </select>
      <ul id="suggestions" role="listbox"></ul>
    </section>
    <section class="query">
      <div>Anchor: <strong id="anchor-name">—</strong></div>
      <div class="chip-row">Positive bias: <span id="positive-chips"></span></div>
      <div class="chip-row">Negative bias: <span id="negative-chips"></span></div>
      <label>k <input id="k-input" type="number" min="1" value="10" /></label>
      <label>type <input id="type-filter-input" placeholder="any" /></label>
      <button id="step-button">Step</button>
      <button id="back-button">Back</button>
    </section>
    <nav id="breadcrumb" class="breadcrumb"></nav>
    <table class="results">
      <thead><tr><th>#</th><th>entity</th><th>type</th><th>score</th><th></th></tr></thead>
      <tbody id="results-body"></tbody>
    </table>
  `;
  const grab = <T extends HTMLElement>(id: string) => root.querySelector(`#${id}`) as T;
  return {
    errorBanner: grab("error-banner"),
    noticeBanner: grab("notice-banner"),
    searchInput: grab<HTMLInputElement>("entity-search"),
    slotSelect: grab<HTMLSelectElement>("slot-select"),
    suggestionList: grab("suggestions"),
    anchorName: grab("anchor-name"),
    positiveChips: grab("positive-chips"),
    negativeChips: grab("negative-chips"),
    kInput: grab<HTMLInputElement>("k-input"),
    typeFilterInput: grab<HTMLInputElement>("type-filter-input"),
    stepButton: grab<HTMLButtonElement>("step-button"),
    backButton: grab<HTMLButtonElement>("back-button"),
    breadcrumb: grab("breadcrumb"),
    resultsBody: grab("results-body"),
    sessionLabel: grab("session-label"),
  };
}

function renderChips(container: HTMLElement, slot: ChipSlot, names: string[]) {
  container.textContent = "";
  for (const name of names) {
    const chip = container.ownerDocument.createElement("span");
    chip.className = "chip";
    chip.dataset.slot = slot;
    chip.dataset.name = name;
    chip.textContent = name;
    const remove = container.ownerDocument.createElement("button");
    remove.className = "chip-remove";
    remove.dataset.slot = slot;
    remove.dataset.name = name;
    remove.textContent = "×";
    chip.appendChild(remove);
    container.appendChild(chip);
  }
}

function breadcrumbText(state: UiState): string {
  if (!state.trail) return "";
  const parts = [state.trail.anchor];
  for (const step of state.trail.steps) {
    const plus = step.positives.length ? `+[${step.positives.join(", ")}]` : "";
    const minus = step.negatives.length ? `−[${step.negatives.join(", ")}]` : "";
    parts.push([plus, minus].filter(Boolean).join(" ") || "(no shift)");
  }
  return parts.join("  ›  ");
}

export function render(refs: ViewRefs, state: UiState, suggestions: EntityHit[], activeSuggestion: number) {
  const doc = refs.resultsBody.ownerDocument;

  refs.errorBanner.hidden = state.error === null;
  refs.errorBanner.textContent = state.error ?? "";
  refs.noticeBanner.textContent = state.notice ?? "";
  refs.anchorName.textContent = state.anchor ?? "—";
  refs.sessionLabel.textContent = state.sessionId ? `session ${state.sessionId}` : "no session";

  refs.suggestionList.textContent = "";
  suggestions.forEach((hit, index) => {
    const item = doc.createElement("li");
    item.setAttribute("role", "option");
    item.dataset.name = hit.name;
    item.className = index === activeSuggestion ? "suggestion active" : "suggestion";
    item.textContent = hit.type ? `${hit.name} · ${hit.type}` : hit.name;
    refs.suggestionList.appendChild(item);
  });

  renderChips(refs.positiveChips, "positive", state.pendingPositives);
  renderChips(refs.negativeChips, "negative", state.pendingNegatives);

  // avoid clobbering an input the user is editing
  if (doc.activeElement !== refs.kInput) refs.kInput.value = String(state.k);
  if (doc.activeElement !== refs.typeFilterInput) {
    refs.typeFilterInput.value = state.typeFilter ?? "";
  }

  refs.stepButton.disabled = state.stepInFlight || state.sessionId === null;
  refs.backButton.disabled =
    state.stepInFlight || state.sessionId === null || (state.trail?.steps.length ?? 0) === 0;

  refs.breadcrumb.textContent = breadcrumbText(state);

  refs.resultsBody.textContent = "";
  latestResults(state).forEach((row, index) => {
    const tr = doc.createElement("tr");
    const cells = [String(index + 1), row.entity, row.type ?? "—", String(row.score)];
    for (const value of cells) {
      const td = doc.createElement("td");
      td.textContent = value;
      tr.appendChild(td);
    }
    const actions = doc.createElement("td");
    for (const slot of ["positive", "negative"] as const) {
      const promote = doc.createElement("button");
      promote.className = "promote";
      promote.dataset.slot = slot;
      promote.dataset.name = row.entity;
      promote.textContent = slot === "positive" ? "+bias" : "−bias";
      actions.appendChild(promote);
    }
    tr.appendChild(actions);
    refs.resultsBody.appendChild(tr);
  });
}
