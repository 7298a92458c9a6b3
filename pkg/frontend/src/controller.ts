// Event wiring: debounced entity search, slot-aware picking, step/back with
// at most one in-flight step, and promote-result-to-bias. After every
// mutation the trail is re-fetched from the service, which stays the single
// source of truth for what the UI shows.

import { Api, ServiceError, type EntityHit } from "./api.js";
import { buildSkeleton, render, type ViewRefs } from "./render.js";
import {
  initialState,
  requestFailed,
  stepStarted,
  trailLoaded,
  withAnchor,
  withChip,
  withoutChip,
  type ChipSlot,
  type UiState,
} from "./state.js";

export type ControllerOptions = {
  debounceMs?: number;
  onSessionChange?: (sessionId: string | null) => void;
};

function describe(error: unknown): string {
  if (error instanceof ServiceError) {
    if (error.code === "unknown_entity") return `unknown entity: ${String(error.body.name)}`;
    if (error.code === "unknown_session") return "session not found (it may have expired)";
    if (error.code === "at_session_start") return "already at the session start";
    return `service error: ${error.code}`;
  }
  return "service unreachable";
}

export class BrowseController {
  state: UiState = initialState();
  suggestions: EntityHit[] = [];
  activeSuggestion = -1;
  readonly refs: ViewRefs;

  private readonly debounceMs: number;
  private readonly onSessionChange: (sessionId: string | null) => void;
  private searchTimer: ReturnType<typeof setTimeout> | null = null;
  private searchSeq = 0;

  constructor(root: HTMLElement, readonly api: Api, options: ControllerOptions = {}) {
    this.debounceMs = options.debounceMs ?? 150;
    this.onSessionChange = options.onSessionChange ?? (() => {});
    this.refs = buildSkeleton(root);
    this.wire();
    this.render();
  }

  render() {
    render(this.refs, this.state, this.suggestions, this.activeSuggestion);
  }

  private wire() {
    this.refs.searchInput.addEventListener("input", () => {
      this.queueSearch(this.refs.searchInput.value.trim());
    });
    this.refs.searchInput.addEventListener("keydown", (event) => {
      if (event.key === "ArrowDown" || event.key === "ArrowUp") {
        event.preventDefault();
        if (!this.suggestions.length) return;
        const delta = event.key === "ArrowDown" ? 1 : -1;
        const n = this.suggestions.length;
        this.activeSuggestion = (this.activeSuggestion + delta + n) % n;
        this.render();
      } else if (event.key === "Enter" && this.activeSuggestion >= 0) {
        const hit = this.suggestions[this.activeSuggestion];
        if (hit) void this.pick(hit.name);
      }
    });
    this.refs.suggestionList.addEventListener("click", (event) => {
      const name = (event.target as HTMLElement).closest("li")?.dataset.name;
      if (name) void this.pick(name);
    });
    this.refs.kInput.addEventListener("change", () => {
      const k = Number.parseInt(this.refs.kInput.value, 10);
      if (Number.isFinite(k) && k >= 1) this.state = { ...this.state, k };
      this.render();
    });
    this.refs.typeFilterInput.addEventListener("change", () => {
      const value = this.refs.typeFilterInput.value.trim();
      this.state = { ...this.state, typeFilter: value || null };
      this.render();
    });
    this.refs.stepButton.addEventListener("click", () => void this.step());
    this.refs.backButton.addEventListener("click", () => void this.back());
    const chipHandler = (event: Event) => {
      const el = event.target as HTMLElement;
      if (el.classList.contains("chip-remove")) {
        this.state = withoutChip(this.state, el.dataset.slot as ChipSlot, el.dataset.name!);
        this.render();
      }
    };
    this.refs.positiveChips.addEventListener("click", chipHandler);
    this.refs.negativeChips.addEventListener("click", chipHandler);
    this.refs.resultsBody.addEventListener("click", (event) => {
      const el = event.target as HTMLElement;
      if (el.classList.contains("promote")) {
        this.promote(el.dataset.name!, el.dataset.slot as ChipSlot);
      }
    });
  }

  private queueSearch(text: string) {
    if (this.searchTimer !== null) clearTimeout(this.searchTimer);
    if (!text) {
      this.suggestions = [];
      this.activeSuggestion = -1;
      this.render();
      return;
    }
    this.searchTimer = setTimeout(() => void this.runSearch(text), this.debounceMs);
  }

  async runSearch(text: string) {
    const seq = ++this.searchSeq;
    try {
      const hits = await this.api.searchEntities(text, this.state.typeFilter);
      if (seq !== this.searchSeq) return; // a newer search superseded this one
      this.suggestions = hits;
      this.activeSuggestion = hits.length ? 0 : -1;
    } catch (error) {
      if (seq !== this.searchSeq) return;
      this.suggestions = [];
      this.activeSuggestion = -1;
      this.state = requestFailed(this.state, describe(error));
    }
    this.render();
  }

  async pick(name: string) {
    const slot = this.refs.slotSelect.value;
    this.suggestions = [];
    this.activeSuggestion = -1;
    this.refs.searchInput.value = "";
    if (slot === "anchor") {
      await this.startSession(name);
    } else {
      this.state = withChip(this.state, slot as ChipSlot, name);
    }
    this.render();
  }

  promote(name: string, slot: ChipSlot) {
    this.state = withChip(this.state, slot, name);
    this.render();
  }

  async startSession(anchor: string) {
    try {
      const sessionId = await this.api.createSession(anchor);
      const trail = await this.api.trail(sessionId);
      this.state = trailLoaded(withAnchor(this.state, anchor, sessionId), trail);
      this.onSessionChange(sessionId);
    } catch (error) {
      this.state = requestFailed(this.state, describe(error));
    }
    this.render();
  }

  async resume(sessionId: string) {
    try {
      const trail = await this.api.trail(sessionId);
      this.state = trailLoaded(withAnchor(this.state, trail.anchor, sessionId), trail);
      this.onSessionChange(sessionId);
    } catch (error) {
      this.state = requestFailed(this.state, describe(error));
    }
    this.render();
  }

  async step() {
    const { sessionId, stepInFlight } = this.state;
    if (!sessionId || stepInFlight) return;
    this.state = stepStarted(this.state);
    this.render();
    try {
      await this.api.step(
        sessionId,
        this.state.pendingPositives,
        this.state.pendingNegatives,
        this.state.k,
        this.state.typeFilter,
      );
      this.state = trailLoaded(this.state, await this.api.trail(sessionId));
    } catch (error) {
      this.state = requestFailed(this.state, describe(error));
    }
    this.render();
  }

  async back() {
    const { sessionId, stepInFlight } = this.state;
    if (!sessionId || stepInFlight) return;
    try {
      await this.api.back(sessionId);
      this.state = trailLoaded(this.state, await this.api.trail(sessionId));
    } catch (error) {
      this.state = requestFailed(this.state, describe(error));
    }
    this.render();
  }
}
