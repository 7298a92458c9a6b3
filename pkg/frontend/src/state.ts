// UI state and its transitions. The trail always holds the latest
// service-reported summary verbatim; transitions are pure so a recorded
// interaction replays to identical state.

import type { TrailSummary } from "./api.js";

export type ChipSlot = "positive" | "negative";

export type UiState = {
  anchor: string | null;
  sessionId: string | null;
  trail: TrailSummary | null;
  pendingPositives: string[];
  pendingNegatives: string[];
  typeFilter: string | null;
  k: number;
  stepInFlight: boolean;
  error: string | null;
  notice: string | null;
};

export function initialState(): UiState {
  return {
    anchor: null,
    sessionId: null,
    trail: null,
    pendingPositives: [],
    pendingNegatives: [],
    typeFilter: null,
    k: 10,
    stepInFlight: false,
    error: null,
    notice: "Sessions are in-memory: a service restart invalidates this URL.",
  };
}

export function withAnchor(state: UiState, anchor: string, sessionId: string): UiState {
  return {
    ...initialState(),
    anchor,
    sessionId,
    typeFilter: state.typeFilter,
    k: state.k,
    notice: state.notice,
  };
}

export function withChip(state: UiState, slot: ChipSlot, name: string): UiState {
  const key = slot === "positive" ? "pendingPositives" : "pendingNegatives";
  if (state[key].includes(name)) return state;
  return { ...state, [key]: [...state[key], name], error: null };
}

export function withoutChip(state: UiState, slot: ChipSlot, name: string): UiState {
  const key = slot === "positive" ? "pendingPositives" : "pendingNegatives";
  return { ...state, [key]: state[key].filter((n) => n !== name) };
}

export function stepStarted(state: UiState): UiState {
  return { ...state, stepInFlight: true, error: null };
}

export function trailLoaded(state: UiState, trail: TrailSummary): UiState {
  return {
    ...state,
    trail,
    stepInFlight: false,
    pendingPositives: [],
    pendingNegatives: [],
    error: null,
  };
}

export function requestFailed(state: UiState, message: string): UiState {
  return { ...state, stepInFlight: false, error: message };
}

export function latestResults(state: UiState) {
  const steps = state.trail?.steps ?? [];
  return steps.length ? steps[steps.length - 1]!.results : [];
}
