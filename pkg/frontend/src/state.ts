// Client-side session state: last snapshot data plus events applied on
// top. The reducer is pure; replaying the same events over the same
// base state always reproduces the same state (and therefore the same
// rendered view).

import type {
  DecisionJson,
  Interval,
  SnapshotJson,
  StreamEvent,
} from "./types.js";

export interface SessionState {
  epoch: number;
  complete: boolean;
  decisions: DecisionJson[];
  /** Ready domains for the current epoch only. */
  ready: Map<string, Interval[]>;
  /** Every model variable name, in the server's canonical order. */
  variableOrder: string[];
}

export function initialState(snapshot: SnapshotJson): SessionState {
  const ready = new Map<string, Interval[]>();
  for (const [name, entry] of Object.entries(snapshot.variables)) {
    if (entry.ready && entry.values) ready.set(name, entry.values);
  }
  return {
    epoch: snapshot.epoch,
    complete: !snapshot.computing,
    decisions: snapshot.decisions,
    ready,
    variableOrder: Object.keys(snapshot.variables),
  };
}

/** Apply one stream event. Events from superseded epochs are discarded,
 * so no control can ever reflect a stale epoch's domains. */
export function reduce(state: SessionState, event: StreamEvent): SessionState {
  if (event.type === "epoch") {
    if (event.epoch < state.epoch) return state; // stale replay
    if (event.epoch === state.epoch) return state;
    return { ...state, epoch: event.epoch, complete: false, ready: new Map() };
  }
  if (event.epoch !== state.epoch) return state; // stale or early
  if (event.type === "variableReady") {
    const ready = new Map(state.ready);
    ready.set(event.variable, event.values);
    return { ...state, ready };
  }
  return { ...state, complete: true };
}

/** Merge a freshly fetched snapshot (authoritative for the decision
 * list) without losing events that arrived after it was taken. */
export function mergeSnapshot(state: SessionState,
                              snapshot: SnapshotJson): SessionState {
  if (snapshot.epoch < state.epoch) return state;
  const base = snapshot.epoch > state.epoch
    ? initialState(snapshot)
    : state;
  const ready = new Map(base.ready);
  for (const [name, entry] of Object.entries(snapshot.variables)) {
    if (entry.ready && entry.values && !ready.has(name)) {
      ready.set(name, entry.values);
    }
  }
  return {
    ...base,
    decisions: snapshot.decisions,
    ready,
    complete: base.complete || !snapshot.computing,
  };
}
