// Page bootstrap: model upload box on the left, live session view on
// the right. Controls only ever reflect server-confirmed Ready domains;
// nothing is rendered optimistically.

import { ApiError, Client } from "./api.js";
import { render, renderError, Handlers } from "./dom.js";
import { parseModelTree, ModelTree } from "./modeltree.js";
import { initialState, mergeSnapshot, reduce, SessionState } from "./state.js";
import { deriveView } from "./view.js";

const API_BASE =
  new URLSearchParams(location.search).get("api") ?? "http://127.0.0.1:7070";

const client = new Client(API_BASE);

const editor = document.getElementById("editor") as HTMLTextAreaElement;
const loadBtn = document.getElementById("load") as HTMLButtonElement;
const banner = document.getElementById("banner") as HTMLElement;
const viewRoot = document.getElementById("view") as HTMLElement;

let tree: ModelTree | null = null;
let sessionId: string | null = null;
let state: SessionState | null = null;
let stopStream: (() => void) | null = null;

const SAMPLE = `feature Phone {
  mandatory Screen
  optional GPS
}
feature Screen {
  xor { Basic, HD }
}
attribute GPS.price : int[1..3]
constraint HD => GPS
`;

editor.value = SAMPLE;

function setBanner(text: string, isError: boolean): void {
  banner.textContent = text;
  banner.className = isError ? "error" : "info";
  banner.hidden = !text;
}

function repaint(): void {
  if (!tree || !state) return;
  render(viewRoot, deriveView(tree, state), handlers);
}

function onEvent(ev: { type: string; epoch: number }): void {
  if (!state) return;
  const before = state;
  state = reduce(state, ev as never);
  if (ev.type === "epoch" && state !== before) {
    refreshSnapshot(); // decisions list lives in the snapshot
  }
  repaint();
}

async function refreshSnapshot(): Promise<void> {
  if (!sessionId || !state) return;
  try {
    const snap = await client.snapshot(sessionId);
    state = mergeSnapshot(state, snap);
    repaint();
  } catch (err) {
    showError(err);
  }
}

function showError(err: unknown): void {
  if (err instanceof ApiError) {
    setBanner(`${err.body.code}: ${err.body.message}`, true);
  } else {
    setBanner(String(err), true);
  }
}

const handlers: Handlers = {
  toggleFeature(name, want) {
    if (!sessionId) return;
    client.postDecision(sessionId, name, { kind: "assign", value: want })
      .then(() => setBanner("", false))
      .catch((err) => {
        showError(err);
        repaint(); // drop the checkbox back to the confirmed state
      });
  },
  setAttribute(name, value) {
    if (!sessionId) return;
    client.postDecision(sessionId, name, { kind: "assign", value })
      .then(() => setBanner("", false))
      .catch((err) => {
        showError(err);
        repaint();
      });
  },
  setAttributeRange(name, lo, hi) {
    if (!sessionId) return;
    client.postDecision(sessionId, name, { kind: "range", lo, hi })
      .then(() => setBanner("", false))
      .catch((err) => {
        showError(err);
        repaint();
      });
  },
  retract(decisionId) {
    if (!sessionId) return;
    client.retract(sessionId, decisionId)
      .then(() => refreshSnapshot())
      .catch(showError);
  },
};

async function loadModel(): Promise<void> {
  const text = editor.value;
  if (!text.trim()) return;
  loadBtn.disabled = true;
  setBanner("", false);
  try {
    if (stopStream) stopStream();
    tree = parseModelTree(text);
    const model = await client.loadModel(text);
    const session = await client.createSession(model.modelId);
    sessionId = session.sessionId;
    state = initialState(session.state);
    stopStream = client.streamEvents(sessionId, onEvent, showError);
    repaint();
  } catch (err) {
    tree = null;
    state = null;
    showError(err);
    renderError(viewRoot, "load a valid model to start configuring");
  } finally {
    loadBtn.disabled = false;
  }
}

loadBtn.addEventListener("click", () => void loadModel());
editor.addEventListener("input", () => {
  loadBtn.disabled = !editor.value.trim(); // empty editor: upload disabled
});
