// Thin client for the configuration service's REST and event APIs.

import type {
  ApiErrorBody,
  ModelResponse,
  RestrictionJson,
  SessionResponse,
  SnapshotJson,
  StreamEvent,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, public body: ApiErrorBody) {
    super(`${body.code}: ${body.message}`);
  }
}

async function check(resp: Response): Promise<Response> {
  if (resp.ok) return resp;
  let body: ApiErrorBody;
  try {
    body = (await resp.json()) as ApiErrorBody;
  } catch {
    body = { code: "http_error", message: resp.statusText };
  }
  throw new ApiError(resp.status, body);
}

export class Client {
  constructor(public base: string) {}

  async loadModel(text: string): Promise<ModelResponse> {
    const resp = await check(await fetch(`${this.base}/models`, {
      method: "POST",
      headers: { "content-type": "text/plain; charset=utf-8" },
      body: text,
    }));
    return resp.json();
  }

  async createSession(modelId: string): Promise<SessionResponse> {
    const resp = await check(await fetch(`${this.base}/sessions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ modelId }),
    }));
    return resp.json();
  }

  async snapshot(sessionId: string): Promise<SnapshotJson> {
    const resp = await check(
      await fetch(`${this.base}/sessions/${sessionId}`));
    return resp.json();
  }

  async postDecision(sessionId: string, variable: string,
                     restriction: RestrictionJson):
      Promise<{ decisionId: number; epoch: number }> {
    const resp = await check(
      await fetch(`${this.base}/sessions/${sessionId}/decisions`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ variable, restriction }),
      }));
    return resp.json();
  }

  async retract(sessionId: string, decisionId: number): Promise<void> {
    await check(await fetch(
      `${this.base}/sessions/${sessionId}/decisions/${decisionId}`,
      { method: "DELETE" }));
  }

  /**
   * Consume the newline-delimited JSON event stream. Returns a function
   * that aborts the stream. Blank keep-alive lines are skipped.
   */
  streamEvents(sessionId: string, onEvent: (ev: StreamEvent) => void,
               onError?: (err: unknown) => void): () => void {
    const controller = new AbortController();
    (async () => {
      try {
        const resp = await check(await fetch(
          `${this.base}/sessions/${sessionId}/events`,
          { signal: controller.signal }));
        const reader = resp.body!.getReader();
        const decoder = new TextDecoder();
        let buffer = "";
        for (;;) {
          const { done, value } = await reader.read();
          if (done) break;
          buffer += decoder.decode(value, { stream: true });
          let nl;
          while ((nl = buffer.indexOf("\n")) >= 0) {
            const line = buffer.slice(0, nl).trim();
            buffer = buffer.slice(nl + 1);
            if (line) onEvent(JSON.parse(line) as StreamEvent);
          }
        }
      } catch (err) {
        if (!controller.signal.aborted && onError) onError(err);
      }
    })();
    return () => controller.abort();
  }
}
