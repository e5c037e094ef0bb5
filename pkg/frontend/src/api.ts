/**
 * Thin client for the session server. The HTTP and WebSocket transports are
 * injected so tests (and Node, which ships no WebSocket client) can swap in
 * fakes or fall back to polling without touching the call sites.
 */

import type { StateDoc, TurnDoc } from "./state.js";
import type { CreateRequest } from "./form.js";

export type HttpLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface WsLike {
  // handler params are any so a browser WebSocket satisfies this shape
  onmessage: ((ev: any) => void) | null;
  onerror: ((ev: any) => void) | null;
  onclose: ((ev: any) => void) | null;
  close(): void;
}

export type WsFactory = (url: string) => WsLike;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

/** The server refused a choice: the round moved on or the edge was never offered. */
export class ConflictError extends ApiError {
  constructor(detail: string) {
    super(409, detail);
    this.name = "ConflictError";
  }
}

export interface CreatedSession extends TurnDoc {
  id: string;
}

export interface StreamHandle {
  close(): void;
}

export interface ApiClient {
  createSession(req: CreateRequest): Promise<CreatedSession>;
  getState(id: string): Promise<StateDoc>;
  submitChoice(id: string, edgeIndex: number): Promise<TurnDoc>;
  fetchTranscript(id: string): Promise<string>;
  openStream(id: string, onTurn: (doc: TurnDoc) => void): StreamHandle;
}

export interface ClientOptions {
  http?: HttpLike;
  wsFactory?: WsFactory;
  pollMs?: number;
}

async function readDetail(response: Response): Promise<string> {
  try {
    const doc = await response.json();
    if (doc && typeof doc.detail === "string") return doc.detail;
    return JSON.stringify(doc);
  } catch {
    return `HTTP ${response.status}`;
  }
}

export function makeClient(base: string, options: ClientOptions = {}): ApiClient {
  const http: HttpLike = options.http ?? ((url, init) => fetch(url, init));
  const root = base.replace(/\/$/, "");
  const pollMs = options.pollMs ?? 250;

  async function request(path: string, init?: RequestInit): Promise<Response> {
    const response = await http(`${root}${path}`, init);
    if (response.ok) return response;
    const detail = await readDetail(response);
    if (response.status === 409) throw new ConflictError(detail);
    throw new ApiError(response.status, detail);
  }

  function streamByPolling(id: string, onTurn: (doc: TurnDoc) => void): StreamHandle {
    let last = "";
    let stopped = false;
    const timer = setInterval(async () => {
      let doc: StateDoc;
      try {
        doc = (await (await request(`/sessions/${id}`)).json()) as StateDoc;
      } catch {
        return; // transient poll failure; the next tick retries
      }
      if (stopped) return;
      const turn: TurnDoc = doc.result ? { result: doc.result } : { offer: doc.offer };
      const key = JSON.stringify(turn);
      if (key === last) return;
      last = key;
      onTurn(turn);
      if (doc.result) handle.close();
    }, pollMs);
    const handle = {
      close() {
        stopped = true;
        clearInterval(timer);
      },
    };
    return handle;
  }

  function streamBySocket(id: string, onTurn: (doc: TurnDoc) => void): StreamHandle {
    const wsUrl = `${root.replace(/^http/, "ws")}/sessions/${id}/stream`;
    let ws: WsLike | null = null;
    let fallback: StreamHandle | null = null;
    let gotMessage = false;
    let closed = false;
    try {
      ws = options.wsFactory!(wsUrl);
    } catch {
      return streamByPolling(id, onTurn);
    }
    ws.onmessage = (ev) => {
      gotMessage = true;
      onTurn(JSON.parse(String(ev.data)) as TurnDoc);
    };
    const degrade = () => {
      // a socket that dies before delivering anything gets a polling stand-in
      if (!closed && !gotMessage && fallback === null) {
        fallback = streamByPolling(id, onTurn);
      }
    };
    ws.onerror = degrade;
    ws.onclose = degrade;
    return {
      close() {
        closed = true;
        fallback?.close();
        ws?.close();
      },
    };
  }

  return {
    async createSession(req: CreateRequest): Promise<CreatedSession> {
      const response = await request("/sessions", {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(req),
      });
      return (await response.json()) as CreatedSession;
    },

    async getState(id: string): Promise<StateDoc> {
      return (await (await request(`/sessions/${id}`)).json()) as StateDoc;
    },

    async submitChoice(id: string, edgeIndex: number): Promise<TurnDoc> {
      const response = await request(`/sessions/${id}/choice`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ edge: edgeIndex }),
      });
      return (await response.json()) as TurnDoc;
    },

    async fetchTranscript(id: string): Promise<string> {
      return await (await request(`/sessions/${id}/transcript`)).text();
    },

    openStream(id: string, onTurn: (doc: TurnDoc) => void): StreamHandle {
      if (options.wsFactory) return streamBySocket(id, onTurn);
      return streamByPolling(id, onTurn);
    },
  };
}
