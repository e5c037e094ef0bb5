/**
 * Game controller: owns the view, the one in-flight request, and the
 * optimistic highlight. The reconciliation rules live in a pure reducer
 * so the awkward interleavings (ack vs. stream vs. conflict) are testable
 * without a server.
 */

import { ApiClient, ConflictError } from "./api.js";
import type { StreamHandle } from "./api.js";
import {
  StateDoc,
  TurnDoc,
  ViewState,
  applyChoice,
  applyTurn,
  isOffered,
  turnMatches,
  viewFromState,
} from "./state.js";

/** A choice sent but not yet settled; `round` is the round it was issued at. */
export interface Pending {
  round: number;
  chosen: number;
  other: number;
}

export type GameEvent =
  | { kind: "ack"; doc: TurnDoc }
  | { kind: "stream"; doc: TurnDoc }
  | { kind: "conflict" }
  | { kind: "state"; doc: StateDoc };

export interface Step {
  view: ViewState;
  pending: Pending | null;
  refetch: boolean;
}

export function reconcile(view: ViewState, pending: Pending | null, ev: GameEvent): Step {
  switch (ev.kind) {
    case "state":
      return { view: viewFromState(ev.doc), pending: null, refetch: false };
    case "conflict":
      return { view, pending: null, refetch: true };
    case "ack": {
      if (pending && pending.round === view.rounds) {
        const next = applyTurn(applyChoice(view, pending.chosen), ev.doc);
        return { view: next, pending: null, refetch: false };
      }
      // the stream already settled this round; the ack is stale unless it disagrees
      return { view, pending: null, refetch: !turnMatches(view, ev.doc) };
    }
    case "stream": {
      if (turnMatches(view, ev.doc)) {
        return { view, pending, refetch: false };
      }
      if (pending && pending.round === view.rounds) {
        const next = applyTurn(applyChoice(view, pending.chosen), ev.doc);
        return { view: next, pending: null, refetch: false };
      }
      // moved without us: some other writer played this session
      return { view, pending: null, refetch: true };
    }
  }
}

export class GameController {
  private pendingChoice: Pending | null = null;
  private busy = false;
  private stream: StreamHandle | null = null;
  private listeners: (() => void)[] = [];

  private constructor(
    private readonly api: ApiClient,
    private view: ViewState,
  ) {}

  static async create(api: ApiClient, req: Parameters<ApiClient["createSession"]>[0]): Promise<GameController> {
    const created = await api.createSession(req);
    return GameController.attach(api, created.id);
  }

  /** Join an existing session from scratch; also the reload path. */
  static async attach(api: ApiClient, id: string): Promise<GameController> {
    return new GameController(api, viewFromState(await api.getState(id)));
  }

  get state(): ViewState {
    return this.view;
  }

  get optimistic(): Pending | null {
    return this.pendingChoice;
  }

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  private step(ev: GameEvent): void {
    const { view, pending, refetch } = reconcile(this.view, this.pendingChoice, ev);
    this.view = view;
    this.pendingChoice = pending;
    this.emit();
    if (refetch) {
      void this.refetch();
    }
  }

  /**
   * Handle a click on an edge. Returns false without any request when the
   * edge is not on offer, the game is over, or a request is in flight.
   */
  async clickEdge(index: number): Promise<boolean> {
    if (this.busy || this.view.result !== null || !isOffered(this.view, index)) {
      return false;
    }
    const offer = this.view.offer!;
    this.pendingChoice = {
      round: this.view.rounds,
      chosen: index,
      other: offer[0] === index ? offer[1] : offer[0],
    };
    this.emit();
    this.busy = true;
    try {
      const doc = await this.api.submitChoice(this.view.sessionId, index);
      this.step({ kind: "ack", doc });
    } catch (err) {
      if (err instanceof ConflictError) {
        this.step({ kind: "conflict" });
      } else {
        this.pendingChoice = null;
        this.emit();
        throw err;
      }
    } finally {
      this.busy = false;
    }
    return true;
  }

  async refetch(): Promise<void> {
    this.step({ kind: "state", doc: await this.api.getState(this.view.sessionId) });
  }

  handleStreamTurn(doc: TurnDoc): void {
    this.step({ kind: "stream", doc });
  }

  connectStream(): void {
    if (this.stream) return;
    this.stream = this.api.openStream(this.view.sessionId, (doc) => this.handleStreamTurn(doc));
  }

  disconnectStream(): void {
    this.stream?.close();
    this.stream = null;
  }
}
