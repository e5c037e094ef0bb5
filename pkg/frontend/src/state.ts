/**
 * View-side game state. Everything here is derived from server payloads;
 * the only game logic the client owns is "which two edges are on offer",
 * enough to gate clicks and to paint the board.
 */

export type EdgeColor = "red" | "blue";

export interface GameResult {
  winner: "waiter" | "client";
  rounds: number;
  witness?: number[] | number[][] | null;
}

/** One message of the choice/stream protocol: either a fresh offer or the end. */
export interface TurnDoc {
  offer?: number[] | null;
  result?: GameResult | null;
}

export interface EdgeDoc {
  index: number;
  u: number;
  v: number;
  color: EdgeColor;
  round: number;
}

export interface StateDoc {
  id: string;
  n: number;
  goal: string;
  waiter: string;
  seed: number;
  rounds: number;
  edges: EdgeDoc[];
  offer: number[] | null;
  result: GameResult | null;
}

export interface ClaimedEdge {
  index: number;
  u: number;
  v: number;
  color: EdgeColor;
  round: number;
}

export interface ViewState {
  sessionId: string;
  n: number;
  goal: string;
  waiter: string;
  seed: number;
  rounds: number;
  claims: Map<number, ClaimedEdge>;
  offer: number[] | null;
  result: GameResult | null;
}

// -- edge index math --------------------------------------------------------

/** Canonical index of the edge {u, v}: v(v-1)/2 + u for u < v. */
export function edgeIndex(u: number, v: number): number {
  if (u > v) [u, v] = [v, u];
  if (u === v || u < 0) throw new Error(`no edge between ${u} and ${v}`);
  return (v * (v - 1)) / 2 + u;
}

export function edgeFromIndex(index: number): [number, number] {
  if (index < 0 || !Number.isInteger(index)) {
    throw new Error(`bad edge index ${index}`);
  }
  const v = Math.floor((1 + Math.sqrt(1 + 8 * index)) / 2);
  const u = index - (v * (v - 1)) / 2;
  return [u, v];
}

export function edgeCount(n: number): number {
  return (n * (n - 1)) / 2;
}

// -- constructors and reducers ----------------------------------------------

export function viewFromState(doc: StateDoc): ViewState {
  const claims = new Map<number, ClaimedEdge>();
  for (const e of doc.edges) {
    claims.set(e.index, { index: e.index, u: e.u, v: e.v, color: e.color, round: e.round });
  }
  return {
    sessionId: doc.id,
    n: doc.n,
    goal: doc.goal,
    waiter: doc.waiter,
    seed: doc.seed,
    rounds: doc.rounds,
    claims,
    offer: doc.offer ? [...doc.offer].sort((a, b) => a - b) : null,
    result: doc.result ?? null,
  };
}

export function isOffered(view: ViewState, index: number): boolean {
  return view.offer !== null && view.offer.includes(index);
}

/**
 * Claim the chosen offered edge red and its partner blue, advancing the
 * round counter. Mirrors the server's one-round transition exactly, so a
 * reload lands on an identical view.
 */
export function applyChoice(view: ViewState, chosenIndex: number): ViewState {
  if (!isOffered(view, chosenIndex)) {
    throw new Error(`edge ${chosenIndex} is not on offer`);
  }
  const offer = view.offer!;
  const otherIndex = offer[0] === chosenIndex ? offer[1] : offer[0];
  const round = view.rounds + 1;
  const claims = new Map(view.claims);
  for (const [index, color] of [
    [chosenIndex, "red"],
    [otherIndex, "blue"],
  ] as [number, EdgeColor][]) {
    const [u, v] = edgeFromIndex(index);
    claims.set(index, { index, u, v, color, round });
  }
  return { ...view, rounds: round, claims, offer: null };
}

/** Take the next offer (or the final result) from a choice ack or stream event. */
export function applyTurn(view: ViewState, doc: TurnDoc): ViewState {
  if (doc.result != null) {
    return { ...view, offer: null, result: doc.result };
  }
  const offer = doc.offer ?? null;
  return { ...view, offer: offer ? [...offer].sort((a, b) => a - b) : null, result: null };
}

/** True when the turn document says nothing the view does not already show. */
export function turnMatches(view: ViewState, doc: TurnDoc): boolean {
  if (doc.result != null) {
    return JSON.stringify(view.result) === JSON.stringify(doc.result);
  }
  const offer = doc.offer ? [...doc.offer].sort((a, b) => a - b) : null;
  return JSON.stringify(view.offer) === JSON.stringify(offer);
}

// -- invariant helpers --------------------------------------------------------

export function redCount(view: ViewState): number {
  let total = 0;
  for (const claim of view.claims.values()) if (claim.color === "red") total += 1;
  return total;
}

export function blueCount(view: ViewState): number {
  let total = 0;
  for (const claim of view.claims.values()) if (claim.color === "blue") total += 1;
  return total;
}

// -- round log ----------------------------------------------------------------

/**
 * One line per round in the transcript's move format, so a copied sidebar
 * is a valid "moves" array body for replay tooling.
 */
export function logLines(view: ViewState): string[] {
  const byRound = new Map<number, { offer: number[]; client: number | null }>();
  for (const claim of view.claims.values()) {
    let entry = byRound.get(claim.round);
    if (!entry) {
      entry = { offer: [], client: null };
      byRound.set(claim.round, entry);
    }
    entry.offer.push(claim.index);
    if (claim.color === "red") entry.client = claim.index;
  }
  const lines: string[] = [];
  for (let round = 1; round <= view.rounds; round++) {
    const entry = byRound.get(round);
    if (!entry || entry.offer.length !== 2 || entry.client === null) {
      throw new Error(`round ${round} is not a full offer/choice pair`);
    }
    entry.offer.sort((a, b) => a - b);
    lines.push(JSON.stringify({ offer: entry.offer, client: entry.client }));
  }
  return lines;
}

/** Stable plain-object snapshot, for reload-equivalence comparisons. */
export function snapshot(view: ViewState): Record<string, unknown> {
  return {
    sessionId: view.sessionId,
    n: view.n,
    goal: view.goal,
    waiter: view.waiter,
    seed: view.seed,
    rounds: view.rounds,
    claims: [...view.claims.values()].sort((a, b) => a.index - b.index),
    offer: view.offer,
    result: view.result,
  };
}
