/**
 * Rendering splits in two: buildScene turns a view into a plain description
 * of what the board should show (testable, no DOM), and applyScene writes
 * that description into SVG and sidebar elements.
 */

import { Pending } from "./controller.js";
import { GameResult, ViewState, edgeCount, edgeFromIndex, edgeIndex, logLines } from "./state.js";

export type EdgePaint = "red" | "blue" | "offered" | "chosen" | "free";

export interface SceneVertex {
  id: number;
  x: number;
  y: number;
  inWitness: boolean;
}

export interface SceneEdge {
  index: number;
  u: number;
  v: number;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  paint: EdgePaint;
  pulsing: boolean;
  dashed: boolean;
  muted: boolean;
  inWitness: boolean;
}

export interface Scene {
  vertices: SceneVertex[];
  edges: SceneEdge[];
  roundCounter: number;
  status: string;
  banner: string | null;
  witnessEdges: number[];
  logLines: string[];
}

export const BOARD_SIZE = 640;
const CENTER = BOARD_SIZE / 2;
const RADIUS = BOARD_SIZE * 0.44;

/** Vertex 0 at the top, the rest clockwise around the circle. */
export function vertexPositions(n: number): { x: number; y: number }[] {
  const spots: { x: number; y: number }[] = [];
  for (let i = 0; i < n; i++) {
    const angle = -Math.PI / 2 + (2 * Math.PI * i) / n;
    spots.push({
      x: CENTER + RADIUS * Math.cos(angle),
      y: CENTER + RADIUS * Math.sin(angle),
    });
  }
  return spots;
}

function witnessBlocks(result: GameResult | null): number[][] {
  if (!result || result.winner !== "waiter" || !result.witness) return [];
  const witness = result.witness;
  if (witness.length > 0 && Array.isArray(witness[0])) return witness as number[][];
  return [witness as number[]];
}

function bannerText(view: ViewState): string | null {
  if (!view.result) return null;
  if (view.result.winner === "waiter") {
    return `Waiter wins: ${view.goal} complete after ${view.result.rounds} rounds`;
  }
  return `Client survives: board exhausted after ${view.result.rounds} rounds`;
}

function statusText(view: ViewState, pending: Pending | null): string {
  if (view.result) return "game over";
  if (pending) return "waiting for the server";
  if (view.offer) return `round ${view.rounds + 1}: pick one of the two offered edges`;
  return "waiting for an offer";
}

export function buildScene(view: ViewState, pending: Pending | null): Scene {
  const spots = vertexPositions(view.n);
  const blocks = witnessBlocks(view.result);
  const witnessVertices = new Set<number>(blocks.flat());
  const witnessEdges: number[] = [];
  for (const block of blocks) {
    for (let i = 0; i < block.length; i++) {
      for (let j = i + 1; j < block.length; j++) {
        witnessEdges.push(edgeIndex(block[i], block[j]));
      }
    }
  }
  witnessEdges.sort((a, b) => a - b);
  const witnessEdgeSet = new Set(witnessEdges);

  const edges: SceneEdge[] = [];
  for (let index = 0; index < edgeCount(view.n); index++) {
    const [u, v] = edgeFromIndex(index);
    const claim = view.claims.get(index);
    let paint: EdgePaint = "free";
    let pulsing = false;
    if (claim) {
      paint = claim.color;
    } else if (pending && index === pending.chosen) {
      paint = "chosen";
    } else if (pending && index === pending.other) {
      paint = "offered";
    } else if (view.offer?.includes(index)) {
      paint = "offered";
      pulsing = true;
    }
    edges.push({
      index,
      u,
      v,
      x1: spots[u].x,
      y1: spots[u].y,
      x2: spots[v].x,
      y2: spots[v].y,
      paint,
      pulsing,
      dashed: paint === "blue",
      muted: paint === "blue" || paint === "free",
      inWitness: witnessEdgeSet.has(index),
    });
  }

  return {
    vertices: spots.map((spot, id) => ({ id, ...spot, inWitness: witnessVertices.has(id) })),
    edges,
    roundCounter: view.rounds,
    status: statusText(view, pending),
    banner: bannerText(view),
    witnessEdges,
    logLines: logLines(view),
  };
}

// -- DOM application ---------------------------------------------------------

export interface SceneTargets {
  svg: SVGSVGElement;
  counter: HTMLElement;
  status: HTMLElement;
  banner: HTMLElement;
  log: HTMLElement;
}

const SVG_NS = "http://www.w3.org/2000/svg";

function line(edge: SceneEdge, cls: string): SVGLineElement {
  const el = document.createElementNS(SVG_NS, "line");
  el.setAttribute("x1", String(edge.x1));
  el.setAttribute("y1", String(edge.y1));
  el.setAttribute("x2", String(edge.x2));
  el.setAttribute("y2", String(edge.y2));
  el.setAttribute("class", cls);
  return el;
}

export function applyScene(
  scene: Scene,
  targets: SceneTargets,
  onEdgeClick: (index: number) => void,
): void {
  const { svg } = targets;
  svg.setAttribute("viewBox", `0 0 ${BOARD_SIZE} ${BOARD_SIZE}`);
  svg.replaceChildren();

  for (const edge of scene.edges) {
    const classes = ["edge", edge.paint];
    if (edge.pulsing) classes.push("pulse");
    svg.appendChild(line(edge, classes.join(" ")));
  }
  for (const edge of scene.edges) {
    if (edge.inWitness) svg.appendChild(line(edge, "edge witness"));
  }
  // invisible wide strokes on top make thin edges clickable
  for (const edge of scene.edges) {
    const hit = line(edge, edge.paint === "offered" || edge.paint === "chosen" ? "hit active" : "hit");
    hit.dataset.index = String(edge.index);
    hit.addEventListener("click", () => onEdgeClick(edge.index));
    svg.appendChild(hit);
  }
  for (const vertex of scene.vertices) {
    const dot = document.createElementNS(SVG_NS, "circle");
    dot.setAttribute("cx", String(vertex.x));
    dot.setAttribute("cy", String(vertex.y));
    dot.setAttribute("r", "13");
    dot.setAttribute("class", vertex.inWitness ? "vertex witness" : "vertex");
    svg.appendChild(dot);
    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(vertex.x));
    label.setAttribute("y", String(vertex.y + 4));
    label.setAttribute("class", "vertex-label");
    label.textContent = String(vertex.id);
    svg.appendChild(label);
  }

  targets.counter.textContent = String(scene.roundCounter);
  targets.status.textContent = scene.status;
  targets.banner.textContent = scene.banner ?? "";
  targets.banner.style.display = scene.banner ? "block" : "none";
  targets.log.textContent = scene.logLines.join("\n");
}
