/** Browser bootstrap: ties the form, controller, and renderer to the page. */

import { makeClient } from "./api.js";
import { GameController } from "./controller.js";
import { FormInput, Mode, defaultForm, toCreateRequest, validateForm } from "./form.js";
import { SceneTargets, applyScene, buildScene } from "./render.js";

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

const targets: SceneTargets = {
  svg: el<HTMLElement>("board") as unknown as SVGSVGElement,
  counter: el("round-counter"),
  status: el("status"),
  banner: el("banner"),
  log: el("round-log"),
};

const modeSelect = el<HTMLSelectElement>("mode");
const nInput = el<HTMLInputElement>("n");
const lInput = el<HTMLInputElement>("l");
const seedInput = el<HTMLInputElement>("seed");
const baseInput = el<HTMLInputElement>("api-base");
const startButton = el<HTMLButtonElement>("start");
const exportButton = el<HTMLButtonElement>("export");
const errorsBox = el("form-errors");
const gameMeta = el("game-meta");

let controller: GameController | null = null;

function readForm(): FormInput {
  return {
    mode: modeSelect.value as Mode,
    n: Number(nInput.value),
    l: Number(lInput.value),
    seed: seedInput.value === "" ? 0 : Number(seedInput.value),
  };
}

function showErrors(messages: string[]): void {
  errorsBox.textContent = messages.join("\n");
  errorsBox.style.display = messages.length ? "block" : "none";
}

function syncModeFields(): void {
  const clique = modeSelect.value === "clique";
  nInput.disabled = !clique;
  lInput.disabled = !clique;
  if (!clique) {
    nInput.value = "6";
    lInput.value = "3";
  }
}

function render(): void {
  if (!controller) return;
  const view = controller.state;
  applyScene(buildScene(view, controller.optimistic), targets, (index) => {
    void controller?.clickEdge(index).catch((err) => showErrors([String(err)]));
  });
  gameMeta.textContent = `${view.goal} vs ${view.waiter} on K_${view.n} (seed ${view.seed})`;
}

function adopt(next: GameController): void {
  controller?.disconnectStream();
  controller = next;
  controller.onChange(render);
  controller.connectStream();
  window.location.hash = `sid=${controller.state.sessionId}`;
  render();
}

function api() {
  return makeClient(baseInput.value, { wsFactory: (url) => new WebSocket(url) });
}

startButton.addEventListener("click", async () => {
  const input = readForm();
  const errors = validateForm(input);
  showErrors(errors);
  if (errors.length) return;
  startButton.disabled = true;
  try {
    adopt(await GameController.create(api(), toCreateRequest(input)));
  } catch (err) {
    showErrors([err instanceof Error ? err.message : String(err)]);
  } finally {
    startButton.disabled = false;
  }
});

exportButton.addEventListener("click", async () => {
  if (!controller) return;
  const text = await api().fetchTranscript(controller.state.sessionId);
  const blob = new Blob([text], { type: "application/json" });
  const link = document.createElement("a");
  link.href = URL.createObjectURL(blob);
  link.download = `${controller.state.sessionId}.json`;
  link.click();
  URL.revokeObjectURL(link.href);
});

modeSelect.addEventListener("change", syncModeFields);

async function boot(): Promise<void> {
  const defaults = defaultForm();
  nInput.value = String(defaults.n);
  lInput.value = String(defaults.l);
  seedInput.value = String(defaults.seed);
  syncModeFields();
  const match = window.location.hash.match(/sid=([\w-]+)/);
  if (match) {
    try {
      adopt(await GameController.attach(api(), match[1]));
    } catch (err) {
      showErrors([err instanceof Error ? err.message : String(err)]);
      window.location.hash = "";
    }
  }
}

void boot();
