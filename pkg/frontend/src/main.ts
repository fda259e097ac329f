/** Browser wiring: DOM in, store methods out, renders on store change.
 *
 * Everything rendered comes from the store snapshot; this file owns no
 * state of its own. A render failure lands in the banner rather than
 * leaving a blank panel.
 */

import { ApiClient } from "./api.js";
import { buildScene, drawScene } from "./map.js";
import { ConsoleStore } from "./state.js";
import { summaryHtml, tableHtml } from "./table.js";
import { clock, pct } from "./format.js";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (el === null) throw new Error(`missing element: ${id}`);
  return el as T;
}

const picker = byId<HTMLSelectElement>("scenario");
const fromSlider = byId<HTMLInputElement>("from");
const toSlider = byId<HTMLInputElement>("to");
const windowLabel = byId<HTMLSpanElement>("window-label");
const refreshButton = byId<HTMLButtonElement>("refresh");
const banner = byId<HTMLDivElement>("banner");
const summaryPanel = byId<HTMLDivElement>("summary");
const tablePanel = byId<HTMLDivElement>("table");
const modelLine = byId<HTMLSpanElement>("model-line");
const canvas = byId<HTMLCanvasElement>("map");

const store = new ConsoleStore(new ApiClient());

function renderPicker(ids: string[]): void {
  const current = Array.from(picker.options).map((o) => o.value);
  if (current.length === ids.length && current.every((v, i) => v === ids[i])) return;
  picker.replaceChildren(
    ...ids.map((id) => {
      const option = document.createElement("option");
      option.value = id;
      option.textContent = id;
      return option;
    }),
  );
}

function renderSliders(): void {
  const state = store.getState();
  const desc = state.selected === null ? undefined : store.scenario(state.selected);
  if (desc === undefined || desc.t_start === null || desc.t_end === null) return;
  for (const slider of [fromSlider, toSlider]) {
    slider.min = String(desc.t_start);
    slider.max = String(desc.t_end);
    slider.step = "1000";
  }
  if (state.window !== null) {
    // Don't yank a slider out from under the operator's drag.
    if (document.activeElement !== fromSlider) fromSlider.value = String(state.window.from);
    if (document.activeElement !== toSlider) toSlider.value = String(state.window.to);
    windowLabel.textContent = `${clock(state.window.from)} – ${clock(state.window.to)}`;
  }
}

function render(): void {
  const state = store.getState();
  try {
    renderPicker(state.scenarios.map((s) => s.id));
    if (state.selected !== null && picker.value !== state.selected) picker.value = state.selected;
    renderSliders();

    banner.hidden = state.banner === null;
    if (state.banner !== null) {
      banner.textContent = `error ${state.banner.code}: ${state.banner.message}`;
    }

    const accuracy = state.modelInfo?.cv["drone_type"]?.["accuracy"] ?? null;
    summaryPanel.innerHTML = summaryHtml(state.summary, accuracy);
    tablePanel.innerHTML = tableHtml(state.rows);
    if (state.modelInfo !== null) {
      modelLine.textContent =
        `model ${state.modelInfo.version} · seed ${state.modelInfo.seed}` +
        (accuracy === null ? "" : ` · CV accuracy ${pct(accuracy)}`);
    }

    const ctx = canvas.getContext("2d");
    if (ctx !== null) {
      drawScene(ctx, buildScene(state.segments, canvas.width, canvas.height), canvas.width, canvas.height);
    }
    refreshButton.disabled = state.status === "loading";
  } catch (err) {
    banner.hidden = false;
    banner.textContent = `error render-failure: ${err instanceof Error ? err.message : String(err)}`;
  }
}

picker.addEventListener("change", () => void store.selectScenario(picker.value));
refreshButton.addEventListener("click", () => void store.refresh());
for (const slider of [fromSlider, toSlider]) {
  slider.addEventListener("input", () => {
    store.scrubWindow(Number(fromSlider.value), Number(toSlider.value));
  });
}

store.subscribe(render);

void store.init().then(() => {
  const first = store.getState().scenarios[0];
  if (first !== undefined) void store.selectScenario(first.id);
});
