import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ConsoleStore } from "../src/state.js";
import type { DetectionRow } from "../src/types.js";
import { deferred, fixtureFetch, manualClock, ok, settle } from "./helpers.js";

import scenariosFixture from "./fixtures/scenarios.json";
import errorUnknown from "./fixtures/error_unknown_scenario.json";

function rowAt(timestamp: number): DetectionRow {
  return {
    timestamp,
    sensors: ["Alvira"],
    latitude: 51.52,
    longitude: 5.86,
    altitude: 40,
    speed: 5,
    drone_type: "DJI Mavic Pro",
    confidence: 0.9,
  };
}

/** Detections/track bodies watermarked by the window's `from` value. */
function windowedRoute(url: URL) {
  if (url.pathname === "/scenarios") return ok(scenariosFixture);
  if (url.pathname === "/model/info") return { status: 404, body: { error: "no bundle", code: "no-bundle" } };
  const from = Number(url.searchParams.get("from") ?? 0);
  if (url.pathname.endsWith("/track")) {
    return ok({ segments: [{ drone_type: "DJI Mavic Pro", points: [[from, 51.52, 5.86]] }] });
  }
  return ok({
    rows: [rowAt(from)],
    total: 1,
    next_cursor: null,
    summary: { modal_type: "DJI Mavic Pro", mean_confidence: 0.9, rows: 1 },
  });
}

function makeStore(route: Parameters<typeof fixtureFetch>[0], log: string[] = []) {
  const clock = manualClock();
  const store = new ConsoleStore(new ApiClient("", fixtureFetch(route, log)), clock.scheduler);
  return { store, clock, log };
}

describe("init", () => {
  it("loads the scenario listing", async () => {
    const { store } = makeStore(windowedRoute);
    await store.init();
    expect(store.getState().scenarios).toHaveLength(7);
    expect(store.getState().scenarios[0].id).toBe("S1.1");
  });

  it("tolerates a service without a bundle", async () => {
    const { store } = makeStore(windowedRoute);
    await store.init();
    expect(store.getState().modelInfo).toBeNull();
    expect(store.getState().banner).toBeNull();
  });
});

describe("selectScenario", () => {
  it("fetches the full extent of the chosen scenario immediately", async () => {
    const { store, log } = makeStore(windowedRoute);
    await store.init();
    await store.selectScenario("S1.1");
    const state = store.getState();
    const desc = state.scenarios[0];
    expect(state.selected).toBe("S1.1");
    expect(state.window).toEqual({ from: desc.t_start, to: desc.t_end });
    expect(state.status).toBe("ready");
    expect(state.rows).toHaveLength(1);
    expect(state.segments).toHaveLength(1);
    expect(state.summary?.rows).toBe(1);
    expect(log.some((u) => u.includes(`from=${desc.t_start}&to=${desc.t_end}`))).toBe(true);
  });

  it("refuses an id that is not in the listing", async () => {
    const { store, log } = makeStore(windowedRoute);
    await store.init();
    const before = log.length;
    await store.selectScenario("S9.9");
    expect(store.getState().banner?.code).toBe("unknown-scenario");
    expect(log).toHaveLength(before);
  });
});

describe("scrubWindow", () => {
  it("debounces: two rapid scrubs issue one fetch pair", async () => {
    const { store, clock, log } = makeStore(windowedRoute);
    await store.init();
    await store.selectScenario("S1.1");
    const before = log.length;
    store.scrubWindow(1000, 2000);
    store.scrubWindow(3000, 4000);
    expect(log.length).toBe(before); // nothing sent until the debounce fires
    clock.flush();
    await settle();
    expect(log.length).toBe(before + 2);
    expect(log.slice(before).every((u) => u.includes("from=3000&to=4000"))).toBe(true);
    expect(store.getState().rows[0].timestamp).toBe(3000);
  });

  it("blocks an inverted window before any request", async () => {
    const { store, clock, log } = makeStore(windowedRoute);
    await store.init();
    await store.selectScenario("S1.1");
    const before = log.length;
    const window = store.getState().window;
    store.scrubWindow(2000, 1000);
    clock.flush();
    await settle();
    expect(store.getState().banner?.code).toBe("invalid-window");
    expect(log).toHaveLength(before);
    expect(store.getState().window).toEqual(window); // selection untouched
  });

  it("does nothing without a selected scenario", async () => {
    const { store, clock, log } = makeStore(windowedRoute);
    await store.init();
    store.scrubWindow(0, 1);
    clock.flush();
    await settle();
    expect(log.filter((u) => u.includes("/detections") || u.includes("/track"))).toHaveLength(0);
  });
});

describe("response sequencing", () => {
  it("discards a stale response that resolves after a newer one", async () => {
    type Pending = { url: string; d: ReturnType<typeof deferred<unknown>> };
    const queue: Pending[] = [];
    const api = new ApiClient("", (url) => {
      const d = deferred<unknown>();
      queue.push({ url, d });
      return d.promise.then((body) => ({ ok: true, status: 200, json: async () => body }));
    });
    const clock = manualClock();
    const store = new ConsoleStore(api, clock.scheduler);
    const seenRows: number[][] = [];
    store.subscribe((s) => seenRows.push(s.rows.map((r) => r.timestamp)));

    const init = store.init();
    await settle();
    queue[0].d.resolve(scenariosFixture);
    await settle();
    queue[1].d.resolve({ error: "no bundle", code: "no-bundle" });
    await init;

    void store.selectScenario("S1.1"); // seq 1: queue[2] detections, queue[3] track
    await settle();
    store.scrubWindow(5000, 6000);
    clock.flush(); // seq 2: queue[4] detections, queue[5] track
    await settle();
    expect(queue).toHaveLength(6);

    // Newer window resolves first…
    queue[4].d.resolve({ rows: [rowAt(5000)], total: 1, next_cursor: null, summary: null });
    queue[5].d.resolve({ segments: [] });
    await settle();
    expect(store.getState().rows.map((r) => r.timestamp)).toEqual([5000]);

    // …then the superseded one lands and must be ignored.
    queue[2].d.resolve({ rows: [rowAt(111)], total: 1, next_cursor: null, summary: null });
    queue[3].d.resolve({ segments: [] });
    await settle();
    expect(store.getState().rows.map((r) => r.timestamp)).toEqual([5000]);
    expect(store.getState().status).toBe("ready");
    expect(seenRows.flat()).not.toContain(111); // never rendered, not even transiently
  });
});

describe("fetch failures", () => {
  it("keeps the last good data and raises the server's code", async () => {
    let failing = false;
    const { store } = makeStore((url) => {
      if (failing && !url.pathname.endsWith("/scenarios")) {
        return { status: 404, body: errorUnknown };
      }
      return windowedRoute(url);
    });
    await store.init();
    await store.selectScenario("S1.1");
    const goodRows = store.getState().rows;
    expect(goodRows).toHaveLength(1);

    failing = true;
    await store.refresh();
    const state = store.getState();
    expect(state.status).toBe("error");
    expect(state.banner?.code).toBe("unknown-scenario");
    expect(state.rows).toBe(goodRows); // panel never blanks
  });
});
