/** Console state machine.
 *
 * State is a pure function of (last successful response, current
 * selection): fetches are tagged with monotonically increasing sequence
 * numbers and a response only lands if it is still the newest request in
 * flight — rapid scrubs can never interleave into a stale render. A
 * failed fetch keeps the previous data and raises a banner instead of
 * blanking the panel.
 */

import { ApiClient, ApiError, TimeWindow } from "./api.js";
import type {
  DetectionRow,
  ModelInfo,
  ScenarioDescriptor,
  TrackSegment,
  WindowSummary,
} from "./types.js";

export type FetchStatus = "idle" | "loading" | "ready" | "error";

export interface Banner {
  code: string;
  message: string;
}

export interface ConsoleState {
  scenarios: ScenarioDescriptor[];
  modelInfo: ModelInfo | null;
  selected: string | null;
  window: { from: number; to: number } | null;
  rows: DetectionRow[];
  segments: TrackSegment[];
  summary: WindowSummary | null;
  status: FetchStatus;
  banner: Banner | null;
}

/** Injected so tests can drive the debounce clock by hand. */
export interface Scheduler {
  set(fn: () => void, ms: number): unknown;
  clear(id: unknown): void;
}

const realScheduler: Scheduler = {
  set: (fn, ms) => setTimeout(fn, ms),
  clear: (id) => clearTimeout(id as Parameters<typeof clearTimeout>[0]),
};

export const SCRUB_DEBOUNCE_MS = 200;

type Listener = (state: ConsoleState) => void;

export class ConsoleStore {
  private readonly api: ApiClient;
  private readonly scheduler: Scheduler;
  private readonly debounceMs: number;
  private readonly listeners = new Set<Listener>();
  private state: ConsoleState = {
    scenarios: [],
    modelInfo: null,
    selected: null,
    window: null,
    rows: [],
    segments: [],
    summary: null,
    status: "idle",
    banner: null,
  };
  // Sequence numbers: a response is applied only while it is the newest.
  private issued = 0;
  private pendingTimer: unknown = null;

  constructor(api: ApiClient, scheduler: Scheduler = realScheduler, debounceMs = SCRUB_DEBOUNCE_MS) {
    this.api = api;
    this.scheduler = scheduler;
    this.debounceMs = debounceMs;
  }

  getState(): ConsoleState {
    return this.state;
  }

  subscribe(fn: Listener): () => void {
    this.listeners.add(fn);
    return () => this.listeners.delete(fn);
  }

  private set(patch: Partial<ConsoleState>): void {
    this.state = { ...this.state, ...patch };
    for (const fn of this.listeners) fn(this.state);
  }

  /** Load the scenario listing and (best-effort) model metadata. */
  async init(): Promise<void> {
    try {
      const listing = await this.api.scenarios();
      this.set({ scenarios: listing.scenarios });
    } catch (err) {
      this.set({ status: "error", banner: toBanner(err) });
      return;
    }
    try {
      this.set({ modelInfo: await this.api.modelInfo() });
    } catch {
      // A store can be served without a bundle; the panel just goes quiet.
      this.set({ modelInfo: null });
    }
  }

  scenario(id: string): ScenarioDescriptor | undefined {
    return this.state.scenarios.find((s) => s.id === id);
  }

  /** Select a scenario and fetch its full extent immediately. */
  selectScenario(id: string): Promise<void> {
    const desc = this.scenario(id);
    if (desc === undefined) {
      this.set({ banner: { code: "unknown-scenario", message: `unknown scenario: ${id}` } });
      return Promise.resolve();
    }
    this.cancelPending();
    const window =
      desc.t_start !== null && desc.t_end !== null
        ? { from: desc.t_start, to: desc.t_end }
        : null;
    this.set({ selected: id, window, banner: null });
    return this.fetchWindow();
  }

  /**
   * Scrub to a new window. Inverted windows are rejected before any
   * request is made; valid ones re-fetch after a debounce interval so a
   * dragged slider issues one request, not dozens.
   */
  scrubWindow(from: number, to: number): void {
    if (this.state.selected === null) return;
    if (from > to) {
      this.set({ banner: { code: "invalid-window", message: `window is inverted: ${from} > ${to}` } });
      return;
    }
    this.set({ window: { from, to }, banner: null });
    this.cancelPending();
    this.pendingTimer = this.scheduler.set(() => {
      this.pendingTimer = null;
      void this.fetchWindow();
    }, this.debounceMs);
  }

  /** Manual refresh: re-issue the current window right away. */
  refresh(): Promise<void> {
    this.cancelPending();
    return this.fetchWindow();
  }

  private cancelPending(): void {
    if (this.pendingTimer !== null) {
      this.scheduler.clear(this.pendingTimer);
      this.pendingTimer = null;
    }
  }

  private async fetchWindow(): Promise<void> {
    const { selected, window } = this.state;
    if (selected === null) return;
    const seq = ++this.issued;
    const span: TimeWindow = window === null ? {} : window;
    this.set({ status: "loading" });
    let rows: DetectionRow[];
    let segments: TrackSegment[];
    let summary: WindowSummary | null;
    try {
      const [detections, track] = await Promise.all([
        this.api.detections(selected, span),
        this.api.track(selected, span),
      ]);
      rows = detections.rows;
      summary = detections.summary;
      segments = track.segments;
    } catch (err) {
      if (seq === this.issued) this.set({ status: "error", banner: toBanner(err) });
      return;
    }
    if (seq !== this.issued) return; // superseded by a newer scrub
    this.set({ rows, segments, summary, status: "ready", banner: null });
  }
}

function toBanner(err: unknown): Banner {
  if (err instanceof ApiError) return { code: err.code, message: err.message };
  return { code: "client-error", message: err instanceof Error ? err.message : String(err) };
}
