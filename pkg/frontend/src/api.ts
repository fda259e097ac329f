/** Typed client for the replay service.
 *
 * The console talks to exactly four GET endpoints and nothing else:
 *   GET /scenarios
 *   GET /scenarios/{id}/detections?from&to&cursor
 *   GET /scenarios/{id}/track?from&to
 *   GET /model/info
 *
 * Timestamps travel as UNIX ms integers in the query string. Windows are
 * inclusive; omitted bounds mean "full extent". Non-2xx responses carry
 * `{error, code}` bodies which surface here as ApiError.
 */

import type {
  ApiErrorBody,
  DetectionsResponse,
  DetectionRow,
  ModelInfo,
  ScenariosResponse,
  TrackResponse,
  WindowSummary,
} from "./types.js";

export type FetchLike = (url: string) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}>;

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.name = "ApiError";
    this.code = code;
    this.status = status;
  }
}

export interface TimeWindow {
  from?: number;
  to?: number;
}

function windowQuery(window: TimeWindow, extra: Record<string, string> = {}): string {
  const params = new URLSearchParams(extra);
  if (window.from !== undefined) params.set("from", String(window.from));
  if (window.to !== undefined) params.set("to", String(window.to));
  const qs = params.toString();
  return qs ? `?${qs}` : "";
}

export interface WindowData {
  rows: DetectionRow[];
  total: number;
  summary: WindowSummary | null;
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(base = "", fetchFn: FetchLike = (url) => fetch(url)) {
    // Trailing slash would double up when paths are appended.
    this.base = base.endsWith("/") ? base.slice(0, -1) : base;
    this.fetchFn = fetchFn;
  }

  private async get<T>(path: string): Promise<T> {
    let response;
    try {
      response = await this.fetchFn(this.base + path);
    } catch (err) {
      throw new ApiError(0, "network", err instanceof Error ? err.message : String(err));
    }
    let body: unknown;
    try {
      body = await response.json();
    } catch {
      body = null;
    }
    if (!response.ok) {
      const err = (body ?? {}) as Partial<ApiErrorBody>;
      throw new ApiError(
        response.status,
        err.code ?? `http-${response.status}`,
        err.error ?? `request failed with status ${response.status}`,
      );
    }
    return body as T;
  }

  scenarios(): Promise<ScenariosResponse> {
    return this.get<ScenariosResponse>("/scenarios");
  }

  detectionsPage(id: string, window: TimeWindow = {}, cursor?: string): Promise<DetectionsResponse> {
    const extra: Record<string, string> = cursor === undefined ? {} : { cursor };
    return this.get<DetectionsResponse>(
      `/scenarios/${encodeURIComponent(id)}/detections${windowQuery(window, extra)}`,
    );
  }

  /** Full window contents: follows continuation cursors until exhausted. */
  async detections(id: string, window: TimeWindow = {}): Promise<WindowData> {
    const first = await this.detectionsPage(id, window);
    const rows = [...first.rows];
    let cursor = first.next_cursor;
    while (cursor !== null) {
      const page = await this.detectionsPage(id, window, cursor);
      rows.push(...page.rows);
      cursor = page.next_cursor;
    }
    return { rows, total: first.total, summary: first.summary };
  }

  track(id: string, window: TimeWindow = {}): Promise<TrackResponse> {
    return this.get<TrackResponse>(
      `/scenarios/${encodeURIComponent(id)}/track${windowQuery(window)}`,
    );
  }

  modelInfo(): Promise<ModelInfo> {
    return this.get<ModelInfo>("/model/info");
  }
}
