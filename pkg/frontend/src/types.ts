/** Wire types for the replay service's four JSON endpoints. */

export interface ScenarioDescriptor {
  id: string;
  t_start: number | null;
  t_end: number | null;
  rows: number;
}

export interface ScenariosResponse {
  scenarios: ScenarioDescriptor[];
}

export interface DetectionRow {
  timestamp: number;
  sensors: string[];
  latitude: number;
  longitude: number;
  altitude: number | null;
  speed: number | null;
  drone_type: string;
  confidence: number;
}

export interface WindowSummary {
  modal_type: string;
  mean_confidence: number;
  rows: number;
}

export interface DetectionsResponse {
  rows: DetectionRow[];
  total: number;
  next_cursor: string | null;
  summary: WindowSummary | null;
}

/** Polyline vertices are [timestamp_ms, lat_deg, lon_deg] triples. */
export interface TrackSegment {
  drone_type: string;
  points: [number, number, number][];
}

export interface TrackResponse {
  segments: TrackSegment[];
}

export interface ModelInfo {
  targets: string[];
  features: Record<string, string[]>;
  cv: Record<string, Record<string, number | null>>;
  seed: number;
  version: number;
  inputs_digest: string;
  classes: string[];
}

export interface ApiErrorBody {
  error: string;
  code: string;
}
