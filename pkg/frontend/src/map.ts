/** Trajectory map on a plain lat/lon canvas.
 *
 * The protected zone spans about two kilometres, so an equirectangular
 * projection with a cos(latitude) x-scale is indistinguishable from a
 * proper map at this scale and needs no tile service: the console stays
 * offline-capable. Scene building is pure geometry; drawing is a thin
 * layer over the 2D canvas API so tests can record the draw calls.
 */

import { SENSOR_MARKERS } from "./sensors.js";
import type { TrackSegment } from "./types.js";

// One stable color per drone class, in class order; extras cycle.
const CLASS_COLORS: Record<string, string> = {
  "DJI Mavic Pro": "#1f77b4",
  "DJI Mavic 2": "#ff7f0e",
  "DJI Phantom 4 Pro": "#2ca02c",
  "Parrot Disco": "#d62728",
};
const FALLBACK_COLORS = ["#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

export function colorFor(droneType: string, index: number): string {
  return CLASS_COLORS[droneType] ?? FALLBACK_COLORS[index % FALLBACK_COLORS.length];
}

export interface Bounds {
  latMin: number;
  latMax: number;
  lonMin: number;
  lonMax: number;
}

/** Extent of polyline ∪ sensors — the sensors are always in view. */
export function fitBounds(segments: TrackSegment[]): Bounds {
  let latMin = Infinity;
  let latMax = -Infinity;
  let lonMin = Infinity;
  let lonMax = -Infinity;
  const include = (lat: number, lon: number) => {
    latMin = Math.min(latMin, lat);
    latMax = Math.max(latMax, lat);
    lonMin = Math.min(lonMin, lon);
    lonMax = Math.max(lonMax, lon);
  };
  for (const marker of SENSOR_MARKERS) include(marker.lat, marker.lon);
  for (const segment of segments) {
    for (const [, lat, lon] of segment.points) include(lat, lon);
  }
  // Degenerate extents (all points coincident) still need a window.
  const minSpan = 1e-4;
  if (latMax - latMin < minSpan) {
    const mid = (latMin + latMax) / 2;
    latMin = mid - minSpan / 2;
    latMax = mid + minSpan / 2;
  }
  if (lonMax - lonMin < minSpan) {
    const mid = (lonMin + lonMax) / 2;
    lonMin = mid - minSpan / 2;
    lonMax = mid + minSpan / 2;
  }
  return { latMin, latMax, lonMin, lonMax };
}

export interface XY {
  x: number;
  y: number;
}

export interface ScenePolyline {
  droneType: string;
  color: string;
  points: XY[];
}

export interface SceneMarker extends XY {
  name: string;
}

export interface Scene {
  markers: SceneMarker[];
  polylines: ScenePolyline[];
}

export function project(bounds: Bounds, width: number, height: number, pad = 24) {
  const latMid = (bounds.latMin + bounds.latMax) / 2;
  const kx = Math.cos((latMid * Math.PI) / 180);
  const spanX = (bounds.lonMax - bounds.lonMin) * kx;
  const spanY = bounds.latMax - bounds.latMin;
  // One scale for both axes keeps distances honest (no anisotropy).
  const scale = Math.min((width - 2 * pad) / spanX, (height - 2 * pad) / spanY);
  const cx = width / 2;
  const cy = height / 2;
  const lonMid = (bounds.lonMin + bounds.lonMax) / 2;
  return (lat: number, lon: number): XY => ({
    x: cx + (lon - lonMid) * kx * scale,
    y: cy - (lat - latMid) * scale, // north up
  });
}

/** Pure scene: projected sensor markers plus one polyline per segment. */
export function buildScene(segments: TrackSegment[], width: number, height: number): Scene {
  const toXY = project(fitBounds(segments), width, height);
  return {
    markers: SENSOR_MARKERS.map((m) => ({ name: m.name, ...toXY(m.lat, m.lon) })),
    polylines: segments.map((segment, i) => ({
      droneType: segment.drone_type,
      color: colorFor(segment.drone_type, i),
      points: segment.points.map(([, lat, lon]) => toXY(lat, lon)),
    })),
  };
}

/** The subset of CanvasRenderingContext2D the drawer needs. */
export interface Canvas2D {
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  stroke(): void;
  fill(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  fillText(text: string, x: number, y: number): void;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  fillStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
}

export function drawScene(ctx: Canvas2D, scene: Scene, width: number, height: number): void {
  ctx.clearRect(0, 0, width, height);
  for (const line of scene.polylines) {
    if (line.points.length === 0) continue;
    ctx.strokeStyle = line.color;
    ctx.fillStyle = line.color;
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(line.points[0].x, line.points[0].y);
    for (const p of line.points.slice(1)) ctx.lineTo(p.x, p.y);
    ctx.stroke();
    // Per-point type coloring: dot the samples along the line.
    for (const p of line.points) {
      ctx.beginPath();
      ctx.arc(p.x, p.y, 1.5, 0, 2 * Math.PI);
      ctx.fill();
    }
  }
  ctx.fillStyle = "#111";
  ctx.font = "12px sans-serif";
  for (const marker of scene.markers) {
    const r = 6;
    ctx.beginPath();
    ctx.moveTo(marker.x, marker.y - r);
    ctx.lineTo(marker.x - r, marker.y + r);
    ctx.lineTo(marker.x + r, marker.y + r);
    ctx.closePath();
    ctx.fill();
    ctx.fillText(marker.name, marker.x + r + 2, marker.y + 4);
  }
}
