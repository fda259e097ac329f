/** Display formatting: every rendered value is a response field, formatted. */

/** 0.934 -> "93.4%"; confidences render with one decimal place. */
export function pct(x: number): string {
  return `${(x * 100).toFixed(1)}%`;
}

/** Coordinates keep five decimals (~1 m at this latitude). */
export function deg(x: number): string {
  return x.toFixed(5);
}

export function metres(x: number | null): string {
  return x === null ? "–" : `${x.toFixed(1)} m`;
}

export function mps(x: number | null): string {
  return x === null ? "–" : `${x.toFixed(1)} m/s`;
}

/** UNIX ms -> "HH:MM:SS" UTC, for scrubber labels. */
export function clock(t: number): string {
  return new Date(t).toISOString().slice(11, 19);
}

export function joinSensors(sensors: string[]): string {
  return sensors.join("+");
}
