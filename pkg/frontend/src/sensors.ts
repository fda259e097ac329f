/** Fixed sensor-network geometry.
 *
 * The service has no endpoint for sensor positions — the deployment is a
 * physical constant of the trial site, so the four markers are baked into
 * the console and must stay in sync with the backend's sensor table.
 */

export interface SensorMarker {
  name: string;
  kind: string;
  lat: number;
  lon: number;
}

export const SENSOR_MARKERS: readonly SensorMarker[] = [
  { name: "Alvira", kind: "2D radar", lat: 51.52126, lon: 5.8586 },
  { name: "Arcus", kind: "3D radar", lat: 51.52147, lon: 5.87056 },
  { name: "Diana", kind: "RF/DF", lat: 51.51913, lon: 5.85795 },
  { name: "Venus", kind: "RF/DF", lat: 51.51927, lon: 5.85791 },
];
