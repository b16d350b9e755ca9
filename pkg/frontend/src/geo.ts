// Map math for drawing and scripted steering. Guidance itself always
// comes from the server; these helpers only project geometry for the
// canvas and compute bearings for the autopilot and pointing display.

export const EARTH_RADIUS_M = 6_371_000;

export interface LatLon {
  lat: number;
  lon: number;
}

export function normalizeHeading(deg: number): number {
  const v = deg % 360;
  return v < 0 ? v + 360 : v;
}

/** Minimal signed rotation from heading to target, positive = turn right. */
export function signedDelta(headingDeg: number, targetDeg: number): number {
  let d = (targetDeg - headingDeg) % 360;
  if (d < 0) d += 360;
  return d > 180 ? d - 360 : d;
}

/** Initial great-circle bearing, matching the server's formula. */
export function bearingDeg(from: LatLon, to: LatLon): number {
  const lat1 = (from.lat * Math.PI) / 180;
  const lat2 = (to.lat * Math.PI) / 180;
  const dlon = ((to.lon - from.lon) * Math.PI) / 180;
  const y = Math.sin(dlon) * Math.cos(lat2);
  const x =
    Math.cos(lat1) * Math.sin(lat2) -
    Math.sin(lat1) * Math.cos(lat2) * Math.cos(dlon);
  return normalizeHeading((Math.atan2(y, x) * 180) / Math.PI);
}

export function distanceM(a: LatLon, b: LatLon): number {
  const lat1 = (a.lat * Math.PI) / 180;
  const lat2 = (b.lat * Math.PI) / 180;
  const dlat = lat2 - lat1;
  const dlon = ((b.lon - a.lon) * Math.PI) / 180;
  const h =
    Math.sin(dlat / 2) ** 2 +
    Math.cos(lat1) * Math.cos(lat2) * Math.sin(dlon / 2) ** 2;
  return EARTH_RADIUS_M * 2 * Math.asin(Math.min(1, Math.sqrt(h)));
}

/** Equirectangular east/north meters relative to an origin. */
export function projectLocal(origin: LatLon, p: LatLon): [number, number] {
  const east =
    ((p.lon - origin.lon) * Math.PI / 180) *
    Math.cos((origin.lat * Math.PI) / 180) *
    EARTH_RADIUS_M;
  const north = ((p.lat - origin.lat) * Math.PI / 180) * EARTH_RADIUS_M;
  return [east, north];
}

export interface ViewTransform {
  scale: number;
  offsetX: number;
  offsetY: number;
}

/** Fit a set of local-meter points into a canvas with some margin. */
export function fitView(
  points: Array<[number, number]>,
  width: number,
  height: number,
  marginPx = 24,
): ViewTransform {
  if (points.length === 0) return { scale: 1, offsetX: width / 2, offsetY: height / 2 };
  let minX = Infinity, maxX = -Infinity, minY = Infinity, maxY = -Infinity;
  for (const [x, y] of points) {
    minX = Math.min(minX, x); maxX = Math.max(maxX, x);
    minY = Math.min(minY, y); maxY = Math.max(maxY, y);
  }
  const spanX = Math.max(maxX - minX, 1);
  const spanY = Math.max(maxY - minY, 1);
  const scale = Math.min(
    (width - 2 * marginPx) / spanX,
    (height - 2 * marginPx) / spanY,
  );
  return {
    scale,
    offsetX: marginPx - minX * scale + (width - 2 * marginPx - spanX * scale) / 2,
    offsetY: height - marginPx + minY * scale - (height - 2 * marginPx - spanY * scale) / 2,
  };
}

/** Local meters to canvas pixels (north up). */
export function toCanvas(t: ViewTransform, x: number, y: number): [number, number] {
  return [t.offsetX + x * t.scale, t.offsetY - y * t.scale];
}
