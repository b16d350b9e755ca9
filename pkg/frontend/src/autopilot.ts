// Scripted steering used by the end-to-end test and the debug "autowalk"
// button: a proportional controller aiming at the next turn waypoint the
// server reports. Waypoints come from the served route geometry.

import { bearingDeg, signedDelta, type LatLon } from "./geo.js";
import type { StateMsg } from "./protocol.js";
import type { Control } from "./input.js";

export interface RouteDoc {
  id: string;
  polyline: Array<[number, number]>;
  steps: Array<{
    start: [number, number];
    end: [number, number];
    maneuver: string;
  }>;
  pois: Array<{ name: string; lat: number; lon: number }>;
}

const WAYPOINT_MANEUVERS = new Set(["turn-left", "turn-right", "u-turn", "arrive"]);

export function turnWaypoints(route: RouteDoc): LatLon[] {
  return route.steps
    .filter((s) => WAYPOINT_MANEUVERS.has(s.maneuver))
    .map((s) => ({ lat: s.end[0], lon: s.end[1] }));
}

export function steerToward(
  state: StateMsg,
  waypoints: LatLon[],
  speedMps = 5.0,
  gain = 4.0,
): Control {
  const i = state.tracker.waypoint_index;
  if (i >= waypoints.length) {
    return { turnRateDps: 0, speedMps: 0 };
  }
  const here = { lat: state.pose.lat, lon: state.pose.lon };
  const want = bearingDeg(here, waypoints[i]);
  const delta = signedDelta(state.pose.heading_deg, want);
  const turn = Math.max(-180, Math.min(180, gain * delta));
  return { turnRateDps: turn, speedMps };
}

/** Hold an offset from the waypoint bearing while standing still. */
export function steerToOffset(
  state: StateMsg,
  waypoints: LatLon[],
  offsetDeg: number,
  gain = 4.0,
): Control {
  const i = Math.min(state.tracker.waypoint_index, waypoints.length - 1);
  const here = { lat: state.pose.lat, lon: state.pose.lon };
  const want = bearingDeg(here, waypoints[i]) + offsetDeg;
  const delta = signedDelta(state.pose.heading_deg, want);
  return { turnRateDps: Math.max(-180, Math.min(180, gain * delta)), speedMps: 0 };
}

export function pointingTruth(route: RouteDoc): number[] {
  const pois = route.pois;
  const origin = { lat: pois[pois.length - 1].lat, lon: pois[pois.length - 1].lon };
  return pois.slice(0, -1).map((p) => bearingDeg(origin, { lat: p.lat, lon: p.lon }));
}
