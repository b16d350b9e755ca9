// Wire protocol spoken with the session server. Shapes mirror
// docs/protocol.md on the server side; every frame carries v: 1.

export const PROTOCOL_VERSION = 1;

export interface Pose {
  lat: number;
  lon: number;
  heading_deg: number;
  speed_mps: number;
}

export interface BeaconFrame {
  active: boolean;
  azimuth_deg: number;
  gain_l: number;
  gain_r: number;
  itd_s: number;
  behind: boolean;
  pulse_period_ms?: number;
  pulse_pattern?: "left" | "right";
}

export interface TrackerFrame {
  waypoint_index: number;
  off_route: boolean;
  deviation_count: number;
  distance_walked_m: number;
  complete: boolean;
}

export interface StateMsg {
  type: "state";
  t: number;
  pose: Pose;
  beacon: BeaconFrame;
  tracker: TrackerFrame;
  thinking: boolean;
}

export interface UtteranceMsg {
  type: "utterance";
  t: number;
  text: string;
  latency_s: number;
}

export interface PointingPromptMsg {
  type: "pointing_prompt";
  targets: string[];
  origin: { lat: number; lon: number };
}

export interface RunEndMsg {
  type: "run_end";
  record: {
    route_id: string;
    condition: string;
    deviation_count: number;
    distance_walked_m: number;
    pointing_errors_deg: number[];
    completed: boolean;
    [key: string]: unknown;
  };
}

export interface ErrorMsg {
  type: "error";
  code: string;
  message: string;
}

export type ServerMsg = StateMsg | UtteranceMsg | PointingPromptMsg | RunEndMsg | ErrorMsg;

export class ProtocolViolation extends Error {}

const SERVER_TYPES = new Set(["state", "utterance", "pointing_prompt", "run_end", "error"]);

export function parseServerMessage(raw: string): ServerMsg {
  let doc: unknown;
  try {
    doc = JSON.parse(raw);
  } catch {
    throw new ProtocolViolation(`frame is not JSON: ${raw.slice(0, 80)}`);
  }
  if (typeof doc !== "object" || doc === null) {
    throw new ProtocolViolation("frame must be an object");
  }
  const msg = doc as Record<string, unknown>;
  if (msg.v !== PROTOCOL_VERSION) {
    throw new ProtocolViolation(`unsupported protocol version ${String(msg.v)}`);
  }
  if (typeof msg.type !== "string" || !SERVER_TYPES.has(msg.type)) {
    throw new ProtocolViolation(`unknown server message type ${String(msg.type)}`);
  }
  if (msg.type === "state") {
    for (const key of ["pose", "beacon", "tracker"]) {
      if (typeof msg[key] !== "object" || msg[key] === null) {
        throw new ProtocolViolation(`state frame missing ${key}`);
      }
    }
  }
  return msg as unknown as ServerMsg;
}

export interface HelloOptions {
  routeId: string;
  condition: "gmaps" | "ai-only" | "ai-sa";
  seed?: number;
  timeScale?: number;
  tickHz?: number;
  mono?: boolean;
}

export function buildHello(opts: HelloOptions): string {
  return JSON.stringify({
    v: PROTOCOL_VERSION,
    type: "hello",
    route_id: opts.routeId,
    condition: opts.condition,
    mode: "interactive",
    seed: opts.seed ?? 0,
    time_scale: opts.timeScale ?? 1.0,
    tick_hz: opts.tickHz ?? 10.0,
    mono: opts.mono ?? false,
  });
}

export function buildInput(turnRateDps: number, speedMps: number): string {
  return JSON.stringify({
    v: PROTOCOL_VERSION,
    type: "input",
    turn_rate_dps: turnRateDps,
    speed_mps: speedMps,
  });
}

export function buildPointing(headings: number[]): string {
  return JSON.stringify({ v: PROTOCOL_VERSION, type: "pointing", headings });
}
