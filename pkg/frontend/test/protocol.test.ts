import { describe, expect, it } from "vitest";

import {
  buildHello,
  buildInput,
  buildPointing,
  parseServerMessage,
  ProtocolViolation,
} from "../src/protocol.js";

const STATE = JSON.stringify({
  v: 1,
  type: "state",
  t: 0.1,
  pose: { lat: 37.42, lon: -122.08, heading_deg: 0, speed_mps: 0 },
  beacon: { active: false, azimuth_deg: 0, gain_l: 0, gain_r: 0, itd_s: 0, behind: false },
  tracker: { waypoint_index: 0, off_route: false, deviation_count: 0, distance_walked_m: 0, complete: false },
  thinking: false,
});

describe("parseServerMessage", () => {
  it("round-trips a state frame", () => {
    const msg = parseServerMessage(STATE);
    expect(msg.type).toBe("state");
    if (msg.type === "state") {
      expect(msg.pose.lat).toBeCloseTo(37.42);
      expect(msg.beacon.active).toBe(false);
    }
  });

  it("rejects bad frames", () => {
    expect(() => parseServerMessage("nope")).toThrow(ProtocolViolation);
    expect(() => parseServerMessage('{"v":2,"type":"state"}')).toThrow(ProtocolViolation);
    expect(() => parseServerMessage('{"v":1,"type":"mystery"}')).toThrow(ProtocolViolation);
    expect(() => parseServerMessage('{"v":1,"type":"state"}')).toThrow(ProtocolViolation);
  });
});

describe("client frames", () => {
  it("hello carries session options", () => {
    const hello = JSON.parse(
      buildHello({ routeId: "r1", condition: "ai-sa", timeScale: 50, seed: 3 }),
    );
    expect(hello).toMatchObject({
      v: 1, type: "hello", route_id: "r1", condition: "ai-sa",
      mode: "interactive", time_scale: 50, seed: 3, mono: false,
    });
  });

  it("input and pointing frames are versioned", () => {
    expect(JSON.parse(buildInput(45, 1.38))).toEqual({
      v: 1, type: "input", turn_rate_dps: 45, speed_mps: 1.38,
    });
    expect(JSON.parse(buildPointing([0, 90]))).toEqual({
      v: 1, type: "pointing", headings: [0, 90],
    });
  });
});
