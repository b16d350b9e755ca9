// End-to-end session against the real python server: a scripted client
// walks the first replica route perfectly, checks the beacon while held
// off-course, and submits true pointing bearings.

import { ChildProcess, execFileSync, spawn } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { pointingTruth, steerToward, steerToOffset, turnWaypoints, type RouteDoc } from "../src/autopilot.js";
import { NavClient, type SocketLike } from "../src/client.js";
import type { RunEndMsg, ServerMsg, StateMsg } from "../src/protocol.js";

const PORT = 8931;
const BASE = `127.0.0.1:${PORT}`;
const REPO_ROOT = join(__dirname, "..", "..");

let server: ChildProcess;

async function until<T>(probe: () => Promise<T | null>, timeoutMs: number, what: string): Promise<T> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    const got = await probe().catch(() => null);
    if (got !== null) return got;
    if (Date.now() > deadline) throw new Error(`timed out waiting for ${what}`);
    await new Promise((r) => setTimeout(r, 150));
  }
}

beforeAll(async () => {
  const fixtures = mkdtempSync(join(tmpdir(), "navkit-routes-"));
  const runs = mkdtempSync(join(tmpdir(), "navkit-runs-"));
  execFileSync("python3", ["-m", "navkit.cli", "fixtures", "--out", fixtures], {
    cwd: REPO_ROOT,
  });
  server = spawn(
    "python3",
    ["-m", "navkit.cli", "serve", "--routes", fixtures, "--bind", BASE, "--out", runs],
    { cwd: REPO_ROOT, stdio: "ignore" },
  );
  await until(
    async () => {
      const r = await fetch(`http://${BASE}/routes`);
      return r.ok ? true : null;
    },
    20_000,
    "server startup",
  );
}, 30_000);

afterAll(() => {
  server?.kill("SIGINT");
});

const wsFactory = (url: string) => new WebSocket(url) as unknown as SocketLike;

describe("walkthrough session end to end", () => {
  it("perfect walk: 0 deviations, beacon matches azimuth sign, pointing exact", async () => {
    const routeDoc = (await (await fetch(`http://${BASE}/routes/r1`)).json()) as RouteDoc;
    const waypoints = turnWaypoints(routeDoc);

    type Phase = "walk" | "hold-off-course" | "resume" | "pointing" | "done";
    let phase: Phase = "walk";
    let statesSeen = 0;
    let beaconChecked = false;
    const beaconFrames: StateMsg["beacon"][] = [];
    let runEnd: RunEndMsg | null = null;
    let lastTracker: StateMsg["tracker"] | null = null;
    let holdTicks = 0;

    const finished = new Promise<void>((resolve, reject) => {
      const client = new NavClient(
        `ws://${BASE}/session`,
        { routeId: "r1", condition: "ai-sa", timeScale: 100, seed: 1, tickHz: 10 },
        {
          onViolation: reject,
          onClose: () => resolve(),
          onMessage: (msg: ServerMsg) => {
            if (msg.type === "error") {
              reject(new Error(`${msg.code}: ${msg.message}`));
              return;
            }
            if (msg.type === "pointing_prompt") {
              phase = "pointing";
              expect(msg.targets).toHaveLength(4);
              client.sendPointing(pointingTruth(routeDoc));
              return;
            }
            if (msg.type === "run_end") {
              runEnd = msg;
              phase = "done";
              client.close();
              return;
            }
            if (msg.type !== "state") return;
            statesSeen += 1;
            lastTracker = msg.tracker;

            // mid-leg on the long third leg: stop and hold 30 deg off course
            if (phase === "walk" && !beaconChecked && statesSeen > 200
                && msg.tracker.waypoint_index === 2 && !msg.beacon.active) {
              phase = "hold-off-course";
            }

            if (phase === "hold-off-course") {
              const c = steerToOffset(msg, waypoints, 30.0);
              client.sendInput(c.turnRateDps, c.speedMps);
              holdTicks += 1;
              if (msg.beacon.active) beaconFrames.push(msg.beacon);
              if (beaconFrames.length >= 10) {
                beaconChecked = true;
                phase = "resume";
              } else if (holdTicks > 600) {
                reject(new Error("beacon never activated while off course"));
              }
              return;
            }

            const c = steerToward(msg, waypoints, 5.0);
            client.sendInput(c.turnRateDps, c.speedMps);
          },
        },
        wsFactory,
      );
    });

    await finished;

    expect(beaconChecked).toBe(true);
    for (const b of beaconFrames) {
      // heading held 30 deg right of the bearing: target is to the left
      expect(b.azimuth_deg).toBeLessThan(-25);
      expect(b.gain_l).toBeGreaterThan(b.gain_r);
      expect(b.itd_s).toBeLessThan(0);
      expect(b.gain_l ** 2 + b.gain_r ** 2).toBeCloseTo(1.0, 9);
    }

    expect(lastTracker).not.toBeNull();
    expect(runEnd).not.toBeNull();
    const record = runEnd!.record;
    expect(record.completed).toBe(true);
    expect(record.deviation_count).toBe(0);
    expect(record.pointing_errors_deg).toHaveLength(4);
    for (const err of record.pointing_errors_deg) {
      expect(Math.abs(err)).toBeLessThan(1e-6);
    }
  }, 120_000);

  it("serves route geometry for the map", async () => {
    const listing = (await (await fetch(`http://${BASE}/routes`)).json()) as {
      routes: string[];
    };
    expect(listing.routes).toEqual(["r1", "r2", "r3"]);
    const doc = (await (await fetch(`http://${BASE}/routes/r2`)).json()) as RouteDoc;
    expect(doc.polyline.length).toBeGreaterThan(5);
    expect(doc.pois).toHaveLength(5);
  });
});
