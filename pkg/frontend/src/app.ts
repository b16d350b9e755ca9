// Browser entry point: connect, steer, listen, point.

import { turnWaypoints, steerToward, type RouteDoc } from "./autopilot.js";
import { BeaconRenderer, buildBrowserGraph, monoPulseParams } from "./audio.js";
import { NavClient } from "./client.js";
import { controlFromKeys, KeyTracker } from "./input.js";
import { MapView } from "./map.js";
import { PointingDial } from "./pointing.js";
import type { PointingPromptMsg, RunEndMsg, ServerMsg, StateMsg } from "./protocol.js";
import { StateBuffer } from "./statebuf.js";

const $ = (id: string) => document.getElementById(id)!;

interface UiState {
  client: NavClient | null;
  buffer: StateBuffer;
  map: MapView | null;
  route: RouteDoc | null;
  dial: PointingDial | null;
  autopilot: boolean;
  speak: boolean;
  beacon: BeaconRenderer | null;
  mono: boolean;
  lastBeaconActive: boolean;
}

const ui: UiState = {
  client: null,
  buffer: new StateBuffer(),
  map: null,
  route: null,
  dial: null,
  autopilot: false,
  speak: true,
  beacon: null,
  mono: false,
  lastBeaconActive: false,
};

async function setupAudio(): Promise<void> {
  const ctx = new AudioContext();
  const resp = await fetch("beacon.wav");
  const buf = await ctx.decodeAudioData(await resp.arrayBuffer());
  ui.beacon = new BeaconRenderer(buildBrowserGraph(ctx, buf));
}

function serverBase(): string {
  return (($("server") as HTMLInputElement).value || "127.0.0.1:8787").trim();
}

async function connect(): Promise<void> {
  const routeId = ($("route") as HTMLInputElement).value.trim() || "r1";
  const condition = ($("condition") as HTMLSelectElement).value as
    | "gmaps" | "ai-only" | "ai-sa";
  ui.mono = ($("mono") as HTMLInputElement).checked;
  if (!ui.beacon && !ui.mono) {
    try {
      await setupAudio();
    } catch {
      log("audio unavailable; continuing silent");
    }
  }
  const base = serverBase();
  const doc = await fetch(`http://${base}/routes/${routeId}`);
  if (!doc.ok) {
    log(`route ${routeId} not found on ${base}`);
    return;
  }
  ui.route = (await doc.json()) as RouteDoc;
  ui.map = new MapView($("map") as HTMLCanvasElement, ui.route);
  ui.map.showRoute = ($("debug") as HTMLInputElement).checked;

  ui.client = new NavClient(
    `ws://${base}/session`,
    { routeId, condition, mono: ui.mono, timeScale: 1.0 },
    { onMessage: handleMessage, onClose: (code) => log(`closed (${code})`) },
  );
  log(`connected: ${routeId} / ${condition}`);
}

function handleMessage(msg: ServerMsg): void {
  switch (msg.type) {
    case "state":
      ui.buffer.pushState(msg);
      break;
    case "utterance":
      ui.buffer.pushUtterance(msg);
      break;
    case "pointing_prompt":
      beginPointing(msg);
      break;
    case "run_end":
      showRunEnd(msg);
      break;
    case "error":
      log(`server error [${msg.code}]: ${msg.message}`);
      break;
  }
}

function beginPointing(msg: PointingPromptMsg): void {
  ui.dial = new PointingDial(msg.targets);
  $("pointing").classList.remove("hidden");
  updateDial();
  log("route complete: aim the dial at each remembered stop (enter to lock)");
}

function updateDial(): void {
  if (!ui.dial) return;
  $("dial-target").textContent = ui.dial.currentTarget ?? "done";
  $("dial-heading").textContent = `${ui.dial.headingDeg.toFixed(1)} deg`;
  ($("needle") as HTMLElement).style.transform =
    `rotate(${ui.dial.headingDeg}deg)`;
}

function showRunEnd(msg: RunEndMsg): void {
  const r = msg.record;
  const errs = (r.pointing_errors_deg as number[])
    .map((e) => e.toFixed(1))
    .join(", ");
  log(
    `run ended: ${r.deviation_count} deviations, ` +
    `${(r.distance_walked_m as number).toFixed(0)} m walked` +
    (errs ? `, pointing errors [${errs}] deg` : ""),
  );
  $("pointing").classList.add("hidden");
}

function log(text: string): void {
  const el = $("log");
  const line = document.createElement("div");
  line.textContent = text;
  el.prepend(line);
}

function speakUtterance(text: string): void {
  if (!ui.speak || typeof speechSynthesis === "undefined") return;
  speechSynthesis.speak(new SpeechSynthesisUtterance(text));
}

function start(): void {
  const keys = new KeyTracker(window);
  let waypoints: ReturnType<typeof turnWaypoints> = [];

  $("connect").addEventListener("click", () => {
    void connect().then(() => {
      waypoints = ui.route ? turnWaypoints(ui.route) : [];
    });
  });
  $("debug").addEventListener("change", () => {
    if (ui.map) ui.map.showRoute = ($("debug") as HTMLInputElement).checked;
  });
  $("autopilot").addEventListener("change", () => {
    ui.autopilot = ($("autopilot") as HTMLInputElement).checked;
  });
  $("speak").addEventListener("change", () => {
    ui.speak = ($("speak") as HTMLInputElement).checked;
  });

  window.addEventListener("keydown", (e) => {
    if (!ui.dial) return;
    if (e.key === "ArrowLeft") ui.dial.rotate(-5);
    if (e.key === "ArrowRight") ui.dial.rotate(5);
    if (e.key === "Enter") {
      ui.dial.record();
      if (ui.dial.done && ui.client) ui.client.sendPointing(ui.dial.headings);
    }
    updateDial();
  });

  // input loop at 20 Hz (>= the 10 Hz the server ticks at)
  setInterval(() => {
    if (!ui.client || ui.dial) return;
    const state = ui.buffer.state;
    if (ui.autopilot && state && waypoints.length) {
      const c = steerToward(state, waypoints, 1.38);
      ui.client.sendInput(c.turnRateDps, c.speedMps);
    } else {
      const c = controlFromKeys(keys.keys);
      ui.client.sendInput(c.turnRateDps, c.speedMps);
    }
  }, 50);

  // render loop decoupled from the network by the latest-state buffer
  const render = () => {
    const state = ui.buffer.state;
    if (ui.map) ui.map.draw(state, ui.buffer.trail);
    for (const u of ui.buffer.drainUtterances()) {
      log(`instruction (+${u.latency_s.toFixed(2)} s): ${u.text}`);
      speakUtterance(u.text);
    }
    if (state) {
      $("hud").textContent =
        `t ${state.t.toFixed(1)} s | walked ${state.tracker.distance_walked_m.toFixed(0)} m | ` +
        `deviations ${state.tracker.deviation_count} | waypoint ${state.tracker.waypoint_index}` +
        (state.tracker.off_route ? " | OFF ROUTE" : "");
      $("thinking").classList.toggle("hidden", !state.thinking);
      const b = state.beacon;
      $("beacon").textContent = b.active
        ? `beacon ${b.azimuth_deg.toFixed(0)} deg ${b.behind ? "(behind)" : ""}`
        : "beacon quiet";
      if (ui.beacon) ui.beacon.apply(b);
      if (ui.mono && b.active && !ui.lastBeaconActive) {
        const p = monoPulseParams(b);
        log(`mono pulse: ${p.bursts} burst(s) every ${p.periodMs.toFixed(0)} ms`);
      }
      ui.lastBeaconActive = b.active;
    }
    requestAnimationFrame(render);
  };
  requestAnimationFrame(render);
}

start();
