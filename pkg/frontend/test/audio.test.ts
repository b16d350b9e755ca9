import { describe, expect, it } from "vitest";

import {
  BEHIND_LOWPASS_HZ,
  OPEN_LOWPASS_HZ,
  BeaconRenderer,
  beaconNodeParams,
  monoPulseParams,
} from "../src/audio.js";
import type { BeaconFrame } from "../src/protocol.js";

function frame(over: Partial<BeaconFrame> = {}): BeaconFrame {
  return {
    active: true,
    azimuth_deg: 30,
    gain_l: 0.5,
    gain_r: 0.866,
    itd_s: 0.00033,
    behind: false,
    ...over,
  };
}

describe("beaconNodeParams", () => {
  it("applies server gains verbatim when active", () => {
    const p = beaconNodeParams(frame());
    expect(p.gainL).toBe(0.5);
    expect(p.gainR).toBe(0.866);
    expect(p.playing).toBe(true);
  });

  it("positive itd delays the left channel (right ear leads)", () => {
    const p = beaconNodeParams(frame({ itd_s: 0.0005 }));
    expect(p.delayL).toBeCloseTo(0.0005, 9);
    expect(p.delayR).toBe(0);
  });

  it("negative itd delays the right channel", () => {
    const p = beaconNodeParams(frame({ itd_s: -0.0004 }));
    expect(p.delayR).toBeCloseTo(0.0004, 9);
    expect(p.delayL).toBe(0);
  });

  it("mutes when inactive", () => {
    const p = beaconNodeParams(frame({ active: false }));
    expect(p.gainL).toBe(0);
    expect(p.gainR).toBe(0);
    expect(p.playing).toBe(false);
  });

  it("behind engages the muffling lowpass", () => {
    expect(beaconNodeParams(frame({ behind: true })).lowpassHz).toBe(BEHIND_LOWPASS_HZ);
    expect(beaconNodeParams(frame({ behind: false })).lowpassHz).toBe(OPEN_LOWPASS_HZ);
  });
});

describe("monoPulseParams", () => {
  it("uses the server pulse contract", () => {
    const p = monoPulseParams(frame({ pulse_period_ms: 440, pulse_pattern: "left" }));
    expect(p.periodMs).toBe(440);
    expect(p.bursts).toBe(2);
    const r = monoPulseParams(frame({ pulse_period_ms: 520, pulse_pattern: "right" }));
    expect(r.bursts).toBe(1);
  });
});

describe("BeaconRenderer", () => {
  it("writes parameters into the audio graph", () => {
    const node = () => ({ gain: { value: -1 } });
    const graph = {
      gainL: node(),
      gainR: node(),
      delayL: { delayTime: { value: -1 } },
      delayR: { delayTime: { value: -1 } },
      lowpass: { frequency: { value: -1 }, type: "lowpass" },
    };
    const renderer = new BeaconRenderer(graph);
    renderer.apply(frame({ itd_s: -0.0002, behind: true }));
    expect(graph.gainL.gain.value).toBe(0.5);
    expect(graph.gainR.gain.value).toBe(0.866);
    expect(graph.delayL.delayTime.value).toBe(0);
    expect(graph.delayR.delayTime.value).toBeCloseTo(0.0002, 9);
    expect(graph.lowpass.frequency.value).toBe(BEHIND_LOWPASS_HZ);
  });
});
