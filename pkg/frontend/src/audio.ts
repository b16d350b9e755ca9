// Beacon playback: the server streams gains and an interaural delay; this
// module applies them verbatim to a small WebAudio graph. Nothing here
// decides direction on its own.

import type { BeaconFrame } from "./protocol.js";

export const BEHIND_LOWPASS_HZ = 800;
export const OPEN_LOWPASS_HZ = 18_000;

export interface BeaconNodeParams {
  gainL: number;
  gainR: number;
  delayL: number; // seconds applied to the left channel
  delayR: number;
  lowpassHz: number;
  playing: boolean;
}

/**
 * Translate a beacon frame into node parameters.
 *
 * itd_s > 0 means the right ear leads, so the LEFT channel is delayed by
 * itd_s; negative delays the right. Gains come through untouched; the
 * behind flag engages a muffling lowpass since two channels cannot encode
 * front/back on their own.
 */
export function beaconNodeParams(frame: BeaconFrame): BeaconNodeParams {
  return {
    gainL: frame.active ? frame.gain_l : 0,
    gainR: frame.active ? frame.gain_r : 0,
    delayL: Math.max(0, frame.itd_s),
    delayR: Math.max(0, -frame.itd_s),
    lowpassHz: frame.behind ? BEHIND_LOWPASS_HZ : OPEN_LOWPASS_HZ,
    playing: frame.active,
  };
}

export interface MonoPulseParams {
  periodMs: number;
  /** burst count per period: the left pattern double-blips, right single */
  bursts: number;
  playing: boolean;
}

export function monoPulseParams(frame: BeaconFrame): MonoPulseParams {
  return {
    periodMs: frame.pulse_period_ms ?? 400,
    bursts: frame.pulse_pattern === "left" ? 2 : 1,
    playing: frame.active,
  };
}

// Minimal structural types so the renderer can be driven by the real
// AudioContext in the browser and by a fake in tests.
export interface GainLike { gain: { value: number } }
export interface DelayLike { delayTime: { value: number } }
export interface FilterLike { frequency: { value: number }; type: string }

export interface AudioGraphLike {
  gainL: GainLike;
  gainR: GainLike;
  delayL: DelayLike;
  delayR: DelayLike;
  lowpass: FilterLike;
}

export class BeaconRenderer {
  constructor(private graph: AudioGraphLike) {}

  apply(frame: BeaconFrame): BeaconNodeParams {
    const p = beaconNodeParams(frame);
    this.graph.gainL.gain.value = p.gainL;
    this.graph.gainR.gain.value = p.gainR;
    this.graph.delayL.delayTime.value = p.delayL;
    this.graph.delayR.delayTime.value = p.delayR;
    this.graph.lowpass.frequency.value = p.lowpassHz;
    return p;
  }
}

/** Wire the browser graph: source -> split -> per-ear delay+gain -> lowpass -> out. */
export function buildBrowserGraph(ctx: AudioContext, buffer: AudioBuffer): AudioGraphLike {
  const source = ctx.createBufferSource();
  source.buffer = buffer;
  source.loop = true;

  const gainL = ctx.createGain();
  const gainR = ctx.createGain();
  const delayL = ctx.createDelay(0.005);
  const delayR = ctx.createDelay(0.005);
  const merger = ctx.createChannelMerger(2);
  const lowpass = ctx.createBiquadFilter();
  lowpass.type = "lowpass";
  lowpass.frequency.value = OPEN_LOWPASS_HZ;

  source.connect(delayL);
  source.connect(delayR);
  delayL.connect(gainL);
  delayR.connect(gainR);
  gainL.connect(merger, 0, 0);
  gainR.connect(merger, 0, 1);
  merger.connect(lowpass);
  lowpass.connect(ctx.destination);

  gainL.gain.value = 0;
  gainR.gain.value = 0;
  source.start();
  return { gainL, gainR, delayL, delayR, lowpass };
}
