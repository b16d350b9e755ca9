// Latest-state buffer: the network task writes, the render loop reads.
// Rendering never blocks on the socket and never sees a torn frame.

import type { StateMsg, UtteranceMsg } from "./protocol.js";

export class StateBuffer {
  private latest: StateMsg | null = null;
  private trailPts: Array<{ lat: number; lon: number; offRoute: boolean }> = [];
  private utterances: UtteranceMsg[] = [];
  private maxTrail: number;

  constructor(maxTrail = 20_000) {
    this.maxTrail = maxTrail;
  }

  pushState(msg: StateMsg): void {
    this.latest = msg;
    this.trailPts.push({
      lat: msg.pose.lat,
      lon: msg.pose.lon,
      offRoute: msg.tracker.off_route,
    });
    if (this.trailPts.length > this.maxTrail) {
      this.trailPts.splice(0, this.trailPts.length - this.maxTrail);
    }
  }

  pushUtterance(msg: UtteranceMsg): void {
    this.utterances.push(msg);
  }

  get state(): StateMsg | null {
    return this.latest;
  }

  get trail(): ReadonlyArray<{ lat: number; lon: number; offRoute: boolean }> {
    return this.trailPts;
  }

  /** Utterances receive-once, in arrival order. */
  drainUtterances(): UtteranceMsg[] {
    const out = this.utterances;
    this.utterances = [];
    return out;
  }
}
