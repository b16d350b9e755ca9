// Post-route pointing task: a compass dial the user rotates toward each
// remembered destination, submitting one heading per target.

import { normalizeHeading } from "./geo.js";

export class PointingDial {
  headingDeg = 0;
  private recorded: number[] = [];

  constructor(readonly targets: string[]) {}

  get currentTarget(): string | null {
    return this.recorded.length < this.targets.length
      ? this.targets[this.recorded.length]
      : null;
  }

  rotate(byDeg: number): void {
    this.headingDeg = normalizeHeading(this.headingDeg + byDeg);
  }

  /** Lock in the current heading for the active target. */
  record(): boolean {
    if (this.currentTarget === null) return false;
    this.recorded.push(this.headingDeg);
    return true;
  }

  get done(): boolean {
    return this.recorded.length === this.targets.length;
  }

  get headings(): number[] {
    return [...this.recorded];
  }
}
