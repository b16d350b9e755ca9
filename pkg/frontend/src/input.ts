// Keyboard steering: held keys map to a turn rate and a walking speed,
// sent to the server as ClientInput. The server integrates the pose.

export interface Control {
  turnRateDps: number;
  speedMps: number;
}

export const WALK_SPEED = 1.38;
export const FAST_SPEED = 4.0;
export const TURN_RATE = 90;
export const FAST_TURN_RATE = 180;

export function controlFromKeys(keys: ReadonlySet<string>): Control {
  const fast = keys.has("Shift");
  let turn = 0;
  if (keys.has("ArrowLeft")) turn -= fast ? FAST_TURN_RATE : TURN_RATE;
  if (keys.has("ArrowRight")) turn += fast ? FAST_TURN_RATE : TURN_RATE;
  let speed = 0;
  if (keys.has("ArrowUp")) speed = fast ? FAST_SPEED : WALK_SPEED;
  if (keys.has("ArrowDown")) speed = 0;
  return { turnRateDps: turn, speedMps: speed };
}

/** Track held keys on a DOM target; call dispose() to detach. */
export class KeyTracker {
  readonly keys = new Set<string>();
  private down = (e: KeyboardEvent) => {
    this.keys.add(e.key === "Shift" ? "Shift" : e.key);
  };
  private up = (e: KeyboardEvent) => {
    this.keys.delete(e.key === "Shift" ? "Shift" : e.key);
  };

  constructor(private target: { addEventListener: Function; removeEventListener: Function }) {
    target.addEventListener("keydown", this.down);
    target.addEventListener("keyup", this.up);
  }

  dispose(): void {
    this.target.removeEventListener("keydown", this.down);
    this.target.removeEventListener("keyup", this.up);
  }
}
