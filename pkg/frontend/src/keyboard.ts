/**
 * Keyboard state -> input commands. Arrows or WASD steer the VRU
 * avatar, space pulses the arm gesture. The gesture is debounced at
 * the client: one key press produces exactly one gesture=true command
 * no matter how long the key is held.
 */

import { IDLE_COMMAND, InputCommand, sameCommand } from "./protocol.js";

export interface DriveTuning {
  walkSpeed: number; // m/s while forward is held
  turnRate: number; // rad/s while left/right is held
}

export const DEFAULT_TUNING: DriveTuning = { walkSpeed: 1.4, turnRate: 1.2 };

const FORWARD = new Set(["ArrowUp", "KeyW"]);
const LEFT = new Set(["ArrowLeft", "KeyA"]);
const RIGHT = new Set(["ArrowRight", "KeyD"]);
const GESTURE = new Set(["Space", "KeyG"]);

function anyHeld(held: ReadonlySet<string>, keys: ReadonlySet<string>): boolean {
  for (const key of keys) {
    if (held.has(key)) return true;
  }
  return false;
}

/** Pure mapping from held keys to a command (gesture handled separately). */
export function commandFromKeys(
  held: ReadonlySet<string>,
  tuning: DriveTuning = DEFAULT_TUNING,
): InputCommand {
  let heading = 0;
  if (anyHeld(held, LEFT)) heading += tuning.turnRate;
  if (anyHeld(held, RIGHT)) heading -= tuning.turnRate;
  return {
    heading_delta: heading,
    speed_target: anyHeld(held, FORWARD) ? tuning.walkSpeed : 0,
    gesture: false,
  };
}

export class KeyboardSource {
  private held = new Set<string>();
  private gesturePending = false;
  private gestureDown = false;
  private lastSent: InputCommand = IDLE_COMMAND;

  constructor(private tuning: DriveTuning = DEFAULT_TUNING) {}

  keyDown(code: string): void {
    if (GESTURE.has(code)) {
      // auto-repeat keydown events arrive while held; arm only once
      if (!this.gestureDown) {
        this.gestureDown = true;
        this.gesturePending = true;
      }
      return;
    }
    this.held.add(code);
  }

  keyUp(code: string): void {
    if (GESTURE.has(code)) {
      this.gestureDown = false;
      return;
    }
    this.held.delete(code);
  }

  /** Drop all held state, e.g. when the window loses focus. */
  releaseAll(): void {
    this.held.clear();
    this.gestureDown = false;
  }

  heldKeys(): ReadonlySet<string> {
    return this.held;
  }

  /**
   * The command to send this cycle, or null when the sender can stay
   * quiet (idle, unchanged, nothing held). Consumes a pending gesture
   * pulse, so calling it commits to sending the result.
   */
  nextCommand(): InputCommand | null {
    const base = commandFromKeys(this.held, this.tuning);
    const cmd: InputCommand = this.gesturePending
      ? { ...base, gesture: true }
      : base;
    this.gesturePending = false;
    const active = this.held.size > 0 || cmd.gesture;
    if (!active && sameCommand(cmd, this.lastSent)) {
      return null;
    }
    this.lastSent = cmd;
    return cmd;
  }
}
