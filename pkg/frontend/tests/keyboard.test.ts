import { describe, expect, it } from "vitest";

import {
  DEFAULT_TUNING,
  KeyboardSource,
  commandFromKeys,
} from "../src/keyboard.js";

describe("commandFromKeys", () => {
  it("maps nothing held to idle", () => {
    const cmd = commandFromKeys(new Set());
    expect(cmd).toEqual({ heading_delta: 0, speed_target: 0, gesture: false });
  });

  it("maps forward to the walk speed", () => {
    for (const key of ["ArrowUp", "KeyW"]) {
      const cmd = commandFromKeys(new Set([key]));
      expect(cmd.speed_target).toBe(DEFAULT_TUNING.walkSpeed);
      expect(cmd.heading_delta).toBe(0);
    }
  });

  it("maps left and right to opposite turn rates", () => {
    expect(commandFromKeys(new Set(["ArrowLeft"])).heading_delta).toBe(
      DEFAULT_TUNING.turnRate,
    );
    expect(commandFromKeys(new Set(["KeyD"])).heading_delta).toBe(
      -DEFAULT_TUNING.turnRate,
    );
  });

  it("cancels opposing turns", () => {
    const cmd = commandFromKeys(new Set(["KeyA", "ArrowRight"]));
    expect(cmd.heading_delta).toBe(0);
  });

  it("combines forward and turn", () => {
    const cmd = commandFromKeys(new Set(["KeyW", "KeyA"]));
    expect(cmd.speed_target).toBe(DEFAULT_TUNING.walkSpeed);
    expect(cmd.heading_delta).toBe(DEFAULT_TUNING.turnRate);
  });
});

describe("KeyboardSource", () => {
  it("stays quiet while idle", () => {
    const kb = new KeyboardSource();
    expect(kb.nextCommand()).toBeNull();
    expect(kb.nextCommand()).toBeNull();
  });

  it("repeats the command while a key is held, then sends one idle", () => {
    const kb = new KeyboardSource();
    kb.keyDown("KeyW");
    const first = kb.nextCommand();
    expect(first?.speed_target).toBe(DEFAULT_TUNING.walkSpeed);
    const second = kb.nextCommand();
    expect(second?.speed_target).toBe(DEFAULT_TUNING.walkSpeed);
    kb.keyUp("KeyW");
    const release = kb.nextCommand();
    expect(release).toEqual({
      heading_delta: 0,
      speed_target: 0,
      gesture: false,
    });
    expect(kb.nextCommand()).toBeNull();
  });

  it("pulses gesture exactly once per press", () => {
    const kb = new KeyboardSource();
    kb.keyDown("Space");
    kb.keyDown("Space"); // browser auto-repeat while held
    kb.keyDown("Space");
    const pulse = kb.nextCommand();
    expect(pulse?.gesture).toBe(true);
    const after = kb.nextCommand();
    expect(after?.gesture).toBe(false);
    expect(kb.nextCommand()).toBeNull();
    kb.keyUp("Space");
    kb.keyDown("Space");
    expect(kb.nextCommand()?.gesture).toBe(true);
  });

  it("keeps the gesture pulse when other keys are held", () => {
    const kb = new KeyboardSource();
    kb.keyDown("KeyW");
    kb.nextCommand();
    kb.keyDown("KeyG");
    const pulse = kb.nextCommand();
    expect(pulse?.gesture).toBe(true);
    expect(pulse?.speed_target).toBe(DEFAULT_TUNING.walkSpeed);
    expect(kb.nextCommand()?.gesture).toBe(false);
  });

  it("releaseAll drops held keys", () => {
    const kb = new KeyboardSource();
    kb.keyDown("KeyW");
    kb.nextCommand();
    kb.releaseAll();
    expect(kb.nextCommand()?.speed_target).toBe(0);
    expect(kb.nextCommand()).toBeNull();
  });
});
