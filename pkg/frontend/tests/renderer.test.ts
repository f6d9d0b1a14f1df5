import { describe, expect, it } from "vitest";

import { CircleItem, PolyItem, buildScene } from "../src/renderer.js";
import { ViewState } from "../src/state.js";
import { falseDetection, makeSnapshot, trueDetection } from "./helpers.js";

const W = 960;
const H = 600;

function sceneFor(view: ViewState) {
  return buildScene(view, W, H);
}

function tags(items: ReturnType<typeof buildScene>): string[] {
  return items.map((item) => item.tag);
}

describe("buildScene", () => {
  it("draws vehicle, cone, and truth for a plain snapshot", () => {
    const view = new ViewState();
    view.applySnapshot(makeSnapshot());
    const seen = tags(sceneFor(view));
    for (const tag of ["vehicle", "vehicle-heading", "fov", "truth"]) {
      expect(seen).toContain(tag);
    }
  });

  it("renders true and false detections with distinct styles", () => {
    const view = new ViewState();
    view.applySnapshot(
      makeSnapshot({ detections: [trueDetection(), falseDetection()] }),
    );
    const items = sceneFor(view);
    const truthy = items.filter((i) => i.tag === "detection-true");
    const ghosts = items.filter((i) => i.tag === "detection-false");
    expect(truthy.length).toBe(1);
    expect(ghosts.length).toBeGreaterThan(0);
    // different primitive shape and different color
    expect(truthy[0]?.kind).toBe("circle");
    expect(ghosts.every((g) => g.kind === "poly")).toBe(true);
    const trueColor = (truthy[0] as CircleItem).stroke;
    const falseColor = (ghosts[0] as PolyItem).stroke;
    expect(trueColor).not.toBe(falseColor);
  });

  it("shows only the truth marker when nothing is detected", () => {
    const view = new ViewState();
    view.applySnapshot(makeSnapshot({ detections: [] }));
    const seen = tags(sceneFor(view));
    expect(seen).toContain("truth");
    expect(seen).not.toContain("detection-true");
    expect(seen).not.toContain("detection-false");
  });

  it("mode chip tracks the controller mode in the same frame", () => {
    const view = new ViewState();
    view.applySnapshot(makeSnapshot({ tff: { mode: "following", v_cmd: 1, steer: 0 } }));
    let chip = sceneFor(view).find((i) => i.tag === "mode-chip");
    expect(chip?.kind === "text" && chip.text).toBe("TFF following");
    view.applySnapshot(
      makeSnapshot({ tick: 1, tff: { mode: "stopped", v_cmd: 0, steer: 0 } }),
    );
    chip = sceneFor(view).find((i) => i.tag === "mode-chip");
    expect(chip?.kind === "text" && chip.text).toBe("TFF stopped");
  });

  it("disconnected shows the banner over the frozen frame", () => {
    const view = new ViewState();
    view.applySnapshot(makeSnapshot());
    view.markDisconnected();
    const items = sceneFor(view);
    const banner = items.find((i) => i.tag === "banner");
    expect(banner?.kind === "text" && banner.text).toContain("disconnected");
    expect(tags(items)).toContain("vehicle"); // frame still drawn
  });

  it("overlay toggles hide their layers", () => {
    const view = new ViewState();
    view.applySnapshot(
      makeSnapshot({ detections: [trueDetection()] }),
    );
    view.applySnapshot(makeSnapshot({ tick: 1, detections: [trueDetection()] }));
    view.overlays.detections = false;
    view.overlays.fov = false;
    view.overlays.skeleton = false;
    view.overlays.trails = false;
    const seen = tags(sceneFor(view));
    expect(seen).not.toContain("detection-true");
    expect(seen).not.toContain("fov");
    expect(seen).not.toContain("skeleton");
    expect(seen).not.toContain("trail-vehicle");
  });

  it("repeated ghosts grow a cone-site glyph", () => {
    const view = new ViewState();
    for (let tick = 0; tick < 3; tick += 1) {
      view.applySnapshot(makeSnapshot({ tick, detections: [falseDetection()] }));
    }
    const seen = tags(sceneFor(view));
    expect(seen).toContain("cone-site");
  });

  it("skeleton overlay draws one dot per joint", () => {
    const view = new ViewState();
    view.applySnapshot(makeSnapshot());
    const dots = sceneFor(view).filter((i) => i.tag === "skeleton");
    expect(dots.length).toBe(24);
  });

  it("no snapshot yet renders only the hud", () => {
    const view = new ViewState();
    const items = sceneFor(view);
    expect(items.length).toBe(1);
    expect(items[0]?.tag).toBe("banner");
  });

  it("vru motion moves the truth marker between frames", () => {
    const view = new ViewState();
    view.applySnapshot(makeSnapshot());
    const before = sceneFor(view).find((i) => i.tag === "truth") as CircleItem;
    view.applySnapshot(
      makeSnapshot({
        tick: 1,
        vru: { x: 15.5, y: 0.4, yaw: Math.PI, joints: makeSnapshot().vru.joints },
      }),
    );
    const after = sceneFor(view).find((i) => i.tag === "truth") as CircleItem;
    expect(after.x).not.toBe(before.x);
    expect(after.y).not.toBe(before.y);
  });
});
