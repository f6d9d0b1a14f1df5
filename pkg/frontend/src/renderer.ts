/**
 * Snapshot -> display list -> canvas. `buildScene` is a pure function
 * from view state to drawing primitives so the scene logic is testable
 * without a DOM; `drawScene` is the thin painter that walks the list.
 *
 * World frame: x right, y up on screen (top-down schematic). Detection
 * hips arrive in the vehicle frame and are rotated out by the vehicle
 * pose before drawing.
 */

import { Snapshot } from "./protocol.js";
import { ViewState } from "./state.js";

export interface PolyItem {
  kind: "poly";
  tag: string;
  points: Array<[number, number]>;
  closed: boolean;
  stroke: string;
  fill?: string;
  width: number;
}

export interface CircleItem {
  kind: "circle";
  tag: string;
  x: number;
  y: number;
  r: number;
  stroke: string;
  fill?: string;
  width: number;
}

export interface TextItem {
  kind: "text";
  tag: string;
  x: number;
  y: number;
  text: string;
  color: string;
  size: number;
}

export type DisplayItem = PolyItem | CircleItem | TextItem;

export const COLORS = {
  background: "#101418",
  vehicle: "#8ecbff",
  fov: "rgba(142, 203, 255, 0.12)",
  truth: "#f4f4f4",
  skeleton: "#9a9a9a",
  detectionTrue: "#37c871",
  detectionFalse: "#ff5d45",
  cone: "#e8a33d",
  trailVehicle: "rgba(142, 203, 255, 0.45)",
  trailVru: "rgba(244, 244, 244, 0.45)",
  banner: "#ff5d45",
  text: "#cfd8dc",
};

const SCALE = 12; // px per meter
const VEHICLE_LENGTH = 3.0; // m, rear axle at 0.5 m from the back
const VEHICLE_WIDTH = 1.6;
const CAMERA_FORWARD = 2.0; // camera mount ahead of the rear axle
const FOV_HALF_ANGLE = Math.PI / 4;
const FOV_RANGE = 18; // m, drawn length of the cone edges

interface Camera {
  cx: number;
  cy: number;
  w: number;
  h: number;
}

function toScreen(cam: Camera, wx: number, wy: number): [number, number] {
  return [cam.w / 2 + (wx - cam.cx) * SCALE, cam.h / 2 - (wy - cam.cy) * SCALE];
}

function bodyToWorld(
  x: number,
  y: number,
  yaw: number,
  bx: number,
  by: number,
): [number, number] {
  const c = Math.cos(yaw);
  const s = Math.sin(yaw);
  return [x + c * bx - s * by, y + s * bx + c * by];
}

function polyFromWorld(
  cam: Camera,
  tag: string,
  points: Array<[number, number]>,
  style: { closed?: boolean; stroke: string; fill?: string; width?: number },
): PolyItem {
  return {
    kind: "poly",
    tag,
    points: points.map(([x, y]) => toScreen(cam, x, y)),
    closed: style.closed ?? false,
    stroke: style.stroke,
    fill: style.fill,
    width: style.width ?? 1.5,
  };
}

function vehicleItems(cam: Camera, snap: Snapshot): DisplayItem[] {
  const { x, y, yaw } = snap.vehicle;
  const corners: Array<[number, number]> = [
    bodyToWorld(x, y, yaw, -0.5, -VEHICLE_WIDTH / 2),
    bodyToWorld(x, y, yaw, VEHICLE_LENGTH - 0.5, -VEHICLE_WIDTH / 2),
    bodyToWorld(x, y, yaw, VEHICLE_LENGTH - 0.5, VEHICLE_WIDTH / 2),
    bodyToWorld(x, y, yaw, -0.5, VEHICLE_WIDTH / 2),
  ];
  const nose: Array<[number, number]> = [
    bodyToWorld(x, y, yaw, VEHICLE_LENGTH - 0.5, 0),
    bodyToWorld(x, y, yaw, VEHICLE_LENGTH + 0.4, 0),
  ];
  return [
    polyFromWorld(cam, "vehicle", corners, {
      closed: true,
      stroke: COLORS.vehicle,
      fill: "rgba(142, 203, 255, 0.18)",
      width: 2,
    }),
    polyFromWorld(cam, "vehicle-heading", nose, {
      stroke: COLORS.vehicle,
      width: 2,
    }),
  ];
}

function fovItem(cam: Camera, snap: Snapshot): PolyItem {
  const { x, y, yaw } = snap.vehicle;
  const apex = bodyToWorld(x, y, yaw, CAMERA_FORWARD, 0);
  const left = bodyToWorld(
    x,
    y,
    yaw,
    CAMERA_FORWARD + FOV_RANGE * Math.cos(FOV_HALF_ANGLE),
    FOV_RANGE * Math.sin(FOV_HALF_ANGLE),
  );
  const right = bodyToWorld(
    x,
    y,
    yaw,
    CAMERA_FORWARD + FOV_RANGE * Math.cos(FOV_HALF_ANGLE),
    -FOV_RANGE * Math.sin(FOV_HALF_ANGLE),
  );
  return polyFromWorld(cam, "fov", [left, apex, right], {
    closed: true,
    stroke: "rgba(142, 203, 255, 0.35)",
    fill: COLORS.fov,
    width: 1,
  });
}

function truthItems(cam: Camera, snap: Snapshot, skeleton: boolean): DisplayItem[] {
  const { x, y, yaw } = snap.vru;
  const [sx, sy] = toScreen(cam, x, y);
  const items: DisplayItem[] = [
    {
      kind: "circle",
      tag: "truth",
      x: sx,
      y: sy,
      r: 0.25 * SCALE,
      stroke: COLORS.truth,
      width: 2,
    },
    polyFromWorld(
      cam,
      "truth-heading",
      [
        [x, y],
        [x + 0.6 * Math.cos(yaw), y + 0.6 * Math.sin(yaw)],
      ],
      { stroke: COLORS.truth, width: 1.5 },
    ),
  ];
  if (skeleton) {
    for (const joint of snap.vru.joints) {
      const [jx, jy] = toScreen(cam, joint[0] ?? 0, joint[1] ?? 0);
      items.push({
        kind: "circle",
        tag: "skeleton",
        x: jx,
        y: jy,
        r: 1.5,
        stroke: COLORS.skeleton,
        fill: COLORS.skeleton,
        width: 1,
      });
    }
  }
  return items;
}

function detectionItems(cam: Camera, snap: Snapshot): DisplayItem[] {
  const { x, y, yaw } = snap.vehicle;
  const items: DisplayItem[] = [];
  for (const det of snap.detections) {
    const [wx, wy] = bodyToWorld(x, y, yaw, det.hip[0], det.hip[1]);
    const [sx, sy] = toScreen(cam, wx, wy);
    if (det.source === "true_vru") {
      items.push({
        kind: "circle",
        tag: "detection-true",
        x: sx,
        y: sy,
        r: 0.2 * SCALE,
        stroke: COLORS.detectionTrue,
        fill: "rgba(55, 200, 113, 0.35)",
        width: 2,
      });
    } else {
      const a = 0.22 * SCALE; // drawn as an X, unmistakably not a subject
      items.push({
        kind: "poly",
        tag: "detection-false",
        points: [
          [sx - a, sy - a],
          [sx + a, sy + a],
        ],
        closed: false,
        stroke: COLORS.detectionFalse,
        width: 2.5,
      });
      items.push({
        kind: "poly",
        tag: "detection-false",
        points: [
          [sx - a, sy + a],
          [sx + a, sy - a],
        ],
        closed: false,
        stroke: COLORS.detectionFalse,
        width: 2.5,
      });
    }
  }
  return items;
}

function hudItems(view: ViewState, cam: Camera): DisplayItem[] {
  const snap = view.latest;
  const items: DisplayItem[] = [];
  if (snap !== null) {
    const m = snap.metrics;
    const dist = m.hip_distance === null ? "--" : m.hip_distance.toFixed(2);
    const vari =
      m.local_variability === null ? "--" : m.local_variability.toFixed(3);
    items.push({
      kind: "text",
      tag: "mode-chip",
      x: 12,
      y: 22,
      text: `TFF ${snap.tff.mode}`,
      color: snap.tff.mode === "following" ? COLORS.detectionTrue : COLORS.text,
      size: 14,
    });
    items.push({
      kind: "text",
      tag: "metric-strip",
      x: 12,
      y: 42,
      text:
        `t=${snap.sim_time.toFixed(2)}s  hip ${dist} m  ` +
        `var ${vari} m  no-det ${m.no_detects}  false ${m.false_detects}`,
      color: COLORS.text,
      size: 12,
    });
  }
  if (view.status === "disconnected") {
    items.push({
      kind: "text",
      tag: "banner",
      x: cam.w / 2,
      y: 24,
      text: "disconnected (frame frozen)",
      color: COLORS.banner,
      size: 16,
    });
  } else if (snap === null) {
    items.push({
      kind: "text",
      tag: "banner",
      x: cam.w / 2,
      y: 24,
      text: view.status === "idle" ? "not connected" : "waiting for snapshots",
      color: COLORS.text,
      size: 16,
    });
  }
  if (view.lastError !== null) {
    items.push({
      kind: "text",
      tag: "error-strip",
      x: 12,
      y: cam.h - 12,
      text: `server: ${view.lastError}`,
      color: COLORS.banner,
      size: 12,
    });
  }
  return items;
}

/** Build the full display list for one frame. */
export function buildScene(
  view: ViewState,
  width: number,
  height: number,
): DisplayItem[] {
  const snap = view.latest;
  if (snap === null) {
    return hudItems(view, { cx: 0, cy: 0, w: width, h: height });
  }
  const cam: Camera = {
    cx: (snap.vehicle.x + snap.vru.x) / 2,
    cy: (snap.vehicle.y + snap.vru.y) / 2,
    w: width,
    h: height,
  };
  const items: DisplayItem[] = [];
  if (view.overlays.trails && view.vehicleTrail.length > 1) {
    items.push(
      polyFromWorld(cam, "trail-vehicle", view.vehicleTrail, {
        stroke: COLORS.trailVehicle,
        width: 1,
      }),
    );
  }
  if (view.overlays.trails && view.vruTrail.length > 1) {
    items.push(
      polyFromWorld(cam, "trail-vru", view.vruTrail, {
        stroke: COLORS.trailVru,
        width: 1,
      }),
    );
  }
  if (view.overlays.fov) {
    items.push(fovItem(cam, snap));
  }
  items.push(...vehicleItems(cam, snap));
  items.push(...truthItems(cam, snap, view.overlays.skeleton));
  if (view.overlays.detections) {
    items.push(...detectionItems(cam, snap));
    for (const site of view.falseSites()) {
      const r = 0.3 * SCALE;
      const [sx, sy] = toScreen(cam, site.x, site.y);
      items.push({
        kind: "poly",
        tag: "cone-site",
        points: [
          [sx, sy - r],
          [sx - r, sy + r],
          [sx + r, sy + r],
        ],
        closed: true,
        stroke: COLORS.cone,
        width: 1.5,
      });
    }
  }
  items.push(...hudItems(view, cam));
  return items;
}

/** Paint a display list onto a 2D canvas context. */
export function drawScene(
  ctx: CanvasRenderingContext2D,
  items: DisplayItem[],
  width: number,
  height: number,
): void {
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, width, height);
  for (const item of items) {
    switch (item.kind) {
      case "poly": {
        ctx.beginPath();
        const [first, ...rest] = item.points;
        if (first === undefined) break;
        ctx.moveTo(first[0], first[1]);
        for (const [x, y] of rest) ctx.lineTo(x, y);
        if (item.closed) ctx.closePath();
        if (item.fill !== undefined) {
          ctx.fillStyle = item.fill;
          ctx.fill();
        }
        ctx.strokeStyle = item.stroke;
        ctx.lineWidth = item.width;
        ctx.stroke();
        break;
      }
      case "circle": {
        ctx.beginPath();
        ctx.arc(item.x, item.y, item.r, 0, 2 * Math.PI);
        if (item.fill !== undefined) {
          ctx.fillStyle = item.fill;
          ctx.fill();
        }
        ctx.strokeStyle = item.stroke;
        ctx.lineWidth = item.width;
        ctx.stroke();
        break;
      }
      case "text": {
        ctx.fillStyle = item.color;
        ctx.font = `${item.size}px ui-monospace, monospace`;
        ctx.textAlign = item.tag === "banner" ? "center" : "left";
        ctx.fillText(item.text, item.x, item.y);
        break;
      }
    }
  }
}
