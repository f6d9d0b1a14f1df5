/**
 * Wire types for the teleop bridge (schema 1) and the guards that keep
 * junk off the state store. The server is the authority; this module
 * only validates shapes and clamps outgoing commands to the documented
 * bounds.
 */

export const SCHEMA_VERSION = 1;
export const MAX_MESSAGE_BYTES = 16 * 1024;
export const HEADING_RATE_LIMIT = 2.0; // |rad/s|
export const SPEED_TARGET_MAX = 3.0; // m/s
export const SNAPSHOT_HZ = 20;

export interface Hello {
  type: "hello";
  schema_version: number;
}

export interface ErrorMessage {
  type: "error";
  reason: string;
}

export interface VehicleView {
  x: number;
  y: number;
  yaw: number;
  v: number;
}

export interface TffView {
  mode: string;
  v_cmd: number;
  steer: number;
}

export interface VruView {
  x: number;
  y: number;
  yaw: number;
  joints: number[][];
}

export type DetectionSource = "true_vru" | "false_positive";

export interface DetectionView {
  subject_id: number;
  source: DetectionSource;
  hip: [number, number, number];
}

export interface MetricsView {
  hip_distance: number | null;
  local_variability: number | null;
  no_detects: number;
  false_detects: number;
}

export interface Snapshot {
  type: "snapshot";
  tick: number;
  sim_time: number;
  vehicle: VehicleView;
  tff: TffView;
  vru: VruView;
  detections: DetectionView[];
  metrics: MetricsView;
}

export type ServerMessage = Hello | ErrorMessage | Snapshot;

export interface InputCommand {
  heading_delta: number;
  speed_target: number;
  gesture: boolean;
}

export const IDLE_COMMAND: InputCommand = {
  heading_delta: 0,
  speed_target: 0,
  gesture: false,
};

function isRecord(value: unknown): value is Record<string, unknown> {
  return typeof value === "object" && value !== null && !Array.isArray(value);
}

function isFiniteNumber(value: unknown): value is number {
  return typeof value === "number" && Number.isFinite(value);
}

function asVehicle(value: unknown): VehicleView {
  if (
    !isRecord(value) ||
    !isFiniteNumber(value.x) ||
    !isFiniteNumber(value.y) ||
    !isFiniteNumber(value.yaw) ||
    !isFiniteNumber(value.v)
  ) {
    throw new Error("snapshot.vehicle is malformed");
  }
  return { x: value.x, y: value.y, yaw: value.yaw, v: value.v };
}

function asTff(value: unknown): TffView {
  if (
    !isRecord(value) ||
    typeof value.mode !== "string" ||
    !isFiniteNumber(value.v_cmd) ||
    !isFiniteNumber(value.steer)
  ) {
    throw new Error("snapshot.tff is malformed");
  }
  return { mode: value.mode, v_cmd: value.v_cmd, steer: value.steer };
}

function asVru(value: unknown): VruView {
  if (
    !isRecord(value) ||
    !isFiniteNumber(value.x) ||
    !isFiniteNumber(value.y) ||
    !isFiniteNumber(value.yaw) ||
    !Array.isArray(value.joints)
  ) {
    throw new Error("snapshot.vru is malformed");
  }
  const joints = value.joints.map((row) => {
    if (!Array.isArray(row) || row.length !== 3 || !row.every(isFiniteNumber)) {
      throw new Error("snapshot.vru.joints is malformed");
    }
    return row as number[];
  });
  return { x: value.x, y: value.y, yaw: value.yaw, joints };
}

function asDetection(value: unknown): DetectionView {
  if (
    !isRecord(value) ||
    !isFiniteNumber(value.subject_id) ||
    (value.source !== "true_vru" && value.source !== "false_positive") ||
    !Array.isArray(value.hip) ||
    value.hip.length !== 3 ||
    !value.hip.every(isFiniteNumber)
  ) {
    throw new Error("snapshot.detections is malformed");
  }
  return {
    subject_id: value.subject_id,
    source: value.source,
    hip: value.hip as [number, number, number],
  };
}

function asMetrics(value: unknown): MetricsView {
  if (
    !isRecord(value) ||
    !isFiniteNumber(value.no_detects) ||
    !isFiniteNumber(value.false_detects)
  ) {
    throw new Error("snapshot.metrics is malformed");
  }
  const optional = (v: unknown): number | null =>
    v === null || v === undefined ? null : isFiniteNumber(v) ? v : null;
  return {
    hip_distance: optional(value.hip_distance),
    local_variability: optional(value.local_variability),
    no_detects: value.no_detects,
    false_detects: value.false_detects,
  };
}

/** Parse one server frame; throws on anything outside the schema. */
export function parseServerMessage(text: string): ServerMessage {
  let data: unknown;
  try {
    data = JSON.parse(text);
  } catch {
    throw new Error("server frame is not JSON");
  }
  if (!isRecord(data) || typeof data.type !== "string") {
    throw new Error("server frame has no type");
  }
  switch (data.type) {
    case "hello":
      if (!isFiniteNumber(data.schema_version)) {
        throw new Error("hello without schema_version");
      }
      return { type: "hello", schema_version: data.schema_version };
    case "error":
      if (typeof data.reason !== "string") {
        throw new Error("error without reason");
      }
      return { type: "error", reason: data.reason };
    case "snapshot":
      if (!isFiniteNumber(data.tick) || !isFiniteNumber(data.sim_time)) {
        throw new Error("snapshot without tick/sim_time");
      }
      if (!Array.isArray(data.detections)) {
        throw new Error("snapshot.detections is malformed");
      }
      return {
        type: "snapshot",
        tick: data.tick,
        sim_time: data.sim_time,
        vehicle: asVehicle(data.vehicle),
        tff: asTff(data.tff),
        vru: asVru(data.vru),
        detections: data.detections.map(asDetection),
        metrics: asMetrics(data.metrics),
      };
    default:
      throw new Error(`unknown server frame type '${data.type}'`);
  }
}

function clamp(value: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, value));
}

/** Serialize an input command, clamped to the protocol bounds. */
export function buildInputMessage(cmd: InputCommand, clientSeq: number): string {
  if (!Number.isInteger(clientSeq)) {
    throw new Error("client_seq must be an integer");
  }
  return JSON.stringify({
    type: "input",
    heading_delta: clamp(cmd.heading_delta, -HEADING_RATE_LIMIT, HEADING_RATE_LIMIT),
    speed_target: clamp(cmd.speed_target, 0, SPEED_TARGET_MAX),
    gesture: cmd.gesture,
    client_seq: clientSeq,
  });
}

export function subscribeMessage(): string {
  return JSON.stringify({ type: "subscribe" });
}

export function resetMessage(scenario: Record<string, unknown>): string {
  return JSON.stringify({ type: "reset", scenario });
}

export function sameCommand(a: InputCommand, b: InputCommand): boolean {
  return (
    a.heading_delta === b.heading_delta &&
    a.speed_target === b.speed_target &&
    a.gesture === b.gesture
  );
}
