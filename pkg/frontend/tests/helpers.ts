import { DetectionView, Snapshot } from "../src/protocol.js";

export function zeroJoints(): number[][] {
  return Array.from({ length: 24 }, () => [0, 0, 0]);
}

export function makeSnapshot(overrides: Partial<Snapshot> = {}): Snapshot {
  return {
    type: "snapshot",
    tick: 0,
    sim_time: 0,
    vehicle: { x: 0, y: 0, yaw: 0, v: 0 },
    tff: { mode: "idle", v_cmd: 0, steer: 0 },
    vru: { x: 15, y: 0, yaw: Math.PI, joints: zeroJoints() },
    detections: [],
    metrics: {
      hip_distance: 13.0,
      local_variability: 0.01,
      no_detects: 0,
      false_detects: 0,
    },
    ...overrides,
  };
}

export function trueDetection(x = 13.0, y = 0.0): DetectionView {
  return { subject_id: 0, source: "true_vru", hip: [x, y, 0.93] };
}

export function falseDetection(x = 12.0, y = 2.0): DetectionView {
  return { subject_id: -1, source: "false_positive", hip: [x, y, 0.8] };
}
