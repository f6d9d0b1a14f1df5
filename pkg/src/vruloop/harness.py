"""Scenario catalog, deterministic closed-loop runner, and run logs.

A scenario fixes everything about one run: the subject and its path,
the sensing domain, the vehicle and controller, noise parameters,
duration, and seed. ``run_scenario`` then advances a single-rate loop
(motion, sensing, planning, vehicle step, log) at the camera frame
period and returns a log that serializes losslessly to JSONL.

The twelve-entry catalog crosses subject kind (pedestrian, cyclist),
sensing domain (rw, cp), and approach perspective:

* S: the subject walks or rides straight away from the vehicle, which
  is waved into follow mode and closes from 26 m to the 5 m setpoint;
* D: the subject approaches diagonally with a lane change; a roadside
  cone sits near the driving path, and in the cp domain it sporadically
  produces phantom person detections;
* C: the subject crosses the vehicle's view from its right to its left
  at roughly 15 m while the vehicle stays parked, so the sensor sees a
  sustained side view; the subject's own right side faces away from
  the camera throughout.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

from . import metrics
from .motion import (
    ArmGesture,
    CirclePath,
    CyclistParams,
    GaitParams,
    LaneChangePath,
    PathSpec,
    StraightPath,
    cyclist_frame_at,
    pedestrian_frame_at,
)
from .perception import (
    CP,
    CYCLIST,
    DOMAINS,
    PEDESTRIAN,
    RW,
    CameraModel,
    Detection,
    DistractorObject,
    MountPose,
    NoiseModel,
    Scene,
    SceneSubject,
    project_point,
    sense,
)
from .skeleton import Joint, Pose2D, SkeletonFrame
from .vehicle import PidState, TffState, VehicleState, select_target, step_vehicle, tff_plan

LOG_SCHEMA_VERSION = 1

PERSPECTIVES = ("S", "D", "C")
CATALOG_IDS = tuple(range(1, 13))

# Noise levels per (subject kind, domain). depth_sigma_b values were
# fitted once with tools/fit_noise.py so the distance-stability
# pipeline lands on its reference bin levels at 20 m, then frozen
# here. The cyclist sensor is noisier in rw than in cp, and its
# per-joint jitter is too, which is what the side-view far-side
# comparisons measure.
PED_DEPTH_SIGMA_B = 2.26973e-4
CYC_CP_DEPTH_SIGMA_B = 2.361789e-4
CYC_RW_DEPTH_SIGMA_B = 5.95759e-4
PED_JITTER = 0.012
CYC_CP_JITTER = 0.012
CYC_RW_JITTER = 0.03


@dataclass
class ScenarioConfig:
    vru: str
    domain: str
    perspective: str
    path: PathSpec
    vru_params: GaitParams | CyclistParams
    duration: float
    seed: int
    test_case_id: int | None = None
    dt: float = 0.05
    vehicle: VehicleState = field(default_factory=VehicleState)
    camera: CameraModel = field(default_factory=CameraModel)
    noise: NoiseModel = field(default_factory=NoiseModel)
    tff: TffState = field(default_factory=TffState)
    distractors: list[DistractorObject] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.vru not in (PEDESTRIAN, CYCLIST):
            raise ValueError(f"scenario.vru: expected pedestrian|cyclist, got {self.vru!r}")
        if self.domain not in DOMAINS:
            raise ValueError(f"scenario.domain: expected rw|cp, got {self.domain!r}")
        if self.perspective not in PERSPECTIVES:
            raise ValueError(
                f"scenario.perspective: expected S|D|C, got {self.perspective!r}"
            )
        if self.duration <= 0.0:
            raise ValueError("scenario.duration: must be > 0")
        if abs(self.dt * self.camera.fps - 1.0) > 1e-9:
            raise ValueError(
                f"scenario.dt: must equal one camera frame period "
                f"(1/{self.camera.fps} s), got {self.dt}"
            )
        expected = GaitParams if self.vru == PEDESTRIAN else CyclistParams
        if not isinstance(self.vru_params, expected):
            raise ValueError(
                f"scenario.vru_params: {self.vru} requires {expected.__name__}"
            )

    @property
    def metadata(self) -> dict:
        return {
            "test_case_id": self.test_case_id,
            "vru": self.vru,
            "domain": self.domain,
            "perspective": self.perspective,
            "seed": self.seed,
            "duration": self.duration,
            "dt": self.dt,
        }


@dataclass
class FrameRecord:
    """Everything observable about one tick.

    ``vehicle`` is the dynamic state the sensor saw this tick (the
    step to the next state happens after planning); only its pose and
    speed are serialized, the limits live in the scenario config.
    """

    tick: int
    t: float
    vehicle: VehicleState
    tff_mode: str
    v_cmd: float
    steer: float
    vru_root: Pose2D
    vru_frame: SkeletonFrame
    detections: list[Detection]
    visible: bool
    hip_truth: float
    hip_est: float | None

    def to_dict(self) -> dict:
        return {
            "type": "frame",
            "tick": self.tick,
            "t": self.t,
            "vehicle": {
                "x": self.vehicle.x,
                "y": self.vehicle.y,
                "yaw": self.vehicle.yaw,
                "v": self.vehicle.v,
            },
            "tff": {"mode": self.tff_mode, "v_cmd": self.v_cmd, "steer": self.steer},
            "vru": {
                "root": [self.vru_root.x, self.vru_root.y, self.vru_root.yaw],
                "skeleton": self.vru_frame.to_dict(),
            },
            "detections": [d.to_dict() for d in self.detections],
            "visible": self.visible,
            "hip_truth": self.hip_truth,
            "hip_est": self.hip_est,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FrameRecord":
        veh = data["vehicle"]
        root = data["vru"]["root"]
        return cls(
            tick=int(data["tick"]),
            t=float(data["t"]),
            vehicle=VehicleState(x=veh["x"], y=veh["y"], yaw=veh["yaw"], v=veh["v"]),
            tff_mode=data["tff"]["mode"],
            v_cmd=float(data["tff"]["v_cmd"]),
            steer=float(data["tff"]["steer"]),
            vru_root=Pose2D(root[0], root[1], root[2]),
            vru_frame=SkeletonFrame.from_dict(data["vru"]["skeleton"]),
            detections=[Detection.from_dict(d) for d in data["detections"]],
            visible=bool(data["visible"]),
            hip_truth=float(data["hip_truth"]),
            hip_est=None if data["hip_est"] is None else float(data["hip_est"]),
        )


@dataclass
class RunLog:
    scenario: dict
    frames: list[FrameRecord]

    @property
    def metadata(self) -> dict:
        keys = ("test_case_id", "vru", "domain", "perspective", "seed", "duration", "dt")
        return {k: self.scenario.get(k) for k in keys}


def _frame_for(cfg: ScenarioConfig, t: float) -> tuple[SkeletonFrame, Pose2D]:
    if cfg.vru == PEDESTRIAN:
        return pedestrian_frame_at(t, cfg.path, cfg.vru_params, subject_id=0)
    return cyclist_frame_at(t, cfg.path, cfg.vru_params, subject_id=0)


def step_tick(
    cfg: ScenarioConfig,
    tick: int,
    vru_frame: SkeletonFrame,
    vru_root: Pose2D,
    vehicle: VehicleState,
    tff: TffState,
    rng: np.random.Generator,
) -> tuple[FrameRecord, VehicleState, TffState]:
    """Advance the closed loop one tick for an already-posed subject.

    Returns the logged record plus the post-step vehicle and controller
    state. The record keeps the pre-step vehicle, which is the pose the
    sensor saw this tick.
    """
    t = tick * cfg.dt
    scene = Scene(
        vehicle=vehicle,
        subjects=[SceneSubject(frame=vru_frame, kind=cfg.vru, root=vru_root)],
        distractors=cfg.distractors,
    )
    detections = sense(scene, cfg.camera, cfg.noise, cfg.domain, rng)
    target_id = select_target(detections, cfg.camera)
    target = next((d for d in detections if d.subject_id == target_id), None)
    v_cmd, steer, tff = tff_plan(tff, target, cfg.camera, cfg.dt)

    truth_hip = vru_frame.joints[int(Joint.PELVIS)]
    visible = project_point(cfg.camera, truth_hip, vehicle) is not None
    hip_truth = math.hypot(
        float(truth_hip[0]) - vehicle.x, float(truth_hip[1]) - vehicle.y
    )
    hip_est = None
    for det in detections:
        if det.subject_id == 0:
            est_hip = det.skeleton.joints[int(Joint.PELVIS)]
            hip_est = math.hypot(float(est_hip[0]), float(est_hip[1]))
            break

    record = FrameRecord(
        tick=tick,
        t=t,
        vehicle=vehicle,
        tff_mode=tff.mode,
        v_cmd=v_cmd,
        steer=steer,
        vru_root=vru_root,
        vru_frame=vru_frame,
        detections=detections,
        visible=visible,
        hip_truth=hip_truth,
        hip_est=hip_est,
    )
    return record, step_vehicle(vehicle, steer, v_cmd, cfg.dt), tff


def run_scenario(cfg: ScenarioConfig) -> RunLog:
    """Run one deterministic closed-loop scenario and log every tick."""
    rng = np.random.default_rng(cfg.seed)
    vehicle = cfg.vehicle
    tff = cfg.tff
    frames: list[FrameRecord] = []
    n_ticks = round(cfg.duration / cfg.dt)
    for tick in range(n_ticks):
        vru_frame, vru_root = _frame_for(cfg, tick * cfg.dt)
        record, vehicle, tff = step_tick(
            cfg, tick, vru_frame, vru_root, vehicle, tff, rng
        )
        frames.append(record)
    return RunLog(scenario=scenario_to_dict(cfg), frames=frames)


# --- catalog ---------------------------------------------------------------

_CATALOG_TRIPLES = {
    1: (PEDESTRIAN, RW, "S"),
    2: (PEDESTRIAN, RW, "D"),
    3: (PEDESTRIAN, RW, "C"),
    4: (PEDESTRIAN, CP, "S"),
    5: (PEDESTRIAN, CP, "D"),
    6: (PEDESTRIAN, CP, "C"),
    7: (CYCLIST, RW, "S"),
    8: (CYCLIST, RW, "D"),
    9: (CYCLIST, RW, "C"),
    10: (CYCLIST, CP, "S"),
    11: (CYCLIST, CP, "D"),
    12: (CYCLIST, CP, "C"),
}

_WAVE = ArmGesture(0.6, 1.6, "left", "raise")


def _catalog_noise(vru: str, domain: str) -> NoiseModel:
    if vru == PEDESTRIAN:
        return NoiseModel(depth_sigma_b=PED_DEPTH_SIGMA_B, joint_jitter_base=PED_JITTER)
    if domain == CP:
        return NoiseModel(
            depth_sigma_b=CYC_CP_DEPTH_SIGMA_B, joint_jitter_base=CYC_CP_JITTER
        )
    return NoiseModel(depth_sigma_b=CYC_RW_DEPTH_SIGMA_B, joint_jitter_base=CYC_RW_JITTER)


def _catalog_motion(
    vru: str, domain: str, perspective: str
) -> tuple[PathSpec, GaitParams | CyclistParams, float]:
    """Path, subject parameters, and duration for a catalog entry."""
    wobble = 0.12 if domain == RW else 0.0
    if perspective == "S":
        if vru == PEDESTRIAN:
            return (
                StraightPath(80.0, Pose2D(26.0, 0.0, 0.0)),
                GaitParams(arm_gesture_schedule=[_WAVE]),
                18.0,
            )
        return (
            StraightPath(100.0, Pose2D(26.0, 0.0, 0.0)),
            CyclistParams(wobble_amplitude=wobble, arm_gesture_schedule=[_WAVE]),
            20.0,
        )
    if perspective == "D":
        origin = Pose2D(26.0, 9.0, -0.55)
        if vru == PEDESTRIAN:
            return (
                LaneChangePath(60.0, 3.0, 10.0, origin),
                GaitParams(arm_gesture_schedule=[_WAVE]),
                20.0,
            )
        return (
            LaneChangePath(70.0, 3.0, 10.0, origin),
            CyclistParams(wobble_amplitude=wobble, arm_gesture_schedule=[_WAVE]),
            18.0,
        )
    # C: crossing in front of a parked vehicle, no wave.
    if vru == PEDESTRIAN:
        return (StraightPath(12.0, Pose2D(15.0, -6.0, math.pi / 2)), GaitParams(), 14.0)
    return (
        StraightPath(14.0, Pose2D(16.0, -7.0, math.pi / 2)),
        CyclistParams(wobble_amplitude=wobble),
        12.0,
    )


def scenario_from_catalog(test_case_id: int) -> ScenarioConfig:
    if test_case_id not in _CATALOG_TRIPLES:
        raise ValueError(f"catalog id must be 1..12, got {test_case_id}")
    vru, domain, perspective = _CATALOG_TRIPLES[test_case_id]
    path, params, duration = _catalog_motion(vru, domain, perspective)
    distractors = []
    if perspective == "D":
        # Roadside cone near the driving path; only the cp sensing
        # domain ever turns it into phantom detections.
        distractors.append(DistractorObject(x=14.0, y=2.0))
    return ScenarioConfig(
        vru=vru,
        domain=domain,
        perspective=perspective,
        path=path,
        vru_params=params,
        duration=duration,
        seed=1000 + test_case_id,
        test_case_id=test_case_id,
        noise=_catalog_noise(vru, domain),
        tff=TffState(pid=PidState(output_limits=(0.0, 3.0))),
        distractors=distractors,
    )


# --- suite -----------------------------------------------------------------


@dataclass
class SuiteResult:
    logs: dict[int, RunLog]
    reports: dict[int, metrics.StabilityReport]
    comparisons: list[metrics.ComparisonTable]


def run_suite(ids: list[int], denominator: str = metrics.RW_DENOM) -> SuiteResult:
    """Run catalog scenarios, analyze each, and tabulate rw/cp twins.

    Twins pair up by (vru, perspective); ids without a partner still
    get their individual report.
    """
    logs = {i: run_scenario(scenario_from_catalog(i)) for i in ids}
    reports = {i: metrics.analyze_log(log) for i, log in logs.items()}
    by_pair: dict[tuple[str, str], dict[str, int]] = {}
    for i in ids:
        vru, domain, perspective = _CATALOG_TRIPLES[i]
        by_pair.setdefault((vru, perspective), {})[domain] = i
    comparisons = []
    for (vru, perspective), sides in sorted(by_pair.items()):
        if RW in sides and CP in sides:
            comparisons.append(
                metrics.build_comparison(
                    reports[sides[RW]], reports[sides[CP]], denominator
                )
            )
    return SuiteResult(logs=logs, reports=reports, comparisons=comparisons)


# --- serialization ---------------------------------------------------------


def _dump(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def log_lines(log: RunLog) -> Iterator[str]:
    yield _dump(
        {
            "type": "header",
            "schema_version": LOG_SCHEMA_VERSION,
            "scenario": log.scenario,
        }
    )
    for record in log.frames:
        yield _dump(record.to_dict())


def write_log(log: RunLog, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in log_lines(log):
            fh.write(line + "\n")


def read_log(path: str | Path) -> RunLog:
    with open(path, "r", encoding="utf-8") as fh:
        header = None
        frames = []
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            data = json.loads(line)
            kind = data.get("type")
            if kind == "header":
                if header is not None:
                    raise ValueError(f"line {lineno}: duplicate header")
                if data.get("schema_version") != LOG_SCHEMA_VERSION:
                    raise ValueError(
                        f"unsupported log schema {data.get('schema_version')!r}"
                    )
                header = data
            elif kind == "frame":
                frames.append(FrameRecord.from_dict(data))
            else:
                raise ValueError(f"line {lineno}: unknown record type {kind!r}")
    if header is None:
        raise ValueError("log has no header line")
    return RunLog(scenario=header["scenario"], frames=frames)


# --- scenario config JSON ---------------------------------------------------


def _pose_to_list(p: Pose2D) -> list[float]:
    return [p.x, p.y, p.yaw]


def _gestures_to_list(schedule) -> list[dict]:
    return [
        {"t_start": g.t_start, "t_end": g.t_end, "side": g.side, "style": g.style}
        for g in schedule
    ]


def _path_to_dict(path: PathSpec) -> dict:
    if isinstance(path, StraightPath):
        return {
            "kind": "straight",
            "length": path.length,
            "origin": _pose_to_list(path.origin),
        }
    if isinstance(path, LaneChangePath):
        return {
            "kind": "lane_change",
            "length": path.length,
            "lateral_offset": path.lateral_offset,
            "transition_length": path.transition_length,
            "origin": _pose_to_list(path.origin),
        }
    if isinstance(path, CirclePath):
        return {
            "kind": "circle",
            "radius": path.radius,
            "arc": path.arc,
            "origin": _pose_to_list(path.origin),
        }
    raise ValueError(f"unknown path type {type(path).__name__}")


def scenario_to_dict(cfg: ScenarioConfig) -> dict:
    if cfg.vru == PEDESTRIAN:
        p = cfg.vru_params
        params = {
            "speed": p.speed,
            "cadence": p.cadence,
            "arm_swing_amplitude": p.arm_swing_amplitude,
            "step_length": p.step_length,
            "body_height": p.body_height,
            "gestures": _gestures_to_list(p.arm_gesture_schedule),
        }
    else:
        p = cfg.vru_params
        params = {
            "speed": p.speed,
            "pedal_cadence": p.pedal_cadence,
            "wobble_amplitude": p.wobble_amplitude,
            "wobble_frequency": p.wobble_frequency,
            "bike_wheelbase": p.bike_wheelbase,
            "gestures": _gestures_to_list(p.arm_gesture_schedule),
        }
    return {
        "test_case_id": cfg.test_case_id,
        "vru": cfg.vru,
        "domain": cfg.domain,
        "perspective": cfg.perspective,
        "duration": cfg.duration,
        "dt": cfg.dt,
        "seed": cfg.seed,
        "path": _path_to_dict(cfg.path),
        "vru_params": params,
        "vehicle": {
            "x": cfg.vehicle.x,
            "y": cfg.vehicle.y,
            "yaw": cfg.vehicle.yaw,
            "v": cfg.vehicle.v,
            "wheelbase": cfg.vehicle.wheelbase,
            "v_max": cfg.vehicle.v_max,
            "accel_limit": cfg.vehicle.accel_limit,
            "steer_max": cfg.vehicle.steer_max,
        },
        "camera": {
            "width": cfg.camera.width,
            "height": cfg.camera.height,
            "fps": cfg.camera.fps,
            "horizontal_fov": cfg.camera.horizontal_fov,
            "mount": {
                "x": cfg.camera.mount.x,
                "y": cfg.camera.mount.y,
                "z": cfg.camera.mount.z,
                "yaw": cfg.camera.mount.yaw,
                "pitch": cfg.camera.mount.pitch,
                "roll": cfg.camera.mount.roll,
            },
        },
        "noise": {
            "depth_sigma_a": cfg.noise.depth_sigma_a,
            "depth_sigma_b": cfg.noise.depth_sigma_b,
            "lateral_sigma": cfg.noise.lateral_sigma,
            "joint_jitter_base": cfg.noise.joint_jitter_base,
            "occlusion_multipliers": cfg.noise.occlusion_multipliers,
            "no_detect_rate": cfg.noise.no_detect_rate,
        },
        "tff": {
            "follow_distance_setpoint": cfg.tff.follow_distance_setpoint,
            "k_lat": cfg.tff.k_lat,
            "steer_limit": cfg.tff.steer_limit,
            "target_hold_s": cfg.tff.target_hold_s,
            "pid": {
                "kp": cfg.tff.pid.kp,
                "ki": cfg.tff.pid.ki,
                "kd": cfg.tff.pid.kd,
                "output_limits": list(cfg.tff.pid.output_limits),
            },
        },
        "distractors": [
            {
                "x": d.x,
                "y": d.y,
                "height": d.height,
                "false_positive_rate": d.false_positive_rate,
            }
            for d in cfg.distractors
        ],
    }


def _require(data: dict, key: str, where: str):
    if key not in data:
        raise ValueError(f"{where}: missing required field {key!r}")
    return data[key]


def _pose_from(data, where: str) -> Pose2D:
    if not isinstance(data, (list, tuple)) or len(data) != 3:
        raise ValueError(f"{where}: expected [x, y, yaw]")
    return Pose2D(float(data[0]), float(data[1]), float(data[2]))


def _path_from_dict(data: dict) -> PathSpec:
    kind = _require(data, "kind", "scenario.path")
    origin = _pose_from(data.get("origin", [0.0, 0.0, 0.0]), "scenario.path.origin")
    if kind == "straight":
        return StraightPath(float(_require(data, "length", "scenario.path")), origin)
    if kind == "lane_change":
        return LaneChangePath(
            float(_require(data, "length", "scenario.path")),
            float(data.get("lateral_offset", 3.0)),
            float(data.get("transition_length", 10.0)),
            origin,
        )
    if kind == "circle":
        return CirclePath(
            float(_require(data, "radius", "scenario.path")),
            float(data.get("arc", 2 * math.pi)),
            origin,
        )
    raise ValueError(
        f"scenario.path: unknown kind {kind!r} (expected straight|lane_change|circle)"
    )


def _gestures_from(data, where: str) -> list[ArmGesture]:
    gestures = []
    for i, g in enumerate(data):
        gestures.append(
            ArmGesture(
                t_start=float(_require(g, "t_start", f"{where}[{i}]")),
                t_end=float(_require(g, "t_end", f"{where}[{i}]")),
                side=g.get("side", "left"),
                style=g.get("style", "raise"),
            )
        )
    return gestures


def scenario_from_dict(data: dict) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ValueError("scenario: expected a JSON object")
    vru = _require(data, "vru", "scenario")
    params_data = _require(data, "vru_params", "scenario")
    gestures = _gestures_from(params_data.get("gestures", []), "scenario.vru_params.gestures")
    if vru == PEDESTRIAN:
        params = GaitParams(
            speed=float(params_data.get("speed", 1.4)),
            cadence=float(params_data.get("cadence", 2.0)),
            arm_swing_amplitude=float(params_data.get("arm_swing_amplitude", 0.35)),
            step_length=float(params_data.get("step_length", 0.65)),
            body_height=float(params_data.get("body_height", 1.75)),
            arm_gesture_schedule=gestures,
        )
    elif vru == CYCLIST:
        params = CyclistParams(
            speed=float(params_data.get("speed", 1.67)),
            pedal_cadence=float(params_data.get("pedal_cadence", 1.0)),
            wobble_amplitude=float(params_data.get("wobble_amplitude", 0.0)),
            wobble_frequency=float(params_data.get("wobble_frequency", 0.9)),
            bike_wheelbase=float(params_data.get("bike_wheelbase", 1.1)),
            arm_gesture_schedule=gestures,
        )
    else:
        raise ValueError(f"scenario.vru: expected pedestrian|cyclist, got {vru!r}")

    veh = data.get("vehicle", {})
    vehicle = VehicleState(
        x=float(veh.get("x", 0.0)),
        y=float(veh.get("y", 0.0)),
        yaw=float(veh.get("yaw", 0.0)),
        v=float(veh.get("v", 0.0)),
        wheelbase=float(veh.get("wheelbase", 2.5)),
        v_max=float(veh.get("v_max", 5.0)),
        accel_limit=float(veh.get("accel_limit", 1.5)),
        steer_max=float(veh.get("steer_max", 0.5)),
    )
    cam = data.get("camera", {})
    mount = cam.get("mount", {})
    camera = CameraModel(
        width=int(cam.get("width", 1280)),
        height=int(cam.get("height", 960)),
        fps=float(cam.get("fps", 20.0)),
        horizontal_fov=float(cam.get("horizontal_fov", math.pi / 2)),
        mount=MountPose(
            x=float(mount.get("x", 2.0)),
            y=float(mount.get("y", 0.0)),
            z=float(mount.get("z", 2.2)),
            yaw=float(mount.get("yaw", 0.0)),
            pitch=float(mount.get("pitch", math.radians(7.6))),
            roll=float(mount.get("roll", 0.0)),
        ),
    )
    noise_data = data.get("noise", {})
    noise_kwargs = dict(
        depth_sigma_a=float(noise_data.get("depth_sigma_a", 0.01)),
        depth_sigma_b=float(noise_data.get("depth_sigma_b", 2.4e-4)),
        lateral_sigma=float(noise_data.get("lateral_sigma", 0.02)),
        joint_jitter_base=float(noise_data.get("joint_jitter_base", 0.012)),
        no_detect_rate=float(noise_data.get("no_detect_rate", 0.0)),
    )
    if "occlusion_multipliers" in noise_data:
        noise_kwargs["occlusion_multipliers"] = noise_data["occlusion_multipliers"]
    noise = NoiseModel(**noise_kwargs)

    tff_data = data.get("tff", {})
    pid_data = tff_data.get("pid", {})
    limits = pid_data.get("output_limits", [0.0, 5.0])
    tff = TffState(
        follow_distance_setpoint=float(tff_data.get("follow_distance_setpoint", 5.0)),
        k_lat=float(tff_data.get("k_lat", 1.5)),
        steer_limit=float(tff_data.get("steer_limit", 0.5)),
        target_hold_s=float(tff_data.get("target_hold_s", 0.5)),
        pid=PidState(
            kp=float(pid_data.get("kp", 0.8)),
            ki=float(pid_data.get("ki", 0.1)),
            kd=float(pid_data.get("kd", 0.05)),
            output_limits=(float(limits[0]), float(limits[1])),
        ),
    )
    distractors = [
        DistractorObject(
            x=float(_require(d, "x", f"scenario.distractors[{i}]")),
            y=float(_require(d, "y", f"scenario.distractors[{i}]")),
            height=float(d.get("height", 0.75)),
            false_positive_rate=float(d.get("false_positive_rate", 0.1)),
        )
        for i, d in enumerate(data.get("distractors", []))
    ]
    raw_id = data.get("test_case_id")
    return ScenarioConfig(
        vru=vru,
        domain=_require(data, "domain", "scenario"),
        perspective=_require(data, "perspective", "scenario"),
        path=_path_from_dict(_require(data, "path", "scenario")),
        vru_params=params,
        duration=float(_require(data, "duration", "scenario")),
        seed=int(_require(data, "seed", "scenario")),
        test_case_id=None if raw_id is None else int(raw_id),
        dt=float(data.get("dt", 0.05)),
        vehicle=vehicle,
        camera=camera,
        noise=noise,
        tff=tff,
        distractors=distractors,
    )
