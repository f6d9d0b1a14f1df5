"""Ground-truth VRU motion: path geometry plus procedural articulation.

Pedestrians and cyclists are articulated procedurally (sinusoidal limb swings,
pedal circles, handlebar wobble), not biomechanically. The downstream metrics
only need plausible amplitudes and periodicity. All generators are pure
functions of (t, params): same inputs, bit-identical output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .skeleton import Joint, N_JOINTS, Pose2D, SkeletonFrame, rotation2d

LEFT = "left"
RIGHT = "right"

# Gesture styles: a full raise puts the wrist above the head (this is what the
# follow controller reacts to); the bent variant holds the forearm at chest
# height and must stay below head level.
RAISE = "raise"
BENT = "bent"


@dataclass
class StraightPath:
    length: float
    origin: Pose2D = field(default_factory=Pose2D)

    def __post_init__(self) -> None:
        if self.length <= 0:
            raise ValueError("path length must be > 0")


@dataclass
class LaneChangePath:
    """Straight run with a smoothstep lateral shift over the middle section.

    ``s`` is the longitudinal path coordinate: the endpoint sits at
    (length, lateral_offset) in path coordinates. Ground speed through the
    transition band exceeds the longitudinal rate by at most
    sqrt(1 + (1.5 * lateral_offset / transition_length)^2).
    """

    length: float
    lateral_offset: float = 3.0
    transition_length: float = 10.0
    origin: Pose2D = field(default_factory=Pose2D)

    def __post_init__(self) -> None:
        if self.length <= 0:
            raise ValueError("path length must be > 0")
        if not (0 < self.transition_length < self.length):
            raise ValueError("transition_length must be inside (0, length)")


@dataclass
class CirclePath:
    radius: float
    arc: float = 2 * math.pi
    origin: Pose2D = field(default_factory=Pose2D)

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise ValueError("circle radius must be > 0")
        if self.arc <= 0:
            raise ValueError("circle arc must be > 0")


PathSpec = StraightPath | LaneChangePath | CirclePath


@dataclass
class ArmGesture:
    """One scheduled arm gesture interval."""

    t_start: float
    t_end: float
    side: str = LEFT
    style: str = RAISE

    def __post_init__(self) -> None:
        if self.side not in (LEFT, RIGHT):
            raise ValueError(f"gesture side must be left/right, got {self.side!r}")
        if self.style not in (RAISE, BENT):
            raise ValueError(f"gesture style must be raise/bent, got {self.style!r}")
        if self.t_end <= self.t_start:
            raise ValueError("gesture interval must have t_end > t_start")


@dataclass
class GaitParams:
    speed: float = 1.4
    cadence: float = 2.0  # steps per second; stride frequency is cadence / 2
    arm_swing_amplitude: float = 0.35  # radians at the shoulder
    step_length: float = 0.65
    body_height: float = 1.75
    arm_gesture_schedule: list[ArmGesture] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.speed < 0:
            raise ValueError("speed must be >= 0")
        if self.speed > 0 and self.cadence <= 0:
            raise ValueError("cadence must be > 0 when moving")
        if self.body_height <= 0:
            raise ValueError("body_height must be > 0")


@dataclass
class CyclistParams:
    speed: float = 1.67  # ~6 km/h
    pedal_cadence: float = 1.0  # crank revolutions per second
    wobble_amplitude: float = 0.0  # handlebar angle, radians
    wobble_frequency: float = 0.9  # Hz
    bike_wheelbase: float = 1.1
    arm_gesture_schedule: list[ArmGesture] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.speed < 0:
            raise ValueError("speed must be >= 0")
        if not (0.0 <= self.wobble_amplitude <= 0.3):
            raise ValueError("wobble_amplitude must be within [0, 0.3] rad")


def path_length(path: PathSpec) -> float:
    """Parameter range of ``s`` for path_pose."""
    if isinstance(path, CirclePath):
        return path.radius * path.arc
    return path.length


def _smoothstep(u: float) -> float:
    u = min(1.0, max(0.0, u))
    return u * u * (3.0 - 2.0 * u)


def path_pose(path: PathSpec, s: float) -> Pose2D:
    """Pose at path coordinate ``s``, yaw tangent to the path."""
    total = path_length(path)
    if not (-1e-9 <= s <= total + 1e-9):
        raise ValueError(f"path coordinate {s} outside [0, {total}]")
    s = min(max(s, 0.0), total)

    if isinstance(path, StraightPath):
        local = (s, 0.0, 0.0)
    elif isinstance(path, LaneChangePath):
        start = 0.5 * (path.length - path.transition_length)
        u = (s - start) / path.transition_length
        y = path.lateral_offset * _smoothstep(u)
        if 0.0 < u < 1.0:
            dy_ds = path.lateral_offset * 6.0 * u * (1.0 - u) / path.transition_length
        else:
            dy_ds = 0.0
        local = (s, y, math.atan2(dy_ds, 1.0))
    else:
        theta = s / path.radius
        local = (
            path.radius * math.sin(theta),
            path.radius * (1.0 - math.cos(theta)),
            theta,
        )

    o = path.origin
    c, sn = math.cos(o.yaw), math.sin(o.yaw)
    return Pose2D(
        x=o.x + local[0] * c - local[1] * sn,
        y=o.y + local[0] * sn + local[1] * c,
        yaw=o.yaw + local[2],
    )


def active_gesture(schedule: list[ArmGesture], t: float) -> ArmGesture | None:
    for g in schedule:
        if g.t_start <= t < g.t_end:
            return g
    return None


# --- pedestrian articulation -------------------------------------------------

# Rest-pose joint offsets as fractions of body height, local frame:
# x forward, y left, z up, ground at z = 0.
_PED_REST = {
    Joint.PELVIS: (0.000, 0.000, 0.530),
    Joint.LEFT_HIP: (0.000, 0.060, 0.500),
    Joint.RIGHT_HIP: (0.000, -0.060, 0.500),
    Joint.SPINE1: (0.005, 0.000, 0.600),
    Joint.LEFT_KNEE: (0.000, 0.065, 0.285),
    Joint.RIGHT_KNEE: (0.000, -0.065, 0.285),
    Joint.SPINE2: (0.008, 0.000, 0.655),
    Joint.LEFT_ANKLE: (0.000, 0.070, 0.045),
    Joint.RIGHT_ANKLE: (0.000, -0.070, 0.045),
    Joint.SPINE3: (0.010, 0.000, 0.720),
    Joint.LEFT_FOOT: (0.080, 0.072, 0.012),
    Joint.RIGHT_FOOT: (0.080, -0.072, 0.012),
    Joint.NECK: (0.005, 0.000, 0.805),
    Joint.LEFT_COLLAR: (0.005, 0.040, 0.775),
    Joint.RIGHT_COLLAR: (0.005, -0.040, 0.775),
    Joint.HEAD: (0.012, 0.000, 0.870),
    Joint.LEFT_SHOULDER: (0.000, 0.105, 0.785),
    Joint.RIGHT_SHOULDER: (0.000, -0.105, 0.785),
    Joint.LEFT_ELBOW: (0.000, 0.115, 0.630),
    Joint.RIGHT_ELBOW: (0.000, -0.115, 0.630),
    Joint.LEFT_WRIST: (0.000, 0.120, 0.490),
    Joint.RIGHT_WRIST: (0.000, -0.120, 0.490),
    Joint.LEFT_HAND: (0.000, 0.120, 0.430),
    Joint.RIGHT_HAND: (0.000, -0.120, 0.430),
}

_LEG_CHAINS = {
    LEFT: (Joint.LEFT_HIP, (Joint.LEFT_KNEE, Joint.LEFT_ANKLE, Joint.LEFT_FOOT)),
    RIGHT: (Joint.RIGHT_HIP, (Joint.RIGHT_KNEE, Joint.RIGHT_ANKLE, Joint.RIGHT_FOOT)),
}
_ARM_CHAINS = {
    LEFT: (Joint.LEFT_SHOULDER, (Joint.LEFT_ELBOW, Joint.LEFT_WRIST, Joint.LEFT_HAND)),
    RIGHT: (Joint.RIGHT_SHOULDER, (Joint.RIGHT_ELBOW, Joint.RIGHT_WRIST, Joint.RIGHT_HAND)),
}


def _pitch_about(points: np.ndarray, pivot: np.ndarray, angle: float) -> np.ndarray:
    """Rotate points about the lateral (y) axis through ``pivot``."""
    rel = points - pivot
    c, s = math.cos(angle), math.sin(angle)
    out = rel.copy()
    out[:, 0] = c * rel[:, 0] + s * rel[:, 2]
    out[:, 2] = -s * rel[:, 0] + c * rel[:, 2]
    return out + pivot


def pedestrian_local_joints(
    phase: float,
    gait: GaitParams,
    gesture: ArmGesture | None = None,
    swing: float = 1.0,
) -> np.ndarray:
    """Articulated pedestrian joints in the body-local frame.

    ``phase`` is the stride angle in radians (left leg forward at phase pi/2),
    ``swing`` scales all oscillation amplitudes (0 = standing still).
    """
    h = gait.body_height
    joints = np.zeros((N_JOINTS, 3))
    for j, off in _PED_REST.items():
        joints[j] = np.array(off) * h

    leg_len = (_PED_REST[Joint.LEFT_HIP][2] - _PED_REST[Joint.LEFT_ANKLE][2]) * h
    leg_amp = math.asin(min(0.9, gait.step_length / (2.0 * leg_len)))
    side_phase = {LEFT: phase, RIGHT: phase + math.pi}

    for side, (hip, chain) in _LEG_CHAINS.items():
        alpha = swing * leg_amp * math.sin(side_phase[side])
        idx = list(chain)
        joints[idx] = _pitch_about(joints[idx], joints[hip], alpha)

    for side, (shoulder, chain) in _ARM_CHAINS.items():
        idx = list(chain)
        if gesture is not None and gesture.side == side:
            sh = joints[shoulder]
            if gesture.style == RAISE:
                # Straight up: wrist and hand clear the head with margin.
                joints[chain[0]] = sh + [0.0, 0.0, 0.155 * h]
                joints[chain[1]] = sh + [0.0, 0.0, 0.295 * h]
                joints[chain[2]] = sh + [0.0, 0.0, 0.355 * h]
            else:
                # Forearm across the chest, below head level.
                inward = -1.0 if side == LEFT else 1.0
                joints[chain[0]] = sh + [0.03 * h, 0.0, -0.150 * h]
                joints[chain[1]] = sh + [0.16 * h, inward * 0.055 * h, -0.090 * h]
                joints[chain[2]] = sh + [0.19 * h, inward * 0.080 * h, -0.075 * h]
        else:
            # Arms swing in anti-phase with the same-side leg.
            theta = swing * gait.arm_swing_amplitude * math.sin(side_phase[side] + math.pi)
            joints[idx] = _pitch_about(joints[idx], joints[shoulder], theta)

    return joints


def compose_root(root: Pose2D, local_joints: np.ndarray) -> np.ndarray:
    """Place body-local joints into the world frame at the given root pose."""
    out = local_joints.copy()
    out[:, :2] = local_joints[:, :2] @ rotation2d(root.yaw).T
    out[:, 0] += root.x
    out[:, 1] += root.y
    return out


def pedestrian_frame_at(
    t: float,
    path: PathSpec,
    gait: GaitParams,
    subject_id: int = 0,
) -> tuple[SkeletonFrame, Pose2D]:
    """World-frame pedestrian skeleton and root pose at time ``t``.

    The root advances at constant speed and stops at the end of the path.
    """
    s = min(gait.speed * t, path_length(path))
    root = path_pose(path, s)
    stride_freq = gait.cadence / 2.0
    phase = 2.0 * math.pi * stride_freq * t
    swing = 1.0 if gait.speed > 0 else 0.0
    local = pedestrian_local_joints(
        phase, gait, active_gesture(gait.arm_gesture_schedule, t), swing
    )
    frame = SkeletonFrame(t, subject_id, compose_root(root, local), "world")
    return frame, root


# --- cyclist articulation ----------------------------------------------------

# Rider/bike layout in the body-local frame, meters, sized for a 1.75 m rider.
_SADDLE = np.array([0.0, 0.0, 0.95])
_CRANK_CENTER = np.array([0.18, 0.0, 0.34])
_CRANK_RADIUS = 0.17
_PEDAL_HALF_WIDTH = 0.11
_HEAD_TUBE = np.array([0.52, 0.0, 1.00])
_GRIP_OFFSET = np.array([0.08, 0.22, 0.0])  # from head tube, left grip; right mirrors
_THIGH = 0.43
_SHANK = 0.43

_CYC_TORSO = {
    Joint.PELVIS: (0.00, 0.000, 0.950),
    Joint.LEFT_HIP: (0.00, 0.095, 0.930),
    Joint.RIGHT_HIP: (0.00, -0.095, 0.930),
    Joint.SPINE1: (0.07, 0.000, 1.040),
    Joint.SPINE2: (0.14, 0.000, 1.120),
    Joint.SPINE3: (0.21, 0.000, 1.200),
    Joint.NECK: (0.30, 0.000, 1.280),
    Joint.LEFT_COLLAR: (0.24, 0.070, 1.230),
    Joint.RIGHT_COLLAR: (0.24, -0.070, 1.230),
    Joint.HEAD: (0.38, 0.000, 1.330),
    Joint.LEFT_SHOULDER: (0.30, 0.190, 1.260),
    Joint.RIGHT_SHOULDER: (0.30, -0.190, 1.260),
}


def _two_link_planar(
    root_xz: np.ndarray, target_xz: np.ndarray, l1: float, l2: float
) -> np.ndarray:
    """Middle joint of a two-link chain in the sagittal plane, bending forward."""
    delta = target_xz - root_xz
    d = float(np.linalg.norm(delta))
    if d >= l1 + l2:
        return root_xz + delta * (l1 / d)
    d = max(d, abs(l1 - l2) + 1e-6)
    a = (l1 * l1 - l2 * l2 + d * d) / (2.0 * d)
    lift = math.sqrt(max(l1 * l1 - a * a, 0.0))
    base = root_xz + delta * (a / d)
    perp = np.array([delta[1], -delta[0]]) / d  # points forward for a downward chain
    knee = base + perp * lift
    if knee[0] < base[0]:  # keep the forward solution
        knee = base - perp * lift
    return knee


def cyclist_local_joints(
    pedal_phase: float,
    wobble_angle: float,
    params: CyclistParams,
    gesture: ArmGesture | None = None,
) -> np.ndarray:
    """Articulated cyclist joints in the body-local frame.

    ``pedal_phase`` is the left crank angle in radians; the right crank is
    half a revolution ahead. ``wobble_angle`` rotates the handlebar about the
    head tube and leans the torso slightly with it.
    """
    joints = np.zeros((N_JOINTS, 3))
    for j, off in _CYC_TORSO.items():
        joints[j] = off

    # Torso lean follows the handlebar: roll the upper body about the
    # fore-aft axis through spine1 so shoulders shift against the anchor.
    roll = 0.25 * wobble_angle
    if roll != 0.0:
        pivot = joints[Joint.SPINE1]
        upper = [
            Joint.SPINE2, Joint.SPINE3, Joint.NECK, Joint.HEAD,
            Joint.LEFT_COLLAR, Joint.RIGHT_COLLAR,
            Joint.LEFT_SHOULDER, Joint.RIGHT_SHOULDER,
        ]
        rel = joints[upper] - pivot
        c, s = math.cos(roll), math.sin(roll)
        y, z = rel[:, 1].copy(), rel[:, 2].copy()
        rel[:, 1] = c * y - s * z
        rel[:, 2] = s * y + c * z
        joints[upper] = rel + pivot

    # Legs: ankles ride the pedal circles, knees from planar two-link IK.
    for side, crank in ((LEFT, pedal_phase), (RIGHT, pedal_phase + math.pi)):
        sign = 1.0 if side == LEFT else -1.0
        hip, (knee_j, ankle_j, foot_j) = _LEG_CHAINS[side]
        ankle = _CRANK_CENTER + np.array(
            [_CRANK_RADIUS * math.cos(crank), 0.0, -_CRANK_RADIUS * math.sin(crank)]
        )
        ankle[1] = sign * _PEDAL_HALF_WIDTH
        joints[ankle_j] = ankle
        knee_xz = _two_link_planar(
            joints[hip][[0, 2]], ankle[[0, 2]], _THIGH, _SHANK
        )
        joints[knee_j] = [knee_xz[0], sign * (_PEDAL_HALF_WIDTH + 0.01), knee_xz[1]]
        joints[foot_j] = ankle + [0.10, 0.0, -0.03]

    # Arms: hands on the grips unless a gesture lifts one off the bar.
    grips = {}
    rot = rotation2d(wobble_angle)
    for side in (LEFT, RIGHT):
        sign = 1.0 if side == LEFT else -1.0
        offset = _GRIP_OFFSET * np.array([1.0, sign, 1.0])
        turned = offset.copy()
        turned[:2] = rot @ offset[:2]
        grips[side] = _HEAD_TUBE + turned

    for side, (shoulder_j, (elbow_j, wrist_j, hand_j)) in _ARM_CHAINS.items():
        sh = joints[shoulder_j]
        if gesture is not None and gesture.side == side and gesture.style == RAISE:
            joints[elbow_j] = sh + [0.0, 0.0, 0.27]
            joints[wrist_j] = sh + [0.0, 0.0, 0.50]
            joints[hand_j] = sh + [0.0, 0.0, 0.60]
            continue
        hand = grips[side]
        to_hand = hand - sh
        joints[hand_j] = hand
        joints[wrist_j] = hand - to_hand * 0.14
        joints[elbow_j] = sh + to_hand * 0.48 + [0.0, 0.0, -0.07]

    return joints


def cyclist_frame_at(
    t: float,
    path: PathSpec,
    params: CyclistParams,
    subject_id: int = 0,
) -> tuple[SkeletonFrame, Pose2D]:
    """World-frame cyclist skeleton and root pose at time ``t``."""
    s = min(params.speed * t, path_length(path))
    root = path_pose(path, s)
    wobble = params.wobble_amplitude * math.sin(
        2.0 * math.pi * params.wobble_frequency * t
    )
    root = Pose2D(root.x, root.y, root.yaw + 0.5 * wobble)
    pedal_phase = 2.0 * math.pi * params.pedal_cadence * t
    local = cyclist_local_joints(
        pedal_phase, wobble, params, active_gesture(params.arm_gesture_schedule, t)
    )
    frame = SkeletonFrame(t, subject_id, compose_root(root, local), "world")
    return frame, root
