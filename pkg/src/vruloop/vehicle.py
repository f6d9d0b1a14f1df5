"""Kinematic vehicle model and the track-and-follow (TFF) controller.

The controller runs a sense-plan-act cycle per tick: pick the closest person
in the forward camera cone, react to start/stop gestures, hold the follow
distance with a PID speed command, and steer the target back onto the camera
centerline with a proportional law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

from .skeleton import HANDS, HEAD, SkeletonFrame

if TYPE_CHECKING:  # avoid a circular import; perception imports VehicleState
    from .perception import CameraModel, Detection

IDLE = "idle"
FOLLOWING = "following"
STOPPED = "stopped"

GESTURE_MARGIN_M = 0.05  # hand must clear the head by this much
GESTURE_REARM_S = 1.0  # quiet time required between gesture toggles


def _wrap_angle(angle: float) -> float:
    """Normalize to (-pi, pi]."""
    wrapped = math.fmod(angle + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


@dataclass
class VehicleState:
    x: float = 0.0
    y: float = 0.0
    yaw: float = 0.0
    v: float = 0.0
    wheelbase: float = 2.5
    v_max: float = 5.0
    accel_limit: float = 1.5
    steer_max: float = 0.5

    def __post_init__(self) -> None:
        if self.wheelbase <= 0:
            raise ValueError("wheelbase must be > 0")
        if not (0.0 <= self.v <= self.v_max):
            raise ValueError(f"v={self.v} outside [0, {self.v_max}]")


@dataclass
class PidState:
    kp: float = 0.8
    ki: float = 0.1
    kd: float = 0.05
    integral: float = 0.0
    prev_error: float = 0.0
    output_limits: tuple[float, float] = (0.0, 5.0)


@dataclass
class TffState:
    mode: str = IDLE
    target_subject: int | None = None
    follow_distance_setpoint: float = 5.0
    pid: PidState = field(default_factory=PidState)
    k_lat: float = 1.5
    steer_limit: float = 0.5
    target_hold_s: float = 0.5
    # Internal timers: gesture re-arm and target-loss grace.
    no_gesture_time: float = GESTURE_REARM_S
    time_since_target: float = 0.0
    last_v_cmd: float = 0.0
    last_steer: float = 0.0


def step_vehicle(state: VehicleState, steer: float, v_cmd: float, dt: float) -> VehicleState:
    """Advance the kinematic bicycle model one step.

    Position integrates the current speed; speed then approaches ``v_cmd``
    under the acceleration limit. Yaw is renormalized to (-pi, pi].
    """
    if not (0.0 < dt <= 0.1):
        raise ValueError(f"dt={dt} outside (0, 0.1]")
    if abs(steer) > state.steer_max + 1e-12:
        raise ValueError(f"steer={steer} exceeds steer_max={state.steer_max}")
    v_cmd = min(max(v_cmd, 0.0), state.v_max)

    x = state.x + state.v * math.cos(state.yaw) * dt
    y = state.y + state.v * math.sin(state.yaw) * dt
    yaw = _wrap_angle(state.yaw + state.v * math.tan(steer) / state.wheelbase * dt)
    dv = min(max(v_cmd - state.v, -state.accel_limit * dt), state.accel_limit * dt)
    return replace(state, x=x, y=y, yaw=yaw, v=state.v + dv)


def pid_step(pid: PidState, error: float, dt: float) -> tuple[float, PidState]:
    """One discrete PID update with clamped output and conditional-integration
    anti-windup: the integral freezes while the output is pushed past a limit
    in the direction of the error."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    derivative = (error - pid.prev_error) / dt
    lo, hi = pid.output_limits
    rest = pid.kp * error + pid.kd * derivative
    integral = pid.integral + error * dt
    if pid.ki != 0.0:
        # Anti-windup: while the error keeps pushing into a limit, the
        # integral may grow up to the exactly-saturating value but no further,
        # and never unwinds because of a transient derivative spike.
        cap_hi = (hi - rest) / pid.ki
        cap_lo = (lo - rest) / pid.ki
        if integral > cap_hi and error > 0:
            integral = max(pid.integral, min(integral, cap_hi))
        elif integral < cap_lo and error < 0:
            integral = min(pid.integral, max(integral, cap_lo))
    output = min(max(rest + pid.ki * integral, lo), hi)
    return output, replace(pid, integral=integral, prev_error=error)


def detect_gesture(frame: SkeletonFrame) -> bool:
    """True iff either hand is strictly above head level plus the margin."""
    head_z = frame.joints[HEAD, 2]
    return bool(
        any(frame.joints[hand, 2] > head_z + GESTURE_MARGIN_M for hand in HANDS)
    )


def select_target(detections: list["Detection"], camera: "CameraModel") -> int | None:
    """Subject id of the closest detected person inside the forward FoV cone.

    Detections must already be expressed in the vehicle frame. Anything at or
    behind the camera plane (x <= 0) is ignored.
    """
    half_fov = camera.horizontal_fov / 2.0
    best_id: int | None = None
    best_dist = math.inf
    for det in detections:
        hip = det.skeleton.joints[0]
        x, y = float(hip[0]), float(hip[1])
        if x <= 0.0:
            continue
        if abs(math.atan2(y, x)) > half_fov:
            continue
        dist = math.hypot(x, y)
        if dist < best_dist:
            best_dist = dist
            best_id = det.subject_id
    return best_id


def tff_plan(
    tff: TffState, target: "Detection | None", camera: "CameraModel", dt: float
) -> tuple[float, float, TffState]:
    """Plan one control step; returns (v_cmd, steer, next controller state).

    Mode machine: Idle -> Following on a (re-armed) gesture, Following ->
    Stopped on the next re-armed gesture; Stopped is terminal. Losing the
    target keeps the mode: commands coast briefly, then drop to zero.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    mode = tff.mode
    target_subject = tff.target_subject
    pid = tff.pid

    gesture = target is not None and detect_gesture(target.skeleton)
    if gesture and tff.no_gesture_time >= GESTURE_REARM_S:
        if mode == IDLE:
            mode = FOLLOWING
            target_subject = target.subject_id
        elif mode == FOLLOWING:
            mode = STOPPED
            target_subject = None
    no_gesture_time = 0.0 if gesture else tff.no_gesture_time + dt

    if mode != FOLLOWING:
        return 0.0, 0.0, replace(
            tff,
            mode=mode,
            target_subject=None,
            no_gesture_time=no_gesture_time,
            time_since_target=0.0,
            last_v_cmd=0.0,
            last_steer=0.0,
        )

    if target is None:
        time_since_target = tff.time_since_target + dt
        if time_since_target > tff.target_hold_s:
            v_cmd, steer = 0.0, 0.0
        else:
            v_cmd, steer = tff.last_v_cmd, tff.last_steer
        return v_cmd, steer, replace(
            tff,
            mode=mode,
            target_subject=target_subject,
            no_gesture_time=no_gesture_time,
            time_since_target=time_since_target,
            last_v_cmd=v_cmd,
            last_steer=steer,
        )

    hip = target.skeleton.joints[0]
    distance = math.hypot(float(hip[0]), float(hip[1]))
    v_cmd, pid = pid_step(pid, distance - tff.follow_distance_setpoint, dt)
    # Offset angle follows the image convention: positive when the target sits
    # right of the centerline, so negative feedback steers toward the target.
    offset_angle = math.atan2(-float(hip[1]), float(hip[0]))
    steer = min(max(-tff.k_lat * offset_angle, -tff.steer_limit), tff.steer_limit)
    return v_cmd, steer, replace(
        tff,
        mode=mode,
        target_subject=target.subject_id,
        pid=pid,
        no_gesture_time=no_gesture_time,
        time_since_target=0.0,
        last_v_cmd=v_cmd,
        last_steer=steer,
    )
