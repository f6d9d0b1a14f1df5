"""Emulated monocular 3D human-pose sensor.

Instead of re-implementing a pose network, this module reproduces its output
statistics: pinhole visibility, distance-dependent depth noise along the
camera ray, per-joint jitter that grows for body-side joints occluded by the
view angle, and cone false positives that only occur in the CP domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .motion import GaitParams, compose_root, pedestrian_local_joints
from .skeleton import Joint, Pose2D, SkeletonFrame, transform_frame
from .vehicle import VehicleState

RW = "rw"
CP = "cp"
DOMAINS = (RW, CP)

PEDESTRIAN = "pedestrian"
CYCLIST = "cyclist"

FRONT = "front"
DIAGONAL = "diagonal"
SIDE = "side"

TRUE_VRU = "true_vru"
FALSE_POSITIVE = "distractor_false_positive"

# View-sector thresholds on the lateralness angle (0 = seen head-on or from
# behind, 90 deg = full profile view).
_DIAGONAL_DEG = 30.0
_SIDE_DEG = 60.0

# Joints whose estimates degrade when their body side faces away from the
# camera: the distal limb chain plus the shoulder.
_OCCLUDABLE = {
    "left": (
        Joint.LEFT_ANKLE, Joint.LEFT_FOOT, Joint.LEFT_SHOULDER,
        Joint.LEFT_ELBOW, Joint.LEFT_WRIST, Joint.LEFT_HAND,
    ),
    "right": (
        Joint.RIGHT_ANKLE, Joint.RIGHT_FOOT, Joint.RIGHT_SHOULDER,
        Joint.RIGHT_ELBOW, Joint.RIGHT_WRIST, Joint.RIGHT_HAND,
    ),
}


@dataclass
class MountPose:
    """Camera pose relative to the vehicle frame (x forward, y left, z up)."""

    x: float = 2.0
    y: float = 0.0
    z: float = 2.2
    yaw: float = 0.0
    pitch: float = math.radians(7.6)  # positive pitches the optical axis down
    roll: float = 0.0


@dataclass
class CameraModel:
    width: int = 1280
    height: int = 960
    fps: float = 20.0
    horizontal_fov: float = math.pi / 2.0
    mount: MountPose = field(default_factory=MountPose)

    def __post_init__(self) -> None:
        if not (0.0 < self.horizontal_fov < math.pi):
            raise ValueError("horizontal_fov must lie in (0, pi)")
        if self.width <= 0 or self.height <= 0 or self.fps <= 0:
            raise ValueError("width, height, and fps must be positive")

    @property
    def focal_px(self) -> float:
        return (self.width / 2.0) / math.tan(self.horizontal_fov / 2.0)

    @property
    def pitch(self) -> float:
        return self.mount.pitch


@dataclass
class NoiseModel:
    """Statistical emulation parameters for the pose sensor.

    depth_sigma_b values are calibration artifacts: they are fitted so the
    distance-stability pipeline lands on its reference variability levels,
    then committed per scenario.
    """

    depth_sigma_a: float = 0.01
    depth_sigma_b: float = 2.4e-4
    lateral_sigma: float = 0.02
    joint_jitter_base: float = 0.012
    # Far-side degradation factor per (view sector, VRU kind).
    occlusion_multipliers: dict[str, dict[str, float]] = field(
        default_factory=lambda: {
            FRONT: {PEDESTRIAN: 1.0, CYCLIST: 1.0},
            DIAGONAL: {PEDESTRIAN: 1.6, CYCLIST: 2.0},
            SIDE: {PEDESTRIAN: 2.0, CYCLIST: 2.5},
        }
    )
    no_detect_rate: float = 0.0
    seed: int | None = None

    def __post_init__(self) -> None:
        for name in ("depth_sigma_a", "depth_sigma_b", "lateral_sigma", "joint_jitter_base"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not (0.0 <= self.no_detect_rate <= 1.0):
            raise ValueError("no_detect_rate must be within [0, 1]")
        for sector, table in self.occlusion_multipliers.items():
            for vru, factor in table.items():
                if factor < 1.0:
                    raise ValueError(
                        f"occlusion multiplier ({sector}, {vru}) must be >= 1"
                    )


@dataclass
class DistractorObject:
    """Static trackside object the CP-domain sensor may hallucinate as a person."""

    x: float
    y: float
    height: float = 0.75
    false_positive_rate: float = 0.1

    def __post_init__(self) -> None:
        if not (0.0 <= self.false_positive_rate <= 1.0):
            raise ValueError("false_positive_rate must be within [0, 1]")


@dataclass
class Detection:
    subject_id: int
    skeleton: SkeletonFrame  # vehicle frame
    source: str = TRUE_VRU

    def to_dict(self) -> dict:
        return {
            "subject": self.subject_id,
            "source": self.source,
            "skeleton": self.skeleton.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Detection":
        return cls(
            subject_id=int(data["subject"]),
            skeleton=SkeletonFrame.from_dict(data["skeleton"]),
            source=str(data["source"]),
        )


@dataclass
class SceneSubject:
    frame: SkeletonFrame  # world frame
    kind: str  # pedestrian | cyclist
    root: Pose2D


@dataclass
class Scene:
    vehicle: VehicleState
    subjects: list[SceneSubject]
    distractors: list[DistractorObject] = field(default_factory=list)


def camera_pose(camera: CameraModel, vehicle: VehicleState) -> tuple[np.ndarray, np.ndarray]:
    """Camera position and body-axes rotation (world <- camera body) matrix.

    Body axes follow the vehicle convention (x forward, y left, z up), rotated
    by mount yaw, then pitch (down positive), then roll.
    """
    m = camera.mount
    cy, sy = math.cos(vehicle.yaw), math.sin(vehicle.yaw)
    position = np.array(
        [
            vehicle.x + m.x * cy - m.y * sy,
            vehicle.y + m.x * sy + m.y * cy,
            m.z,
        ]
    )
    psi = vehicle.yaw + m.yaw
    cp_, sp = math.cos(m.pitch), math.sin(m.pitch)
    cr, sr = math.cos(m.roll), math.sin(m.roll)
    cps, sps = math.cos(psi), math.sin(psi)
    rz = np.array([[cps, -sps, 0.0], [sps, cps, 0.0], [0.0, 0.0, 1.0]])
    ry = np.array([[cp_, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp_]])
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cr, -sr], [0.0, sr, cr]])
    return position, rz @ ry @ rx


def project_point(
    camera: CameraModel, point: np.ndarray, vehicle: VehicleState
) -> tuple[float, float] | None:
    """Pinhole projection of a world point; None when invisible."""
    position, rot = camera_pose(camera, vehicle)
    body = rot.T @ (np.asarray(point, dtype=float) - position)
    # Optical axes: x_cam right = -y_body, y_cam down = -z_body, z_cam = x_body.
    z_c = body[0]
    if z_c <= 1e-9:
        return None
    f = camera.focal_px
    u = camera.width / 2.0 + f * (-body[1]) / z_c
    v = camera.height / 2.0 + f * (-body[2]) / z_c
    if not (0.0 <= u <= camera.width and 0.0 <= v <= camera.height):
        return None
    return (float(u), float(v))


def depth_sigma(noise: NoiseModel, d: float) -> float:
    """Depth noise level at camera distance d: a + b * d^2."""
    if d < 0:
        raise ValueError("distance must be >= 0")
    return noise.depth_sigma_a + noise.depth_sigma_b * d * d


def view_sector(vru_root: Pose2D, camera_position: np.ndarray) -> tuple[str, str]:
    """Classify the viewing aspect and name the body side facing away.

    Returns (sector, far_side). The sector measures how lateral the view is:
    head-on and from-behind both count as front.
    """
    to_cam = math.atan2(
        float(camera_position[1]) - vru_root.y, float(camera_position[0]) - vru_root.x
    )
    rel = math.atan2(math.sin(to_cam - vru_root.yaw), math.cos(to_cam - vru_root.yaw))
    lateral = math.pi / 2.0 - abs(abs(rel) - math.pi / 2.0)
    lateral_deg = math.degrees(lateral)
    if lateral_deg < _DIAGONAL_DEG:
        sector = FRONT
    elif lateral_deg <= _SIDE_DEG:
        sector = DIAGONAL
    else:
        sector = SIDE
    far_side = "right" if rel > 0 else "left"
    return sector, far_side


def occlusion_multiplier(
    noise: NoiseModel, sector: str, j: int, vru: str, far_side: str
) -> float:
    """Jitter multiplier for joint j given the view sector and the far side."""
    if sector == FRONT:
        return 1.0
    if Joint(j) not in _OCCLUDABLE[far_side]:
        return 1.0
    return noise.occlusion_multipliers[sector][vru]


_FP_POSE_CACHE: dict[float, np.ndarray] = {}


def _standing_pose(body_height: float) -> np.ndarray:
    if body_height not in _FP_POSE_CACHE:
        _FP_POSE_CACHE[body_height] = pedestrian_local_joints(
            0.0, GaitParams(speed=0.0, body_height=body_height), swing=0.0
        )
    return _FP_POSE_CACHE[body_height]


def sense(
    scene: Scene,
    camera: CameraModel,
    noise: NoiseModel,
    domain: str,
    rng: np.random.Generator,
) -> list[Detection]:
    """One sensor frame: detections for visible subjects plus CP-only ghosts.

    Noise layout per subject: one rigid offset drawn in the camera-ray frame
    (depth-dominant), then independent per-joint jitter scaled by the
    occlusion multiplier of far-side joints.
    """
    if domain not in DOMAINS:
        raise ValueError(f"domain must be one of {DOMAINS}, got {domain!r}")
    detections: list[Detection] = []
    cam_pos, _ = camera_pose(camera, scene.vehicle)
    vehicle_pose = Pose2D(scene.vehicle.x, scene.vehicle.y, scene.vehicle.yaw)

    for subject in scene.subjects:
        hip = subject.frame.joints[0]
        if project_point(camera, hip, scene.vehicle) is None:
            continue
        if noise.no_detect_rate > 0.0 and rng.random() < noise.no_detect_rate:
            continue

        d = math.hypot(hip[0] - cam_pos[0], hip[1] - cam_pos[1])
        ray = np.asarray(hip, dtype=float) - cam_pos
        ray /= np.linalg.norm(ray)
        horiz = np.array([-ray[1], ray[0], 0.0])
        horiz /= np.linalg.norm(horiz)
        vert = np.cross(ray, horiz)

        rigid = (
            ray * rng.normal(0.0, depth_sigma(noise, d))
            + horiz * rng.normal(0.0, noise.lateral_sigma)
            + vert * rng.normal(0.0, 0.5 * noise.lateral_sigma)
        )
        sector, far_side = view_sector(subject.root, cam_pos)
        sigmas = np.array(
            [
                noise.joint_jitter_base
                * occlusion_multiplier(noise, sector, j, subject.kind, far_side)
                for j in range(subject.frame.joints.shape[0])
            ]
        )
        jitter = rng.normal(size=subject.frame.joints.shape) * sigmas[:, None]
        noisy = SkeletonFrame(
            subject.frame.timestamp,
            subject.frame.subject_id,
            subject.frame.joints + rigid + jitter,
            "world",
        )
        detections.append(
            Detection(
                subject_id=subject.frame.subject_id,
                skeleton=transform_frame(noisy, vehicle_pose),
                source=TRUE_VRU,
            )
        )

    if domain == CP:
        for i, obj in enumerate(scene.distractors):
            probe = np.array([obj.x, obj.y, obj.height / 2.0])
            if project_point(camera, probe, scene.vehicle) is None:
                continue
            if rng.random() >= obj.false_positive_rate:
                continue
            ghost_local = _standing_pose(1.7)
            ghost_world = compose_root(Pose2D(obj.x, obj.y, 0.0), ghost_local)
            ghost_world = ghost_world + rng.normal(
                size=ghost_world.shape
            ) * noise.joint_jitter_base
            ghost = SkeletonFrame(
                scene.subjects[0].frame.timestamp if scene.subjects else 0.0,
                -(i + 1),
                ghost_world,
                "world",
            )
            detections.append(
                Detection(
                    subject_id=-(i + 1),
                    skeleton=transform_frame(ghost, vehicle_pose),
                    source=FALSE_POSITIVE,
                )
            )

    return detections
