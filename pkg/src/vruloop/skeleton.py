"""Canonical 24-joint skeleton: joint ids, bone tree, frames, and transforms.

Every other module exchanges poses as :class:`SkeletonFrame` objects, so the
joint ordering defined here is load-bearing. It follows the SMPL convention
(pelvis root, left/right limb chains, spine chain) because downstream metrics
address joints by index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

# Reference frames a SkeletonFrame may be expressed in.
WORLD = "world"
VEHICLE = "vehicle"
CAMERA = "camera"
FRAME_TAGS = (WORLD, VEHICLE, CAMERA)

# Bone-length validity band, meters. Wide enough for any adult anthropometry,
# tight enough to reject collapsed or exploded pose estimates.
BONE_MIN_M = 0.01
BONE_MAX_M = 1.5


class Joint(IntEnum):
    """SMPL 24-joint enumeration. Index 0 is the anchor for all metrics."""

    PELVIS = 0
    LEFT_HIP = 1
    RIGHT_HIP = 2
    SPINE1 = 3
    LEFT_KNEE = 4
    RIGHT_KNEE = 5
    SPINE2 = 6
    LEFT_ANKLE = 7
    RIGHT_ANKLE = 8
    SPINE3 = 9
    LEFT_FOOT = 10
    RIGHT_FOOT = 11
    NECK = 12
    LEFT_COLLAR = 13
    RIGHT_COLLAR = 14
    HEAD = 15
    LEFT_SHOULDER = 16
    RIGHT_SHOULDER = 17
    LEFT_ELBOW = 18
    RIGHT_ELBOW = 19
    LEFT_WRIST = 20
    RIGHT_WRIST = 21
    LEFT_HAND = 22
    RIGHT_HAND = 23


N_JOINTS = 24

# Joint groups the stability metrics report on. "Feet" are tracked at the
# ankle pair (7, 8): those are the lowest joints with stable detectability.
ANCHOR = Joint.PELVIS
HEAD = Joint.HEAD
FEET = (Joint.LEFT_ANKLE, Joint.RIGHT_ANKLE)
SHOULDERS = (Joint.LEFT_SHOULDER, Joint.RIGHT_SHOULDER)
HANDS = (Joint.LEFT_HAND, Joint.RIGHT_HAND)

# Parent of each joint in the kinematic tree; -1 marks the root.
PARENTS = np.array(
    [-1, 0, 0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 9, 9, 12, 13, 14, 16, 17, 18, 19, 20, 21],
    dtype=int,
)

# Joints on the left / right half of the body (used for occlusion handling).
LEFT_SIDE = frozenset(j for j in Joint if j.name.startswith("LEFT"))
RIGHT_SIDE = frozenset(j for j in Joint if j.name.startswith("RIGHT"))


@dataclass
class Pose2D:
    """Planar rigid pose: position in meters, yaw in radians (CCW from +x)."""

    x: float = 0.0
    y: float = 0.0
    yaw: float = 0.0

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.yaw)


@dataclass
class SkeletonFrame:
    """One timestamped set of 24 joint positions for one subject.

    Parameters
    ----------
    timestamp : float
        Seconds since scenario start.
    subject_id : int
        Stable id of the person this frame belongs to.
    joints : ndarray, shape (24, 3)
        Joint positions in meters, ordered per :class:`Joint`.
    frame : str
        Reference frame tag, one of ``world``, ``vehicle``, ``camera``.
    """

    timestamp: float
    subject_id: int
    joints: np.ndarray
    frame: str = WORLD

    def __post_init__(self) -> None:
        self.joints = np.asarray(self.joints, dtype=float)
        if self.joints.shape != (N_JOINTS, 3):
            raise ValueError(
                f"joints must have shape ({N_JOINTS}, 3), got {self.joints.shape}"
            )
        if self.frame not in FRAME_TAGS:
            raise ValueError(f"unknown frame tag {self.frame!r}, expected one of {FRAME_TAGS}")

    def copy(self) -> "SkeletonFrame":
        return SkeletonFrame(self.timestamp, self.subject_id, self.joints.copy(), self.frame)

    def to_dict(self) -> dict:
        """JSON-ready mapping; schema shared with the harness run log."""
        return {
            "t": self.timestamp,
            "subject": self.subject_id,
            "frame": self.frame,
            "joints": [[float(c) for c in row] for row in self.joints],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SkeletonFrame":
        return cls(
            timestamp=float(data["t"]),
            subject_id=int(data["subject"]),
            joints=np.array(data["joints"], dtype=float),
            frame=str(data["frame"]),
        )


def _default_edges() -> list[tuple[int, int]]:
    return [(int(PARENTS[j]), int(j)) for j in range(1, N_JOINTS)]


@dataclass
class BoneGraph:
    """Kinematic tree over the 24 joints: 23 parent-child edges rooted at 0."""

    edges: list[tuple[int, int]] = field(default_factory=_default_edges)

    def __post_init__(self) -> None:
        if len(self.edges) != N_JOINTS - 1:
            raise ValueError(f"bone graph needs {N_JOINTS - 1} edges, got {len(self.edges)}")
        adjacency: dict[int, list[int]] = {j: [] for j in range(N_JOINTS)}
        for a, b in self.edges:
            if not (0 <= a < N_JOINTS and 0 <= b < N_JOINTS):
                raise ValueError(f"edge ({a}, {b}) references a joint outside 0..{N_JOINTS - 1}")
            adjacency[a].append(b)
            adjacency[b].append(a)
        seen = {0}
        stack = [0]
        while stack:
            node = stack.pop()
            for nxt in adjacency[node]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        if len(seen) != N_JOINTS:
            raise ValueError("bone graph is not connected to the root joint")
        # 23 edges + connected over 24 nodes implies acyclic; nothing more to check.


@dataclass
class SkeletonValidity:
    """Outcome of validate_skeleton: overall verdict plus offending edges."""

    valid: bool
    violations: list[tuple[int, int, float]] = field(default_factory=list)


def joint_distance_to_anchor(frame: SkeletonFrame, j: int) -> float:
    """Euclidean distance from joint ``j`` to the pelvis anchor (joint 0)."""
    if not (0 <= int(j) < N_JOINTS):
        raise ValueError(f"joint index {j} out of range")
    pair = frame.joints[[0, int(j)]]
    if not np.all(np.isfinite(pair)):
        raise ValueError("invalid frame: non-finite joint position")
    return float(np.linalg.norm(pair[1] - pair[0]))


def rotation2d(yaw: float) -> np.ndarray:
    """2x2 planar rotation matrix for a CCW angle in radians."""
    c, s = np.cos(yaw), np.sin(yaw)
    return np.array([[c, -s], [s, c]])


def transform_frame(frame: SkeletonFrame, pose: Pose2D, target: str = VEHICLE) -> SkeletonFrame:
    """Re-express a world-frame skeleton in the frame whose origin is ``pose``.

    The target frame is planar-rigid: rotated by ``pose.yaw`` and translated to
    ``(pose.x, pose.y)``. Heights (z) carry over unchanged.
    """
    if frame.frame != WORLD:
        raise ValueError(f"transform_frame expects a world frame, got {frame.frame!r}")
    if target not in (VEHICLE, CAMERA):
        raise ValueError(f"unsupported target frame {target!r}")
    local = frame.joints.copy()
    offset = local[:, :2] - np.array([pose.x, pose.y])
    local[:, :2] = offset @ rotation2d(pose.yaw)  # row-vector form of R(-yaw) @ offset
    return SkeletonFrame(frame.timestamp, frame.subject_id, local, target)


def validate_skeleton(frame: SkeletonFrame, graph: BoneGraph | None = None) -> SkeletonValidity:
    """Check every bone length against [BONE_MIN_M, BONE_MAX_M].

    Returns a verdict rather than raising: the perception pipeline wants to
    count and inspect bad frames, not crash on them. Non-finite joints mark
    every touching edge as violated.
    """
    graph = graph or BoneGraph()
    violations: list[tuple[int, int, float]] = []
    for a, b in graph.edges:
        seg = frame.joints[b] - frame.joints[a]
        if not np.all(np.isfinite(seg)):
            violations.append((a, b, float("nan")))
            continue
        length = float(np.linalg.norm(seg))
        if not (BONE_MIN_M <= length <= BONE_MAX_M):
            violations.append((a, b, length))
    return SkeletonValidity(valid=not violations, violations=violations)
