"""Projection-stimulation calibration math.

A physical camera is pointed at a screen onto which a virtual scene is
projected. For the camera to see the virtual world at the correct scale,
the virtual render camera must be configured from the measured screen
geometry, the horizon must be drawn at the height that matches the
physical camera's eye line, and any off-axis projector mounting must be
compensated with a keystone warp. This module holds that geometry; it
does no rendering.

Conventions: the projector sits at the origin looking along +x, with z
up and y to the left. The screen is nominally the vertical plane at the
projector throw distance. Pitch angles are positive upward.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .perception import CameraModel

SMALL_ANGLE_LIMIT = math.radians(10.0)
_MAX_KEYSTONE_ANGLE = math.radians(45.0)


@dataclass(frozen=True)
class ProjectorPose:
    """Projector mounting relative to the screen center."""

    height: float = 0.0
    distance: float = 3.0
    pitch: float = 0.0

    def __post_init__(self) -> None:
        if self.distance <= 0.0:
            raise ValueError("projector distance must be positive")


@dataclass(frozen=True)
class ProjectionGeometry:
    """Measured layout of one camera-stimulation bench.

    Attributes
    ----------
    width:
        Width of the projected image on the screen, meters.
    d_cam:
        Distance from the physical camera to the screen, meters.
    h_cam:
        Height of the physical camera above the ground plane, meters.
    d_horizon:
        Distance at which the rendered scene places its horizon,
        meters. Must exceed ``d_cam``.
    camera_pitch:
        Downward pitch of the physical camera, radians. The math here
        assumes it is small; operations warn above 10 degrees.
    projector:
        Projector mounting pose.
    projector_resolution:
        Native projector resolution as (width_px, height_px).
    """

    width: float
    d_cam: float
    h_cam: float
    d_horizon: float
    camera_pitch: float = 0.0
    projector: ProjectorPose = field(default_factory=ProjectorPose)
    projector_resolution: tuple[int, int] = (1920, 1080)

    def __post_init__(self) -> None:
        if self.width <= 0.0 or self.d_cam <= 0.0 or self.d_horizon <= 0.0:
            raise ValueError("width, d_cam, and d_horizon must be positive")
        if self.d_horizon <= self.d_cam:
            raise ValueError("d_horizon must exceed d_cam")
        w, h = self.projector_resolution
        if w <= 0 or h <= 0:
            raise ValueError("projector_resolution must be positive")


@dataclass(frozen=True)
class VirtualCameraConfig:
    """Render-camera settings that align the virtual scene with the
    physical camera's image plane."""

    horizontal_fov: float
    vertical_fov: float
    width_px: int
    height_px: int
    camera_height: float
    camera_pitch: float


def horizontal_fov(width: float, d_cam: float) -> float:
    """Field of view under which a camera at ``d_cam`` sees exactly the
    projected width.

    Returns 2*atan(width / (2*d_cam)) in radians.
    """
    if width <= 0.0 or d_cam <= 0.0:
        raise ValueError("width and d_cam must be positive")
    return 2.0 * math.atan(width / (2.0 * d_cam))


def horizon_height(h_cam: float, d_cam: float, d_horizon: float) -> float:
    """Height on the screen at which the horizon line must be drawn.

    By similar triangles on the ray from the camera eye to a ground
    point at ``d_horizon``: h_cam * (d_horizon - d_cam) / d_horizon.
    Approaches ``h_cam`` as the horizon recedes.
    """
    if not d_horizon > d_cam > 0.0:
        raise ValueError("require d_horizon > d_cam > 0")
    return h_cam * (d_horizon - d_cam) / d_horizon


def _warn_if_large_pitch(geometry: ProjectionGeometry) -> None:
    if abs(geometry.camera_pitch) > SMALL_ANGLE_LIMIT:
        warnings.warn(
            "camera pitch exceeds 10 degrees; the flat-screen alignment "
            "math assumes small angles",
            stacklevel=3,
        )


def virtual_camera_config(
    geometry: ProjectionGeometry, physical: CameraModel
) -> VirtualCameraConfig:
    """Derive the render-camera configuration for a bench.

    The horizontal field of view comes from the screen width and camera
    distance, the vertical from the projector aspect ratio, and the
    render resolution matches the projector's native resolution so no
    rescaling blurs the stimulus. The virtual camera is placed at the
    physical camera's mounted height and pitch.
    """
    _warn_if_large_pitch(geometry)
    hfov = horizontal_fov(geometry.width, geometry.d_cam)
    w, h = geometry.projector_resolution
    vfov = 2.0 * math.atan(math.tan(hfov / 2.0) * h / w)
    return VirtualCameraConfig(
        horizontal_fov=hfov,
        vertical_fov=vfov,
        width_px=w,
        height_px=h,
        camera_height=physical.mount.z,
        camera_pitch=physical.pitch,
    )


def alignment_error(rw_height_px: float, cp_height_px: float) -> float:
    """Signed percent size mismatch of the same object measured in a
    real image and in the projected twin image.

    Positive means the projected object appears taller.
    """
    if rw_height_px <= 0.0:
        raise ValueError("rw_height_px must be positive")
    return (cp_height_px - rw_height_px) / rw_height_px * 100.0


def _projection_quad(
    geometry: ProjectionGeometry, pitch: float, screen_tilt: float
) -> np.ndarray:
    """Corners of the projected image on the (possibly tilted) screen.

    Returns a (4, 2) array of in-plane screen coordinates, corner order
    bottom-left, bottom-right, top-right, top-left. With zero pitch and
    tilt this is an axis-aligned rectangle of the throw size.
    """
    d = geometry.projector.distance
    tan_h = geometry.width / (2.0 * d)
    w, h = geometry.projector_resolution
    tan_v = tan_h * h / w

    p0 = np.array([d, 0.0, 0.0])
    normal = np.array([math.cos(screen_tilt), 0.0, math.sin(screen_tilt)])
    e_h = np.array([0.0, 1.0, 0.0])
    e_v = np.array([-math.sin(screen_tilt), 0.0, math.cos(screen_tilt)])

    cos_p, sin_p = math.cos(pitch), math.sin(pitch)
    corners = []
    for sy, sz in ((-1, -1), (1, -1), (1, 1), (-1, 1)):
        ray = np.array([1.0, sy * tan_h, sz * tan_v])
        ray = np.array(
            [cos_p * ray[0] - sin_p * ray[2], ray[1], sin_p * ray[0] + cos_p * ray[2]]
        )
        denom = float(ray @ normal)
        if denom <= 1e-9:
            raise ValueError("projector ray misses the screen plane")
        hit = ray * float(p0 @ normal) / denom
        corners.append([(hit - p0) @ e_h, (hit - p0) @ e_v])
    return np.asarray(corners)


def _homography_from_points(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Exact 3x3 homography mapping four source points to four
    destination points, via the homogeneous linear system."""
    rows = []
    for (x, y), (u, v) in zip(src, dst):
        rows.append([-x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u])
        rows.append([0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v])
    _, _, vt = np.linalg.svd(np.asarray(rows))
    return vt[-1].reshape(3, 3)


def apply_homography(h: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Apply a 3x3 homography to (n, 2) points."""
    pts = np.hstack([np.asarray(points, dtype=float), np.ones((len(points), 1))])
    mapped = pts @ h.T
    return mapped[:, :2] / mapped[:, 2:3]


def keystone_homography(
    projector_pitch_offset: float,
    screen_tilt: float,
    geometry: ProjectionGeometry,
) -> np.ndarray:
    """Warp that straightens the trapezoid caused by off-axis
    projection back into the nominal axis-aligned rectangle.

    The total projector pitch is the mounted pitch plus the offset.
    Normalized to unit determinant; the identity when nothing is tilted.
    """
    _warn_if_large_pitch(geometry)
    total_pitch = geometry.projector.pitch + projector_pitch_offset
    if abs(total_pitch) >= _MAX_KEYSTONE_ANGLE or abs(screen_tilt) >= _MAX_KEYSTONE_ANGLE:
        raise ValueError("keystone angles must stay below 45 degrees")
    quad = _projection_quad(geometry, total_pitch, screen_tilt)
    rect = _projection_quad(geometry, 0.0, 0.0)
    h = _homography_from_points(quad, rect)
    return h / np.cbrt(np.linalg.det(h))
