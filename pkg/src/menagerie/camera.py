"""Spherical-orbit pinhole cameras: sampling, projection, direction prompts.

Cameras orbit the look-at point in spherical coordinates (radius,
azimuth, polar), with the world +z axis as up and the polar angle measured
from +z. Azimuth 0 looks down the -x axis at the animal's face, so it is
the front view. Pixel y grows downward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .skeleton import Skeleton, Vec3

DEFAULT_RADIUS_RANGE = (1.0, 2.0)
DEFAULT_AZIMUTH_RANGE = (0.0, 360.0)
DEFAULT_POLAR_RANGE = (60.0, 120.0)
DEFAULT_FOV_DEG = 50.0
DEFAULT_IMAGE_SIZE = (512, 512)
NEAR_PLANE = 1e-6


class CameraError(Exception):
    pass


class InvalidRangeError(CameraError):
    pass


@dataclass(frozen=True)
class Camera:
    radius: float
    azimuth_deg: float
    polar_deg: float
    fov_deg: float = DEFAULT_FOV_DEG
    look_at: Vec3 = (0.0, 0.0, 0.0)
    image_size: tuple[int, int] = DEFAULT_IMAGE_SIZE

    def __post_init__(self):
        if not self.radius > 0:
            raise CameraError(f"radius must be positive, got {self.radius}")
        if not 0.0 < self.polar_deg < 180.0:
            raise CameraError(f"polar angle must lie in (0, 180), got {self.polar_deg}")
        if not 0.0 < self.fov_deg < 180.0:
            raise CameraError(f"fov must lie in (0, 180), got {self.fov_deg}")
        w, h = self.image_size
        if w < 1 or h < 1:
            raise CameraError(f"image size must be positive, got {self.image_size}")

    def position(self) -> np.ndarray:
        az = math.radians(self.azimuth_deg)
        pol = math.radians(self.polar_deg)
        offset = np.array(
            [
                math.sin(pol) * math.cos(az),
                math.sin(pol) * math.sin(az),
                math.cos(pol),
            ]
        )
        return np.asarray(self.look_at, dtype=np.float64) + self.radius * offset

    def basis(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(right, up, forward) orthonormal camera axes."""
        pos = self.position()
        forward = np.asarray(self.look_at, dtype=np.float64) - pos
        forward /= np.linalg.norm(forward)
        world_up = np.array([0.0, 0.0, 1.0])
        right = np.cross(forward, world_up)
        right /= np.linalg.norm(right)
        up = np.cross(right, forward)
        return right, up, forward

    def focal_px(self) -> float:
        """Vertical-FOV focal length in pixels."""
        return (self.image_size[1] / 2.0) / math.tan(math.radians(self.fov_deg) / 2.0)

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "azimuth_deg": self.azimuth_deg,
            "polar_deg": self.polar_deg,
            "fov_deg": self.fov_deg,
            "look_at": list(self.look_at),
            "image": list(self.image_size),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Camera":
        image = doc.get("image", list(DEFAULT_IMAGE_SIZE))
        look_at = doc.get("look_at", [0.0, 0.0, 0.0])
        return cls(
            radius=float(doc["radius"]),
            azimuth_deg=float(doc["azimuth_deg"]),
            polar_deg=float(doc["polar_deg"]),
            fov_deg=float(doc.get("fov_deg", DEFAULT_FOV_DEG)),
            look_at=(float(look_at[0]), float(look_at[1]), float(look_at[2])),
            image_size=(int(image[0]), int(image[1])),
        )


def sample_camera(
    rng_seed: int,
    radius_range: tuple[float, float] = DEFAULT_RADIUS_RANGE,
    azimuth_range: tuple[float, float] = DEFAULT_AZIMUTH_RANGE,
    polar_range: tuple[float, float] = DEFAULT_POLAR_RANGE,
    fov_deg: float = DEFAULT_FOV_DEG,
    image_size: tuple[int, int] = DEFAULT_IMAGE_SIZE,
) -> Camera:
    """Uniform independent samples per spherical coordinate, fixed by seed.

    Draw order is radius, azimuth, polar. Degenerate (lo == hi) ranges pin
    a coordinate; the polar range must stay strictly inside (0, 180).
    """
    for name, (lo, hi) in (
        ("radius", radius_range),
        ("azimuth", azimuth_range),
        ("polar", polar_range),
    ):
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
            raise InvalidRangeError(f"{name} range invalid: [{lo}, {hi}]")
    if radius_range[0] <= 0:
        raise InvalidRangeError(f"radius must be positive: {radius_range}")
    if polar_range[0] <= 0.0 or polar_range[1] >= 180.0:
        raise InvalidRangeError(f"polar range must be interior to (0, 180): {polar_range}")

    rng = np.random.default_rng(rng_seed)
    radius = float(rng.uniform(*radius_range)) if radius_range[0] < radius_range[1] else radius_range[0]
    azimuth = float(rng.uniform(*azimuth_range)) if azimuth_range[0] < azimuth_range[1] else azimuth_range[0]
    polar = float(rng.uniform(*polar_range)) if polar_range[0] < polar_range[1] else polar_range[0]
    return Camera(radius, azimuth, polar, fov_deg=fov_deg, image_size=image_size)


@dataclass(frozen=True)
class ProjectedPoint:
    name: str
    x: float            # pixel column, y down; NaN when behind the camera
    y: float
    depth: float        # camera-space distance along the view direction
    in_frustum: bool
    behind: bool
    cam_x: float = 0.0  # lateral camera-space coords; valid even when behind
    cam_y: float = 0.0

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "xy": [self.x, self.y],
            "depth": self.depth,
            "in_frustum": self.in_frustum,
            "behind": self.behind,
        }


@dataclass(frozen=True)
class PoseProjection:
    points: tuple[ProjectedPoint, ...]
    image_size: tuple[int, int]
    focal_px: float

    def by_name(self) -> dict[str, ProjectedPoint]:
        return {p.name: p for p in self.points}

    def to_dict(self) -> dict:
        return {
            "image": list(self.image_size),
            "focal_px": self.focal_px,
            "points": [p.to_dict() for p in self.points],
        }


def project_points(
    names: list[str], positions: np.ndarray, camera: Camera
) -> PoseProjection:
    right, up, forward = camera.basis()
    pos = camera.position()
    w, h = camera.image_size
    f_px = camera.focal_px()
    d = np.asarray(positions, dtype=np.float64).reshape(-1, 3) - pos
    x_cam = d @ right
    y_cam = d @ up
    z_cam = d @ forward

    points = []
    for i, name in enumerate(names):
        z = float(z_cam[i])
        behind = z <= NEAR_PLANE
        if behind:
            u = v = float("nan")
            in_frustum = False
        else:
            u = w / 2.0 + f_px * float(x_cam[i]) / z
            v = h / 2.0 - f_px * float(y_cam[i]) / z
            in_frustum = 0.0 <= u < w and 0.0 <= v < h
        points.append(
            ProjectedPoint(name, u, v, z, in_frustum, behind, float(x_cam[i]), float(y_cam[i]))
        )
    return PoseProjection(tuple(points), (w, h), f_px)


def project_keypoints(s: Skeleton, camera: Camera) -> PoseProjection:
    """Pinhole projection of every keypoint; behind-camera points are flagged."""
    names = [k.name for k in s.keypoints]
    positions = np.array([k.position for k in s.keypoints], dtype=np.float64)
    return project_points(names, positions.reshape(-1, 3), camera)


def directional_prompt(user_text: str, camera: Camera) -> str:
    """Append the view suffix the sampled camera corresponds to."""
    if camera.polar_deg < 30.0:
        return f"{user_text}, overhead view"
    az = camera.azimuth_deg % 360.0
    if az < 45.0 or az >= 315.0:
        view = "front view"
    elif 45.0 <= az < 135.0 or 225.0 <= az < 315.0:
        view = "side view"
    else:
        view = "back view"
    return f"{user_text}, {view}"
