from __future__ import annotations

import math

import numpy as np
import pytest

from menagerie.camera import (
    Camera,
    CameraError,
    InvalidRangeError,
    directional_prompt,
    project_keypoints,
    sample_camera,
)
from menagerie.skeleton import Keypoint, Skeleton


def _point_skeleton(*positions) -> Skeleton:
    kps = tuple(Keypoint(f"p{i}", p) for i, p in enumerate(positions))
    return Skeleton(kps, ())


# --- sampling -----------------------------------------------------------------


def test_degenerate_ranges_pin_the_camera():
    cam = sample_camera(0, (1.5, 1.5), (90.0, 90.0), (90.0, 90.0))
    assert (cam.radius, cam.azimuth_deg, cam.polar_deg) == (1.5, 90.0, 90.0)


def test_sampling_is_deterministic_per_seed():
    assert sample_camera(7) == sample_camera(7)
    assert sample_camera(7) != sample_camera(8)


def test_sampling_uniformity_monte_carlo():
    samples = [sample_camera(seed) for seed in range(10_000)]
    radii = np.array([c.radius for c in samples])
    azimuths = np.array([c.azimuth_deg for c in samples])
    polars = np.array([c.polar_deg for c in samples])
    assert radii.min() >= 1.0 and radii.max() <= 2.0
    assert azimuths.min() >= 0.0 and azimuths.max() < 360.0
    assert polars.min() >= 60.0 and polars.max() <= 120.0
    assert abs(radii.mean() - 1.5) < 0.02
    assert abs(azimuths.mean() - 180.0) < 4.0
    assert abs(polars.mean() - 90.0) < 1.0


def test_polar_range_must_be_interior():
    with pytest.raises(InvalidRangeError):
        sample_camera(0, polar_range=(0.0, 0.0))
    with pytest.raises(InvalidRangeError):
        sample_camera(0, polar_range=(10.0, 180.0))


def test_bad_ranges_rejected():
    with pytest.raises(InvalidRangeError):
        sample_camera(0, radius_range=(2.0, 1.0))
    with pytest.raises(InvalidRangeError):
        sample_camera(0, radius_range=(0.0, 1.0))


def test_camera_invariants_enforced():
    with pytest.raises(CameraError):
        Camera(-1.0, 0.0, 90.0)
    with pytest.raises(CameraError):
        Camera(1.0, 0.0, 0.0)
    with pytest.raises(CameraError):
        Camera(1.0, 0.0, 90.0, fov_deg=180.0)


def test_camera_json_round_trip():
    cam = Camera(1.25, 33.0, 72.0, fov_deg=45.0, image_size=(320, 240))
    assert Camera.from_dict(cam.to_dict()) == cam


# --- projection ---------------------------------------------------------------


def test_look_at_point_projects_to_image_center():
    s = _point_skeleton((0.0, 0.0, 0.0))
    for azimuth, polar in ((0, 90), (47, 61), (200, 119)):
        cam = Camera(2.0, azimuth, polar, image_size=(100, 80))
        p = project_keypoints(s, cam).points[0]
        assert p.x == pytest.approx(50.0, abs=1e-9)
        assert p.y == pytest.approx(40.0, abs=1e-9)
        assert p.depth == pytest.approx(2.0, abs=1e-12)
        assert p.in_frustum


def test_up_displaced_point_projects_directly_above_center():
    s = _point_skeleton((0.0, 0.0, 0.2))
    for azimuth in (0.0, 90.0, 123.0, 311.0):
        cam = Camera(2.0, azimuth, 90.0, image_size=(200, 200))
        p = project_keypoints(s, cam).points[0]
        assert p.x == pytest.approx(100.0, abs=1e-9)
        assert p.y < 100.0


def test_opposite_azimuths_mirror_x_for_plane_points():
    # For points at the look-at height, flipping the camera to the far side
    # lands them on the opposite side of the image.
    rng = np.random.default_rng(5)
    for _ in range(25):
        p = (rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4), 0.0)
        azimuth = rng.uniform(0, 360)
        s = _point_skeleton(p)
        a = project_keypoints(s, Camera(2.0, azimuth, 90.0)).points[0]
        b = project_keypoints(s, Camera(2.0, azimuth + 180.0, 90.0)).points[0]
        assert (a.x - 256.0) * (b.x - 256.0) <= 1e-9
    # exact mirroring for a point in the vertical plane through the origin
    s = _point_skeleton((0.0, 0.3, 0.0))
    a = project_keypoints(s, Camera(2.0, 0.0, 90.0)).points[0]
    b = project_keypoints(s, Camera(2.0, 180.0, 90.0)).points[0]
    assert a.x - 256.0 == pytest.approx(-(b.x - 256.0), abs=1e-9)


def test_behind_camera_flagged():
    s = _point_skeleton((5.0, 0.0, 0.0))
    cam = Camera(2.0, 0.0, 90.0)  # camera at x=2 looking toward -x
    p = project_keypoints(s, cam).points[0]
    assert p.behind and not p.in_frustum


def test_joint_rotation_invariance(shepherd):
    rng = np.random.default_rng(11)
    for _ in range(10):
        delta = float(rng.uniform(0, 360))
        azimuth = float(rng.uniform(0, 360))
        polar = float(rng.uniform(60, 120))
        cam = Camera(1.8, azimuth, polar)
        cam_rot = Camera(1.8, azimuth + delta, polar)
        c, sn = math.cos(math.radians(delta)), math.sin(math.radians(delta))
        rotated = shepherd.with_positions(
            {
                k.name: (
                    c * k.position[0] - sn * k.position[1],
                    sn * k.position[0] + c * k.position[1],
                    k.position[2],
                )
                for k in shepherd.keypoints
            }
        )
        base = project_keypoints(shepherd, cam).points
        moved = project_keypoints(rotated, cam_rot).points
        for p, q in zip(base, moved):
            assert q.x == pytest.approx(p.x, abs=1e-6)
            assert q.y == pytest.approx(p.y, abs=1e-6)


def test_radius_scale_similarity(shepherd):
    rng = np.random.default_rng(12)
    for _ in range(10):
        s = float(rng.uniform(0.2, 5.0))
        cam = Camera(1.5, float(rng.uniform(0, 360)), float(rng.uniform(60, 120)))
        cam_scaled = Camera(1.5 * s, cam.azimuth_deg, cam.polar_deg)
        scaled = shepherd.with_positions(
            {k.name: tuple(s * c for c in k.position) for k in shepherd.keypoints}
        )
        base = project_keypoints(shepherd, cam).points
        moved = project_keypoints(scaled, cam_scaled).points
        for p, q in zip(base, moved):
            assert q.x == pytest.approx(p.x, abs=1e-6)
            assert q.y == pytest.approx(p.y, abs=1e-6)


# --- directional prompts --------------------------------------------------------


@pytest.mark.parametrize(
    "azimuth,polar,suffix",
    [
        (0, 90, "front view"),
        (44.9, 90, "front view"),
        (315, 90, "front view"),
        (90, 90, "side view"),
        (45, 90, "side view"),
        (270, 90, "side view"),
        (180, 90, "back view"),
        (135, 90, "back view"),
        (224.9, 90, "back view"),
        (180, 20, "overhead view"),
        (0, 29.9, "overhead view"),
    ],
)
def test_directional_prompt_bins(azimuth, polar, suffix):
    cam = Camera(1.5, azimuth, polar)
    assert directional_prompt("a tiger", cam) == f"a tiger, {suffix}"


def test_directional_prompt_wraps_negative_azimuth():
    assert directional_prompt("x", Camera(1.5, -30.0, 90.0)).endswith("front view")
    assert directional_prompt("x", Camera(1.5, 719.0, 90.0)).endswith("front view")
