from __future__ import annotations

import math

import numpy as np
import pytest

from menagerie.balloon import TriMesh, ellipsoid_mesh
from menagerie.camera import Camera, project_keypoints
from menagerie.render import (
    ControlStyle,
    DepthMap,
    palette_color,
    rasterize_pose_image,
    render_depth,
)
from menagerie.skeleton import Bone, Keypoint, Skeleton

from oracles import off_silhouette_mask, raycast_depth


# --- oracles -------------------------------------------------------------------


def brute_force_stroke_image(size, segments, style: ControlStyle) -> np.ndarray:
    """Distance-to-segment rasterizer over every pixel, no bounding boxes."""
    w, h = size
    scale = min(w, h) / 512.0
    stroke_half = max(style.stroke_width * scale / 2.0, 0.5)
    disc_radius = max(style.point_radius * scale, 0.75)
    img = np.zeros((h, w, 3), dtype=np.float64)
    ys, xs = np.mgrid[0:h, 0:w]
    px, py = xs + 0.5, ys + 0.5

    def paint(p0, p1, half, color):
        ax, ay = p0
        bx, by = p1
        abx, aby = bx - ax, by - ay
        denom = abx * abx + aby * aby
        if denom < 1e-12:
            t = np.zeros_like(px, dtype=np.float64)
        else:
            t = np.clip(((px - ax) * abx + (py - ay) * aby) / denom, 0.0, 1.0)
        dist = np.hypot(px - (ax + t * abx), py - (ay + t * aby))
        cov = np.clip(half + 0.5 - dist, 0.0, 1.0)
        np.maximum(img, cov[..., None] * np.asarray(color, dtype=np.float64), out=img)

    for p0, p1, color in segments["strokes"]:
        paint(p0, p1, stroke_half, color)
    for p, color in segments["discs"]:
        paint(p, p, disc_radius, color)
    return np.round(np.clip(img, 0.0, 255.0)).astype(np.uint8)


def random_mesh(rng: np.random.Generator, n_triangles: int) -> TriMesh:
    verts = rng.uniform(-0.5, 0.5, size=(3 * n_triangles, 3))
    tris = np.arange(3 * n_triangles, dtype=np.int32).reshape(-1, 3)
    return TriMesh(verts, tris, ("t",) * n_triangles)


# --- control images --------------------------------------------------------------


def test_zero_in_frustum_keypoints_gives_black_image():
    s = Skeleton((Keypoint("p", (5.0, 0.0, 0.0)),), ())
    cam = Camera(2.0, 0.0, 90.0, image_size=(64, 64))
    img = rasterize_pose_image(project_keypoints(s, cam), ())
    assert img.pixels.shape == (64, 64, 3)
    assert img.pixels.sum() == 0


def test_single_bone_matches_brute_force_oracle():
    s = Skeleton(
        (Keypoint("a", (-0.3, 0.1, 0.0)), Keypoint("b", (0.2, -0.2, 0.1))),
        (Bone("a", "b"),),
    )
    cam = Camera(1.6, 25.0, 80.0, image_size=(96, 96))
    proj = project_keypoints(s, cam)
    style = ControlStyle()
    img = rasterize_pose_image(proj, s.bones, style)

    pts = proj.by_name()
    segments = {
        "strokes": [((pts["a"].x, pts["a"].y), (pts["b"].x, pts["b"].y),
                     palette_color("b"))],
        "discs": [((pts["a"].x, pts["a"].y), palette_color("a")),
                  ((pts["b"].x, pts["b"].y), palette_color("b"))],
    }
    oracle = brute_force_stroke_image((96, 96), segments, style)
    assert np.array_equal(img.pixels, oracle)


def test_full_skeleton_matches_brute_force_oracle(shepherd):
    cam = Camera(1.8, 40.0, 75.0, image_size=(128, 128))
    proj = project_keypoints(shepherd, cam)
    style = ControlStyle()
    img = rasterize_pose_image(proj, shepherd.bones, style)
    pts = proj.by_name()
    segments = {
        "strokes": [
            ((pts[b.parent].x, pts[b.parent].y), (pts[b.child].x, pts[b.child].y),
             palette_color(b.child))
            for b in shepherd.bones
        ],
        "discs": [((p.x, p.y), palette_color(p.name)) for p in proj.points],
    }
    oracle = brute_force_stroke_image((128, 128), segments, style)
    assert np.array_equal(img.pixels, oracle)


def test_identical_input_gives_bit_identical_png(shepherd):
    cam = Camera(1.5, 10.0, 70.0, image_size=(128, 128))
    proj = project_keypoints(shepherd, cam)
    a = rasterize_pose_image(proj, shepherd.bones).to_png_bytes()
    b = rasterize_pose_image(proj, shepherd.bones).to_png_bytes()
    assert a == b


def test_partially_behind_bone_still_draws_front_part():
    s = Skeleton(
        (Keypoint("front", (0.0, 0.0, 0.0)), Keypoint("rear", (6.0, 0.0, 0.0))),
        (Bone("front", "rear"),),
    )
    cam = Camera(2.0, 0.0, 90.0, image_size=(64, 64))  # rear endpoint is behind
    img = rasterize_pose_image(project_keypoints(s, cam), s.bones)
    assert img.pixels.sum() > 0


def test_palette_is_stable_for_canonical_names():
    assert palette_color("nose") == palette_color("nose")
    assert palette_color("eye_left") != palette_color("tail_end")


# --- depth maps -------------------------------------------------------------------


def test_single_triangle_interior_positive_background_zero():
    # triangle in the y-z plane, camera on the +x axis looking straight at it
    verts = np.array([[0.0, -0.4, -0.4], [0.0, 0.4, -0.4], [0.0, 0.0, 0.5]])
    mesh = TriMesh(verts, np.array([[0, 1, 2]], dtype=np.int32), ("t",))
    d = render_depth(mesh, Camera(2.0, 0.0, 90.0, image_size=(64, 64)))
    assert d.values[32, 32] > 0
    assert d.values[0, 0] == 0
    assert d.values.min() >= 0 and d.values.max() <= 1


def test_nearer_triangle_wins_at_overlap():
    # two view-perpendicular triangles: x=0 is far, x=0.3 is near for a
    # camera at (2, 0, 0), so depth is constant per triangle
    verts = np.array(
        [
            [0.0, -0.8, -0.8], [0.0, 0.8, -0.8], [0.0, 0.0, 1.0],
            [0.3, -0.4, -0.4], [0.3, 0.4, -0.4], [0.3, 0.0, 0.5],
        ]
    )
    tris = np.array([[0, 1, 2], [3, 4, 5]], dtype=np.int32)
    mesh = TriMesh(verts, tris, ("far", "near"))
    cam = Camera(2.0, 0.0, 90.0, image_size=(64, 64))
    both = render_depth(mesh, cam)
    only_near = render_depth(TriMesh(verts, tris[1:], ("near",)), cam)
    overlap = only_near.values > 0
    assert overlap.any()
    # nearer surface wins wherever it covers: normalized depth is exactly 1
    assert np.allclose(both.values[overlap], 1.0)
    # far triangle is still visible outside the overlap
    assert ((both.values > 0) & ~overlap).any()


def test_empty_mesh_renders_all_zero():
    mesh = TriMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int32), ())
    d = render_depth(mesh, Camera(2.0, 0.0, 90.0, image_size=(32, 32)))
    assert d.values.shape == (32, 32)
    assert not d.values.any()


def test_sphere_depth_against_analytic_solution():
    verts, tris = ellipsoid_mesh((0, 0, 0), (1.0, 1.0, 1.0), n_segments=48, n_rings=36)
    mesh = TriMesh(verts, tris, ("s",) * len(tris))
    cam = Camera(2.0, 30.0, 90.0, image_size=(32, 32))
    d = render_depth(mesh, cam)

    w, h = cam.image_size
    right, up, forward = cam.basis()
    pos = cam.position()
    f_px = cam.focal_px()
    ys, xs = np.mgrid[0:h, 0:w]
    dirs = (
        ((xs + 0.5 - w / 2.0) / f_px)[..., None] * right
        + ((h / 2.0 - (ys + 0.5)) / f_px)[..., None] * up
        + forward
    )
    norm = np.linalg.norm(dirs, axis=-1)
    unit = dirs / norm[..., None]
    b = unit @ pos
    disc = b * b - (pos @ pos - 1.0)
    hit = disc > 0
    t_hit = np.where(hit, -b - np.sqrt(np.where(hit, disc, 0.0)), np.inf)
    z = np.where(hit, t_hit * norm / np.linalg.norm(dirs, axis=-1), np.inf)
    z = np.where(hit, t_hit, np.inf) * (unit @ forward)
    covered = np.isfinite(z)
    analytic = np.zeros((h, w))
    near, far = z[covered].min(), z[covered].max()
    analytic[covered] = (far - z[covered]) / (far - near)

    center = np.unravel_index(np.argmax(d.values), d.values.shape)
    assert d.values[center] == d.values.max() == pytest.approx(1.0)
    mask = off_silhouette_mask(d.values, analytic)
    assert mask.any()
    assert np.abs(d.values[mask] - analytic[mask]).max() < 2.0 / 32


def test_zbuffer_matches_raycast_oracle_on_random_meshes():
    rng = np.random.default_rng(99)
    for _ in range(5):
        mesh = random_mesh(rng, 20)
        cam = Camera(2.0, float(rng.uniform(0, 360)), float(rng.uniform(60, 120)),
                     image_size=(64, 64))
        mine = render_depth(mesh, cam).values
        oracle = raycast_depth(mesh, cam).values
        mask = off_silhouette_mask(mine, oracle)
        assert mask.sum() > 20
        assert np.abs(mine[mask] - oracle[mask]).max() < 1e-6


def test_depth_png_is_16_bit(shepherd):
    from menagerie.balloon import build_mesh
    from PIL import Image
    import io

    d = render_depth(build_mesh(shepherd), Camera(1.8, 30.0, 80.0, image_size=(64, 64)))
    img = Image.open(io.BytesIO(d.to_png_bytes()))
    assert img.mode in ("I", "I;16")
    assert img.size == (64, 64)
