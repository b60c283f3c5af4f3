"""Software rendering of what the guidance model sees.

``rasterize_pose_image`` draws the projected skeleton as anti-aliased
colored strokes on black, ``render_depth`` z-buffers a triangle mesh into a
normalized depth map (nearer is larger, background 0). Both are pure
functions of their inputs, so identical calls produce bit-identical PNGs.
"""

from __future__ import annotations

import io
import math
import zlib
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from .balloon import TriMesh
from .camera import Camera, NEAR_PLANE, PoseProjection
from .skeleton import Bone, CANONICAL_KEYPOINTS

# One color per canonical keypoint, spectrum-ordered head to tail.
DEFAULT_PALETTE: tuple[tuple[int, int, int], ...] = (
    (255, 0, 0), (255, 85, 0), (255, 170, 0), (255, 255, 0),
    (170, 255, 0), (85, 255, 0), (0, 255, 0), (0, 255, 85),
    (0, 255, 170), (0, 255, 255), (0, 170, 255), (0, 85, 255),
    (0, 0, 255), (85, 0, 255), (170, 0, 255), (255, 0, 255),
    (255, 0, 170), (255, 0, 85),
)

_BASE_RESOLUTION = 512.0


@dataclass(frozen=True)
class ControlStyle:
    stroke_width: float = 4.0      # px at 512x512, scaled with resolution
    point_radius: float = 5.0
    palette: tuple[tuple[int, int, int], ...] = DEFAULT_PALETTE


def palette_color(name: str, palette=DEFAULT_PALETTE) -> tuple[int, int, int]:
    """Canonical keypoints have fixed palette slots; other names hash stably."""
    if name in CANONICAL_KEYPOINTS:
        return palette[CANONICAL_KEYPOINTS.index(name) % len(palette)]
    digest = zlib.crc32(name.encode("utf-8"))
    return palette[digest % len(palette)]


@dataclass(frozen=True)
class ControlImage:
    pixels: np.ndarray  # (H, W, 3) uint8

    def size(self) -> tuple[int, int]:
        return self.pixels.shape[1], self.pixels.shape[0]

    def to_png_bytes(self) -> bytes:
        buf = io.BytesIO()
        Image.fromarray(self.pixels, mode="RGB").save(buf, format="PNG")
        return buf.getvalue()


@dataclass(frozen=True)
class DepthMap:
    values: np.ndarray  # (H, W) float64 in [0, 1], background 0

    def size(self) -> tuple[int, int]:
        return self.values.shape[1], self.values.shape[0]

    def to_png_bytes(self) -> bytes:
        scaled = np.round(np.clip(self.values, 0.0, 1.0) * 65535.0).astype(np.uint16)
        buf = io.BytesIO()
        Image.fromarray(scaled).save(buf, format="PNG")  # I;16 inferred from dtype
        return buf.getvalue()


def _clip_to_near(a, b, proj: PoseProjection):
    """Pixel endpoints of segment a-b with the behind endpoint clipped away."""
    if a.behind and b.behind:
        return None
    if not a.behind and not b.behind:
        return (a.x, a.y), (b.x, b.y)
    front, back = (a, b) if b.behind else (b, a)
    pf = np.array([front.cam_x, front.cam_y, front.depth])
    pb = np.array([back.cam_x, back.cam_y, back.depth])
    t = (pf[2] - 10.0 * NEAR_PLANE) / (pf[2] - pb[2])
    cut = pf + t * (pb - pf)
    w, h = proj.image_size
    u = w / 2.0 + proj.focal_px * cut[0] / cut[2]
    v = h / 2.0 - proj.focal_px * cut[1] / cut[2]
    return (front.x, front.y), (u, v)


def _paint_capsule(img: np.ndarray, p0, p1, half_width: float, color) -> None:
    """Coverage = clamped distance to the segment; blended with per-channel max."""
    h, w = img.shape[:2]
    x_lo = max(int(math.floor(min(p0[0], p1[0]) - half_width - 1)), 0)
    x_hi = min(int(math.ceil(max(p0[0], p1[0]) + half_width + 1)), w - 1)
    y_lo = max(int(math.floor(min(p0[1], p1[1]) - half_width - 1)), 0)
    y_hi = min(int(math.ceil(max(p0[1], p1[1]) + half_width + 1)), h - 1)
    if x_lo > x_hi or y_lo > y_hi:
        return
    ys, xs = np.mgrid[y_lo : y_hi + 1, x_lo : x_hi + 1]
    px = xs + 0.5
    py = ys + 0.5
    ax, ay = p0
    bx, by = p1
    abx, aby = bx - ax, by - ay
    denom = abx * abx + aby * aby
    if denom < 1e-12:
        t = np.zeros_like(px)
    else:
        t = np.clip(((px - ax) * abx + (py - ay) * aby) / denom, 0.0, 1.0)
    dist = np.hypot(px - (ax + t * abx), py - (ay + t * aby))
    coverage = np.clip(half_width + 0.5 - dist, 0.0, 1.0)
    patch = img[y_lo : y_hi + 1, x_lo : x_hi + 1]
    np.maximum(patch, coverage[..., None] * np.asarray(color, dtype=np.float64), out=patch)


def rasterize_pose_image(
    proj: PoseProjection, bones: tuple[Bone, ...], style: ControlStyle | None = None
) -> ControlImage:
    """Draw bones as colored anti-aliased strokes and keypoints as discs."""
    style = style or ControlStyle()
    w, h = proj.image_size
    scale = min(w, h) / _BASE_RESOLUTION
    stroke_half = max(style.stroke_width * scale / 2.0, 0.5)
    disc_radius = max(style.point_radius * scale, 0.75)
    img = np.zeros((h, w, 3), dtype=np.float64)
    by_name = proj.by_name()

    for bone in bones:
        a, b = by_name.get(bone.parent), by_name.get(bone.child)
        if a is None or b is None:
            continue
        clipped = _clip_to_near(a, b, proj)
        if clipped is None:
            continue
        color = palette_color(bone.child, style.palette)
        _paint_capsule(img, clipped[0], clipped[1], stroke_half, color)

    for p in proj.points:
        if p.behind:
            continue
        color = palette_color(p.name, style.palette)
        _paint_capsule(img, (p.x, p.y), (p.x, p.y), disc_radius, color)

    return ControlImage(np.round(np.clip(img, 0.0, 255.0)).astype(np.uint8))


def render_depth(mesh: TriMesh, camera: Camera) -> DepthMap:
    """Z-buffer rasterization with perspective-correct depth interpolation.

    Depth is normalized as (far - z) / (far - near) over the mesh's own
    covered depth range, so the nearest pixel is 1 and background stays 0.
    Triangles touching the near plane are dropped.
    """
    w, h = camera.image_size
    if mesh.is_empty():
        return DepthMap(np.zeros((h, w), dtype=np.float64))

    right, up, forward = camera.basis()
    pos = camera.position()
    d = mesh.vertices - pos
    z = d @ forward
    f_px = camera.focal_px()
    with np.errstate(divide="ignore", invalid="ignore"):
        u = w / 2.0 + f_px * (d @ right) / z
        v = h / 2.0 - f_px * (d @ up) / z

    zbuf = np.full((h, w), np.inf)
    for tri in mesh.triangles:
        tz = z[tri]
        if (tz <= NEAR_PLANE).any():
            continue
        tu, tv = u[tri], v[tri]
        x_lo = max(int(math.floor(tu.min() - 0.5)), 0)
        x_hi = min(int(math.ceil(tu.max() + 0.5)), w - 1)
        y_lo = max(int(math.floor(tv.min() - 0.5)), 0)
        y_hi = min(int(math.ceil(tv.max() + 0.5)), h - 1)
        if x_lo > x_hi or y_lo > y_hi:
            continue
        denom = (tu[1] - tu[0]) * (tv[2] - tv[0]) - (tv[1] - tv[0]) * (tu[2] - tu[0])
        if abs(denom) < 1e-12:
            continue
        ys, xs = np.mgrid[y_lo : y_hi + 1, x_lo : x_hi + 1]
        px = xs + 0.5
        py = ys + 0.5
        l1 = ((px - tu[0]) * (tv[2] - tv[0]) - (py - tv[0]) * (tu[2] - tu[0])) / denom
        l2 = ((py - tv[0]) * (tu[1] - tu[0]) - (px - tu[0]) * (tv[1] - tv[0])) / denom
        l0 = 1.0 - l1 - l2
        inside = (l0 >= 0.0) & (l1 >= 0.0) & (l2 >= 0.0)
        if not inside.any():
            continue
        inv_z = l0 / tz[0] + l1 / tz[1] + l2 / tz[2]
        depth = np.where(inside, 1.0 / inv_z, np.inf)
        patch = zbuf[y_lo : y_hi + 1, x_lo : x_hi + 1]
        np.minimum(patch, depth, out=patch)

    covered = np.isfinite(zbuf)
    out = np.zeros((h, w), dtype=np.float64)
    if covered.any():
        near, far = zbuf[covered].min(), zbuf[covered].max()
        if far - near < 1e-12:
            out[covered] = 1.0
        else:
            out[covered] = (far - zbuf[covered]) / (far - near)
    return DepthMap(out)
