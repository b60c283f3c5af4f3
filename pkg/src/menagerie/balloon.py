"""Balloon-animal meshes: primitive solids inflated around a skeleton.

Every bone maps to exactly one primitive: the spine bone becomes the torso
ellipsoid, bones ending at an eye become small eye ellipsoids, and every
other bone becomes a capped cylinder whose axis endpoints sit exactly on
the bone's keypoints. Each nose keypoint additionally gets a cone with its
apex at the keypoint. Primitives may interpenetrate; there is no CSG. Each
primitive sub-mesh is a closed, consistently wound 2-manifold, which is
all depth rendering needs.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .skeleton import Skeleton, Vec3, validate_skeleton

DEGENERATE_LENGTH = 1e-9
_NOSE_RE = re.compile(r"^nose(_\d+)?$")
_EYE_PREFIX = "eye"
_SPINE_NAMES = ("neck_end", "back_end")


class MeshError(Exception):
    pass


class InvalidSkeletonError(MeshError):
    pass


@dataclass(frozen=True)
class PrimitiveParams:
    """Tessellation and proportion defaults, scale-free across animals."""

    n_segments: int = 16
    n_rings: int = 12
    cylinder_radius_ratio: float = 0.12   # of bone length
    cylinder_radius_min: float = 0.01     # scene units
    cylinder_radius_max: float = 0.08
    torso_width_scale: float = 1.0        # of half the mean thigh spacing
    eye_radius_ratio: float = 0.5         # of the eye bone length
    eye_radius_min: float = 0.004
    eye_radius_max: float = 0.05
    nose_length_ratio: float = 0.45       # of nose-to-anchor distance
    nose_radius_ratio: float = 0.5        # of cone height

    def to_dict(self) -> dict:
        return {
            "n_segments": self.n_segments,
            "n_rings": self.n_rings,
            "cylinder_radius_ratio": self.cylinder_radius_ratio,
            "cylinder_radius_min": self.cylinder_radius_min,
            "cylinder_radius_max": self.cylinder_radius_max,
            "torso_width_scale": self.torso_width_scale,
            "eye_radius_ratio": self.eye_radius_ratio,
            "eye_radius_min": self.eye_radius_min,
            "eye_radius_max": self.eye_radius_max,
            "nose_length_ratio": self.nose_length_ratio,
            "nose_radius_ratio": self.nose_radius_ratio,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "PrimitiveParams":
        known = {f: doc[f] for f in cls.__dataclass_fields__ if f in doc}
        return cls(**known)


@dataclass(frozen=True)
class PrimitiveInfo:
    label: str
    kind: str                       # torso | eye | cylinder | cone | group
    bone: tuple[str, str] | None
    keypoint: str | None
    vertex_start: int
    vertex_count: int
    tri_start: int
    tri_count: int
    axis: tuple[Vec3, Vec3] | None = None


@dataclass(frozen=True)
class TriMesh:
    vertices: np.ndarray            # (N, 3) float64
    triangles: np.ndarray           # (M, 3) int32
    part_labels: tuple[str, ...]    # per triangle
    primitives: tuple[PrimitiveInfo, ...] = ()
    skipped: tuple[str, ...] = ()   # degenerate-bone reports

    def __post_init__(self):
        object.__setattr__(self, "vertices", np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3))
        object.__setattr__(self, "triangles", np.asarray(self.triangles, dtype=np.int32).reshape(-1, 3))

    def is_empty(self) -> bool:
        return len(self.triangles) == 0

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        if len(self.vertices) == 0:
            z = np.zeros(3)
            return z, z
        return self.vertices.min(axis=0), self.vertices.max(axis=0)


def validate_mesh(m: TriMesh) -> list[str]:
    """Structural problems as messages; empty list means the mesh is sound."""
    problems: list[str] = []
    n = len(m.vertices)
    if len(m.part_labels) != len(m.triangles):
        problems.append("part_labels length does not match triangle count")
    if len(m.triangles) and (m.triangles.min() < 0 or m.triangles.max() >= n):
        problems.append("triangle index out of range")
        return problems
    referenced = np.zeros(n, dtype=bool)
    for tri in m.triangles:
        referenced[tri] = True
        a, b, c = m.vertices[tri]
        area = 0.5 * np.linalg.norm(np.cross(b - a, c - a))
        if area <= 1e-12:
            problems.append(f"degenerate triangle {tri.tolist()}")
    if n and not referenced.all():
        problems.append(f"{int((~referenced).sum())} unreferenced vertices")
    return problems


def is_watertight_manifold(vertices: np.ndarray, triangles: np.ndarray) -> bool:
    """Every directed edge appears exactly once: closed and consistently wound."""
    seen: set[tuple[int, int]] = set()
    for a, b, c in triangles:
        for e in ((a, b), (b, c), (c, a)):
            if e in seen:
                return False
            seen.add(e)
    return all((b, a) in seen for a, b in seen)


# --- primitive tessellation ------------------------------------------------


def _frame(axis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic orthonormal pair perpendicular to a unit axis."""
    helper = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    v = np.cross(axis, helper)
    v /= np.linalg.norm(v)
    return v, np.cross(axis, v)


def cylinder_mesh(p0: Vec3, p1: Vec3, radius: float, n_segments: int = 16):
    """Capped cylinder with ring planes exactly through p0 and p1."""
    a = np.asarray(p0, dtype=np.float64)
    b = np.asarray(p1, dtype=np.float64)
    axis = b - a
    length = np.linalg.norm(axis)
    axis = axis / length
    v, w = _frame(axis)
    theta = 2.0 * np.pi * np.arange(n_segments) / n_segments
    ring = np.cos(theta)[:, None] * v + np.sin(theta)[:, None] * w
    verts = np.vstack([a + radius * ring, b + radius * ring, a[None, :], b[None, :]])
    c0, c1 = 2 * n_segments, 2 * n_segments + 1
    tris = []
    for i in range(n_segments):
        j = (i + 1) % n_segments
        tris.append((i, j, n_segments + j))
        tris.append((i, n_segments + j, n_segments + i))
        tris.append((c0, j, i))
        tris.append((c1, n_segments + i, n_segments + j))
    return verts, np.array(tris, dtype=np.int32)


def ellipsoid_mesh(center: Vec3, semi_axes: Vec3, axis: Vec3 | None = None,
                   n_segments: int = 16, n_rings: int = 12):
    """UV-tessellated ellipsoid; poles lie along ``axis`` (default +z).

    ``semi_axes`` is (radial_v, radial_w, polar); with ``axis`` given, the
    poles land at center +/- polar * axis.
    """
    if axis is None:
        u = np.array([0.0, 0.0, 1.0])
    else:
        u = np.asarray(axis, dtype=np.float64)
        u = u / np.linalg.norm(u)
    v, w = _frame(u)
    rv, rw, rp = semi_axes
    c = np.asarray(center, dtype=np.float64)

    verts = [c + rp * u]                       # north pole
    phi = np.pi * np.arange(1, n_rings) / n_rings
    theta = 2.0 * np.pi * np.arange(n_segments) / n_segments
    for p in phi:
        ring = (
            rv * np.sin(p) * np.cos(theta)[:, None] * v
            + rw * np.sin(p) * np.sin(theta)[:, None] * w
            + rp * np.cos(p) * u
        )
        verts.extend(c + ring)
    verts.append(c - rp * u)                   # south pole
    verts = np.asarray(verts)

    def rid(k: int, i: int) -> int:
        return 1 + (k - 1) * n_segments + (i % n_segments)

    south = len(verts) - 1
    tris = []
    for i in range(n_segments):
        tris.append((0, rid(1, i), rid(1, i + 1)))
    for k in range(1, n_rings - 1):
        for i in range(n_segments):
            tris.append((rid(k, i), rid(k + 1, i), rid(k + 1, i + 1)))
            tris.append((rid(k, i), rid(k + 1, i + 1), rid(k, i + 1)))
    last = n_rings - 1
    for i in range(n_segments):
        tris.append((south, rid(last, i + 1), rid(last, i)))
    return verts, np.array(tris, dtype=np.int32)


def cone_mesh(apex: Vec3, base_center: Vec3, radius: float, n_segments: int = 16):
    a = np.asarray(apex, dtype=np.float64)
    b = np.asarray(base_center, dtype=np.float64)
    axis = a - b
    height = np.linalg.norm(axis)
    axis = axis / height
    v, w = _frame(axis)
    theta = 2.0 * np.pi * np.arange(n_segments) / n_segments
    ring = b + radius * (np.cos(theta)[:, None] * v + np.sin(theta)[:, None] * w)
    verts = np.vstack([ring, a[None, :], b[None, :]])
    apex_i, base_i = n_segments, n_segments + 1
    tris = []
    for i in range(n_segments):
        j = (i + 1) % n_segments
        tris.append((apex_i, i, j))
        tris.append((base_i, j, i))
    return verts, np.array(tris, dtype=np.int32)


# --- skeleton-driven construction -------------------------------------------


def _is_spine_bone(parent: str, child: str) -> bool:
    return {parent, child} == set(_SPINE_NAMES)


def _eye_endpoint(parent: str, child: str) -> str | None:
    if child.startswith(_EYE_PREFIX):
        return child
    if parent.startswith(_EYE_PREFIX):
        return parent
    return None


def _mean_thigh_spacing(pos: dict[str, Vec3]) -> float | None:
    spacings = []
    for end in ("front", "back"):
        l, r = f"thigh_{end}_left", f"thigh_{end}_right"
        if l in pos and r in pos:
            spacings.append(math.dist(pos[l], pos[r]))
    if not spacings:
        return None
    return sum(spacings) / len(spacings)


class _Builder:
    def __init__(self):
        self.vertices: list[np.ndarray] = []
        self.triangles: list[np.ndarray] = []
        self.labels: list[str] = []
        self.primitives: list[PrimitiveInfo] = []
        self.n_verts = 0
        self.n_tris = 0

    def add(self, label: str, kind: str, verts, tris, *, bone=None, keypoint=None, axis=None):
        self.vertices.append(verts)
        self.triangles.append(tris + self.n_verts)
        self.labels.extend([label] * len(tris))
        self.primitives.append(
            PrimitiveInfo(
                label=label, kind=kind, bone=bone, keypoint=keypoint,
                vertex_start=self.n_verts, vertex_count=len(verts),
                tri_start=self.n_tris, tri_count=len(tris), axis=axis,
            )
        )
        self.n_verts += len(verts)
        self.n_tris += len(tris)

    def finish(self, skipped: Sequence[str]) -> TriMesh:
        if not self.vertices:
            return TriMesh(
                np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int32), (), (), tuple(skipped)
            )
        return TriMesh(
            np.vstack(self.vertices),
            np.vstack(self.triangles),
            tuple(self.labels),
            tuple(self.primitives),
            tuple(skipped),
        )


def build_mesh(s: Skeleton, params: PrimitiveParams | None = None) -> TriMesh:
    """Inflate the skeleton into a union of primitive solids."""
    params = params or PrimitiveParams()
    report = validate_skeleton(s)
    if not report.ok:
        raise InvalidSkeletonError("; ".join(report.violations))

    pos = s.positions()
    adj = s.adjacency()
    builder = _Builder()
    skipped: list[str] = []

    for bone in s.bones:
        p0, p1 = pos[bone.parent], pos[bone.child]
        length = math.dist(p0, p1)
        if length < DEGENERATE_LENGTH:
            skipped.append(f"degenerate bone {bone.parent}-{bone.child} (length {length:.2e})")
            continue
        if _is_spine_bone(bone.parent, bone.child):
            spacing = _mean_thigh_spacing(pos)
            radial = 0.5 * spacing * params.torso_width_scale if spacing else 0.35 * length
            radial = max(radial, params.cylinder_radius_min)
            center = tuple((a + b) / 2 for a, b in zip(p0, p1))
            direction = tuple((b - a) / length for a, b in zip(p0, p1))
            verts, tris = ellipsoid_mesh(
                center, (radial, radial, length / 2), axis=direction,
                n_segments=params.n_segments, n_rings=params.n_rings,
            )
            builder.add("torso", "torso", verts, tris,
                        bone=(bone.parent, bone.child), axis=(p0, p1))
            continue
        eye = _eye_endpoint(bone.parent, bone.child)
        if eye is not None:
            r = min(max(params.eye_radius_ratio * length, params.eye_radius_min),
                    params.eye_radius_max)
            verts, tris = ellipsoid_mesh(
                pos[eye], (r, r, r),
                n_segments=params.n_segments, n_rings=params.n_rings,
            )
            builder.add(eye, "eye", verts, tris,
                        bone=(bone.parent, bone.child), keypoint=eye)
            continue
        r = min(max(params.cylinder_radius_ratio * length, params.cylinder_radius_min),
                params.cylinder_radius_max)
        verts, tris = cylinder_mesh(p0, p1, r, n_segments=params.n_segments)
        builder.add(f"{bone.parent}__{bone.child}", "cylinder", verts, tris,
                    bone=(bone.parent, bone.child), axis=(p0, p1))

    for kp in s.keypoints:
        if not _NOSE_RE.match(kp.name):
            continue
        neighbors = [n for n in adj[kp.name] if not n.startswith(_EYE_PREFIX)]
        if not neighbors:
            neighbors = sorted(adj[kp.name])
        if not neighbors:
            skipped.append(f"nose {kp.name} has no bone to orient its cone")
            continue
        anchor = min(neighbors, key=lambda n: (math.dist(pos[n], kp.position), n))
        span = math.dist(kp.position, pos[anchor])
        if span < DEGENERATE_LENGTH:
            skipped.append(f"degenerate cone at {kp.name} (anchor {anchor} coincides)")
            continue
        height = params.nose_length_ratio * span
        direction = tuple((a - n) / span for n, a in zip(kp.position, pos[anchor]))
        base = tuple(n + height * d for n, d in zip(kp.position, direction))
        verts, tris = cone_mesh(kp.position, base, params.nose_radius_ratio * height,
                                n_segments=params.n_segments)
        builder.add(f"cone_{kp.name}", "cone", verts, tris,
                    keypoint=kp.name, axis=(kp.position, base))

    return builder.finish(skipped)


# --- OBJ import/export -------------------------------------------------------


def export_obj(m: TriMesh) -> str:
    lines = [f"# balloon mesh: {len(m.vertices)} vertices, {len(m.triangles)} triangles"]
    for x, y, z in m.vertices:
        lines.append(f"v {float(x)!r} {float(y)!r} {float(z)!r}")
    if m.primitives:
        for prim in m.primitives:
            lines.append(f"g {prim.label}")
            for a, b, c in m.triangles[prim.tri_start : prim.tri_start + prim.tri_count]:
                lines.append(f"f {a + 1} {b + 1} {c + 1}")
    else:
        current = None
        for tri, label in zip(m.triangles, m.part_labels or ("default",) * len(m.triangles)):
            if label != current:
                lines.append(f"g {label}")
                current = label
            lines.append(f"f {tri[0] + 1} {tri[1] + 1} {tri[2] + 1}")
    return "\n".join(lines) + "\n"


def parse_obj(text: str) -> TriMesh:
    """Minimal OBJ reader: v and f (triangles or fans), g for part labels."""
    vertices: list[tuple[float, float, float]] = []
    triangles: list[tuple[int, int, int]] = []
    labels: list[str] = []
    group = "default"
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "v" and len(parts) >= 4:
            vertices.append((float(parts[1]), float(parts[2]), float(parts[3])))
        elif parts[0] == "g" and len(parts) > 1:
            group = parts[1]
        elif parts[0] == "f":
            idx = []
            for token in parts[1:]:
                i = int(token.split("/")[0])
                idx.append(i - 1 if i > 0 else len(vertices) + i)
            if len(idx) < 3:
                raise MeshError(f"line {ln}: face with fewer than 3 vertices")
            for k in range(1, len(idx) - 1):
                triangles.append((idx[0], idx[k], idx[k + 1]))
                labels.append(group)
    if any(i < 0 or i >= len(vertices) for tri in triangles for i in tri):
        raise MeshError("face index out of range")
    return TriMesh(
        np.array(vertices, dtype=np.float64).reshape(-1, 3),
        np.array(triangles, dtype=np.int32).reshape(-1, 3),
        tuple(labels),
    )
