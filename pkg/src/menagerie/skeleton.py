"""Skeleton data model: named 3D keypoints joined by bones.

Skeletons live in normalized object units (bounding sphere of radius <= 1
centered at the origin, +x is the animal's facing direction, +z is up).
All operations are pure; ``Skeleton`` is an immutable value and safe to
share across threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping, Sequence

Vec3 = tuple[float, float, float]


class SkeletonError(Exception):
    """Base class for skeleton-related failures."""


class ParseError(SkeletonError):
    """Malformed JSON text; carries the decoder's line/column."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        super().__init__(message)
        self.line = line
        self.col = col


class SchemaError(SkeletonError):
    """Well-formed JSON that does not match the skeleton schema."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path


class UnknownAnchor(SkeletonError):
    pass


class IncompatibleAnchor(SkeletonError):
    pass


# The 18 keypoints of the canonical tetrapod template.
CANONICAL_KEYPOINTS: tuple[str, ...] = (
    "eye_left",
    "eye_right",
    "nose",
    "neck_end",
    "thigh_front_left",
    "thigh_front_right",
    "thigh_back_left",
    "thigh_back_right",
    "knee_front_left",
    "knee_front_right",
    "knee_back_left",
    "knee_back_right",
    "paw_front_left",
    "paw_front_right",
    "paw_back_left",
    "paw_back_right",
    "back_end",
    "tail_end",
)

# Connectivity of the canonical template, rooted at the spine and flowing
# outward (parent, child). Limbs hang off the nearer spine end.
CANONICAL_BONES: tuple[tuple[str, str], ...] = (
    ("neck_end", "nose"),
    ("nose", "eye_left"),
    ("nose", "eye_right"),
    ("neck_end", "back_end"),
    ("neck_end", "thigh_front_left"),
    ("neck_end", "thigh_front_right"),
    ("back_end", "thigh_back_left"),
    ("back_end", "thigh_back_right"),
    ("thigh_front_left", "knee_front_left"),
    ("knee_front_left", "paw_front_left"),
    ("thigh_front_right", "knee_front_right"),
    ("knee_front_right", "paw_front_right"),
    ("thigh_back_left", "knee_back_left"),
    ("knee_back_left", "paw_back_left"),
    ("thigh_back_right", "knee_back_right"),
    ("knee_back_right", "paw_back_right"),
    ("back_end", "tail_end"),
)

# Keypoints an appendage may attach to.
SPINE_ANCHORS = ("neck_end", "back_end")


@dataclass(frozen=True)
class Keypoint:
    name: str
    position: Vec3

    def is_finite(self) -> bool:
        return all(math.isfinite(c) for c in self.position)


@dataclass(frozen=True)
class Bone:
    parent: str
    child: str

    def pair(self) -> frozenset[str]:
        return frozenset((self.parent, self.child))


@dataclass(frozen=True)
class Skeleton:
    keypoints: tuple[Keypoint, ...]
    bones: tuple[Bone, ...]
    name: str = ""
    pose_description: str = ""

    def keypoint_map(self) -> dict[str, Keypoint]:
        return {k.name: k for k in self.keypoints}

    def positions(self) -> dict[str, Vec3]:
        return {k.name: k.position for k in self.keypoints}

    def has_keypoint(self, name: str) -> bool:
        return any(k.name == name for k in self.keypoints)

    def adjacency(self) -> dict[str, set[str]]:
        adj: dict[str, set[str]] = {k.name: set() for k in self.keypoints}
        for b in self.bones:
            if b.parent in adj and b.child in adj:
                adj[b.parent].add(b.child)
                adj[b.child].add(b.parent)
        return adj

    def with_positions(self, new_positions: Mapping[str, Vec3]) -> "Skeleton":
        """Copy with some keypoints moved; unknown names are ignored."""
        kps = tuple(
            replace(k, position=tuple(float(c) for c in new_positions[k.name]))
            if k.name in new_positions
            else k
            for k in self.keypoints
        )
        return replace(self, keypoints=kps)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {"ok": self.ok, "violations": list(self.violations)}


class AppendageKind(str, Enum):
    EXTRA_HEAD = "extra_head"
    EXTRA_LIMB_FRONT = "extra_limb_front"
    EXTRA_LIMB_BACK = "extra_limb_back"
    EXTRA_TAIL = "extra_tail"


def validate_skeleton(s: Skeleton) -> ValidationReport:
    """Check every structural invariant; violations are data, not failures."""
    violations: list[str] = []

    if not s.keypoints:
        violations.append("empty skeleton: no keypoints")

    seen: set[str] = set()
    for k in s.keypoints:
        if not k.name:
            violations.append("keypoint with empty name")
        elif k.name in seen:
            violations.append(f"duplicate keypoint name: {k.name}")
        seen.add(k.name)
        if not k.is_finite():
            violations.append(f"non-finite coordinates on keypoint: {k.name}")

    pairs: set[frozenset[str]] = set()
    for b in s.bones:
        if b.parent == b.child:
            violations.append(f"self-bone: {b.parent}")
            continue
        for end in (b.parent, b.child):
            if end not in seen:
                violations.append(f"unresolved bone endpoint: {end} (bone {b.parent}-{b.child})")
        if b.pair() in pairs:
            violations.append(f"duplicate bone: {b.parent}-{b.child}")
        pairs.add(b.pair())

    if s.keypoints and not violations:
        adj = s.adjacency()
        reachable = _component_of(next(iter(adj)), adj)
        if len(reachable) != len(adj):
            missing = sorted(set(adj) - reachable)
            violations.append(f"disconnected skeleton graph: unreachable {', '.join(missing)}")

    return ValidationReport(ok=not violations, violations=tuple(violations))


def _component_of(start: str, adj: Mapping[str, set[str]]) -> set[str]:
    stack = [start]
    seen = {start}
    while stack:
        for nxt in adj[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def is_canonical(s: Skeleton) -> bool:
    return sorted(k.name for k in s.keypoints) == sorted(CANONICAL_KEYPOINTS)


# --- appendages -------------------------------------------------------------

# Per-kind chain spec: ordered (role_prefix, parent_role_index) tuples.
# parent_role_index -1 means the anchor keypoint.
_CHAINS: dict[AppendageKind, tuple[tuple[str, int], ...]] = {
    AppendageKind.EXTRA_HEAD: (("nose", -1), ("eye_left", 0), ("eye_right", 0)),
    AppendageKind.EXTRA_LIMB_FRONT: (("thigh_front", -1), ("knee_front", 0), ("paw_front", 1)),
    AppendageKind.EXTRA_LIMB_BACK: (("thigh_back", -1), ("knee_back", 0), ("paw_back", 1)),
    AppendageKind.EXTRA_TAIL: (("tail_end", -1),),
}

# Fallback offsets (scene units, +x forward, +z up) relative to the anchor,
# used only when the skeleton has no chain of the requested kind to copy.
_FALLBACK_OFFSETS: dict[AppendageKind, tuple[Vec3, ...]] = {
    AppendageKind.EXTRA_HEAD: ((0.25, 0.0, 0.1), (0.2, 0.06, 0.16), (0.2, -0.06, 0.16)),
    AppendageKind.EXTRA_LIMB_FRONT: ((0.05, 0.1, -0.05), (0.05, 0.12, -0.25), (0.05, 0.14, -0.45)),
    AppendageKind.EXTRA_LIMB_BACK: ((-0.05, 0.1, -0.05), (-0.05, 0.12, -0.25), (-0.05, 0.14, -0.45)),
    AppendageKind.EXTRA_TAIL: ((-0.3, 0.0, 0.05),),
}

APPENDAGE_OFFSET = 0.15  # shift along the spine axis for copied chains


def spine_axis(s: Skeleton) -> Vec3:
    """Unit facing direction: neck end minus back end, or +x when absent."""
    pos = s.positions()
    if "neck_end" in pos and "back_end" in pos:
        d = tuple(a - b for a, b in zip(pos["neck_end"], pos["back_end"]))
        n = math.sqrt(sum(c * c for c in d))
        if n > 1e-12:
            return (d[0] / n, d[1] / n, d[2] / n)
    return (1.0, 0.0, 0.0)


def _role_suffix(name: str, prefix: str) -> str | None:
    """Suffix of a role name: "thigh_front_left" -> "_left", "nose" -> ""."""
    if name == prefix:
        return ""
    if name.startswith(prefix + "_"):
        return name[len(prefix):]
    return None


def _fresh_suffix(s: Skeleton, kind: AppendageKind) -> int:
    roles = _CHAINS[kind]
    root_prefix = roles[0][0]
    existing = sum(1 for k in s.keypoints if _role_suffix(k.name, root_prefix) is not None)
    n = existing + 1
    names = {k.name for k in s.keypoints}
    while any(f"{prefix}_{n}" in names for prefix, _ in roles):
        n += 1
    return n


def add_appendage(s: Skeleton, kind: AppendageKind, anchor: str) -> Skeleton:
    """Attach a fresh appendage chain at a spine keypoint.

    New keypoints copy the nearest existing chain of the same kind, shifted
    by ``APPENDAGE_OFFSET`` along the spine axis; the input is untouched.
    """
    kind = AppendageKind(kind)
    pos = s.positions()
    if anchor not in pos:
        raise UnknownAnchor(f"anchor keypoint not in skeleton: {anchor}")
    if anchor not in SPINE_ANCHORS:
        raise IncompatibleAnchor(
            f"{kind.value} must anchor on one of {', '.join(SPINE_ANCHORS)}; got {anchor}"
        )

    roles = _CHAINS[kind]
    n = _fresh_suffix(s, kind)
    axis = spine_axis(s)
    offset = tuple(APPENDAGE_OFFSET * c for c in axis)
    anchor_pos = pos[anchor]

    # Nearest existing chain of this kind, identified by its root keypoint.
    root_prefix = roles[0][0]
    candidates = [
        (k.name, _role_suffix(k.name, root_prefix))
        for k in s.keypoints
        if _role_suffix(k.name, root_prefix) is not None
    ]
    source_suffix: str | None = None
    if candidates:
        best = min(
            candidates,
            key=lambda item: sum((a - b) ** 2 for a, b in zip(pos[item[0]], anchor_pos)),
        )
        source_suffix = best[1]

    new_kps: list[Keypoint] = []
    new_bones: list[Bone] = []
    new_names: list[str] = []
    fallback = _FALLBACK_OFFSETS[kind]
    for i, (prefix, parent_idx) in enumerate(roles):
        name = f"{prefix}_{n}"
        source = f"{prefix}{source_suffix}" if source_suffix is not None else None
        if source is not None and source in pos:
            p = tuple(c + o for c, o in zip(pos[source], offset))
        else:
            p = tuple(c + o for c, o in zip(anchor_pos, fallback[i]))
        new_kps.append(Keypoint(name, p))
        new_names.append(name)
        parent = anchor if parent_idx < 0 else new_names[parent_idx]
        new_bones.append(Bone(parent, name))

    return replace(
        s,
        keypoints=s.keypoints + tuple(new_kps),
        bones=s.bones + tuple(new_bones),
    )


# --- serialization ----------------------------------------------------------


def serialize(s: Skeleton) -> str:
    """Canonical JSON: fixed field order, 2-space indent, trailing newline."""
    doc = {
        "name": s.name,
        "pose_description": s.pose_description,
        "keypoints": [{"name": k.name, "xyz": list(k.position)} for k in s.keypoints],
        "bones": [[b.parent, b.child] for b in s.bones],
    }
    return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"


def deserialize(text: str) -> Skeleton:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno, col=exc.colno) from exc
    return skeleton_from_dict(doc)


def skeleton_from_dict(doc: object) -> Skeleton:
    if not isinstance(doc, dict):
        raise SchemaError("skeleton document must be a JSON object")
    for key in ("keypoints", "bones"):
        if key not in doc:
            raise SchemaError(f"missing required field '{key}'")

    raw_kps = doc["keypoints"]
    if not isinstance(raw_kps, list):
        raise SchemaError("must be a list", path="$.keypoints")
    keypoints: list[Keypoint] = []
    for i, item in enumerate(raw_kps):
        path = f"$.keypoints[{i}]"
        if not isinstance(item, dict) or "name" not in item or "xyz" not in item:
            raise SchemaError("keypoint needs 'name' and 'xyz'", path=path)
        name, xyz = item["name"], item["xyz"]
        if not isinstance(name, str):
            raise SchemaError("name must be a string", path=path)
        if (
            not isinstance(xyz, list)
            or len(xyz) != 3
            or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in xyz)
        ):
            raise SchemaError("xyz must be a list of 3 numbers", path=path)
        keypoints.append(Keypoint(name, (float(xyz[0]), float(xyz[1]), float(xyz[2]))))

    raw_bones = doc["bones"]
    if not isinstance(raw_bones, list):
        raise SchemaError("must be a list", path="$.bones")
    bones: list[Bone] = []
    for i, item in enumerate(raw_bones):
        path = f"$.bones[{i}]"
        if not isinstance(item, list) or len(item) != 2 or not all(isinstance(e, str) for e in item):
            raise SchemaError("bone must be a pair of keypoint names", path=path)
        if item[0] == item[1]:
            raise SchemaError(f"self-bone: {item[0]}", path=path)
        bones.append(Bone(item[0], item[1]))

    name = doc.get("name", "")
    pose = doc.get("pose_description", "")
    if not isinstance(name, str) or not isinstance(pose, str):
        raise SchemaError("'name' and 'pose_description' must be strings")

    return Skeleton(
        keypoints=tuple(keypoints), bones=tuple(bones), name=name, pose_description=pose
    )


def skeleton_to_dict(s: Skeleton) -> dict:
    return json.loads(serialize(s))


def make_canonical_skeleton(
    positions: Mapping[str, Vec3], name: str = "", pose_description: str = ""
) -> Skeleton:
    """Build the 18-keypoint template from a full position table."""
    missing = [k for k in CANONICAL_KEYPOINTS if k not in positions]
    if missing:
        raise KeyError(f"missing canonical keypoints: {', '.join(missing)}")
    kps = tuple(
        Keypoint(k, tuple(float(c) for c in positions[k])) for k in CANONICAL_KEYPOINTS
    )
    bones = tuple(Bone(p, c) for p, c in CANONICAL_BONES)
    return Skeleton(keypoints=kps, bones=bones, name=name, pose_description=pose_description)


def normalized(s: Skeleton, target_radius: float = 0.9) -> Skeleton:
    """Center on the bounding-box midpoint and scale into the unit sphere."""
    xs = [k.position for k in s.keypoints]
    if not xs:
        return s
    lo = [min(p[i] for p in xs) for i in range(3)]
    hi = [max(p[i] for p in xs) for i in range(3)]
    center = [(a + b) / 2 for a, b in zip(lo, hi)]
    radius = max(
        math.sqrt(sum((p[i] - center[i]) ** 2 for i in range(3))) for p in xs
    )
    scale = target_radius / radius if radius > 1e-12 else 1.0
    moved = {
        k.name: tuple((c - m) * scale for c, m in zip(k.position, center)) for k in s.keypoints
    }
    return s.with_positions(moved)
