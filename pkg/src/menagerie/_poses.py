"""Built-in animal pose table.

Hand-authored canonical poses for the 16 shipped animal/pose combinations.
Coordinates are rough body-proportion units (+x facing, +z up, +y left);
every skeleton is normalized into the unit bounding sphere on construction.
These are starting poses for adaptation and editing, not ground truth, so
nothing downstream may depend on the exact numbers.
"""

from __future__ import annotations

from .skeleton import Skeleton, Vec3, make_canonical_skeleton, normalized

Leg = tuple[Vec3, Vec3, Vec3]


def _leg(width: float, length: float, knee_dx: float = 0.02, paw_dx: float = 0.05) -> Leg:
    """Mostly vertical leg chain hanging from a spine end (left side)."""
    return (
        (0.0, width, -0.3 * length),
        (knee_dx, width, -0.65 * length),
        (paw_dx, width, -length),
    )


def _wing(span: float, lift: float, width: float = 0.12) -> Leg:
    """Spread wing chain pointing out along +y (left side)."""
    return (
        (0.0, width + 0.2 * span, 0.35 * lift),
        (0.0, width + 0.6 * span, 0.8 * lift),
        (0.0, width + span, lift),
    )


def _folded_wing(width: float, sweep: float) -> Leg:
    """Wing tucked along the flank, sweeping back toward the tail."""
    return (
        (-0.1 * sweep, width, 0.02),
        (-0.55 * sweep, width, 0.04),
        (-sweep, width, -0.02),
    )


def _positions(
    body_len: float,
    front_h: float,
    back_h: float,
    neck: tuple[float, float],
    front_leg: Leg,
    back_leg: Leg,
    tail: tuple[float, float],
    head: tuple[float, float, float] = (-0.05, 0.055, 0.06),
) -> dict[str, Vec3]:
    fx, bx = body_len / 2.0, -body_len / 2.0
    nose = (fx + neck[0], 0.0, front_h + neck[1])
    hdx, hdy, hdz = head
    pos: dict[str, Vec3] = {
        "neck_end": (fx, 0.0, front_h),
        "back_end": (bx, 0.0, back_h),
        "nose": nose,
        "eye_left": (nose[0] + hdx, hdy, nose[2] + hdz),
        "eye_right": (nose[0] + hdx, -hdy, nose[2] + hdz),
        "tail_end": (bx + tail[0], 0.0, back_h + tail[1]),
    }
    for side, sign in (("left", 1.0), ("right", -1.0)):
        for role, (dx, dy, dz) in zip(("thigh", "knee", "paw"), front_leg):
            pos[f"{role}_front_{side}"] = (fx + dx, sign * dy, front_h + dz)
        for role, (dx, dy, dz) in zip(("thigh", "knee", "paw"), back_leg):
            pos[f"{role}_back_{side}"] = (bx + dx, sign * dy, back_h + dz)
    return pos


# Appendix order is load-bearing: lookup without a pose label returns the
# first matching entry.
_TABLE: tuple[tuple[str, str, dict[str, Vec3]], ...] = (
    (
        "Giraffe",
        "standing",
        _positions(
            body_len=1.3, front_h=2.0, back_h=1.8,
            neck=(0.75, 1.7), head=(-0.1, 0.09, 0.1),
            front_leg=_leg(0.28, 1.9), back_leg=_leg(0.28, 1.7),
            tail=(-0.5, -0.7),
        ),
    ),
    (
        "Elephant",
        "standing",
        _positions(
            body_len=2.4, front_h=1.9, back_h=1.8,
            neck=(0.8, -0.3), head=(-0.15, 0.22, 0.25),
            front_leg=_leg(0.45, 1.6, knee_dx=0.0, paw_dx=0.0),
            back_leg=_leg(0.45, 1.5, knee_dx=0.0, paw_dx=0.0),
            tail=(-0.55, -0.8),
        ),
    ),
    (
        "German Shepherd",
        "standing",
        _positions(
            body_len=0.8, front_h=0.6, back_h=0.55,
            neck=(0.22, 0.22), head=(-0.06, 0.05, 0.05),
            front_leg=_leg(0.13, 0.58), back_leg=_leg(0.14, 0.52, knee_dx=-0.08),
            tail=(-0.35, -0.28),
        ),
    ),
    (
        "Eagle",
        "sitting",
        _positions(
            body_len=0.42, front_h=0.52, back_h=0.3,
            neck=(0.1, 0.12), head=(-0.04, 0.035, 0.03),
            front_leg=_folded_wing(0.1, 0.38),
            back_leg=_leg(0.07, 0.26, knee_dx=0.04, paw_dx=0.1),
            tail=(-0.32, -0.12),
        ),
    ),
    (
        "Eagle",
        "flying",
        _positions(
            body_len=0.5, front_h=1.0, back_h=0.95,
            neck=(0.18, 0.02), head=(-0.05, 0.035, 0.035),
            front_leg=_wing(1.1, 0.2),
            back_leg=((-0.02, 0.07, -0.08), (-0.12, 0.07, -0.12), (-0.24, 0.07, -0.14)),
            tail=(-0.35, -0.05),
        ),
    ),
    (
        "American Crocodile",
        "standing",
        _positions(
            body_len=1.7, front_h=0.38, back_h=0.38,
            neck=(0.65, -0.04), head=(-0.28, 0.09, 0.09),
            front_leg=((0.0, 0.38, -0.04), (0.0, 0.5, -0.2), (0.1, 0.55, -0.38)),
            back_leg=((0.0, 0.4, -0.04), (0.0, 0.52, -0.2), (0.1, 0.57, -0.38)),
            tail=(-1.5, -0.1),
        ),
    ),
    (
        "Tree Frog",
        "sitting",
        _positions(
            body_len=0.34, front_h=0.22, back_h=0.3,
            neck=(0.1, 0.02), head=(-0.03, 0.055, 0.05),
            front_leg=((0.04, 0.1, -0.06), (0.06, 0.12, -0.14), (0.12, 0.13, -0.22)),
            back_leg=((0.0, 0.14, -0.02), (-0.14, 0.18, -0.12), (0.06, 0.2, -0.3)),
            tail=(-0.07, -0.03),
        ),
    ),
    (
        "Roseate Spoonbill",
        "sitting",
        _positions(
            body_len=0.45, front_h=0.8, back_h=0.72,
            neck=(0.3, 0.42), head=(-0.16, 0.03, 0.02),
            front_leg=_folded_wing(0.11, 0.4),
            back_leg=_leg(0.07, 0.75, knee_dx=0.02, paw_dx=0.08),
            tail=(-0.3, -0.08),
        ),
    ),
    (
        "Roseate Spoonbill",
        "flying",
        _positions(
            body_len=0.5, front_h=1.0, back_h=0.95,
            neck=(0.4, 0.05), head=(-0.18, 0.03, 0.02),
            front_leg=_wing(1.0, 0.18),
            back_leg=((-0.05, 0.06, -0.05), (-0.3, 0.06, -0.06), (-0.55, 0.06, -0.07)),
            tail=(-0.3, -0.03),
        ),
    ),
    (
        "Raccoon",
        "standing on four legs",
        _positions(
            body_len=0.55, front_h=0.32, back_h=0.38,
            neck=(0.16, 0.1), head=(-0.05, 0.045, 0.04),
            front_leg=_leg(0.1, 0.32), back_leg=_leg(0.11, 0.38, knee_dx=-0.06),
            tail=(-0.4, -0.18),
        ),
    ),
    (
        "Raccoon",
        "standing on two legs",
        {
            # Upright: spine near vertical, forepaws raised in front.
            "back_end": (0.0, 0.0, 0.42),
            "neck_end": (0.1, 0.0, 0.85),
            "nose": (0.28, 0.0, 0.95),
            "eye_left": (0.22, 0.045, 1.0),
            "eye_right": (0.22, -0.045, 1.0),
            "thigh_front_left": (0.14, 0.1, 0.72),
            "knee_front_left": (0.24, 0.11, 0.6),
            "paw_front_left": (0.33, 0.11, 0.62),
            "thigh_front_right": (0.14, -0.1, 0.72),
            "knee_front_right": (0.24, -0.11, 0.6),
            "paw_front_right": (0.33, -0.11, 0.62),
            "thigh_back_left": (0.02, 0.11, 0.3),
            "knee_back_left": (-0.04, 0.12, 0.16),
            "paw_back_left": (0.08, 0.12, 0.0),
            "thigh_back_right": (0.02, -0.11, 0.3),
            "knee_back_right": (-0.04, -0.12, 0.16),
            "paw_back_right": (0.08, -0.12, 0.0),
            "tail_end": (-0.3, 0.0, 0.12),
        },
    ),
    (
        "T-Rex",
        "standing",
        _positions(
            body_len=1.5, front_h=1.25, back_h=1.35,
            neck=(0.5, 0.4), head=(-0.25, 0.12, 0.12),
            front_leg=((0.1, 0.22, -0.15), (0.18, 0.22, -0.35), (0.3, 0.22, -0.45)),
            back_leg=_leg(0.3, 1.3, knee_dx=0.12, paw_dx=0.25),
            tail=(-1.6, -0.35),
        ),
    ),
    (
        "Lizard",
        "standing",
        _positions(
            body_len=0.5, front_h=0.1, back_h=0.1,
            neck=(0.16, 0.0), head=(-0.07, 0.035, 0.03),
            front_leg=((0.0, 0.12, -0.01), (0.0, 0.17, -0.05), (0.04, 0.2, -0.1)),
            back_leg=((0.0, 0.13, -0.01), (0.0, 0.18, -0.05), (0.04, 0.21, -0.1)),
            tail=(-0.55, -0.03),
        ),
    ),
    (
        "Tortoise",
        "standing",
        _positions(
            body_len=0.7, front_h=0.28, back_h=0.28,
            neck=(0.28, 0.06), head=(-0.07, 0.04, 0.04),
            front_leg=((0.0, 0.26, -0.05), (0.0, 0.3, -0.16), (0.06, 0.32, -0.28)),
            back_leg=((0.0, 0.27, -0.05), (0.0, 0.31, -0.16), (0.06, 0.33, -0.28)),
            tail=(-0.18, -0.1),
        ),
    ),
    (
        "Bat",
        "flying",
        _positions(
            body_len=0.3, front_h=1.0, back_h=0.96,
            neck=(0.1, 0.04), head=(-0.02, 0.035, 0.04),
            front_leg=_wing(0.95, -0.1, width=0.08),
            back_leg=((-0.04, 0.07, -0.08), (-0.12, 0.09, -0.14), (-0.2, 0.11, -0.18)),
            tail=(-0.12, -0.08),
        ),
    ),
    (
        "Otter",
        "standing",
        _positions(
            body_len=0.75, front_h=0.22, back_h=0.24,
            neck=(0.2, 0.08), head=(-0.05, 0.04, 0.03),
            front_leg=_leg(0.11, 0.2, knee_dx=0.0, paw_dx=0.04),
            back_leg=_leg(0.12, 0.22, knee_dx=0.0, paw_dx=0.04),
            tail=(-0.6, -0.12),
        ),
    ),
)


def builtin_skeletons() -> list[Skeleton]:
    """The 16 shipped poses, normalized, in library order."""
    out = []
    for animal, pose, table in _TABLE:
        s = make_canonical_skeleton(table, name=animal, pose_description=pose)
        out.append(normalized(s))
    return out
