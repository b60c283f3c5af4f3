from __future__ import annotations

import math

import numpy as np
import pytest

from menagerie.balloon import (
    InvalidSkeletonError,
    PrimitiveParams,
    TriMesh,
    build_mesh,
    cone_mesh,
    cylinder_mesh,
    ellipsoid_mesh,
    export_obj,
    is_watertight_manifold,
    parse_obj,
    validate_mesh,
)
from menagerie.skeleton import AppendageKind, Bone, Keypoint, Skeleton, add_appendage


def expected_primitive_kinds(s: Skeleton) -> dict[str, int]:
    """Independent count oracle from the bone-classification rules."""
    counts = {"torso": 0, "eye": 0, "cylinder": 0, "cone": 0}
    for b in s.bones:
        if {b.parent, b.child} == {"neck_end", "back_end"}:
            counts["torso"] += 1
        elif b.parent.startswith("eye") or b.child.startswith("eye"):
            counts["eye"] += 1
        else:
            counts["cylinder"] += 1
    counts["cone"] = sum(
        1 for k in s.keypoints if k.name == "nose" or k.name.startswith("nose_")
    )
    return counts


def primitive_submeshes(m: TriMesh):
    for p in m.primitives:
        verts = m.vertices[p.vertex_start : p.vertex_start + p.vertex_count]
        tris = m.triangles[p.tri_start : p.tri_start + p.tri_count] - p.vertex_start
        yield p, verts, tris


# --- tessellation building blocks ---------------------------------------------


def test_cylinder_tessellation_counts():
    v, t = cylinder_mesh((0, 0, 0), (0, 0, 1), 0.1, n_segments=16)
    assert len(v) == 2 * 16 + 2
    assert len(t) == 4 * 16
    assert is_watertight_manifold(v, t)


def test_ellipsoid_tessellation_counts():
    v, t = ellipsoid_mesh((0, 0, 0), (1, 1, 1), n_segments=16, n_rings=12)
    assert len(v) == 16 * 11 + 2
    assert len(t) == 2 * 16 + 10 * 2 * 16
    assert is_watertight_manifold(v, t)


def test_cone_tessellation_counts():
    v, t = cone_mesh((0, 0, 1), (0, 0, 0), 0.3, n_segments=16)
    assert len(v) == 16 + 2
    assert len(t) == 2 * 16
    assert is_watertight_manifold(v, t)


def test_ellipsoid_poles_land_on_axis_endpoints():
    v, _ = ellipsoid_mesh((1, 2, 3), (0.2, 0.2, 0.5), axis=(1, 0, 0))
    assert v[0] == pytest.approx([1.5, 2, 3])
    assert v[-1] == pytest.approx([0.5, 2, 3])


# --- skeleton-driven builds ----------------------------------------------------


def test_canonical_quadruped_primitive_census(elephant):
    m = build_mesh(elephant)
    got = {"torso": 0, "eye": 0, "cylinder": 0, "cone": 0}
    for p in m.primitives:
        got[p.kind] += 1
    assert got == expected_primitive_kinds(elephant)
    assert got["torso"] == 1 and got["cone"] == 1 and got["eye"] == 2 and got["cylinder"] == 14


def test_every_bone_yields_exactly_one_primitive(lib):
    for entry in lib.entries:
        m = build_mesh(entry.skeleton)
        by_bone = [p.bone for p in m.primitives if p.bone is not None]
        want = [(b.parent, b.child) for b in entry.skeleton.bones]
        assert sorted(by_bone) == sorted(want), entry.animal_name


def test_mesh_structurally_valid(lib):
    for entry in lib.entries:
        assert validate_mesh(build_mesh(entry.skeleton)) == []


def test_cylinder_axis_endpoints_coincide_with_bone_keypoints(elephant):
    m = build_mesh(elephant)
    pos = elephant.positions()
    for p in m.primitives:
        if p.kind != "cylinder":
            continue
        a, b = np.array(p.axis[0]), np.array(p.axis[1])
        assert np.abs(a - np.array(pos[p.bone[0]])).max() < 1e-9
        assert np.abs(b - np.array(pos[p.bone[1]])).max() < 1e-9
        # cap-center vertices sit exactly on the keypoints
        verts = m.vertices[p.vertex_start : p.vertex_start + p.vertex_count]
        assert np.abs(verts[-2] - a).max() < 1e-9
        assert np.abs(verts[-1] - b).max() < 1e-9


def test_each_primitive_watertight_manifold(elephant):
    m = build_mesh(elephant)
    for p, verts, tris in primitive_submeshes(m):
        assert is_watertight_manifold(verts, tris), p.label


def test_extra_tail_adds_one_cylinder(elephant):
    base = build_mesh(elephant)
    grown = build_mesh(add_appendage(elephant, AppendageKind.EXTRA_TAIL, "back_end"))
    assert len(grown.primitives) - len(base.primitives) == 1
    (new,) = [p for p in grown.primitives if p.bone == ("back_end", "tail_end_2")]
    assert new.kind == "cylinder"


def test_appendage_one_primitive_per_new_bone(elephant):
    base_bones = {(b.parent, b.child) for b in elephant.bones}
    for kind in AppendageKind:
        grown = add_appendage(elephant, kind, "neck_end" if "head" in kind.value or "front" in kind.value else "back_end")
        new_bones = {(b.parent, b.child) for b in grown.bones} - base_bones
        m = build_mesh(grown)
        per_bone = [p for p in m.primitives if p.bone in new_bones]
        assert len(per_bone) == len(new_bones), kind


def test_degenerate_bone_skipped_and_reported(elephant):
    zero = elephant.with_positions({"tail_end": elephant.positions()["back_end"]})
    m = build_mesh(zero)
    assert any("degenerate bone back_end-tail_end" in s for s in m.skipped)
    assert len([p for p in m.primitives if p.bone == ("back_end", "tail_end")]) == 0
    assert validate_mesh(m) == []


def test_invalid_skeleton_rejected():
    s = Skeleton((Keypoint("a", (0, 0, 0)), Keypoint("b", (1, 0, 0))), ())
    with pytest.raises(InvalidSkeletonError):
        build_mesh(s)


def test_bounding_box_envelope(lib):
    for entry in lib.entries:
        m = build_mesh(entry.skeleton)
        kp = np.array([k.position for k in entry.skeleton.keypoints])
        lo, hi = m.bounds()
        assert (lo <= kp.min(axis=0) + 1e-12).all()
        assert (hi >= kp.max(axis=0) - 1e-12).all()
        # nothing reaches farther than the fattest primitive's lateral extent
        margin = 0.0
        for p, verts, _ in primitive_submeshes(m):
            if p.axis is not None:
                a, b = np.array(p.axis[0]), np.array(p.axis[1])
                ab = b - a
                t = np.clip((verts - a) @ ab / (ab @ ab), 0.0, 1.0)
                d = np.linalg.norm(verts - (a + t[:, None] * ab), axis=1)
            else:
                center = entry.skeleton.positions()[p.keypoint]
                d = np.linalg.norm(verts - np.array(center), axis=1)
            margin = max(margin, float(d.max()))
        assert (lo >= kp.min(axis=0) - margin - 1e-9).all()
        assert (hi <= kp.max(axis=0) + margin + 1e-9).all()


def test_build_is_deterministic(elephant):
    a, b = build_mesh(elephant), build_mesh(elephant)
    assert np.array_equal(a.vertices, b.vertices)
    assert np.array_equal(a.triangles, b.triangles)
    assert a.part_labels == b.part_labels


# --- OBJ ---------------------------------------------------------------------


def _tetrahedron() -> TriMesh:
    verts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=np.float64)
    tris = np.array([[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]], dtype=np.int32)
    return TriMesh(verts, tris, ("t",) * 4)


def test_obj_tetrahedron_line_counts():
    text = export_obj(_tetrahedron())
    lines = text.splitlines()
    assert sum(1 for ln in lines if ln.startswith("v ")) == 4
    assert sum(1 for ln in lines if ln.startswith("f ")) == 4


def test_obj_empty_mesh_is_header_only():
    empty = TriMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int32), ())
    text = export_obj(empty)
    body = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    assert body == []


def test_obj_vertex_count_matches_tessellation_formula(elephant):
    params = PrimitiveParams()
    m = build_mesh(elephant, params)
    n, r = params.n_segments, params.n_rings
    per_kind = {
        "cylinder": 2 * n + 2,
        "torso": n * (r - 1) + 2,
        "eye": n * (r - 1) + 2,
        "cone": n + 2,
    }
    expected = sum(per_kind[p.kind] for p in m.primitives)
    text = export_obj(m)
    assert sum(1 for ln in text.splitlines() if ln.startswith("v ")) == expected == len(m.vertices)


def test_obj_round_trip(elephant):
    m = build_mesh(elephant)
    again = parse_obj(export_obj(m))
    assert np.array_equal(again.vertices, m.vertices)
    assert np.array_equal(again.triangles, m.triangles)
    assert again.part_labels == m.part_labels


def test_obj_groups_present(elephant):
    text = export_obj(build_mesh(elephant))
    groups = [ln.split()[1] for ln in text.splitlines() if ln.startswith("g ")]
    assert "torso" in groups and "cone_nose" in groups and "eye_left" in groups


def test_parse_obj_quad_fan_and_negative_indices():
    text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\nf -4 -3 -2\n"
    m = parse_obj(text)
    assert len(m.triangles) == 3
