import type { SkeletonDoc, Vec3 } from "./types";

/** Canonical client-side serialization: fixed key order, 2-space indent.
 * Undo snapshots and exports both use this, so equality means byte equality. */
export function serializeSkeleton(doc: SkeletonDoc): string {
  const ordered = {
    name: doc.name,
    pose_description: doc.pose_description,
    keypoints: doc.keypoints.map((k) => ({ name: k.name, xyz: k.xyz })),
    bones: doc.bones,
  };
  return JSON.stringify(ordered, null, 2) + "\n";
}

export function parseSkeleton(text: string): SkeletonDoc {
  const doc = JSON.parse(text);
  if (typeof doc !== "object" || doc === null) throw new Error("skeleton must be an object");
  if (!Array.isArray(doc.keypoints)) throw new Error("missing 'keypoints'");
  if (!Array.isArray(doc.bones)) throw new Error("missing 'bones'");
  for (const k of doc.keypoints) {
    if (typeof k.name !== "string" || !Array.isArray(k.xyz) || k.xyz.length !== 3) {
      throw new Error("keypoint needs a name and xyz triple");
    }
  }
  for (const b of doc.bones) {
    if (!Array.isArray(b) || b.length !== 2) throw new Error("bone must be a name pair");
  }
  return {
    name: typeof doc.name === "string" ? doc.name : "",
    pose_description: typeof doc.pose_description === "string" ? doc.pose_description : "",
    keypoints: doc.keypoints.map((k: { name: string; xyz: number[] }) => ({
      name: k.name,
      xyz: [k.xyz[0], k.xyz[1], k.xyz[2]] as Vec3,
    })),
    bones: doc.bones.map((b: [string, string]) => [b[0], b[1]] as [string, string]),
  };
}

export function cloneSkeleton(doc: SkeletonDoc): SkeletonDoc {
  return parseSkeleton(serializeSkeleton(doc));
}

export function getPosition(doc: SkeletonDoc, name: string): Vec3 {
  const kp = doc.keypoints.find((k) => k.name === name);
  if (!kp) throw new Error(`unknown keypoint: ${name}`);
  return kp.xyz;
}

export function setPosition(doc: SkeletonDoc, name: string, xyz: Vec3): void {
  const kp = doc.keypoints.find((k) => k.name === name);
  if (!kp) throw new Error(`unknown keypoint: ${name}`);
  kp.xyz = [xyz[0], xyz[1], xyz[2]];
}

export function translate(doc: SkeletonDoc, name: string, delta: Vec3): void {
  const p = getPosition(doc, name);
  setPosition(doc, name, [p[0] + delta[0], p[1] + delta[1], p[2] + delta[2]]);
}

/** Remove a keypoint together with every bone touching it. */
export function deleteKeypoint(doc: SkeletonDoc, name: string): void {
  const before = doc.keypoints.length;
  doc.keypoints = doc.keypoints.filter((k) => k.name !== name);
  if (doc.keypoints.length === before) throw new Error(`unknown keypoint: ${name}`);
  doc.bones = doc.bones.filter(([a, b]) => a !== name && b !== name);
}

/** Names whose positions differ between two skeletons (exact comparison). */
export function changedKeypoints(a: SkeletonDoc, b: SkeletonDoc): string[] {
  const positions = new Map(a.keypoints.map((k) => [k.name, k.xyz]));
  const out: string[] = [];
  for (const k of b.keypoints) {
    const p = positions.get(k.name);
    if (!p) {
      out.push(k.name);
    } else if (p[0] !== k.xyz[0] || p[1] !== k.xyz[1] || p[2] !== k.xyz[2]) {
      out.push(k.name);
    }
  }
  for (const k of a.keypoints) {
    if (!b.keypoints.some((x) => x.name === k.name)) out.push(k.name);
  }
  return out;
}
