export type Vec3 = [number, number, number];

export interface KeypointDoc {
  name: string;
  xyz: Vec3;
}

export interface SkeletonDoc {
  name: string;
  pose_description: string;
  keypoints: KeypointDoc[];
  bones: [string, string][];
}

export interface ValidationReport {
  ok: boolean;
  violations: string[];
}

export interface AnimalSummary {
  animal: string;
  pose: string;
}

export interface AnimalDetail {
  animal: string;
  pose: string;
  ambiguous: boolean;
  skeleton: SkeletonDoc;
}

export type AppendageKind =
  | "extra_head"
  | "extra_limb_front"
  | "extra_limb_back"
  | "extra_tail";

export const APPENDAGE_KINDS: { kind: AppendageKind; label: string }[] = [
  { kind: "extra_head", label: "Add extra head" },
  { kind: "extra_limb_front", label: "Add extra limb – front" },
  { kind: "extra_limb_back", label: "Add extra limb – back" },
  { kind: "extra_tail", label: "Add extra tail" },
];
