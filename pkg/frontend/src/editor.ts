import { ApiClient, ApiError } from "./api";
import {
  changedKeypoints,
  cloneSkeleton,
  deleteKeypoint,
  parseSkeleton,
  serializeSkeleton,
  setPosition,
  translate,
} from "./skeleton";
import { UndoStack } from "./undo";
import type { AppendageKind, SkeletonDoc, ValidationReport, Vec3 } from "./types";

export type SessionListener = () => void;

/** Editor state machine: one working skeleton, selection, undo/redo.
 * Every mutating action snapshots the serialized skeleton first, so a single
 * undo restores the previous bytes exactly. The server stays the source of
 * truth for validation, appendages, and meshes. */
export class EditorSession {
  working: SkeletonDoc | null = null;
  selection: string | null = null;
  private undoStack = new UndoStack();
  private listeners: SessionListener[] = [];
  private dragging = false;

  constructor(public api: ApiClient) {}

  onChange(listener: SessionListener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  private mustHaveSkeleton(): SkeletonDoc {
    if (!this.working) throw new Error("no skeleton loaded");
    return this.working;
  }

  serialized(): string {
    return serializeSkeleton(this.mustHaveSkeleton());
  }

  get canUndo(): boolean {
    return this.undoStack.canUndo;
  }

  get canRedo(): boolean {
    return this.undoStack.canRedo;
  }

  async loadAnimal(name: string, pose?: string): Promise<void> {
    const detail = await this.api.getAnimal(name, pose);
    this.working = cloneSkeleton(detail.skeleton);
    this.selection = null;
    this.undoStack.clear();
    this.emit();
  }

  loadSkeletonText(text: string): void {
    this.working = parseSkeleton(text);
    this.selection = null;
    this.undoStack.clear();
    this.emit();
  }

  select(name: string | null): void {
    if (name !== null) {
      this.mustHaveSkeleton();
      if (!this.working!.keypoints.some((k) => k.name === name)) {
        throw new Error(`unknown keypoint: ${name}`);
      }
    }
    this.selection = name;
    this.emit();
  }

  private snapshot(): void {
    if (!this.dragging) this.undoStack.push(this.serialized());
  }

  /** A gizmo drag is one undo step no matter how many move events it emits. */
  beginDrag(): void {
    this.snapshot();
    this.dragging = true;
  }

  endDrag(): void {
    this.dragging = false;
    this.emit();
  }

  translateKeypoint(name: string, delta: Vec3): void {
    const doc = this.mustHaveSkeleton();
    this.snapshot();
    translate(doc, name, delta);
    this.emit();
  }

  setKeypointPosition(name: string, xyz: Vec3): void {
    const doc = this.mustHaveSkeleton();
    this.snapshot();
    setPosition(doc, name, xyz);
    this.emit();
  }

  /** Delete a keypoint and its incident bones, then revalidate server-side. */
  async deleteSelected(): Promise<ValidationReport> {
    const doc = this.mustHaveSkeleton();
    if (!this.selection) throw new Error("nothing selected");
    this.snapshot();
    deleteKeypoint(doc, this.selection);
    this.selection = null;
    this.emit();
    return this.api.validate(doc);
  }

  async addAppendage(kind: AppendageKind, anchor: string): Promise<void> {
    const doc = this.mustHaveSkeleton();
    const grown = await this.api.appendage(doc, kind, anchor);
    this.snapshot();
    this.working = grown;
    this.emit();
  }

  async createMesh(): Promise<string> {
    return this.api.mesh(this.mustHaveSkeleton());
  }

  /** Export only validated skeletons; the report rides along on failure. */
  async exportSkeleton(): Promise<string> {
    const doc = this.mustHaveSkeleton();
    const report = await this.api.validate(doc);
    if (!report.ok) {
      throw new ApiError(`skeleton failed validation: ${report.violations.join("; ")}`, 422, report);
    }
    return serializeSkeleton(doc);
  }

  undoOnce(): boolean {
    if (!this.working) return false;
    const prev = this.undoStack.undo(this.serialized());
    if (prev === null) return false;
    this.working = parseSkeleton(prev);
    this.selection = null;
    this.emit();
    return true;
  }

  redoOnce(): boolean {
    if (!this.working) return false;
    const next = this.undoStack.redo(this.serialized());
    if (next === null) return false;
    this.working = parseSkeleton(next);
    this.selection = null;
    this.emit();
    return true;
  }

  diffAgainst(reference: SkeletonDoc): string[] {
    return changedKeypoints(reference, this.mustHaveSkeleton());
  }
}
