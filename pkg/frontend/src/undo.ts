/** Snapshot-based undo/redo. Snapshots are serialized skeleton strings, so
 * restoring replays the exact bytes that were captured. */
export class UndoStack {
  private past: string[] = [];
  private future: string[] = [];

  get canUndo(): boolean {
    return this.past.length > 0;
  }

  get canRedo(): boolean {
    return this.future.length > 0;
  }

  /** Record the state that is about to be replaced. Clears the redo branch. */
  push(snapshot: string): void {
    this.past.push(snapshot);
    this.future = [];
  }

  undo(current: string): string | null {
    const prev = this.past.pop();
    if (prev === undefined) return null;
    this.future.push(current);
    return prev;
  }

  redo(current: string): string | null {
    const next = this.future.pop();
    if (next === undefined) return null;
    this.past.push(current);
    return next;
  }

  clear(): void {
    this.past = [];
    this.future = [];
  }
}
