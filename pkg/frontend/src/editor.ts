/**
 * In-memory editor state: the parsed model document plus UI state
 * (selected feature, undo/redo stacks).
 *
 * Every mutation snapshots the whole document, appends to the model's own
 * edit log, and is undoable back to the exact loaded state. The editor
 * holds only the public model file - there is no dataset anywhere in this
 * app, which is what makes every operation privacy-free post-processing.
 */

import {
  deepClone,
  exportModel,
  featureByName,
  parseModel,
  type Direction,
  type ModelDoc,
} from "./modelFormat.js";
import { monotoneShape } from "./isotonic.js";
import {
  contributionsFor,
  predictRow,
  rawScore,
  type Contribution,
  type RowValue,
} from "./scoring.js";

export interface WhatIfResult {
  prediction: number;
  rawScore: number;
  /** sorted by absolute score, largest first */
  contributions: Contribution[];
}

export class EditorState {
  doc: ModelDoc;
  selectedFeature: string;
  private undoStack: ModelDoc[] = [];
  private redoStack: ModelDoc[] = [];

  private constructor(doc: ModelDoc) {
    this.doc = doc;
    this.selectedFeature = doc.features[0].name;
  }

  static fromFile(text: string): EditorState {
    return new EditorState(parseModel(text));
  }

  get canUndo(): boolean {
    return this.undoStack.length > 0;
  }

  get canRedo(): boolean {
    return this.redoStack.length > 0;
  }

  private beginMutation(): void {
    this.undoStack.push(deepClone(this.doc));
    this.redoStack = [];
  }

  private log(op: string, feature: string, params: Record<string, unknown>): void {
    this.doc.edit_log.push({ op, feature, params, timestamp: new Date().toISOString() });
  }

  /** Set bins [lo, hi) of a feature to a value, or shift them by delta. */
  editBins(feature: string, lo: number, hi: number,
           change: { set: number } | { delta: number }): void {
    const entry = featureByName(this.doc, feature);
    if (!(Number.isInteger(lo) && Number.isInteger(hi) && 0 <= lo && lo < hi
          && hi <= entry.shape.length)) {
      throw new Error(`bad bin range [${lo}, ${hi}) for '${feature}'`);
    }
    this.beginMutation();
    const target = featureByName(this.doc, feature);
    if ("set" in change) {
      for (let b = lo; b < hi; b++) target.shape[b] = change.set;
      this.log("edit", feature, { bins: [lo, hi], set: change.set });
    } else {
      for (let b = lo; b < hi; b++) target.shape[b] += change.delta;
      this.log("edit", feature, { bins: [lo, hi], delta: change.delta });
    }
  }

  /** Non-destructive preview of the isotonic projection. */
  previewMonotone(feature: string, direction: Direction): number[] {
    return monotoneShape(featureByName(this.doc, feature), direction);
  }

  monotonize(feature: string, direction: Direction): void {
    const projected = this.previewMonotone(feature, direction);
    this.beginMutation();
    featureByName(this.doc, feature).shape = projected;
    this.log("monotonize", feature, { direction });
  }

  whatIf(row: RowValue[]): WhatIfResult {
    const contributions = contributionsFor(this.doc, row);
    return {
      prediction: predictRow(this.doc, row),
      rawScore: rawScore(this.doc, row),
      contributions: [...contributions].sort((a, b) => Math.abs(b.score) - Math.abs(a.score)),
    };
  }

  undo(): boolean {
    const prev = this.undoStack.pop();
    if (!prev) return false;
    this.redoStack.push(this.doc);
    this.doc = prev;
    return true;
  }

  redo(): boolean {
    const next = this.redoStack.pop();
    if (!next) return false;
    this.undoStack.push(this.doc);
    this.doc = next;
    return true;
  }

  /** Replay the undo stack all the way back to the loaded document. */
  undoAll(): void {
    while (this.undo()) { /* unwind */ }
  }

  export(): string {
    return exportModel(this.doc);
  }
}
