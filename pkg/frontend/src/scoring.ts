/**
 * Prediction semantics, mirroring the CLI exactly.
 *
 * Scores accumulate left to right in feature order so the contribution
 * breakdown sums back to the raw score without rounding slack; the fixture
 * suite holds this against `predict --explain` output at 1e-12.
 */

import type { FeatureEntry, ModelDoc } from "./modelFormat.js";

export type RowValue = number | string;

export interface Contribution {
  feature: string;
  bin: number;
  score: number;
}

/**
 * Bin index of one value. Numeric: half-open bins [e_i, e_i+1), last bin
 * right-closed, out-of-range values clamp to the boundary bins.
 * Categorical: vocabulary label or integer index; unknown is an error.
 */
export function lookupBin(entry: FeatureEntry, value: RowValue): number {
  if (entry.kind === "categorical") {
    const vocab = entry.vocabulary!;
    let idx: number;
    if (typeof value === "string") {
      idx = vocab.indexOf(value);
      if (idx < 0) throw new Error(`unknown category '${value}' for feature '${entry.name}'`);
    } else {
      idx = value;
      if (!Number.isInteger(idx) || idx < 0 || idx >= vocab.length) {
        throw new Error(`unknown category index ${value} for feature '${entry.name}'`);
      }
    }
    return idx;
  }
  const edges = entry.edges!;
  const x = value as number;
  if (typeof x !== "number" || Number.isNaN(x)) {
    throw new Error(`feature '${entry.name}' needs a numeric value`);
  }
  // index of the last edge <= x, clamped into [0, n_bins)
  let lo = 0;
  let hi = edges.length; // first index with edges[i] > x
  while (lo < hi) {
    const mid = (lo + hi) >> 1;
    if (edges[mid] <= x) lo = mid + 1;
    else hi = mid;
  }
  return Math.min(Math.max(lo - 1, 0), entry.counts.length - 1);
}

export function rawScore(doc: ModelDoc, row: RowValue[]): number {
  if (row.length !== doc.features.length) {
    throw new Error(`row has ${row.length} values for ${doc.features.length} features`);
  }
  let score = doc.intercept;
  for (let k = 0; k < doc.features.length; k++) {
    score += doc.features[k].shape[lookupBin(doc.features[k], row[k])];
  }
  return score;
}

function sigmoid(s: number): number {
  if (s >= 0) return 1 / (1 + Math.exp(-s));
  const e = Math.exp(s);
  return e / (1 + e);
}

export function predictRow(doc: ModelDoc, row: RowValue[]): number {
  const s = rawScore(doc, row);
  return doc.link === "logistic" ? sigmoid(s) : s;
}

export function contributionsFor(doc: ModelDoc, row: RowValue[]): Contribution[] {
  if (row.length !== doc.features.length) {
    throw new Error(`row has ${row.length} values for ${doc.features.length} features`);
  }
  return doc.features.map((entry, k) => {
    const bin = lookupBin(entry, row[k]);
    return { feature: entry.name, bin, score: entry.shape[bin] };
  });
}
