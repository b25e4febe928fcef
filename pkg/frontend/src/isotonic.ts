/**
 * Weighted isotonic regression by pool-adjacent-violators, pinned to the
 * training-side implementation through the shared fixture corpus (1e-9 per
 * bin). Decreasing direction negates, fits increasing, negates back.
 */

import type { Direction, FeatureEntry } from "./modelFormat.js";

export function pav(values: number[], weights: number[], direction: Direction): number[] {
  if (values.length !== weights.length || values.length === 0) {
    throw new Error("values and weights must be equal-length and non-empty");
  }
  if (weights.some((w) => !(w > 0))) throw new Error("weights must be positive");
  if (direction === "decreasing") {
    return pav(values.map((v) => -v), weights, "increasing").map((v) => -v);
  }
  const means: number[] = [];
  const wsum: number[] = [];
  const length: number[] = [];
  for (let i = 0; i < values.length; i++) {
    means.push(values[i]);
    wsum.push(weights[i]);
    length.push(1);
    while (means.length > 1 && means[means.length - 2] > means[means.length - 1]) {
      const n = means.length;
      const w = wsum[n - 2] + wsum[n - 1];
      means[n - 2] = (means[n - 2] * wsum[n - 2] + means[n - 1] * wsum[n - 1]) / w;
      wsum[n - 2] = w;
      length[n - 2] += length[n - 1];
      means.pop();
      wsum.pop();
      length.pop();
    }
  }
  const out: number[] = [];
  for (let b = 0; b < means.length; b++) {
    for (let r = 0; r < length[b]; r++) out.push(means[b]);
  }
  return out;
}

/**
 * Monotone projection of one shape function using the public weighting
 * rule: per-bin (noisy) counts floored at 1.
 */
export function monotoneShape(entry: FeatureEntry, direction: Direction): number[] {
  if (entry.kind !== "numeric") {
    throw new Error(`feature '${entry.name}' is categorical; monotone order undefined`);
  }
  return pav(entry.shape, entry.counts.map((c) => Math.max(c, 1)), direction);
}
