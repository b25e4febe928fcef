/**
 * The model interchange format (schema_version 1).
 *
 * This file is the UI's entire interface to the training side: everything
 * rendered or edited lives in one JSON document. Parsing validates the
 * invariants the trainer guarantees so a malformed or hand-damaged file is
 * rejected with a readable message instead of corrupting edits downstream.
 */

export type FeatureKind = "numeric" | "categorical";
export type Link = "identity" | "logistic";
export type Direction = "increasing" | "decreasing";

export interface FeatureEntry {
  name: string;
  kind: FeatureKind;
  /** numeric only: n_bins + 1 ascending cut points */
  edges?: number[];
  /** categorical only: one bin per entry, in order */
  vocabulary?: string[];
  /** per-bin data mass; noisy (possibly negative) for DP models */
  counts: number[];
  /** per-bin additive score values (logits under the logistic link) */
  shape: number[];
  is_private: boolean;
  noise_scale: number;
}

export interface PrivacyBlock {
  epsilon: number;
  delta: number;
  accountant: string;
  sigma_train: number;
  sigma_bin: number;
}

export interface TrainingBlock {
  epochs: number;
  learning_rate: number;
  max_leaves: number;
  max_bins: number;
  seed: number;
}

export interface EditLogEntry {
  op: string;
  feature: string;
  params: Record<string, unknown>;
  timestamp: string;
}

export interface ModelDoc {
  schema_version: number;
  link: Link;
  intercept: number;
  label_range: number;
  privacy: PrivacyBlock | null;
  training: TrainingBlock;
  features: FeatureEntry[];
  edit_log: EditLogEntry[];
}

export class ModelFormatError extends Error {}

function fail(msg: string): never {
  throw new ModelFormatError(msg);
}

function checkFiniteArray(values: unknown, what: string): number[] {
  if (!Array.isArray(values) || values.length === 0) fail(`${what} must be a non-empty array`);
  for (const v of values) {
    if (typeof v !== "number" || !Number.isFinite(v)) fail(`${what} must hold finite numbers`);
  }
  return values as number[];
}

function checkFeature(raw: unknown, index: number): FeatureEntry {
  const entry = raw as Partial<FeatureEntry>;
  const where = `feature ${entry?.name ?? index}`;
  if (typeof entry?.name !== "string") fail(`feature ${index}: missing name`);
  if (entry.kind !== "numeric" && entry.kind !== "categorical") fail(`${where}: bad kind`);
  const counts = checkFiniteArray(entry.counts, `${where}: counts`);
  const shape = checkFiniteArray(entry.shape, `${where}: shape`);
  if (shape.length !== counts.length) fail(`${where}: ${shape.length} shape values for ${counts.length} bins`);
  if (entry.kind === "numeric") {
    const edges = checkFiniteArray(entry.edges, `${where}: edges`);
    if (edges.length !== counts.length + 1) fail(`${where}: need one more edge than bins`);
    for (let i = 1; i < edges.length; i++) {
      if (!(edges[i] > edges[i - 1])) fail(`${where}: edges must be strictly increasing`);
    }
  } else {
    if (!Array.isArray(entry.vocabulary) || entry.vocabulary.length !== counts.length) {
      fail(`${where}: vocabulary must list one category per bin`);
    }
  }
  return {
    name: entry.name,
    kind: entry.kind,
    edges: entry.kind === "numeric" ? (entry.edges as number[]) : undefined,
    vocabulary: entry.kind === "categorical" ? (entry.vocabulary as string[]) : undefined,
    counts,
    shape,
    is_private: Boolean(entry.is_private),
    noise_scale: Number(entry.noise_scale ?? 0),
  };
}

/** Parse and validate a model file; throws ModelFormatError with a user-facing message. */
export function parseModel(text: string): ModelDoc {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (e) {
    fail(`not valid JSON: ${(e as Error).message}`);
  }
  const doc = raw as Partial<ModelDoc>;
  if (typeof doc !== "object" || doc === null) fail("model file must be a JSON object");
  if (doc.schema_version !== 1) fail(`unsupported schema_version ${doc.schema_version}`);
  if (doc.link !== "identity" && doc.link !== "logistic") fail(`unknown link ${doc.link}`);
  if (typeof doc.intercept !== "number" || !Number.isFinite(doc.intercept)) fail("bad intercept");
  if (typeof doc.label_range !== "number") fail("bad label_range");
  if (!Array.isArray(doc.features) || doc.features.length === 0) fail("model has no features");
  const features = doc.features.map(checkFeature);
  const names = new Set(features.map((f) => f.name));
  if (names.size !== features.length) fail("duplicate feature names");
  return {
    schema_version: 1,
    link: doc.link,
    intercept: doc.intercept,
    label_range: doc.label_range,
    privacy: (doc.privacy ?? null) as PrivacyBlock | null,
    training: doc.training as TrainingBlock,
    features,
    edit_log: Array.isArray(doc.edit_log) ? (doc.edit_log as EditLogEntry[]) : [],
  };
}

/** Serialize; parse(export(doc)) is semantically identical to doc. */
export function exportModel(doc: ModelDoc): string {
  return JSON.stringify(doc, null, 1) + "\n";
}

export function featureByName(doc: ModelDoc, name: string): FeatureEntry {
  const entry = doc.features.find((f) => f.name === name);
  if (!entry) fail(`model has no feature '${name}'`);
  return entry;
}

export function deepClone<T>(value: T): T {
  return structuredClone(value);
}
