import { readFileSync, readdirSync } from "node:fs";
import { join } from "node:path";
import { fileURLToPath } from "node:url";

import { parseModel, type ModelDoc } from "../src/modelFormat.js";

export const FIXTURES = fileURLToPath(new URL("../fixtures", import.meta.url));

export function fixtureText(name: string): string {
  return readFileSync(join(FIXTURES, name), "utf-8");
}

export function fixtureJson<T>(name: string): T {
  return JSON.parse(fixtureText(name)) as T;
}

export function allModels(): Map<string, { text: string; doc: ModelDoc }> {
  const out = new Map<string, { text: string; doc: ModelDoc }>();
  for (const file of readdirSync(join(FIXTURES, "models"))) {
    const text = fixtureText(join("models", file));
    out.set(file.replace(/\.json$/, ""), { text, doc: parseModel(text) });
  }
  return out;
}

export interface PavCase {
  values: number[];
  weights: number[];
  direction: "increasing" | "decreasing";
  expected: number[];
  model?: string;
  feature?: string;
}

export interface WhatIfCase {
  model: string;
  row: (number | string)[];
  prediction: number;
  raw_score: number;
  contributions: Record<string, number>;
}
