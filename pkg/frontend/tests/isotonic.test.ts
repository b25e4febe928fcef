import { describe, expect, it } from "vitest";

import { monotoneShape, pav } from "../src/isotonic.js";
import { featureByName } from "../src/modelFormat.js";
import { allModels, fixtureJson, type PavCase } from "./helpers.js";

const cases = fixtureJson<PavCase[]>("pav_cases.json");

describe("client-side PAV vs the training-side fixture corpus", () => {
  it("matches every fixture case within 1e-9 per bin", () => {
    expect(cases.length).toBeGreaterThanOrEqual(80);
    for (const c of cases) {
      const got = pav(c.values, c.weights, c.direction);
      for (let b = 0; b < c.expected.length; b++) {
        expect(Math.abs(got[b] - c.expected[b]), `bin ${b}`).toBeLessThanOrEqual(1e-9);
      }
    }
  });

  it("whole-feature projections use the counts-floored-at-1 rule", () => {
    const models = allModels();
    for (const c of cases.filter((c) => c.model)) {
      const entry = featureByName(models.get(c.model!)!.doc, c.feature!);
      const got = monotoneShape(entry, c.direction);
      for (let b = 0; b < c.expected.length; b++) {
        expect(Math.abs(got[b] - c.expected[b])).toBeLessThanOrEqual(1e-9);
      }
    }
  });

  it("output is monotone and idempotent", () => {
    for (const c of cases) {
      const once = pav(c.values, c.weights, c.direction);
      const sign = c.direction === "increasing" ? 1 : -1;
      for (let b = 1; b < once.length; b++) {
        expect(sign * (once[b] - once[b - 1])).toBeGreaterThanOrEqual(-1e-12);
      }
      expect(pav(once, c.weights, c.direction)).toEqual(once);
    }
  });

  it("already-monotone input is unchanged", () => {
    expect(pav([1, 2, 3], [1, 1, 1], "increasing")).toEqual([1, 2, 3]);
  });

  it("rejects categorical features and bad weights", () => {
    const { doc } = [...allModels().values()][0];
    const categorical = doc.features.find((f) => f.kind === "categorical");
    if (categorical) {
      expect(() => monotoneShape(categorical, "increasing")).toThrow(/categorical/);
    }
    expect(() => pav([1, 2], [1, 0], "increasing")).toThrow(/positive/);
  });
});
