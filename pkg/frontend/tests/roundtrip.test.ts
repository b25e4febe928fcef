import { describe, expect, it } from "vitest";

import { exportModel, parseModel, ModelFormatError } from "../src/modelFormat.js";
import { predictRow } from "../src/scoring.js";
import { allModels } from "./helpers.js";

describe("model file round trip", () => {
  it("load -> export is parse-equal for every fixture model", () => {
    for (const [name, { text, doc }] of allModels()) {
      const reloaded = JSON.parse(exportModel(doc));
      expect(reloaded, name).toEqual(JSON.parse(text));
    }
  });

  it("export -> parse preserves shape values bit-for-bit", () => {
    for (const [, { doc }] of allModels()) {
      const again = parseModel(exportModel(doc));
      for (let k = 0; k < doc.features.length; k++) {
        expect(again.features[k].shape).toEqual(doc.features[k].shape);
        expect(again.features[k].counts).toEqual(doc.features[k].counts);
      }
    }
  });

  it("loads a minimal handwritten model and predicts with it", () => {
    const doc = parseModel(JSON.stringify({
      schema_version: 1,
      link: "identity",
      intercept: 1.0,
      label_range: 10.0,
      privacy: null,
      training: { epochs: 1, learning_rate: 0.01, max_leaves: 3, max_bins: 1, seed: 0 },
      features: [{ name: "x", kind: "numeric", edges: [0, 1], counts: [4],
                   shape: [2.5], is_private: false, noise_scale: 0 }],
      edit_log: [],
    }));
    expect(predictRow(doc, [0.5])).toBe(3.5);
  });

  it("rejects malformed files with a readable message", () => {
    expect(() => parseModel("{ not json")).toThrow(ModelFormatError);
    expect(() => parseModel("{}")).toThrow(/schema_version/);
    expect(() => parseModel(JSON.stringify({ schema_version: 1, link: "probit" })))
      .toThrow(/link/);
  });

  it("rejects shape/bin length mismatches", () => {
    const [{ text }] = [...allModels().values()];
    const doc = JSON.parse(text);
    doc.features[0].shape = doc.features[0].shape.slice(1);
    expect(() => parseModel(JSON.stringify(doc))).toThrow(/shape values/);
  });

  it("rejects non-increasing edges", () => {
    const [{ text }] = [...allModels().values()];
    const doc = JSON.parse(text);
    const numeric = doc.features.find((f: { kind: string }) => f.kind === "numeric");
    numeric.edges[1] = numeric.edges[0];
    expect(() => parseModel(JSON.stringify(doc))).toThrow(/increasing/);
  });
});
