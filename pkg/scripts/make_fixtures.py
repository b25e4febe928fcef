#!/usr/bin/env python3
"""Regenerate the fixture corpus shared by the Python suite and the editor UI.

Writes into frontend/fixtures/:
  models/*.json      three models saved by the primary implementation
  pav_cases.json     isotonic projections with expected outputs from the
                     primary pav / enforce_monotone
  whatif_cases.json  rows with expected prediction/raw/contributions taken
                     verbatim from `dpgam predict --explain` output

The UI test suite replays these and must agree within 1e-9 (PAV) and
1e-12 (what-if).
"""

import csv
import json
import sys
import tempfile
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from conftest import synth_classification, synth_regression  # noqa: E402

from dpgam.accountant import PrivacyBudget  # noqa: E402
from dpgam.cli import dispatch  # noqa: E402
from dpgam.model import load, save  # noqa: E402
from dpgam.postprocess import enforce_monotone, pav  # noqa: E402
from dpgam.trainer import TrainConfig, train_dp_ebm, train_ebm  # noqa: E402

OUT = ROOT / "frontend" / "fixtures"


def build_models() -> dict:
    models = {}
    clf = synth_classification(n=900, seed=42)
    models["dp_classifier"] = train_dp_ebm(
        clf, TrainConfig(task="binary_classification", epochs=20, max_bins=12, seed=5),
        PrivacyBudget(2.0, 1e-6), "gdp")
    reg = synth_regression(n=700, seed=43)
    models["plain_regressor"] = train_ebm(
        reg, TrainConfig(task="regression", epochs=30, max_bins=10, seed=6))
    models["edited_classifier"] = enforce_monotone(
        models["dp_classifier"], "a", "increasing")
    return models


def pav_cases(models) -> list:
    cases = []
    rng = np.random.default_rng(7)
    for _ in range(40):
        n = int(rng.integers(1, 9))
        values = np.round(rng.normal(0, 1, n), 6)
        weights = np.round(rng.uniform(0.2, 5.0, n), 6)
        for direction in ("increasing", "decreasing"):
            cases.append({
                "values": values.tolist(),
                "weights": weights.tolist(),
                "direction": direction,
                "expected": pav(values, weights, direction).tolist(),
            })
    # whole-feature projections with the production weighting rule
    for name, m in models.items():
        for k, bins in enumerate(m.bins):
            if bins.feature.kind != "numeric":
                continue
            for direction in ("increasing", "decreasing"):
                projected = enforce_monotone(m, bins.feature.name, direction)
                cases.append({
                    "model": name,
                    "feature": bins.feature.name,
                    "values": m.shapes[k].values.tolist(),
                    "weights": np.maximum(bins.counts, 1.0).tolist(),
                    "direction": direction,
                    "expected": projected.shapes[k].values.tolist(),
                })
    return cases


def whatif_cases(models, model_dir) -> list:
    """Expected values parsed straight out of `dpgam predict --explain`."""
    rng = np.random.default_rng(11)
    cases = []
    for name, m in models.items():
        specs = [b.feature for b in m.bins]
        rows = []
        for _ in range(6):
            row = []
            for spec in specs:
                if spec.kind == "numeric":
                    row.append(repr(float(np.round(rng.uniform(spec.min, spec.max), 4))))
                else:
                    row.append(spec.vocabulary[int(rng.integers(len(spec.vocabulary)))])
            rows.append(row)
        with tempfile.TemporaryDirectory() as tmp:
            data_csv = Path(tmp) / "rows.csv"
            with data_csv.open("w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow([s.name for s in specs])
                writer.writerows(rows)
            preds_csv = Path(tmp) / "preds.csv"
            code = dispatch(["predict", "--model", str(model_dir / f"{name}.json"),
                             "--data", str(data_csv), "--out", str(preds_csv),
                             "--explain"])
            assert code == 0, "fixture predict run failed"
            with preds_csv.open(newline="", encoding="utf-8") as fh:
                reader = csv.reader(fh)
                header = next(reader)
                for row_values, record in zip(rows, reader):
                    cases.append({
                        "model": name,
                        "row": [v if s.kind == "categorical" else float(v)
                                for v, s in zip(row_values, specs)],
                        "prediction": float(record[0]),
                        "raw_score": float(record[1]),
                        "contributions": {
                            col[len("contrib_"):]: float(v)
                            for col, v in zip(header[2:], record[2:])
                        },
                    })
    return cases


def main() -> int:
    model_dir = OUT / "models"
    model_dir.mkdir(parents=True, exist_ok=True)
    models = build_models()
    for name, m in models.items():
        save(m, model_dir / f"{name}.json")
        load(model_dir / f"{name}.json")  # sanity: fixture files round-trip
    (OUT / "pav_cases.json").write_text(
        json.dumps(pav_cases(models), indent=1) + "\n", encoding="utf-8")
    (OUT / "whatif_cases.json").write_text(
        json.dumps(whatif_cases(models, model_dir), indent=1) + "\n", encoding="utf-8")
    print(f"fixture corpus written to {OUT}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
