"""Shared builders: tiny models and synthetic datasets with known structure."""

import numpy as np
import pytest

from dpgam.binning import FeatureBins, categorical_bins
from dpgam.dataset import Dataset, FeatureSpec, clip_labels
from dpgam.model import GamModel, ShapeFunction, TrainingInfo


def numeric_spec(name="x", lo=0.0, hi=10.0):
    return FeatureSpec(name=name, kind="numeric", min=lo, max=hi)


def make_model(shapes_by_feature, link="logistic", intercept=0.0, counts=None):
    """Model over numeric features on [0,10] with equal-width bins per shape."""
    bins, shapes = [], []
    for i, values in enumerate(shapes_by_feature):
        values = np.asarray(values, dtype=float)
        spec = numeric_spec(name=f"f{i}")
        edges = np.linspace(0.0, 10.0, len(values) + 1)
        c = np.full(len(values), 7.0) if counts is None else np.asarray(counts[i], float)
        bins.append(FeatureBins(feature=spec, edges=edges, counts=c))
        shapes.append(ShapeFunction(values))
    return GamModel(
        link=link, intercept=intercept, label_range=1.0, bins=bins, shapes=shapes,
        training=TrainingInfo(epochs=1, learning_rate=0.01, max_leaves=3,
                              max_bins=max(len(v) for v in shapes_by_feature), seed=0))


def mixed_model():
    """One numeric + one categorical feature, for serialization tests."""
    num = numeric_spec("age", 0.0, 90.0)
    cat = FeatureSpec(name="group", kind="categorical", vocabulary=("A", "B", "C"))
    bins = [
        FeatureBins(feature=num, edges=np.array([0.0, 30.0, 60.0, 90.0]),
                    counts=np.array([5.0, -1.2, 9.0]), is_private=True, noise_scale=2.5),
        categorical_bins(cat, np.array([3.0, 4.0, 0.5]), noise_scale=2.5),
    ]
    shapes = [ShapeFunction(np.array([-0.25, 0.1, 0.4])),
              ShapeFunction(np.array([0.05, -0.3, 0.0]))]
    return GamModel(link="logistic", intercept=0.125, label_range=1.0, bins=bins,
                    shapes=shapes,
                    training=TrainingInfo(300, 0.01, 3, 32, seed=11))


def synth_classification(n=4000, seed=0):
    """Binary labels from an additive logit with known per-feature effects."""
    rng = np.random.default_rng(seed)
    specs = [
        numeric_spec("a", 0.0, 1.0),
        numeric_spec("b", -5.0, 5.0),
        numeric_spec("c", 0.0, 100.0),
        FeatureSpec(name="g", kind="categorical", vocabulary=("u", "v", "w")),
    ]
    a = rng.uniform(0, 1, n)
    b = rng.normal(0, 2, n).clip(-5, 5)
    c = rng.uniform(0, 100, n)
    g = rng.integers(0, 3, n)
    logit = 3.0 * (a - 0.5) + 0.8 * np.sin(b) + 0.02 * (c - 50.0) + np.array([-0.7, 0.0, 0.9])[g]
    y = (rng.uniform(0, 1, n) < 1.0 / (1.0 + np.exp(-logit))).astype(float)
    d = Dataset(specs, np.column_stack([a, b, c, g.astype(float)]), y)
    return clip_labels(d, 0.0, 1.0)


def synth_regression(n=3000, seed=0, noise=0.5):
    # smooth additive target; sharp steps converge too slowly at eta=0.01 to
    # make a useful fast sanity check
    rng = np.random.default_rng(seed)
    specs = [numeric_spec("a", 0.0, 1.0), numeric_spec("b", 0.0, 1.0)]
    a = rng.uniform(0, 1, n)
    b = rng.uniform(0, 1, n)
    y = 4.0 * a + 2.0 * np.sin(2 * np.pi * b) + rng.normal(0, noise, n)
    d = Dataset(specs, np.column_stack([a, b]), y)
    return clip_labels(d, -4.0, 8.0)


def write_registry(tmp_path, dataset, name, task, label_bounds, label_column="y"):
    """Materialize a dataset + schema + registry file the harness can resolve."""
    import json

    from dpgam.dataset import export_csv

    data_dir = tmp_path / "data"
    data_dir.mkdir(exist_ok=True)
    export_csv(dataset, data_dir / f"{name}.csv", label_column)
    schema = []
    for spec in dataset.features:
        if spec.kind == "numeric":
            schema.append({"name": spec.name, "kind": spec.kind,
                           "min": spec.min, "max": spec.max})
        else:
            schema.append({"name": spec.name, "kind": spec.kind,
                           "vocabulary": list(spec.vocabulary)})
    (data_dir / f"{name}.schema.json").write_text(json.dumps(schema), encoding="utf-8")
    registry = {name: {
        "csv": f"data/{name}.csv",
        "schema": f"data/{name}.schema.json",
        "label_column": label_column,
        "label_bounds": list(label_bounds),
        "task": task,
    }}
    reg_path = tmp_path / "registry.json"
    reg_path.write_text(json.dumps(registry), encoding="utf-8")
    return reg_path


@pytest.fixture
def classification_data():
    return synth_classification()


@pytest.fixture
def regression_data():
    return synth_regression()
