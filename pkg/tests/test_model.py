"""Scoring, contribution breakdown and the JSON interchange format."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_model, mixed_model
from dpgam.model import (
    GamModel,
    ShapeFunction,
    contributions,
    from_json_dict,
    load,
    predict,
    predict_batch,
    raw_score,
    raw_scores,
    save,
    to_json_dict,
)


class TestRawScore:
    def test_zero_model(self):
        m = make_model([[0.0, 0.0], [0.0]], intercept=0.0)
        assert raw_score(m, [1.0, 2.0]) == 0.0

    def test_single_bin_plus_intercept(self):
        m = make_model([[1.5]], intercept=0.5)
        assert raw_score(m, [3.0]) == 2.0

    def test_additive_two_features(self):
        m = make_model([[0.3, 0.3], [-0.1, -0.1]], intercept=0.0)
        assert raw_score(m, [1.0, 9.0]) == pytest.approx(0.2)

    def test_additivity_across_rows(self):
        m = make_model([[0.3, -0.2, 0.5], [0.0, 1.0]])
        base = raw_score(m, [1.0, 2.0])
        moved = raw_score(m, [9.0, 2.0])  # bin 0 -> bin 2 of feature 0
        assert moved - base == pytest.approx(0.5 - 0.3, abs=1e-15)


class TestPredict:
    def test_logistic_at_zero(self):
        m = make_model([[0.0]], link="logistic")
        assert predict(m, [1.0]) == 0.5

    def test_identity_passthrough(self):
        m = make_model([[73000.0]], link="identity")
        assert predict(m, [1.0]) == 73000.0

    def test_sigmoid_tail(self):
        m = make_model([[40.0]], link="logistic")
        assert predict(m, [1.0]) > 0.999999

    def test_logistic_strictly_increasing(self):
        m = make_model([[val] for val in [0.0]], link="logistic")
        raws = np.linspace(-6, 6, 25)
        probs = [predict(make_model([[r]], link="logistic"), [1.0]) for r in raws]
        assert all(a < b for a, b in zip(probs, probs[1:]))

    def test_batch_matches_scalar_bitwise(self):
        m = mixed_model()
        rows = np.array([[12.0, 0.0], [45.0, 2.0], [89.0, 1.0]])
        batch = raw_scores(m, rows)
        for i, row in enumerate([[12.0, 0], [45.0, 2], [89.0, 1]]):
            assert batch[i] == raw_score(m, row)
        probs = predict_batch(m, rows)
        assert probs[0] == predict(m, [12.0, 0])


class TestContributions:
    def test_zero_model(self):
        m = make_model([[0.0], [0.0]])
        assert [c.score for c in contributions(m, [1.0, 1.0])] == [0.0, 0.0]

    def test_single_feature_equals_raw_minus_intercept(self):
        m = make_model([[0.7, -0.3]], intercept=0.2)
        row = [8.0]
        (c,) = contributions(m, row)
        assert c.score == raw_score(m, row) - 0.2

    @given(st.lists(st.lists(st.floats(min_value=-5, max_value=5), min_size=1, max_size=6),
                    min_size=1, max_size=5),
           st.floats(min_value=-2, max_value=2),
           st.integers(min_value=0, max_value=10**6))
    @settings(max_examples=80)
    def test_exact_sum_identity(self, shape_values, intercept, row_seed):
        m = make_model(shape_values, intercept=intercept)
        rng = np.random.default_rng(row_seed)
        row = rng.uniform(0, 10, size=len(shape_values)).tolist()
        total = intercept
        for c in contributions(m, row):
            total += c.score
        assert total == raw_score(m, row)  # bit-exact, summed in feature order

    def test_names_and_bins(self):
        m = mixed_model()
        contribs = contributions(m, [65.0, "B"])
        assert [(c.feature, c.bin_index) for c in contribs] == [("age", 2), ("group", 1)]


class TestSaveLoad:
    def test_round_trip_exact(self, tmp_path):
        m = mixed_model()
        m.edit_log.append({"op": "edit", "feature": "age",
                           "params": {"bins": [0, 1], "set": 0.125},
                           "timestamp": "2024-01-01T00:00:00+00:00"})
        path = tmp_path / "m.json"
        save(m, path)
        m2 = load(path)
        assert to_json_dict(m2) == to_json_dict(m)
        for s1, s2 in zip(m.shapes, m2.shapes):
            assert s1.values.tolist() == s2.values.tolist()
        assert m2.privacy == m.privacy
        assert m2.edit_log == m.edit_log

    def test_round_trip_full_precision(self, tmp_path):
        m = make_model([[0.1 + 0.2, 1 / 3, np.nextafter(1.0, 2.0)]])
        path = tmp_path / "m.json"
        save(m, path)
        assert load(path).shapes[0].values.tolist() == m.shapes[0].values.tolist()

    def test_shape_length_mismatch_rejected(self, tmp_path):
        doc = to_json_dict(mixed_model())
        doc["features"][0]["shape"] = [0.0]
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc), encoding="utf-8")
        with pytest.raises(ValueError, match="shape values"):
            load(path)

    def test_minimal_handwritten_model(self, tmp_path):
        doc = {
            "schema_version": 1,
            "link": "identity",
            "intercept": 1.0,
            "label_range": 10.0,
            "privacy": None,
            "training": {"epochs": 1, "learning_rate": 0.01, "max_leaves": 3,
                         "max_bins": 1, "seed": 0},
            "features": [{"name": "x", "kind": "numeric", "edges": [0.0, 1.0],
                          "counts": [4.0], "shape": [2.5], "is_private": False,
                          "noise_scale": 0.0}],
            "edit_log": [],
        }
        path = tmp_path / "minimal.json"
        path.write_text(json.dumps(doc), encoding="utf-8")
        m = load(path)
        assert predict(m, [0.5]) == 3.5

    def test_malformed_file(self, tmp_path):
        path = tmp_path / "garbage.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ValueError, match="malformed"):
            load(path)

    def test_version_mismatch(self, tmp_path):
        doc = to_json_dict(mixed_model())
        doc["schema_version"] = 99
        path = tmp_path / "v99.json"
        path.write_text(json.dumps(doc), encoding="utf-8")
        with pytest.raises(ValueError, match="schema_version"):
            load(path)

    def test_non_finite_shape_rejected(self):
        with pytest.raises(ValueError):
            ShapeFunction(np.array([1.0, np.inf]))


def test_model_validation():
    m = mixed_model()
    with pytest.raises(ValueError, match="link"):
        GamModel(link="probit", intercept=0.0, label_range=1.0, bins=m.bins,
                 shapes=m.shapes, training=m.training)
    with pytest.raises(ValueError, match="shape values"):
        GamModel(link="identity", intercept=0.0, label_range=1.0, bins=m.bins,
                 shapes=[ShapeFunction(np.zeros(5)), m.shapes[1]], training=m.training)


def test_unknown_category_at_predict():
    m = mixed_model()
    with pytest.raises(ValueError, match="unknown category"):
        predict(m, [10.0, "Z"])


def test_clone_is_deep():
    m = mixed_model()
    c = m.clone()
    c.shapes[0].values[0] = 99.0
    c.edit_log.append({"op": "x"})
    assert m.shapes[0].values[0] == -0.25
    assert m.edit_log == []
