"""The additive model: score = intercept + sum_k shape_k[bin_k(x_k)].

Prediction is a pure function of the model file plus the row. Scores
accumulate left to right in feature order, which is what makes the
contribution breakdown sum back to the raw score bit-exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .binning import FeatureBins, assign, lookup
from .dataset import FeatureSpec

SCHEMA_VERSION = 1
LINKS = ("identity", "logistic")


@dataclass
class ShapeFunction:
    """Additive score values, one per bin (logits under the logistic link)."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or not np.all(np.isfinite(self.values)):
            raise ValueError("shape values must be a finite 1d array")


@dataclass(frozen=True)
class PrivacyInfo:
    epsilon: float
    delta: float
    accountant: str
    sigma_train: float
    sigma_bin: float


@dataclass(frozen=True)
class TrainingInfo:
    epochs: int
    learning_rate: float
    max_leaves: int
    max_bins: int
    seed: int


@dataclass(frozen=True)
class Contribution:
    feature: str
    bin_index: int
    score: float


@dataclass
class GamModel:
    link: str
    intercept: float
    label_range: float
    bins: list[FeatureBins]
    shapes: list[ShapeFunction]
    training: TrainingInfo
    privacy: PrivacyInfo | None = None
    edit_log: list[dict] = field(default_factory=list)

    def __post_init__(self):
        if self.link not in LINKS:
            raise ValueError(f"link must be one of {LINKS}, got {self.link!r}")
        if len(self.bins) != len(self.shapes):
            raise ValueError("one shape function per feature required")
        for b, s in zip(self.bins, self.shapes):
            if len(s.values) != b.n_bins:
                raise ValueError(
                    f"feature {b.feature.name!r}: {len(s.values)} shape values "
                    f"for {b.n_bins} bins")

    @property
    def feature_names(self) -> list[str]:
        return [b.feature.name for b in self.bins]

    def clone(self) -> "GamModel":
        """Deep value copy; editing operations return new models."""
        return GamModel(
            link=self.link,
            intercept=self.intercept,
            label_range=self.label_range,
            bins=[FeatureBins(b.feature, None if b.edges is None else b.edges.copy(),
                              b.counts.copy(), b.is_private, b.noise_scale)
                  for b in self.bins],
            shapes=[ShapeFunction(s.values.copy()) for s in self.shapes],
            training=self.training,
            privacy=self.privacy,
            edit_log=[dict(e) for e in self.edit_log],
        )


def _sigmoid(s):
    # stable in both tails
    s = np.atleast_1d(np.asarray(s, dtype=float))
    out = np.empty_like(s)
    pos = s >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-s[pos]))
    e = np.exp(s[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def raw_score(m: GamModel, row) -> float:
    """intercept + per-feature shape values, summed in feature order."""
    score = m.intercept
    for bins, shape, x in zip(m.bins, m.shapes, row):
        score += shape.values[lookup(bins, x)]
    return float(score)


def predict(m: GamModel, row) -> float:
    """Raw score under the identity link, sigmoid of it under logistic."""
    s = raw_score(m, row)
    if m.link == "logistic":
        return float(_sigmoid(s)[0])
    return s


def contributions(m: GamModel, row) -> list[Contribution]:
    """Per-feature score breakdown; intercept + sum(scores) == raw_score exactly."""
    out = []
    for bins, shape, x in zip(m.bins, m.shapes, row):
        b = lookup(bins, x)
        out.append(Contribution(feature=bins.feature.name, bin_index=b,
                                score=float(shape.values[b])))
    return out


def bin_matrix(m: GamModel, rows: np.ndarray) -> np.ndarray:
    """N x K matrix of bin indices for a batch of encoded rows."""
    return np.column_stack([assign(b, rows[:, k]) for k, b in enumerate(m.bins)])


def raw_scores(m: GamModel, rows: np.ndarray) -> np.ndarray:
    """Batch raw scores; same left-to-right accumulation as raw_score."""
    B = bin_matrix(m, rows)
    scores = np.full(rows.shape[0], float(m.intercept))
    for k, shape in enumerate(m.shapes):
        scores += shape.values[B[:, k]]
    return scores


def predict_batch(m: GamModel, rows: np.ndarray) -> np.ndarray:
    s = raw_scores(m, rows)
    return _sigmoid(s) if m.link == "logistic" else s


def _feature_to_json(bins: FeatureBins, shape: ShapeFunction) -> dict:
    spec = bins.feature
    entry: dict = {"name": spec.name, "kind": spec.kind}
    if spec.kind == "numeric":
        entry["edges"] = bins.edges.tolist()
    else:
        entry["vocabulary"] = list(spec.vocabulary)
    entry["counts"] = bins.counts.tolist()
    entry["shape"] = shape.values.tolist()
    entry["is_private"] = bins.is_private
    entry["noise_scale"] = bins.noise_scale
    return entry


def _feature_from_json(entry: dict) -> tuple[FeatureBins, ShapeFunction]:
    kind = entry["kind"]
    if kind == "numeric":
        edges = np.asarray(entry["edges"], dtype=float)
        if len(edges) < 2:
            raise ValueError(f"feature {entry.get('name')!r}: need at least 2 edges")
        spec = FeatureSpec(name=entry["name"], kind="numeric",
                           min=float(edges[0]), max=float(edges[-1]))
        bins = FeatureBins(feature=spec, edges=edges,
                           counts=np.asarray(entry["counts"], dtype=float),
                           is_private=bool(entry.get("is_private", False)),
                           noise_scale=float(entry.get("noise_scale", 0.0)))
    else:
        spec = FeatureSpec(name=entry["name"], kind="categorical",
                           vocabulary=tuple(entry["vocabulary"]))
        bins = FeatureBins(feature=spec, edges=None,
                           counts=np.asarray(entry["counts"], dtype=float),
                           is_private=bool(entry.get("is_private", False)),
                           noise_scale=float(entry.get("noise_scale", 0.0)))
    return bins, ShapeFunction(np.asarray(entry["shape"], dtype=float))


def to_json_dict(m: GamModel) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "link": m.link,
        "intercept": m.intercept,
        "label_range": m.label_range,
        "privacy": None if m.privacy is None else {
            "epsilon": m.privacy.epsilon,
            "delta": m.privacy.delta,
            "accountant": m.privacy.accountant,
            "sigma_train": m.privacy.sigma_train,
            "sigma_bin": m.privacy.sigma_bin,
        },
        "training": {
            "epochs": m.training.epochs,
            "learning_rate": m.training.learning_rate,
            "max_leaves": m.training.max_leaves,
            "max_bins": m.training.max_bins,
            "seed": m.training.seed,
        },
        "features": [_feature_to_json(b, s) for b, s in zip(m.bins, m.shapes)],
        "edit_log": m.edit_log,
    }
    return doc


def from_json_dict(doc: dict) -> GamModel:
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported model schema_version {version!r}")
    privacy = doc.get("privacy")
    features = [_feature_from_json(e) for e in doc["features"]]
    tr = doc["training"]
    return GamModel(
        link=doc["link"],
        intercept=float(doc["intercept"]),
        label_range=float(doc["label_range"]),
        bins=[b for b, _ in features],
        shapes=[s for _, s in features],
        training=TrainingInfo(epochs=int(tr["epochs"]),
                              learning_rate=float(tr["learning_rate"]),
                              max_leaves=int(tr["max_leaves"]),
                              max_bins=int(tr["max_bins"]),
                              seed=int(tr["seed"])),
        privacy=None if privacy is None else PrivacyInfo(
            epsilon=float(privacy["epsilon"]),
            delta=float(privacy["delta"]),
            accountant=privacy["accountant"],
            sigma_train=float(privacy["sigma_train"]),
            sigma_bin=float(privacy["sigma_bin"]),
        ),
        edit_log=list(doc.get("edit_log", [])),
    )


def save(m: GamModel, path) -> None:
    """JSON with full round-trip float precision; load(save(m)) == m."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(to_json_dict(m), fh, indent=1, allow_nan=False)
        fh.write("\n")


def load(path) -> GamModel:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: malformed model file ({exc})") from None
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: malformed model file")
    try:
        return from_json_dict(doc)
    except KeyError as exc:
        raise ValueError(f"{path}: model file missing field {exc}") from None
