"""Per-feature bin construction and lookup.

Numeric features get cut-point bins: plain equal-width, exact histograms,
or the noisy equal-width-then-greedy-merge scheme that yields approximately
equal-density bins under differential privacy. Categorical features get one
bin per vocabulary entry. Bin definitions (edges + counts) are public model
state once built.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .dataset import FeatureSpec

_log = logging.getLogger(__name__)

# counts values clamped into range by histogram(); should stay 0 when labels
# and features were clipped upstream
CLAMP_WARNINGS = 0


@dataclass
class FeatureBins:
    """Public bin definition for one feature: cut points plus (noisy) counts.

    Numeric: ``edges`` holds n_bins+1 strictly increasing cut points spanning
    [spec.min, spec.max]; bin i is [edges[i], edges[i+1]), the last bin
    right-closed. Categorical: ``edges`` is None and bin i is vocabulary
    entry i.
    """

    feature: FeatureSpec
    edges: np.ndarray | None
    counts: np.ndarray
    is_private: bool = False
    noise_scale: float = 0.0

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=float)
        if self.counts.ndim != 1 or len(self.counts) < 1:
            raise ValueError("counts must be a non-empty 1d array")
        if not np.all(np.isfinite(self.counts)):
            raise ValueError("counts must be finite (noisy counts may be negative, never inf/nan)")
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be >= 0")
        if self.feature.kind == "numeric":
            if self.edges is None:
                raise ValueError("numeric bins need edges")
            self.edges = np.asarray(self.edges, dtype=float)
            if len(self.edges) != len(self.counts) + 1:
                raise ValueError("need len(edges) == n_bins + 1")
            if not np.all(np.diff(self.edges) > 0):
                raise ValueError("edges must be strictly increasing")
            if self.edges[0] != self.feature.min or self.edges[-1] != self.feature.max:
                raise ValueError("edges must span [feature.min, feature.max]")
        else:
            if self.edges is not None:
                raise ValueError("categorical bins carry no edges")
            if len(self.counts) != len(self.feature.vocabulary):
                raise ValueError("need one count per vocabulary entry")

    @property
    def n_bins(self) -> int:
        return len(self.counts)


def equal_width_bins(spec: FeatureSpec, n: int) -> FeatureBins:
    """n equal-width bins over [spec.min, spec.max], counts zeroed."""
    if spec.kind != "numeric":
        raise ValueError(f"equal_width_bins needs a numeric feature, got {spec.kind}")
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    edges = np.linspace(spec.min, spec.max, n + 1)
    return FeatureBins(feature=spec, edges=edges, counts=np.zeros(n))


def assign(bins: FeatureBins, values) -> np.ndarray:
    """Vectorized bin lookup; see lookup() for the per-value rule."""
    values = np.asarray(values)
    if bins.feature.kind == "numeric":
        idx = np.searchsorted(bins.edges, values.astype(float), side="right") - 1
        return np.clip(idx, 0, bins.n_bins - 1)
    with np.errstate(invalid="ignore"):
        idx = values.astype(np.int64)
    bad = (values != idx) | (idx < 0) | (idx >= bins.n_bins)
    if values.size and bad.any():
        raise ValueError(
            f"unknown category index {values[bad][:1]} for feature {bins.feature.name!r}")
    return idx


def lookup(bins: FeatureBins, x) -> int:
    """Bin index of a single value.

    Numeric: binary search over the edges with the half-open rule
    (edges[i] <= x < edges[i+1]), last bin right-closed; out-of-range values
    clamp to the first/last bin. Categorical: x may be a vocabulary label or
    an integer index; unknown categories are an error.
    """
    if bins.feature.kind == "categorical" and isinstance(x, str):
        try:
            x = bins.feature.vocabulary.index(x)
        except ValueError:
            raise ValueError(f"unknown category {x!r} for feature {bins.feature.name!r}") from None
    return int(assign(bins, np.asarray([x]))[0])


def histogram(values, bins: FeatureBins) -> FeatureBins:
    """Fill exact counts; a new FeatureBins is returned.

    Values outside [min, max] should not occur post-clipping; they are
    clamped to the boundary bins and tallied in CLAMP_WARNINGS.
    """
    global CLAMP_WARNINGS
    values = np.asarray(values, dtype=float)
    if bins.feature.kind == "numeric" and values.size:
        out = int(np.count_nonzero((values < bins.edges[0]) | (values > bins.edges[-1])))
        if out:
            CLAMP_WARNINGS += out
            _log.warning("%d values outside [%g, %g] for %r clamped to boundary bins",
                         out, bins.edges[0], bins.edges[-1], bins.feature.name)
    idx = assign(bins, values)
    counts = np.bincount(idx, minlength=bins.n_bins).astype(float)
    return FeatureBins(feature=bins.feature, edges=bins.edges, counts=counts,
                       is_private=bins.is_private, noise_scale=bins.noise_scale)


def dp_quantile_bins(values, spec: FeatureSpec, m: int, noise_scale: float,
                     rng: np.random.Generator | int) -> FeatureBins:
    """Noisy equal-width histogram greedily merged toward equal density.

    Start from 2m equal-width bins, add N(0, noise_scale^2) to each count
    (sensitivity-1 release), then walk left to right merging any bin whose
    noisy count is below t = N/m into its right neighbor; if the final bin
    is still below t it merges into its left neighbor. Single pass, no
    re-scanning. Noisy counts may be negative and participate unmodified;
    merging preserves total noisy mass and output edges are a subset of the
    initial equal-width edges.
    """
    if spec.kind != "numeric":
        raise ValueError(f"dp_quantile_bins needs a numeric feature, got {spec.kind}")
    if m < 1:
        raise ValueError(f"need m >= 1, got {m}")
    if noise_scale < 0:
        raise ValueError("noise_scale must be >= 0")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    values = np.asarray(values, dtype=float)
    target = len(values) / m

    wide = histogram(values, equal_width_bins(spec, 2 * m))
    noisy = wide.counts + noise_scale * rng.standard_normal(wide.n_bins)

    out_edges = [wide.edges[0]]
    out_counts = []
    acc = 0.0
    for i in range(wide.n_bins):
        acc += noisy[i]
        last = i == wide.n_bins - 1
        if acc >= target or last:
            out_edges.append(wide.edges[i + 1])
            out_counts.append(acc)
            acc = 0.0
    if len(out_counts) >= 2 and out_counts[-1] < target:
        out_counts[-2] += out_counts[-1]
        del out_counts[-1]
        del out_edges[-2]

    return FeatureBins(feature=spec, edges=np.asarray(out_edges),
                       counts=np.asarray(out_counts),
                       is_private=noise_scale > 0, noise_scale=noise_scale)


def categorical_bins(spec: FeatureSpec, counts_noisy, noise_scale: float = 0.0) -> FeatureBins:
    """One bin per vocabulary entry, in vocabulary order; no merging."""
    if spec.kind != "categorical":
        raise ValueError(f"categorical_bins needs a categorical feature, got {spec.kind}")
    counts_noisy = np.asarray(counts_noisy, dtype=float)
    if len(counts_noisy) != len(spec.vocabulary):
        raise ValueError(
            f"{len(counts_noisy)} counts for {len(spec.vocabulary)} categories")
    return FeatureBins(feature=spec, edges=None, counts=counts_noisy,
                       is_private=noise_scale > 0, noise_scale=noise_scale)
