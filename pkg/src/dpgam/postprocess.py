"""Privacy-free model surgery.

Both operations here transform the public model file only - no dataset is
ever touched, so by the post-processing property they consume zero privacy
budget. Every mutation is appended to the model's edit log.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .model import GamModel, ShapeFunction

DIRECTIONS = ("increasing", "decreasing")


@dataclass(frozen=True)
class EditCommand:
    """Set or shift the shape values of bins [lo, hi) of one feature."""

    feature: str
    lo: int
    hi: int
    new_value: float | None = None
    delta: float | None = None

    def __post_init__(self):
        if (self.new_value is None) == (self.delta is None):
            raise ValueError("exactly one of new_value / delta must be given")
        if self.lo < 0 or self.hi <= self.lo:
            raise ValueError(f"bad bin range [{self.lo}, {self.hi})")


def pav(values, weights, direction: str = "increasing") -> np.ndarray:
    """Weighted isotonic fit by pool-adjacent-violators.

    Returns the monotone sequence minimizing sum w_i (out_i - in_i)^2;
    pooled blocks take their weighted mean. Decreasing is solved by
    negating, fitting increasing, and negating back.
    """
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if values.shape != weights.shape or values.ndim != 1 or len(values) < 1:
        raise ValueError("values and weights must be equal-length 1d arrays")
    if np.any(weights <= 0):
        raise ValueError("weights must be positive")
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}")
    if direction == "decreasing":
        return -pav(-values, weights, "increasing")

    # stack of (mean, weight, length) blocks; merge while out of order
    means, wsum, length = [], [], []
    for v, w in zip(values, weights):
        means.append(v)
        wsum.append(w)
        length.append(1)
        while len(means) > 1 and means[-2] > means[-1]:
            w_tot = wsum[-2] + wsum[-1]
            means[-2] = (means[-2] * wsum[-2] + means[-1] * wsum[-1]) / w_tot
            wsum[-2] = w_tot
            length[-2] += length[-1]
            del means[-1], wsum[-1], length[-1]
    return np.repeat(means, length)


def _append_log(m: GamModel, op: str, feature: str, params: dict) -> None:
    m.edit_log.append({
        "op": op,
        "feature": feature,
        "params": params,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    })


def _feature_index(m: GamModel, feature: str) -> int:
    try:
        return m.feature_names.index(feature)
    except ValueError:
        raise ValueError(f"model has no feature {feature!r}") from None


def enforce_monotone(m: GamModel, feature: str, direction: str) -> GamModel:
    """Project one shape function onto the monotone cone.

    Isotonic weights are the public (noisy) bin counts floored at 1, so the
    projection respects where the data mass lies while negative noisy counts
    cannot flip the objective.
    """
    k = _feature_index(m, feature)
    if m.bins[k].feature.kind != "numeric":
        raise ValueError(f"feature {feature!r} is categorical; monotone order undefined")
    weights = np.maximum(m.bins[k].counts, 1.0)
    out = m.clone()
    out.shapes[k] = ShapeFunction(pav(m.shapes[k].values, weights, direction))
    _append_log(out, "monotonize", feature, {"direction": direction})
    return out


def edit(m: GamModel, cmd: EditCommand) -> GamModel:
    """Apply one edit command; all other model state is untouched."""
    k = _feature_index(m, cmd.feature)
    n = m.bins[k].n_bins
    if cmd.hi > n:
        raise ValueError(f"bin range [{cmd.lo}, {cmd.hi}) exceeds {n} bins of {cmd.feature!r}")
    out = m.clone()
    values = out.shapes[k].values
    if cmd.new_value is not None:
        values[cmd.lo:cmd.hi] = cmd.new_value
        params = {"bins": [cmd.lo, cmd.hi], "set": cmd.new_value}
    else:
        values[cmd.lo:cmd.hi] += cmd.delta
        params = {"bins": [cmd.lo, cmd.hi], "delta": cmd.delta}
    out.shapes[k] = ShapeFunction(values)
    _append_log(out, "edit", cmd.feature, params)
    return out
