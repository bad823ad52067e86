"""Weighted risk and fairness gaps under arbitrary instance reweightings."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import DegenerateMassError, DimensionError, FairRobustError
from .hypothesis import Model, members_of, predict_prob

DP = "DP"
EO = "EO"

# Losses keyed by id. "surrogate" is the linear relaxation
# l(p, y) = y(1-p) + (1-y)p, bounded by 1 and convex (linear) in p;
# "zero_one" thresholds at 0.5 first.
M_LOSS = 1.0


@dataclass
class WeightVector:
    """Point on the probability simplex over the n instances."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if np.any(self.values < -1e-12):
            raise FairRobustError("weights must be nonnegative")
        if abs(self.values.sum() - 1.0) > 1e-9:
            raise FairRobustError("weights must sum to 1")

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class FairnessSpec:
    notion: str = DP
    epsilon_fair: float = 0.05

    def __post_init__(self):
        if self.notion not in (DP, EO):
            raise FairRobustError(f"unknown fairness notion {self.notion!r}")
        if not self.epsilon_fair > 0:
            raise FairRobustError("epsilon_fair must be positive")


def as_weights(w, n: int) -> np.ndarray:
    """Accept a WeightVector or raw array; only the length is enforced."""
    arr = w.values if isinstance(w, WeightVector) else np.asarray(w, dtype=np.float64)
    if arr.shape != (n,):
        raise DimensionError(f"weight vector has length {arr.shape}, expected ({n},)")
    return arr


def uniform_weights(n: int) -> WeightVector:
    return WeightVector(np.full(n, 1.0 / n))


def loss_values(model: Model, d: Dataset, loss: str = "surrogate") -> np.ndarray:
    """Per-instance loss vector for the mixture prediction probabilities."""
    p = predict_prob(model, d)
    y = d.labels.astype(np.float64)
    if loss == "surrogate":
        return y * (1.0 - p) + (1.0 - y) * p
    if loss == "zero_one":
        return ((p >= 0.5).astype(np.float64) != y).astype(np.float64)
    raise FairRobustError(f"unknown loss {loss!r}")


def weighted_risk(model: Model, d: Dataset, w, loss: str = "surrogate") -> float:
    """sum_i w_i * l(p_i, y_i) with p_i the prediction probability."""
    weights = as_weights(w, d.n)
    return float(weights @ loss_values(model, d, loss))


def group_rates(probs: np.ndarray, membership: np.ndarray, weights: np.ndarray,
                cell_count: int, what: str = "group") -> np.ndarray:
    """Weighted acceptance rate per cell: sum_w p / sum_w over each cell."""
    rates = np.empty(cell_count)
    for c in range(cell_count):
        sel = membership == c
        mass = float(weights[sel].sum())
        if mass <= 0.0:
            raise DegenerateMassError(f"{what} {c} has zero weighted mass")
        rates[c] = float(weights[sel] @ probs[sel]) / mass
    return rates


def dp_gap(model: Model, d: Dataset, w) -> float:
    """Largest pairwise difference in weighted acceptance rates across groups."""
    weights = as_weights(w, d.n)
    probs = predict_prob(model, d)
    rates = group_rates(probs, d.groups, weights, d.group_count)
    if d.group_count < 2:
        return 0.0
    return float(rates.max() - rates.min())


def eo_gap(model: Model, d: Dataset, w) -> float:
    """Mean over labels of the per-label acceptance-rate gap across groups.

    The label-0 part compares weighted false positive rates, the label-1
    part weighted true positive rates; each (group, label) cell must carry
    positive weight.
    """
    weights = as_weights(w, d.n)
    probs = predict_prob(model, d)
    per_label = []
    for y in (0, 1):
        sel = d.labels == y
        if not np.any(sel):
            raise DegenerateMassError(f"no instances with label {y}")
        rates = group_rates(
            probs[sel], d.groups[sel], weights[sel], d.group_count,
            what=f"(group, label={y}) cell",
        )
        per_label.append(0.0 if d.group_count < 2 else float(rates.max() - rates.min()))
    return 0.5 * (per_label[0] + per_label[1])


def gap(model: Model, d: Dataset, w, spec: FairnessSpec) -> float:
    return dp_gap(model, d, w) if spec.notion == DP else eo_gap(model, d, w)


def gap_randomized(model: Model, d: Dataset, w, spec: FairnessSpec) -> float:
    """Expected gap of a randomized classifier: mean of member gaps.

    This is not the gap of the averaged prediction; members' signed rate
    differences do not cancel.
    """
    members = members_of(model)
    return float(np.mean([gap(m, d, w, spec) for m in members]))


def accuracy(model: Model, d: Dataset, threshold: float = 0.5) -> float:
    p = predict_prob(model, d)
    return float(np.mean((p >= threshold).astype(np.int64) == d.labels))
