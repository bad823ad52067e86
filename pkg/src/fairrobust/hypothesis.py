"""Linear scoring models with probabilistic output, and uniform ensembles."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, Instance
from .errors import DimensionError, NumericError


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class LinearHypothesis:
    """Logistic-linear scorer: prob = sigmoid(coef . x + intercept).

    When ``group_onehot`` is set, the input is the feature vector extended
    with a one-hot encoding of the protected group (``group_count`` wide).
    """

    coefficients: np.ndarray
    intercept: float = 0.0
    group_onehot: bool = False
    group_count: int = 0

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=np.float64)
        if not (np.all(np.isfinite(self.coefficients)) and np.isfinite(self.intercept)):
            raise NumericError("hypothesis has non-finite parameters")

    def input_matrix(self, d: Dataset) -> np.ndarray:
        if self.group_onehot:
            onehot = np.zeros((d.n, self.group_count))
            onehot[np.arange(d.n), d.groups] = 1.0
            x = np.column_stack([d.features, onehot])
        else:
            x = d.features
        if x.shape[1] != self.coefficients.shape[0]:
            raise DimensionError(
                f"model expects {self.coefficients.shape[0]} inputs, "
                f"data provides {x.shape[1]}"
            )
        return x

    def scores(self, d: Dataset) -> np.ndarray:
        return self.input_matrix(d) @ self.coefficients + self.intercept


@dataclass
class Ensemble:
    """Uniform mixture of linear hypotheses; predicts the mean probability."""

    members: list = field(default_factory=list)

    def __post_init__(self):
        if not self.members:
            raise ValueError("ensemble needs at least one member")


Model = LinearHypothesis | Ensemble


def _instance_dataset(inst: Instance) -> Dataset:
    return Dataset(
        features=inst.features.reshape(1, -1),
        groups=np.array([inst.group]),
        labels=np.array([inst.label]),
        group_count=inst.group + 1,
    )


def predict_prob(model: Model, data: Dataset | Instance):
    """Probability of predicting 1, per instance.

    Returns an array for a Dataset and a float for a single Instance.
    Ensembles average their members' probabilities.
    """
    single = isinstance(data, Instance)
    d = _instance_dataset(data) if single else data
    if isinstance(model, Ensemble):
        probs = np.mean([sigmoid(m.scores(d)) for m in model.members], axis=0)
    else:
        probs = sigmoid(model.scores(d))
    return float(probs[0]) if single else probs


def hard_predict(model: Model, data: Dataset | Instance, threshold: float = 0.5):
    """Thresholded prediction: 1 iff predict_prob >= threshold."""
    if not (0.0 < threshold < 1.0):
        raise ValueError("threshold must lie in (0, 1)")
    p = predict_prob(model, data)
    if isinstance(data, Instance):
        return int(p >= threshold)
    return (p >= threshold).astype(np.int64)


def members_of(model: Model) -> list:
    return model.members if isinstance(model, Ensemble) else [model]


def zero_model(d: Dataset, group_onehot: bool = False) -> LinearHypothesis:
    width = d.feature_dim + (d.group_count if group_onehot else 0)
    return LinearHypothesis(
        coefficients=np.zeros(width),
        intercept=0.0,
        group_onehot=group_onehot,
        group_count=d.group_count if group_onehot else 0,
    )


def model_to_dict(model: Model):
    if isinstance(model, Ensemble):
        return [model_to_dict(m) for m in model.members]
    out = {"coefficients": model.coefficients.tolist(), "intercept": float(model.intercept)}
    if model.group_onehot:
        out["group_onehot"] = True
        out["group_count"] = model.group_count
    return out


def model_from_dict(obj) -> Model:
    if isinstance(obj, list):
        return Ensemble([model_from_dict(m) for m in obj])
    return LinearHypothesis(
        coefficients=np.asarray(obj["coefficients"], dtype=np.float64),
        intercept=float(obj["intercept"]),
        group_onehot=bool(obj.get("group_onehot", False)),
        group_count=int(obj.get("group_count", 0)),
    )


def save_model(model: Model, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh)


def load_model(path) -> Model:
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))


def fit_logistic(
    d: Dataset,
    group_onehot: bool = False,
    step: float = 1.0,
    max_iter: int = 2000,
    tol: float = 1e-7,
) -> LinearHypothesis:
    """Unconstrained logistic regression by full-batch gradient descent.

    Deterministic: zero initialization, fixed step on the mean log-loss
    gradient, stop when the gradient infinity-norm falls below ``tol``.
    """
    model = zero_model(d, group_onehot)
    x = model.input_matrix(d)
    y = d.labels.astype(np.float64)
    coef = np.zeros(x.shape[1])
    intercept = 0.0
    for _ in range(max_iter):
        p = sigmoid(x @ coef + intercept)
        err = p - y
        g_coef = x.T @ err / d.n
        g_int = float(np.mean(err))
        if max(np.max(np.abs(g_coef), initial=0.0), abs(g_int)) < tol:
            break
        coef -= step * g_coef
        intercept -= step * g_int
        if not (np.all(np.isfinite(coef)) and np.isfinite(intercept)):
            raise NumericError("logistic fit diverged")
    return LinearHypothesis(coef, intercept, group_onehot, model.group_count)
