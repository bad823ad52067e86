"""Cost-sensitive fitting: the learner's best response and the
follow-the-leader update both reduce to minimizing a per-instance linear
functional of the prediction probabilities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import DimensionError, NumericError
from .hypothesis import LinearHypothesis, sigmoid, zero_model
from .metrics import as_weights


@dataclass
class CostVector:
    """c0[i] / c1[i]: cost of predicting 0 / 1 on instance i."""

    c0: np.ndarray
    c1: np.ndarray

    def __post_init__(self):
        self.c0 = np.asarray(self.c0, dtype=np.float64)
        self.c1 = np.asarray(self.c1, dtype=np.float64)
        if self.c0.shape != self.c1.shape:
            raise DimensionError("c0 and c1 must have equal length")
        if not (np.all(np.isfinite(self.c0)) and np.all(np.isfinite(self.c1))):
            raise NumericError("costs must be finite")

    @property
    def linear_coeffs(self) -> np.ndarray:
        """L[i] = c1[i] - c0[i]; the objective is sum L_i * p_i + const."""
        return self.c1 - self.c0


def build_costs(d: Dataset, w0, delta_terms) -> CostVector:
    """Costs for the reweighted-risk game.

    Predicting 0 on i costs the per-instance loss of the 0-prediction
    scaled by the base weight; predicting 1 costs the 1-prediction loss
    plus the instance's accumulated fairness pressure ``delta_terms[i]``.
    With the linear surrogate loss, l(1,1)=l(0,0)=0 and l(0,1)=l(1,0)=1.
    """
    w = as_weights(w0, d.n)
    delta = np.asarray(delta_terms, dtype=np.float64)
    if delta.shape != (d.n,):
        raise DimensionError("delta_terms must have one entry per instance")
    y = d.labels
    c0 = np.where(y == 1, w, 0.0)
    c1 = np.where(y == 1, 0.0, w) + delta
    return CostVector(c0, c1)


def fit_linear_objective(
    d: Dataset,
    coeffs: np.ndarray,
    group_onehot: bool = False,
    step: float = 0.1,
    max_iter: int = 500,
    tol: float = 1e-6,
) -> LinearHypothesis:
    """Heuristic minimizer of sum_i coeffs[i] * sigmoid(score_i) over
    logistic-linear models.

    Full-batch gradient descent from the zero model with a fixed step;
    stops early when the gradient infinity-norm drops below ``tol``. The
    best iterate seen is returned, so the objective never exceeds the
    zero model's.
    """
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.shape != (d.n,):
        raise DimensionError("coefficient vector must have one entry per instance")
    model = zero_model(d, group_onehot)
    x = model.input_matrix(d)
    theta = np.zeros(x.shape[1])
    bias = 0.0

    def objective(th, b):
        return float(coeffs @ sigmoid(x @ th + b))

    best = (objective(theta, bias), theta.copy(), bias)
    for _ in range(max_iter):
        p = sigmoid(x @ theta + bias)
        glue = coeffs * p * (1.0 - p)
        g_theta = x.T @ glue
        g_bias = float(glue.sum())
        if max(np.max(np.abs(g_theta), initial=0.0), abs(g_bias)) < tol:
            break
        theta -= step * g_theta
        bias -= step * g_bias
        if not (np.all(np.isfinite(theta)) and np.isfinite(bias)):
            raise NumericError("cost-sensitive descent diverged")
        val = objective(theta, bias)
        if val < best[0]:
            best = (val, theta.copy(), bias)
    _, theta, bias = best
    return LinearHypothesis(theta, bias, group_onehot, model.group_count)


def cost_sensitive_fit(d: Dataset, costs: CostVector, **kwargs) -> LinearHypothesis:
    """Best response to a cost pair: argmin sum c1 p + c0 (1 - p)."""
    if costs.c0.shape != (d.n,):
        raise DimensionError("cost vectors must have one entry per instance")
    return fit_linear_objective(d, costs.linear_coeffs, **kwargs)
