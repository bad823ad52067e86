"""Weight-set machinery: simplex/box projection, bucket rounding of weights,
and the discretized grid of group-marginal tuples scanned by the adversary."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, FairRobustError


@dataclass(frozen=True)
class WeightSet:
    """Family of admissible reweightings.

    ``simplex`` is the full probability simplex; ``box`` additionally
    restricts each coordinate to [(1-eps)/n, (1+eps)/n] around uniform.
    """

    kind: str
    n: int
    eps: float = 0.0

    def __post_init__(self):
        if self.kind not in ("simplex", "box"):
            raise ConfigurationError(f"unknown weight-set kind {self.kind!r}")
        if self.kind == "box" and not (0.0 <= self.eps <= 1.0):
            raise ConfigurationError("box radius must lie in [0, 1]")

    def bounds(self):
        if self.kind == "simplex":
            return np.zeros(self.n), np.full(self.n, np.inf)
        lo = np.full(self.n, (1.0 - self.eps) / self.n)
        hi = np.full(self.n, (1.0 + self.eps) / self.n)
        return lo, hi


def full_simplex(n: int) -> WeightSet:
    return WeightSet("simplex", n)


def box_set(n: int, eps: float) -> WeightSet:
    return WeightSet("box", n, eps)


@dataclass(frozen=True)
class BucketScheme:
    """Geometric buckets on [0, 1] with floor delta = gamma1 / (2n).

    Bucket 0 is [0, delta); bucket j+1 is [(1+g)^j d, (1+g)^{j+1} d). A
    weight is rounded to the upper endpoint of its bucket, so rounded
    coordinates never fall below delta and never shrink.
    """

    gamma1: float
    n: int

    def __post_init__(self):
        if not self.gamma1 > 0:
            raise ConfigurationError("gamma1 must be positive")
        if not 0.0 < self.delta < 1.0:
            raise ConfigurationError("bucket floor delta must lie in (0, 1)")

    @property
    def delta(self) -> float:
        return self.gamma1 / (2.0 * self.n)

    @property
    def bucket_count(self) -> int:
        return int(math.ceil(math.log(1.0 / self.delta) / math.log1p(self.gamma1)))

    def upper_endpoint(self, w: float) -> float:
        if w < self.delta:
            return self.delta
        ratio = 1.0 + self.gamma1
        j = int(math.floor(math.log(w / self.delta) / math.log(ratio)))
        # guard against log rounding at bucket boundaries
        while self.delta * ratio ** (j + 1) <= w:
            j += 1
        while self.delta * ratio ** j > w:
            j -= 1
        return self.delta * ratio ** (j + 1)


def discretize_weight(w, scheme: BucketScheme) -> np.ndarray:
    """Round every coordinate up to its bucket endpoint (no renormalization)."""
    arr = np.asarray(w.values if hasattr(w, "values") else w, dtype=np.float64)
    return np.array([scheme.upper_endpoint(float(v)) for v in arr])


def normalize(w) -> np.ndarray:
    arr = np.asarray(w, dtype=np.float64)
    total = arr.sum()
    if total <= 0:
        raise FairRobustError("cannot normalize a zero vector")
    return arr / total


@dataclass(frozen=True)
class MarginalGrid:
    """Geometric grid of group-marginal tuples with sum cap 1 + gamma2.

    Per-coordinate points are delta_m * (1+gamma2)^j with
    delta_m = (1+gamma2) * gamma1 / n; zero coordinates are discarded
    because the induced rate is undefined there.
    """

    gamma2: float
    gamma1: float
    n: int
    group_count: int

    def __post_init__(self):
        if not self.gamma2 > 0:
            raise ConfigurationError("gamma2 must be positive")
        if self.group_count < 2:
            raise ConfigurationError("marginal grid needs at least 2 groups")
        if not self.delta_m < 1.0:
            raise ConfigurationError("gamma1/gamma2 too large: empty marginal grid")

    @property
    def delta_m(self) -> float:
        return (1.0 + self.gamma2) * self.gamma1 / self.n

    def points(self) -> list[float]:
        ratio = 1.0 + self.gamma2
        top = int(math.ceil(math.log(1.0 / self.delta_m) / math.log(ratio)))
        return [self.delta_m * ratio ** j for j in range(top + 1)]


def enumerate_marginals(grid: MarginalGrid) -> list[tuple[float, ...]]:
    """All positive grid tuples with coordinate sum at most 1 + gamma2,
    in lexicographic order."""
    pts = grid.points()
    cap = 1.0 + grid.gamma2 + 1e-12
    out = [
        tup
        for tup in itertools.product(pts, repeat=grid.group_count)
        if sum(tup) <= cap
    ]
    if not out:
        raise ConfigurationError("marginal grid is empty; reduce gamma1 or gamma2")
    return out


def project_simplex(v, weight_set: WeightSet | None = None) -> np.ndarray:
    """Euclidean projection of v onto the weight set.

    Full simplex uses sort-and-threshold; the box-restricted case bisects
    on the shift theta in w_i = clip(v_i - theta, lo_i, hi_i) until the
    coordinates sum to 1.
    """
    arr = np.asarray(v, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise FairRobustError("cannot project a non-finite vector")
    n = arr.shape[0]
    if weight_set is None:
        weight_set = full_simplex(n)
    if weight_set.n != n:
        raise ConfigurationError("weight set size does not match vector length")

    if weight_set.kind == "simplex":
        u = np.sort(arr)[::-1]
        css = np.cumsum(u)
        ks = np.arange(1, n + 1)
        cond = u - (css - 1.0) / ks > 0
        k = int(np.nonzero(cond)[0][-1]) + 1
        theta = (css[k - 1] - 1.0) / k
        return np.maximum(arr - theta, 0.0)

    lo, hi = weight_set.bounds()
    if lo.sum() > 1.0 + 1e-12 or hi.sum() < 1.0 - 1e-12:
        raise ConfigurationError("box does not intersect the simplex")
    # sum(clip(v - theta)) is nonincreasing in theta; bracket and bisect.
    t_lo = float(np.min(arr - hi))  # sum == hi.sum() >= 1
    t_hi = float(np.max(arr - lo))  # sum == lo.sum() <= 1
    for _ in range(200):
        mid = 0.5 * (t_lo + t_hi)
        s = float(np.clip(arr - mid, lo, hi).sum())
        if s > 1.0:
            t_lo = mid
        else:
            t_hi = mid
    return np.clip(arr - 0.5 * (t_lo + t_hi), lo, hi)
