"""Adversaries over reweightings: the multiplier player's best response on
the marginal grid, and box-constrained attacks that certify how unfair a
fixed classifier can be made."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import ConfigurationError, DegenerateMassError, FairRobustError
from .geometry import BucketScheme, MarginalGrid, discretize_weight, enumerate_marginals
from .hypothesis import Model, predict_prob
from .linprog import INFEASIBLE, OPTIMAL, LinearProgram, LpSolution, solve
from .metrics import DP, EO, FairnessSpec, WeightVector


@dataclass
class LagrangeAtom:
    """One active fairness constraint: a weight snapshot, an ordered pair of
    cells, and the multiplier mass placed on it.

    ``label`` is None for acceptance-rate (DP) constraints; for equalized
    odds it restricts both cells to instances with that label.
    """

    weights: np.ndarray
    pair: tuple[int, int]
    value: float
    label: int | None = None


@dataclass
class SparseLagrange:
    """Sparse multiplier vector stored as atoms; total mass is budgeted by B
    for a single best response (at most one atom, at full budget)."""

    atoms: list = field(default_factory=list)
    budget: float = 1.0
    scan: "Violation | None" = None

    @property
    def total(self) -> float:
        return float(sum(a.value for a in self.atoms))

    def scaled(self, factor: float) -> "SparseLagrange":
        return SparseLagrange(
            atoms=[
                LagrangeAtom(a.weights, a.pair, a.value * factor, a.label)
                for a in self.atoms
            ],
            budget=self.budget,
        )


@dataclass
class Violation:
    """Witness of a fairness violation: the weight achieving it, the ordered
    pair (and label cell, for EO), and the rate difference."""

    weights: np.ndarray
    pair: tuple[int, int]
    value: float
    label: int | None = None


def cell_mask(d: Dataset, group: int, label: int | None) -> np.ndarray:
    mask = d.groups == group
    if label is not None:
        mask = mask & (d.labels == label)
    return mask


def rate(weights: np.ndarray, probs: np.ndarray, mask: np.ndarray) -> float:
    mass = float(weights[mask].sum())
    if mass <= 0.0:
        raise DegenerateMassError("cell has zero weighted mass")
    return float(weights[mask] @ probs[mask]) / mass


def _ordered_pairs(group_count: int):
    return [(a, b) for a in range(group_count) for b in range(group_count) if a != b]


def _pair_lp(probs, mask_a, mask_b, pi_a, pi_b, n) -> LinearProgram:
    """maximize (1/pi_a) sum_{a} w p - (1/pi_b) sum_{b} w p subject to the
    two cell masses being pi_a and pi_b, total mass 1, w >= 0."""
    obj = np.zeros(n)
    obj[mask_a] = probs[mask_a] / pi_a
    obj[mask_b] = -probs[mask_b] / pi_b
    rows = np.vstack([
        mask_a.astype(np.float64),
        mask_b.astype(np.float64),
        np.ones(n),
    ])
    rhs = np.array([pi_a, pi_b, 1.0])
    return LinearProgram(obj, rows, rhs, np.zeros(n), np.full(n, np.inf))


def _normalized_pair_tuples(grid: MarginalGrid, a: int, b: int):
    """Marginal tuples restricted to the pair (a, b) and normalized to sum 1.

    The pair-mass equalities plus the total-mass constraint force the two
    cell masses to sum to 1 whenever the pair covers the support, so raw
    grid tuples are almost never feasible; normalizing preserves the rate
    semantics exactly. Duplicates collapse to their first grid index.
    """
    seen = {}
    order = []
    for idx, tup in enumerate(enumerate_marginals(grid)):
        pa, pb = tup[a], tup[b]
        s = pa + pb
        key = round(pa / s, 12)
        if key not in seen:
            seen[key] = (idx, pa / s, pb / s)
            order.append(key)
    return [seen[k] for k in order]


def _scan_pairs(model: Model, d: Dataset, grid: MarginalGrid, labels):
    """Best violation over (label cell, ordered pair, marginal tuple)."""
    probs = predict_prob(model, d)
    best = None  # (value, label, pair, grid_idx, weights)
    any_feasible = False
    for label in labels:
        for a, b in _ordered_pairs(d.group_count):
            mask_a = cell_mask(d, a, label)
            mask_b = cell_mask(d, b, label)
            if not (mask_a.any() and mask_b.any()):
                raise DegenerateMassError(
                    f"cell (group={a if not mask_a.any() else b}, label={label}) is empty"
                )
            for grid_idx, pi_a, pi_b in _normalized_pair_tuples(grid, a, b):
                sol = solve(_pair_lp(probs, mask_a, mask_b, pi_a, pi_b, d.n))
                if sol.status != OPTIMAL:
                    continue
                any_feasible = True
                if best is None or sol.value > best[0] + 1e-12:
                    best = (sol.value, label, (a, b), grid_idx, sol.point)
    if not any_feasible:
        raise ConfigurationError("no feasible marginal tuple for any pair")
    return best


def best_response_lambda(
    model: Model,
    d: Dataset,
    grid: MarginalGrid,
    scheme: BucketScheme,
    eps_fair: float,
    B: float,
    notion: str = DP,
) -> SparseLagrange:
    """Scan the marginal grid for the most violating reweighting.

    If the best rate difference exceeds ``eps_fair``, the winning weight is
    bucket-rounded and returned as a single atom carrying the full budget;
    otherwise the response is empty. Single-group data has no constraints,
    so the response is always empty there.
    """
    if d.group_count < 2:
        return SparseLagrange(atoms=[], budget=B)
    labels = (None,) if notion == DP else (0, 1)
    value, label, pair, _, weights = _scan_pairs(model, d, grid, labels)
    rounded = discretize_weight(weights, scheme)
    witness = Violation(rounded, pair, value, label)
    if value > eps_fair:
        atom = LagrangeAtom(rounded, pair, B, label)
        return SparseLagrange(atoms=[atom], budget=B, scan=witness)
    return SparseLagrange(atoms=[], budget=B, scan=witness)


# -- box-constrained attacks -------------------------------------------------


def _attack_lp(probs, d: Dataset, eps: float, pair, label):
    """Appendix-style program: fix every cell's marginal at its empirical
    value, restrict each weight to [(1-eps)/n, (1+eps)/n], and maximize the
    rate difference for the given ordered pair."""
    n = d.n
    a, b = pair
    mask_a = cell_mask(d, a, label)
    mask_b = cell_mask(d, b, label)
    pi_a = mask_a.sum() / n
    pi_b = mask_b.sum() / n
    if pi_a <= 0 or pi_b <= 0:
        raise DegenerateMassError(f"empty cell for pair {pair} label {label}")
    obj = np.zeros(n)
    obj[mask_a] = probs[mask_a] / pi_a
    obj[mask_b] = -probs[mask_b] / pi_b

    cells = [(g, label) for g in range(d.group_count)]
    if label is not None:
        cells = [(g, y) for g in range(d.group_count) for y in (0, 1)]
    rows, rhs = [], []
    for g, y in cells:
        m = cell_mask(d, g, y)
        rows.append(m.astype(np.float64))
        rhs.append(m.sum() / n)
    rows.append(np.ones(n))
    rhs.append(1.0)
    lo = np.full(n, (1.0 - eps) / n)
    hi = np.full(n, (1.0 + eps) / n)
    return LinearProgram(obj, np.vstack(rows), np.array(rhs), lo, hi)


def _best_pair_attack(probs, d, eps, label):
    best = None
    for pair in _ordered_pairs(d.group_count):
        sol = solve(_attack_lp(probs, d, eps, pair, label))
        if sol.status != OPTIMAL:
            raise FairRobustError(
                f"attack program unexpectedly {sol.status} for pair {pair}"
            )
        if best is None or sol.value > best[0] + 1e-12:
            best = (sol.value, pair, sol.point)
    return best


def attack_witness(model: Model, d: Dataset, eps_perturb: float,
                   spec: FairnessSpec) -> Violation:
    """Most unfair reweighting within l1 radius eps of uniform, keeping all
    cell marginals at their empirical values."""
    if not 0.0 <= eps_perturb <= 1.0:
        raise ConfigurationError("perturbation radius must lie in [0, 1]")
    if d.group_count < 2:
        raise ConfigurationError("attack needs at least two groups")
    probs = predict_prob(model, d)
    if spec.notion == DP:
        value, pair, weights = _best_pair_attack(probs, d, eps_perturb, None)
        return Violation(weights, pair, value, None)
    # equalized odds: the two label cells are disjoint, so attack each label
    # separately and splice the winning weights together
    parts = [_best_pair_attack(probs, d, eps_perturb, y) for y in (0, 1)]
    weights = np.full(d.n, 1.0 / d.n)
    for y, (_, _, w) in zip((0, 1), parts):
        sel = d.labels == y
        weights[sel] = w[sel]
    value = 0.5 * (parts[0][0] + parts[1][0])
    worst = 0 if parts[0][0] >= parts[1][0] else 1
    return Violation(weights, parts[worst][1], value, worst)


def attack_weights(model: Model, d: Dataset, eps_perturb: float,
                   spec: FairnessSpec | None = None) -> tuple[WeightVector, float]:
    spec = spec or FairnessSpec(DP)
    witness = attack_witness(model, d, eps_perturb, spec)
    w = witness.weights
    total = w.sum()
    if abs(total - 1.0) > 1e-7:
        raise FairRobustError("attack weights drifted off the simplex")
    return WeightVector(w / total), witness.value


def attack_curve(model: Model, d: Dataset, eps_list, spec: FairnessSpec):
    """Violation per perturbation radius; non-decreasing since the feasible
    boxes are nested."""
    eps_list = list(eps_list)
    if any(b < a for a, b in zip(eps_list, eps_list[1:])):
        raise ConfigurationError("eps list must be sorted ascending")
    return [(float(e), attack_witness(model, d, e, spec).value) for e in eps_list]
