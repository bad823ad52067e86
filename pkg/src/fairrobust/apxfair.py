"""Inner training loop: a follow-the-leader learner against the multiplier
adversary, producing a uniform ensemble that is near-optimal for the base
weight while staying fair for every reweighting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .adversary import (
    LagrangeAtom,
    SparseLagrange,
    best_response_lambda,
    cell_mask,
    rate,
)
from .data import Dataset
from .errors import ConfigurationError
from .geometry import BucketScheme, MarginalGrid
from .hypothesis import Ensemble, Model, predict_prob, zero_model
from .metrics import DP, M_LOSS, as_weights, weighted_risk
from .oracle import fit_linear_objective


@dataclass
class ApxFairConfig:
    """Inner-loop knobs; fields left at None fall back to the analysis
    defaults B = 3M/eps, T = ceil(36 n / eps^2), 4*gamma1 + gamma2 = eps/6
    (split as gamma1 = eps/48, gamma2 = eps/12) and
    eta = M * sqrt(1 / (n T))."""

    eps_fair: float = 0.05
    notion: str = DP
    B: float | None = None
    T: int | None = None
    gamma1: float | None = None
    gamma2: float | None = None
    eta_inner: float | None = None
    group_onehot: bool = False
    compute_nash_gap: bool = False

    def resolved(self, n: int) -> "ResolvedParams":
        eps = self.eps_fair
        if eps <= 0:
            raise ConfigurationError("eps_fair must be positive")
        B = self.B if self.B is not None else 3.0 * M_LOSS / eps
        T = self.T if self.T is not None else int(math.ceil(36.0 * n / eps**2))
        gamma1 = self.gamma1 if self.gamma1 is not None else eps / 48.0
        gamma2 = self.gamma2 if self.gamma2 is not None else eps / 12.0
        eta = (
            self.eta_inner
            if self.eta_inner is not None
            else M_LOSS * math.sqrt(1.0 / (n * T))
        )
        if T < 1:
            raise ConfigurationError("T must be at least 1")
        return ResolvedParams(eps, self.notion, B, T, gamma1, gamma2, eta,
                              self.group_onehot)


@dataclass(frozen=True)
class ResolvedParams:
    eps_fair: float
    notion: str
    B: float
    T: int
    gamma1: float
    gamma2: float
    eta: float
    group_onehot: bool


@dataclass
class RoundRecord:
    t: int
    scan_value: float
    payoff: float
    cumulative_atoms: int


@dataclass
class PayoffTrace:
    records: list = field(default_factory=list)


@dataclass
class ApxFairRun:
    ensemble: Ensemble
    trace: PayoffTrace
    lambda_bar: SparseLagrange
    params: ResolvedParams
    nash_gap: float | None = None


def delta_terms(lam: SparseLagrange, d: Dataset) -> np.ndarray:
    """Per-instance fairness pressure: each atom adds value * w_i / (cell
    mass) on its first cell and subtracts the analogue on its second."""
    delta = np.zeros(d.n)
    for atom in lam.atoms:
        a, b = atom.pair
        for grp, sign in ((a, 1.0), (b, -1.0)):
            mask = cell_mask(d, grp, atom.label)
            mass = float(atom.weights[mask].sum())
            if mass <= 0.0:
                raise ConfigurationError("atom weight has zero cell mass")
            delta[mask] += sign * atom.value * atom.weights[mask] / mass
    return delta


def payoff(model: Model, lam: SparseLagrange, d: Dataset, w0,
           eps_fair: float, gamma1: float) -> float:
    """Game payoff: base-weight risk plus multiplier-weighted constraint
    slacks (rate difference minus eps_fair plus 4*gamma1)."""
    total = weighted_risk(model, d, w0, "surrogate")
    if lam.atoms:
        probs = predict_prob(model, d)
        for atom in lam.atoms:
            a, b = atom.pair
            ra = rate(atom.weights, probs, cell_mask(d, a, atom.label))
            rb = rate(atom.weights, probs, cell_mask(d, b, atom.label))
            total += atom.value * (ra - rb - eps_fair + 4.0 * gamma1)
    return float(total)


def _base_linear(d: Dataset, w0: np.ndarray) -> np.ndarray:
    # l(1,y) - l(0,y) under the surrogate: -1 for y=1, +1 for y=0
    return np.where(d.labels == 1, -w0, w0)


def sup_rate_gap(model: Model, d: Dataset, notion: str = DP) -> float:
    """Exact supremum over all simplex weights of the constrained rate
    difference: point masses are optimal, so the value is the largest
    (max prob in one cell) - (min prob in another) over ordered pairs."""
    if d.group_count < 2:
        return 0.0
    probs = predict_prob(model, d)
    labels = (None,) if notion == DP else (0, 1)
    best = 0.0
    for label in labels:
        for a in range(d.group_count):
            for b in range(d.group_count):
                if a == b:
                    continue
                pa = probs[cell_mask(d, a, label)]
                pb = probs[cell_mask(d, b, label)]
                if pa.size == 0 or pb.size == 0:
                    continue
                best = max(best, float(pa.max() - pb.min()))
    return best


def equilibrium_gap(ensemble: Model, lam_bar: SparseLagrange, d: Dataset,
                    w0, p: ResolvedParams) -> float:
    """Measured distance of (ensemble, lam_bar) from equilibrium: the larger
    of the adversary's and the learner's best-response improvements."""
    u_here = payoff(ensemble, lam_bar, d, w0, p.eps_fair, p.gamma1)
    risk = weighted_risk(ensemble, d, w0, "surrogate")
    slack = sup_rate_gap(ensemble, d, p.notion) - p.eps_fair + 4.0 * p.gamma1
    u_best_lambda = risk + p.B * max(0.0, slack)
    gap_lambda = max(0.0, u_best_lambda - u_here)

    w0_arr = as_weights(w0, d.n)
    coeffs = _base_linear(d, w0_arr) + delta_terms(lam_bar, d)
    challenger = fit_linear_objective(d, coeffs, p.group_onehot)
    u_challenger = payoff(challenger, lam_bar, d, w0, p.eps_fair, p.gamma1)
    gap_h = max(0.0, u_here - u_challenger)
    return max(gap_lambda, gap_h)


def apx_fair_detailed(d: Dataset, w0, cfg: ApxFairConfig) -> ApxFairRun:
    """Run the two-player loop for T rounds and return the uniform ensemble
    over the learner's iterates plus per-round diagnostics."""
    p = cfg.resolved(d.n)
    w0_arr = as_weights(w0, d.n)
    base = _base_linear(d, w0_arr)
    scheme = BucketScheme(p.gamma1, d.n)
    grid = (
        MarginalGrid(p.gamma2, p.gamma1, d.n, d.group_count)
        if d.group_count >= 2
        else None
    )

    members = []
    cumulative = SparseLagrange(atoms=[], budget=p.B)
    trace = PayoffTrace()
    h = zero_model(d, p.group_onehot)
    for t in range(1, p.T + 1):
        members.append(h)
        if grid is not None:
            lam_t = best_response_lambda(
                h, d, grid, scheme, p.eps_fair, p.B, p.notion
            )
        else:
            lam_t = SparseLagrange(atoms=[], budget=p.B)
        cumulative.atoms.extend(lam_t.atoms)
        trace.records.append(
            RoundRecord(
                t=t,
                scan_value=lam_t.scan.value if lam_t.scan else 0.0,
                payoff=payoff(h, lam_t, d, w0_arr, p.eps_fair, p.gamma1),
                cumulative_atoms=len(cumulative.atoms),
            )
        )
        if t < p.T:
            coeffs = p.eta * (base + delta_terms(cumulative, d)) + 0.5
            h = fit_linear_objective(d, coeffs, p.group_onehot)

    ensemble = Ensemble(members)
    lam_bar = cumulative.scaled(1.0 / p.T)
    gap = None
    if cfg.compute_nash_gap:
        gap = equilibrium_gap(ensemble, lam_bar, d, w0_arr, p)
    return ApxFairRun(ensemble, trace, lam_bar, p, gap)


def apx_fair(d: Dataset, w0, cfg: ApxFairConfig) -> Ensemble:
    """Fair-for-all-reweightings classifier minimizing risk at w0."""
    return apx_fair_detailed(d, w0, cfg).ensemble
