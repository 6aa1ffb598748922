"""Expected neighborhood aggregates under a two-component Gaussian mixture.

A node's positive neighbors emit predictions from Norm(mu_plus, sigma2) and
its negative neighbors from Norm(mu_minus, sigma2). Closed forms give the
expected aggregate for the original neighborhood, after filtering with a
classifier of true/false positive rates (p, q), and after adding neighbors
at precision p_pre. A counter-based Monte Carlo sampler verifies each
formula and estimates the misclassification probability P(F < tau).

The filtered formula is a ratio of expectations, not the expectation of the
per-neighborhood ratio; ``mc_aggregate`` therefore reports both a matching
ratio-of-means estimate (``mean_estimate``) and the per-trial conditional
mean (``conditional_mean``), so the gap between the two is observable
instead of hidden.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .hashing import unit_uniform


@dataclass(frozen=True)
class GaussianMixtureParams:
    """Emission means/variance and the decision threshold tau.

    Requires ``mu_plus > tau > mu_minus`` and positive variance.
    """

    mu_plus: float
    mu_minus: float
    sigma2: float
    tau: float

    def __post_init__(self):
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be positive")
        if not self.mu_plus > self.tau > self.mu_minus:
            raise ValueError("need mu_plus > tau > mu_minus")


@dataclass(frozen=True)
class NeighborhoodSpec:
    """Counts of positive/negative neighbors and neighbors to add."""

    n_plus: int
    n_minus: int
    n_added: int = 0

    def __post_init__(self):
        if self.n_plus < 0 or self.n_minus < 0 or self.n_added < 0:
            raise ValueError("neighbor counts must be non-negative")
        if self.n_plus + self.n_minus < 1:
            raise ValueError("need at least one original neighbor")

    @property
    def r(self) -> float:
        """Positive ratio of the original neighborhood."""
        return self.n_plus / (self.n_plus + self.n_minus)


def e_origin(spec: NeighborhoodSpec, gm: GaussianMixtureParams) -> float:
    """Expected aggregate over the unmodified neighborhood."""
    r = spec.r
    return r * gm.mu_plus + (1.0 - r) * gm.mu_minus


def e_filter(spec: NeighborhoodSpec, gm: GaussianMixtureParams, p: float, q: float) -> float:
    """Expected aggregate after keeping positives w.p. ``p`` and negatives
    w.p. ``q`` (ratio of expected sums over expected counts).

    NaN when the expected survivor count is zero; returns ``e_origin``
    exactly on the ``p == q`` boundary.
    """
    if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0):
        raise ValueError("p and q must lie in [0, 1]")
    den = p * spec.n_plus + q * spec.n_minus
    if den == 0.0:
        return float("nan")
    if p == q:
        return e_origin(spec, gm)
    return (p * spec.n_plus * gm.mu_plus + q * spec.n_minus * gm.mu_minus) / den


def e_add(spec: NeighborhoodSpec, gm: GaussianMixtureParams, p_pre: float) -> float:
    """Expected aggregate after adding ``spec.n_added`` neighbors of which a
    ``p_pre`` fraction are positive in expectation."""
    if not 0.0 <= p_pre <= 1.0:
        raise ValueError("p_pre must lie in [0, 1]")
    if spec.n_added == 0:
        return e_origin(spec, gm)
    n = spec.n_plus + spec.n_minus
    pos_mass = spec.n_plus + p_pre * spec.n_added
    neg_mass = spec.n_minus + (1.0 - p_pre) * spec.n_added
    return (pos_mass * gm.mu_plus + neg_mass * gm.mu_minus) / (n + spec.n_added)


@dataclass(frozen=True)
class McResult:
    """Monte Carlo estimates for one neighborhood configuration.

    ``mean_estimate`` matches the analytic target of the chosen mode (for
    filter mode, a ratio-of-means estimate). ``conditional_mean`` averages
    the per-trial aggregate (survivor mean after redrawing empty
    neighborhoods); it equals ``mean_estimate`` for origin/add modes.
    """

    mean_estimate: float
    std_error: float
    misclassification_rate: float
    misclassification_std_error: float
    conditional_mean: float
    conditional_std_error: float
    redraws: int
    trials: int


def _trial_normals(seed: int, rows: np.ndarray, slot0: int, count: int) -> np.ndarray:
    """Standard normals keyed by (seed, trial row, slot); order-invariant."""
    slots = np.arange(slot0, slot0 + count, dtype=np.int64)[None, :]
    return ndtri(unit_uniform(seed, rows[:, None], slots))


def _trial_uniforms(seed: int, rows: np.ndarray, slot0: int, count: int) -> np.ndarray:
    slots = np.arange(slot0, slot0 + count, dtype=np.int64)[None, :]
    return unit_uniform(seed, rows[:, None], slots)


def mc_aggregate(spec: NeighborhoodSpec, gm: GaussianMixtureParams, mode: str = "origin",
                 trials: int = 100_000, seed: int = 0,
                 p: float | None = None, q: float | None = None,
                 p_pre: float | None = None) -> McResult:
    """Simulate neighborhood aggregation and estimate its mean and the
    misclassification rate P(F < tau).

    Per-trial draws are keyed by trial index, so any prefix of trials is
    reproducible independently of ``trials``. Filter mode redraws trials
    whose survivor set is empty (counted in ``redraws``) for the conditional
    statistics, while the Eq-matching ``mean_estimate`` uses the raw first
    draw of every trial.
    """
    if mode not in ("origin", "filter", "add"):
        raise ValueError("mode must be 'origin', 'filter', or 'add'")
    if trials < 2:
        raise ValueError("need at least 2 trials")
    n_p, n_m = spec.n_plus, spec.n_minus
    n = n_p + n_m
    sigma = math.sqrt(gm.sigma2)
    means = np.concatenate([np.full(n_p, gm.mu_plus), np.full(n_m, gm.mu_minus)])
    rows = np.arange(trials, dtype=np.int64)
    base = means[None, :] + sigma * _trial_normals(seed, rows, 0, n)

    redraws = 0
    if mode == "origin":
        per_trial = base.mean(axis=1)
        mean_est = float(per_trial.mean())
        se = float(per_trial.std(ddof=1) / math.sqrt(trials))
        cond, cond_se = mean_est, se
    elif mode == "filter":
        if p is None or q is None:
            raise ValueError("filter mode needs p and q")
        if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0):
            raise ValueError("p and q must lie in [0, 1]")
        keep_prob = np.concatenate([np.full(n_p, p), np.full(n_m, q)])
        if (1.0 - p) ** n_p * (1.0 - q) ** n_m >= 1.0:
            raise ValueError("filtering keeps no neighbor with probability 1")
        flags = _trial_uniforms(seed, rows, n, n) < keep_prob[None, :]
        num = (base * flags).sum(axis=1)
        den = flags.sum(axis=1).astype(np.float64)
        den_mean = float(den.mean())
        if den_mean == 0.0:
            raise RuntimeError("all trials empty; increase trials or rates")
        ratio = float(num.mean()) / den_mean
        resid = num - ratio * den
        mean_est = ratio
        se = float(resid.std(ddof=1) / math.sqrt(trials) / den_mean)

        values = base
        active = np.flatnonzero(den == 0)
        round_no = 1
        while active.size:
            redraws += int(active.size)
            if round_no > 100_000:
                raise RuntimeError("empty-neighborhood redraw did not terminate")
            fresh_vals = means[None, :] + sigma * _trial_normals(seed, active, 2 * n * round_no, n)
            fresh_flags = _trial_uniforms(seed, active, 2 * n * round_no + n, n) < keep_prob[None, :]
            fresh_den = fresh_flags.sum(axis=1).astype(np.float64)
            values[active] = fresh_vals
            flags[active] = fresh_flags
            den[active] = fresh_den
            num[active] = (fresh_vals * fresh_flags).sum(axis=1)
            active = active[fresh_den == 0]
            round_no += 1
        per_trial = num / den
        cond = float(per_trial.mean())
        cond_se = float(per_trial.std(ddof=1) / math.sqrt(trials))
    else:
        if p_pre is None:
            raise ValueError("add mode needs p_pre")
        if not 0.0 <= p_pre <= 1.0:
            raise ValueError("p_pre must lie in [0, 1]")
        n_add = spec.n_added
        if n_add:
            pos = _trial_uniforms(seed, rows, n, n_add) < p_pre
            add_means = np.where(pos, gm.mu_plus, gm.mu_minus)
            add_vals = add_means + sigma * _trial_normals(seed, rows, n + n_add, n_add)
            per_trial = (base.sum(axis=1) + add_vals.sum(axis=1)) / (n + n_add)
        else:
            per_trial = base.mean(axis=1)
        mean_est = float(per_trial.mean())
        se = float(per_trial.std(ddof=1) / math.sqrt(trials))
        cond, cond_se = mean_est, se

    mis = float(np.count_nonzero(per_trial < gm.tau) / trials)
    mis_se = float(math.sqrt(max(mis * (1.0 - mis), 1e-300) / trials))
    return McResult(mean_estimate=mean_est, std_error=se,
                    misclassification_rate=mis, misclassification_std_error=mis_se,
                    conditional_mean=cond, conditional_std_error=cond_se,
                    redraws=redraws, trials=trials)


def _twentieths(lo: int, hi: int) -> tuple[float, ...]:
    # k/20 as correctly rounded doubles; equality with n_plus/n is then
    # exact whenever the underlying rationals coincide
    return tuple(k / 20.0 for k in range(lo, hi + 1))


@dataclass(frozen=True)
class PropositionGrid:
    """Parameter grid for the inequality checks."""

    p_values: tuple[float, ...] = _twentieths(1, 20)
    q_values: tuple[float, ...] = _twentieths(1, 20)
    p_pre_values: tuple[float, ...] = _twentieths(0, 20)
    n_plus_values: tuple[int, ...] = tuple(range(1, 11))
    n_minus_values: tuple[int, ...] = tuple(range(1, 11))
    n_added_values: tuple[int, ...] = tuple(range(1, 11))
    mu_plus: float = 1.0
    mu_minus: float = -1.0
    sigma2: float = 1.0
    tau: float = 0.0


@dataclass
class PropositionReport:
    """Grid-check outcome: strict inequalities off the boundary, near-exact
    equality on it. ``violations`` lists offending parameter tuples."""

    filter_points: int = 0
    filter_violations: list = field(default_factory=list)
    filter_boundary_points: int = 0
    filter_boundary_max_err: float = 0.0
    add_points: int = 0
    add_violations: list = field(default_factory=list)
    add_boundary_points: int = 0
    add_boundary_max_err: float = 0.0

    @property
    def passed(self) -> bool:
        return (not self.filter_violations and not self.add_violations
                and self.filter_boundary_max_err <= 1e-12
                and self.add_boundary_max_err <= 1e-12)

    def to_dict(self) -> dict:
        return {
            "filter_points": self.filter_points,
            "filter_violations": self.filter_violations[:50],
            "filter_boundary_points": self.filter_boundary_points,
            "filter_boundary_max_err": self.filter_boundary_max_err,
            "add_points": self.add_points,
            "add_violations": self.add_violations[:50],
            "add_boundary_points": self.add_boundary_points,
            "add_boundary_max_err": self.add_boundary_max_err,
            "passed": self.passed,
        }


def check_propositions(grid: PropositionGrid = PropositionGrid()) -> PropositionReport:
    """Exhaustively compare the filtered/added expectations against the
    original one over the grid.

    Off-boundary points must satisfy the strict inequality in the direction
    of their side (filter: sign of p - q; add: sign of p_pre - r); boundary
    points must agree within 1e-12.
    """
    gm = GaussianMixtureParams(mu_plus=grid.mu_plus, mu_minus=grid.mu_minus,
                               sigma2=grid.sigma2, tau=grid.tau)
    report = PropositionReport()
    for n_plus in grid.n_plus_values:
        for n_minus in grid.n_minus_values:
            spec = NeighborhoodSpec(n_plus=n_plus, n_minus=n_minus)
            origin = e_origin(spec, gm)
            for p in grid.p_values:
                for q in grid.q_values:
                    val = e_filter(spec, gm, p, q)
                    if p == q:
                        report.filter_boundary_points += 1
                        err = abs(val - origin)
                        report.filter_boundary_max_err = max(report.filter_boundary_max_err, err)
                    else:
                        report.filter_points += 1
                        ok = val > origin if p > q else val < origin
                        if not ok:
                            report.filter_violations.append(
                                {"n_plus": n_plus, "n_minus": n_minus, "p": p, "q": q,
                                 "e_filter": val, "e_origin": origin})
            r = spec.r
            for n_added in grid.n_added_values:
                spec_add = NeighborhoodSpec(n_plus=n_plus, n_minus=n_minus, n_added=n_added)
                for p_pre in grid.p_pre_values:
                    val = e_add(spec_add, gm, p_pre)
                    if p_pre == r:
                        report.add_boundary_points += 1
                        err = abs(val - origin)
                        report.add_boundary_max_err = max(report.add_boundary_max_err, err)
                    else:
                        report.add_points += 1
                        ok = val > origin if p_pre > r else val < origin
                        if not ok:
                            report.add_violations.append(
                                {"n_plus": n_plus, "n_minus": n_minus, "n_added": n_added,
                                 "p_pre": p_pre, "e_add": val, "e_origin": origin})
    return report
