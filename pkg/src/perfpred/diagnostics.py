"""Empirical certification: sensitivity, brute-force optima, closeness bounds.

The sensitivity of a distribution map is its Lipschitz constant from
parameter space (Euclidean) into distribution space (Wasserstein-1).  This
module estimates it three ways, in decreasing order of exactness:

* ``exact_1d``          -- the map's own closed-form W1;
* ``sorted_empirical_1d`` -- exact empirical W1 between coupled sample sets
  (one-dimensional instances only); drawing both parameter settings under
  one seed realizes the comonotone coupling, so the estimate is an unbiased
  Monte Carlo mean with a well-defined standard error;
* ``coupling_bound``    -- the mean distance between paired draws under a
  shared source of randomness, always an upper bound on W1 (and exact for
  finite-population maps whose coupling moves every atom rigidly).

Also here: grid search for performative optima in dimension <= 2 with common
random numbers across grid points, the stable-vs-optimal closeness check
``gap <= 2 L_z eps / gamma``, and the objective-value gap to the grid
Stackelberg baseline with its bound ``2 L_z eps (L_theta + L_z eps) / gamma``.
Lipschitz constants not declared by a loss are estimated as grid suprema of
gradient norms over support x parameter grids and marked as estimated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DimensionMismatchError, DistributionMap, LossSpec, ParameterSpace, as_theta, performative_risk
from .dynamics import Trajectory, golden_section_minimize


def w1_1d(samples_a, samples_b) -> float:
    """Exact Wasserstein-1 distance between two one-dimensional empirical measures.

    Equal sizes reduce to the mean absolute difference of order statistics;
    unequal sizes integrate the quantile-function gap over the merged
    probability grid.  Inputs are sorted internally.
    """
    a = np.sort(np.asarray(samples_a, dtype=float).ravel())
    b = np.sort(np.asarray(samples_b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise ValueError("empty sample set")
    na, nb = a.size, b.size
    if na == nb:
        return float(np.mean(np.abs(a - b)))
    cuts = np.union1d(np.arange(1, na) / na, np.arange(1, nb) / nb)
    edges = np.concatenate([[0.0], cuts, [1.0]])
    mids = 0.5 * (edges[:-1] + edges[1:])
    ia = np.minimum((mids * na).astype(int), na - 1)
    ib = np.minimum((mids * nb).astype(int), nb - 1)
    return float(np.sum(np.diff(edges) * np.abs(a[ia] - b[ib])))


@dataclass
class SensitivityReport:
    """Per-pair W1 estimates and the supremum ratio W1 / ||theta - theta'||."""

    pairs: list[tuple[np.ndarray, np.ndarray]]
    w1_estimates: list[float]
    w1_std_errors: list[float]
    ratios: list[float]
    sup_ratio: float
    method: str
    n_samples: int

    def to_json(self) -> dict:
        return {
            "pairs": [[a.tolist(), b.tolist()] for a, b in self.pairs],
            "w1_estimates": self.w1_estimates,
            "w1_std_errors": self.w1_std_errors,
            "ratios": self.ratios,
            "sup_ratio": self.sup_ratio,
            "method": self.method,
            "n_samples": self.n_samples,
        }


def estimate_sensitivity(
    map: DistributionMap,
    theta_pairs,
    n: int = 10_000,
    seed: int = 0,
    method: str | None = None,
) -> SensitivityReport:
    """Estimate the map's sensitivity over the given parameter pairs.

    Method resolution (when not forced): the map's exact W1 if it has one,
    else exact empirical W1 for one-dimensional instances, else the coupled
    upper bound.  Pairs must be distinct (the ratio divides by their
    distance).
    """
    pairs = [(map.check_theta(a), map.check_theta(b)) for a, b in theta_pairs]
    if not pairs:
        raise ValueError("need at least one parameter pair")
    if method is None:
        if map.exact_w1(pairs[0][0], pairs[0][1]) is not None:
            method = "exact_1d"
        elif map.instance_dim == 1:
            method = "sorted_empirical_1d"
        else:
            method = "coupling_bound"
    estimates, ses, ratios = [], [], []
    for ta, tb in pairs:
        dist = float(np.linalg.norm(ta - tb))
        if dist == 0.0:
            raise ValueError("sensitivity ratio undefined for identical parameter pair")
        if method == "exact_1d":
            w1 = map.exact_w1(ta, tb)
            if w1 is None:
                raise ValueError(f"map {type(map).__name__} has no exact W1")
            se = 0.0
        elif method == "sorted_empirical_1d":
            if map.instance_dim != 1:
                raise DimensionMismatchError("sorted_empirical_1d needs one-dimensional instances")
            xa, ya = map.sample(ta, n, seed)
            xb, yb = map.sample(tb, n, seed)  # same seed: comonotone coupling
            diffs = np.abs(np.sort(ya) - np.sort(yb))
            w1 = float(np.mean(diffs))
            se = float(np.std(diffs, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
        elif method == "coupling_bound":
            za, zb, w = map.coupled_sample(ta, tb, n, seed)
            dists = np.linalg.norm(za - zb, axis=1)
            if w is not None:  # exact finite-population coupling
                w1 = float(np.dot(w, dists))
                se = 0.0
            else:
                w1 = float(np.mean(dists))
                se = float(np.std(dists, ddof=1) / np.sqrt(len(dists))) if len(dists) > 1 else 0.0
        else:
            raise ValueError(f"unknown sensitivity method {method!r}")
        estimates.append(float(w1))
        ses.append(se)
        ratios.append(float(w1) / dist)
    return SensitivityReport(
        pairs=pairs,
        w1_estimates=estimates,
        w1_std_errors=ses,
        ratios=ratios,
        sup_ratio=max(ratios),
        method=method,
        n_samples=n,
    )


@dataclass
class BruteForceResult:
    """Grid minimizer of the performative risk, with ties and refinement."""

    theta_po: np.ndarray
    pr: float
    pr_std_error: float
    ties: list[np.ndarray]
    grid_spacing: float
    exact: bool

    def to_json(self) -> dict:
        return {
            "theta_po": self.theta_po.tolist(),
            "pr": self.pr,
            "pr_std_error": self.pr_std_error,
            "ties": [t.tolist() for t in self.ties],
            "grid_spacing": self.grid_spacing,
            "exact": self.exact,
        }


def brute_force_optimum(
    map: DistributionMap,
    loss: LossSpec,
    space: ParameterSpace,
    grid_resolution: int = 1001,
    n: int = 10_000,
    seed: int = 0,
    force_monte_carlo: bool = False,
) -> BruteForceResult:
    """Locate the performative optimum by grid minimization of PR (dim <= 2).

    Risk at every grid point shares one seed (common random numbers), so
    Monte Carlo noise cancels in comparisons to first order.  Grid points
    within 1e-12 of the minimum are all reported as ties.  In one dimension
    with exact risk evaluation, the representative is refined by one local
    golden-section pass inside its bracketing cell.
    """
    if space.dim > 2:
        raise DimensionMismatchError("brute-force search supports dimension <= 2")
    pts = space.grid(grid_resolution)
    ests = [
        performative_risk(map, loss, pts[i], n, seed, force_monte_carlo=force_monte_carlo)
        for i in range(len(pts))
    ]
    vals = np.array([e.mean for e in ests])
    imin = int(np.argmin(vals))
    tie_idx = np.flatnonzero(vals <= vals[imin] + 1e-12)
    exact = all(e.exact for e in ests)
    if space.kind in ("interval", "box"):
        spacing = float(np.max((space.hi - space.lo) / (grid_resolution - 1)))
    else:
        spacing = float(2 * space.radius / (grid_resolution - 1))
    theta_po = pts[imin].copy()
    pr = float(vals[imin])
    if space.dim == 1 and exact and len(tie_idx) == 1:
        lo = max(float(pts[max(imin - 1, 0), 0]), pts[0, 0])
        hi = min(float(pts[min(imin + 1, len(pts) - 1), 0]), pts[-1, 0])
        refined = golden_section_minimize(
            lambda v: performative_risk(map, loss, [v], n, seed).mean, lo, hi, tol=1e-12
        )
        refined_pr = performative_risk(map, loss, [refined], n, seed).mean
        if refined_pr <= pr:
            theta_po = np.array([refined])
            pr = float(refined_pr)
    return BruteForceResult(
        theta_po=theta_po,
        pr=pr,
        pr_std_error=float(ests[imin].std_error),
        ties=[pts[i].copy() for i in tie_idx],
        grid_spacing=spacing,
        exact=exact,
    )


# ---------------------------------------------------------------------------
# Lipschitz-constant estimation
# ---------------------------------------------------------------------------


def _support_points(map: DistributionMap, space: ParameterSpace, per_theta: int, seed: int):
    """Instances drawn across deployments: an approximation of the support union."""
    if space.dim <= 2:
        thetas = space.grid(9)
    else:
        rng = np.random.default_rng(seed)
        thetas = np.array([space.project(rng.normal(size=space.dim)) for _ in range(9)])
    xs, ys = [], []
    for i in range(len(thetas)):
        pop = map.population(thetas[i])
        if pop is not None:
            X, Y, _ = pop
        else:
            X, Y = map.sample(thetas[i], per_theta, seed)
        xs.append(X)
        ys.append(Y)
    return np.vstack(xs), np.concatenate(ys), thetas


def estimate_lipschitz_z(
    map: DistributionMap,
    loss: LossSpec,
    space: ParameterSpace,
    per_theta: int = 64,
    seed: int = 0,
    fd_step: float = 1e-6,
) -> float:
    """Supremum of ||grad_z loss|| over a support x parameter grid, by central differences."""
    X, Y, thetas = _support_points(map, space, per_theta, seed)
    worst = 0.0
    for t in range(len(thetas)):
        theta = thetas[t]
        sq = np.zeros(len(Y))
        for j in range(X.shape[1]):
            Xp = X.copy()
            Xp[:, j] += fd_step
            Xm = X.copy()
            Xm[:, j] -= fd_step
            dj = (loss.value_batch(Xp, Y, theta) - loss.value_batch(Xm, Y, theta)) / (2 * fd_step)
            sq += dj * dj
        dy = (loss.value_batch(X, Y + fd_step, theta) - loss.value_batch(X, Y - fd_step, theta)) / (2 * fd_step)
        sq += dy * dy
        worst = max(worst, float(np.sqrt(np.max(sq))))
    return worst


def estimate_lipschitz_theta(
    map: DistributionMap,
    loss: LossSpec,
    space: ParameterSpace,
    per_theta: int = 64,
    seed: int = 0,
) -> float:
    """Supremum of ||grad_theta loss|| over a support x parameter grid."""
    X, Y, thetas = _support_points(map, space, per_theta, seed)
    worst = 0.0
    for t in range(len(thetas)):
        g = loss.grad_batch(X, Y, thetas[t])
        worst = max(worst, float(np.max(np.linalg.norm(g, axis=1))))
    return worst


# ---------------------------------------------------------------------------
# Closeness of stable points and optima
# ---------------------------------------------------------------------------


@dataclass
class GapReport:
    """Distance between the stable point and the optimum against its bound."""

    theta_ps: np.ndarray
    theta_po: np.ndarray
    gap: float
    bound: float
    pr_at_ps: float
    pr_at_po: float
    L_z: float
    L_z_estimated: bool
    gamma: float
    eps: float
    tolerance: float
    violation: bool

    def to_json(self) -> dict:
        return {
            "theta_ps": self.theta_ps.tolist(),
            "theta_po": self.theta_po.tolist(),
            "gap": self.gap,
            "bound": self.bound,
            "pr_at_ps": self.pr_at_ps,
            "pr_at_po": self.pr_at_po,
            "L_z": self.L_z,
            "L_z_estimated": self.L_z_estimated,
            "gamma": self.gamma,
            "eps": self.eps,
            "tolerance": self.tolerance,
            "violation": self.violation,
        }


def closeness_check(
    map: DistributionMap,
    loss: LossSpec,
    trajectory: Trajectory,
    space: ParameterSpace,
    grid_resolution: int = 1001,
    n: int = 10_000,
    seed: int = 0,
) -> GapReport:
    """Check ||theta_PO - theta_PS|| <= 2 L_z eps / gamma for a converged run.

    theta_PS is the trajectory's final iterate; theta_PO comes from the map's
    closed form when known, otherwise grid search.  A violation is flagged
    only beyond grid spacing plus Monte Carlo tolerance.
    """
    if trajectory.verdict != "converged":
        raise ValueError(f"closeness check needs a converged trajectory, got {trajectory.verdict!r}")
    gamma = loss.constants.gamma
    if gamma is None or gamma <= 0:
        raise ValueError("closeness check needs a declared strong-convexity constant gamma > 0")
    eps = map.declared_sensitivity
    if eps is None:
        raise ValueError("closeness check needs a declared sensitivity")
    theta_ps = as_theta(trajectory.final_theta, space.dim)
    if loss.constants.L_z is not None:
        L_z, L_z_estimated = loss.constants.L_z, False
    else:
        L_z, L_z_estimated = estimate_lipschitz_z(map, loss, space, seed=seed), True
    forms = map.closed_forms(loss)
    mc_tol = 0.0
    if forms is not None and forms.theta_po is not None:
        theta_po = as_theta(forms.theta_po, space.dim)
        spacing = 0.0
        pr_po = performative_risk(map, loss, theta_po, n, seed).mean
    else:
        bf = brute_force_optimum(map, loss, space, grid_resolution, n, seed)
        theta_po = bf.theta_po
        spacing = bf.grid_spacing
        pr_po = bf.pr
        if not bf.exact:
            mc_tol = 6.0 * bf.pr_std_error
    est_ps = performative_risk(map, loss, theta_ps, n, seed)
    gap = float(np.linalg.norm(theta_po - theta_ps))
    bound = 2.0 * L_z * eps / gamma
    tolerance = spacing + mc_tol
    return GapReport(
        theta_ps=theta_ps,
        theta_po=theta_po,
        gap=gap,
        bound=bound,
        pr_at_ps=float(est_ps.mean),
        pr_at_po=float(pr_po),
        L_z=L_z,
        L_z_estimated=L_z_estimated,
        gamma=gamma,
        eps=eps,
        tolerance=tolerance,
        violation=bool(gap > bound + tolerance),
    )


@dataclass
class StackelbergReport:
    """Objective-value distance of a stable point from the grid Stackelberg baseline."""

    pr_at_ps: float
    pr_min_grid: float | None
    gap: float | None
    bound: float
    L_z: float
    L_theta: float
    gamma: float
    eps: float
    grid_tolerance: float

    def to_json(self) -> dict:
        return {
            "pr_at_ps": self.pr_at_ps,
            "pr_min_grid": self.pr_min_grid,
            "gap": self.gap,
            "bound": self.bound,
            "L_z": self.L_z,
            "L_theta": self.L_theta,
            "gamma": self.gamma,
            "eps": self.eps,
            "grid_tolerance": self.grid_tolerance,
        }


def stackelberg_gap(
    map: DistributionMap,
    loss: LossSpec,
    theta_ps,
    space: ParameterSpace,
    grid_resolution: int = 101,
    n: int = 10_000,
    seed: int = 0,
) -> StackelbergReport:
    """PR(theta_PS) minus the grid minimum of PR, against 2 L_z eps (L_theta + L_z eps) / gamma.

    In dimension > 2 the grid baseline is skipped and only PR(theta_PS) is
    reported (gap None); the bound is still computed from the constants.
    """
    gamma = loss.constants.gamma
    if gamma is None or gamma <= 0:
        raise ValueError("needs a declared strong-convexity constant gamma > 0")
    eps = map.declared_sensitivity
    if eps is None:
        raise ValueError("needs a declared sensitivity")
    theta_ps = as_theta(theta_ps, space.dim)
    L_z = loss.constants.L_z if loss.constants.L_z is not None else estimate_lipschitz_z(map, loss, space, seed=seed)
    L_theta = (
        loss.constants.L_theta
        if loss.constants.L_theta is not None
        else estimate_lipschitz_theta(map, loss, space, seed=seed)
    )
    pr_ps = performative_risk(map, loss, theta_ps, n, seed)
    bound = 2.0 * L_z * eps * (L_theta + L_z * eps) / gamma
    if space.dim <= 2:
        bf = brute_force_optimum(map, loss, space, grid_resolution, n, seed)
        pr_min = float(bf.pr)
        gap = float(pr_ps.mean - pr_min)
        grid_tol = bf.grid_spacing * (L_theta + L_z * eps) + 6.0 * (pr_ps.std_error + bf.pr_std_error)
    else:
        pr_min, gap, grid_tol = None, None, 0.0
    return StackelbergReport(
        pr_at_ps=float(pr_ps.mean),
        pr_min_grid=pr_min,
        gap=gap,
        bound=bound,
        L_z=L_z,
        L_theta=L_theta,
        gamma=gamma,
        eps=eps,
        grid_tolerance=grid_tol,
    )
