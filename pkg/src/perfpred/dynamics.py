"""Retraining dynamics: exact, gradient-based, and finite-sample.

Four procedures over a distribution map D(.), a loss l, and a feasible set:

* ``rrm``  -- repeated risk minimization: theta_{t+1} solves the full inner
  problem on D(theta_t).
* ``rgd``  -- repeated gradient descent: one projected gradient step per
  deployment, evaluated at the deployed parameters.
* ``rerm`` / ``regd`` -- their finite-sample counterparts, drawing n_t fresh
  samples from D(theta_t) each step per a :class:`SampleSchedule`.

Each run records its iterates, per-iterate performative risk, step norms and
sample counts in a :class:`Trajectory`, and terminates with one of four
verdicts: ``converged`` (step norm at or below the outer tolerance),
``oscillating`` (a sustained 2-cycle), ``diverged`` (iterate norm beyond the
divergence radius, or non-finite), or ``max_iters``.

Inner problems are solved exactly through the map's closed-form minimizer
when it has one; otherwise by projected gradient descent with Armijo
backtracking on the exact population objective (finite-support maps) or a
fixed set of common Monte Carlo draws.  Non-smooth one-dimensional inner
problems (the hinge construction) fall back to golden-section search, which
handles gradient kinks that defeat line-searched descent.

The finite-sample sampling schedule grows logarithmically,
``n_t = ceil(K * log((t+2)^2 * pi^2 / (6 p)) / (eps * delta)^m)`` with a
configurable constant K; it is the schedule under which the finite-sample
convergence guarantees hold.  The underlying moment condition (finiteness of
an exponential moment of D(theta)) is assumed, not computed.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import (
    DistributionMap,
    LossSpec,
    ParameterSpace,
    PerfpredError,
    RiskEstimate,
    as_theta,
    performative_risk,
    risk_gradient,
)
from .rng import child_seed

VERDICT_CONVERGED = "converged"
VERDICT_MAX_ITERS = "max_iters"
VERDICT_DIVERGED = "diverged"
VERDICT_OSCILLATING = "oscillating"


class InnerSolverError(PerfpredError):
    """The inner minimization failed (stall or iteration budget)."""


class NoConvergenceGuarantee(PerfpredError):
    """The convergence guarantee's preconditions fail; no iteration bound applies."""


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and budgets for inner solves and the outer loop.

    The inner problem is solved to ``inner_tol`` (projected-gradient-mapping
    norm) with backtracking line search (shrink 0.5, sufficient decrease
    1e-4); the outer loop declares convergence at step norm <= ``outer_tol``.
    """

    inner_tol: float = 1e-8
    max_inner_iters: int = 10_000
    ls_shrink: float = 0.5
    ls_sufficient_decrease: float = 1e-4
    outer_tol: float = 1e-7
    max_outer_iters: int = 500
    divergence_radius: float = 1e8
    oscillation_window: int = 6
    risk_eval_n: int = 10_000

    def __post_init__(self):
        for name in ("inner_tol", "outer_tol", "divergence_radius"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if not 0 < self.ls_shrink < 1:
            raise ValueError("ls_shrink must lie in (0, 1)")


@dataclass(frozen=True)
class SampleSchedule:
    """Per-step sample counts n_t for the finite-sample procedures.

    Kinds: ``constant`` (n every step), ``guarantee`` (the logarithmic
    growth schedule above), and ``exact`` (no sampling: substitute the map's
    exact per-step oracle, which makes the empirical procedures coincide
    with their population versions).
    """

    kind: str
    n: int = 0
    K: float = 8.0
    eps: float = 0.0
    delta: float = 0.0
    p: float = 0.1
    m: int = 1

    @staticmethod
    def constant(n: int) -> "SampleSchedule":
        if n < 1:
            raise ValueError("constant schedule needs n >= 1")
        return SampleSchedule("constant", n=int(n))

    @staticmethod
    def guarantee(eps: float, delta: float, p: float, m: int, K: float = 8.0) -> "SampleSchedule":
        if min(eps, delta, p, K) <= 0 or m < 1:
            raise ValueError("guarantee schedule needs eps, delta, p, K > 0 and m >= 1")
        return SampleSchedule("guarantee", K=float(K), eps=float(eps), delta=float(delta), p=float(p), m=int(m))

    @staticmethod
    def exact() -> "SampleSchedule":
        return SampleSchedule("exact")

    def n_at(self, t: int) -> int:
        if self.kind == "constant":
            return self.n
        if self.kind == "guarantee":
            raw = self.K * math.log((t + 2) ** 2 * math.pi**2 / (6.0 * self.p)) / (self.eps * self.delta) ** self.m
            return int(math.ceil(raw))
        return 0  # exact


@dataclass
class Trajectory:
    """Ordered record of one dynamic run.

    ``step_norms[t]`` is ||iterates[t+1] - iterates[t]||; ``n_schedule[t]``
    is the number of fresh draws used to produce iterate t+1 (empty for
    population-level procedures).  ``converged_at`` is the index of the final
    step when the verdict is ``converged``.
    """

    iterates: list[np.ndarray] = field(default_factory=list)
    risks: list[RiskEstimate] = field(default_factory=list)
    step_norms: list[float] = field(default_factory=list)
    n_schedule: list[int] = field(default_factory=list)
    verdict: str = VERDICT_MAX_ITERS
    converged_at: int | None = None

    @property
    def final_theta(self) -> np.ndarray:
        return self.iterates[-1]

    @property
    def n_steps(self) -> int:
        return len(self.step_norms)

    def distances_to(self, target) -> np.ndarray:
        target = np.atleast_1d(np.asarray(target, dtype=float))
        return np.array([float(np.linalg.norm(th - target)) for th in self.iterates])

    def contraction_ratios(self, target, floor: float = 1e-13) -> np.ndarray:
        """Ratios of successive distances to ``target``, skipping tiny denominators."""
        d = self.distances_to(target)
        keep = d[:-1] > floor
        return d[1:][keep] / d[:-1][keep]


def save_trajectory_sidecar(traj: Trajectory, path, config: dict | None = None) -> None:
    """Write the verdict and a config echo next to a trajectory CSV."""
    payload = {
        "verdict": traj.verdict,
        "converged_at": traj.converged_at,
        "n_steps": traj.n_steps,
        "final_theta": traj.final_theta.tolist(),
        "config": config or {},
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)


def save_trajectory_csv(traj: Trajectory, path) -> None:
    """Write one row per iterate: parameters, risk, step norm, sample count.

    The step norm and sample count on a row belong to the retraining step
    leaving that iterate; the final row leaves them empty / zero.
    """
    d = len(traj.iterates[0])
    header = ["iter"] + [f"theta_{i}" for i in range(d)] + ["perf_risk", "perf_risk_se", "step_norm", "n_samples"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for t, theta in enumerate(traj.iterates):
            risk = traj.risks[t]
            step = f"{traj.step_norms[t]:.17g}" if t < len(traj.step_norms) else ""
            n_used = traj.n_schedule[t] if t < len(traj.n_schedule) else 0
            writer.writerow(
                [t]
                + [f"{v:.17g}" for v in theta]
                + [f"{risk.mean:.17g}", f"{risk.std_error:.17g}", step, n_used]
            )


# ---------------------------------------------------------------------------
# Inner solvers
# ---------------------------------------------------------------------------


def projected_gradient_minimize(
    value: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray],
    space: ParameterSpace,
    x0: np.ndarray,
    cfg: SolverConfig,
) -> np.ndarray:
    """Projected gradient descent with Armijo backtracking line search.

    Stops when the unit-step projected-gradient mapping has norm at most
    ``cfg.inner_tol``.  Raises :class:`InnerSolverError` on a line-search
    stall (no sufficient decrease at machine-precision steps) or when the
    iteration budget runs out.
    """
    x = space.project(x0)
    fx = float(value(x))
    if not math.isfinite(fx):
        raise InnerSolverError("inner objective non-finite at the starting point")
    eta = 1.0
    for _ in range(cfg.max_inner_iters):
        g = np.asarray(grad(x), dtype=float)
        if float(np.linalg.norm(x - space.project(x - g))) <= cfg.inner_tol:
            return x
        while True:
            cand = space.project(x - eta * g)
            step = cand - x
            if np.any(step):
                fc = float(value(cand))
                if fc <= fx + cfg.ls_sufficient_decrease * float(g @ step):
                    break
            eta *= cfg.ls_shrink
            if eta < 1e-20:
                raise InnerSolverError("inner solver stall: no sufficient decrease at machine-precision step")
        x, fx = cand, fc
        eta = min(eta / cfg.ls_shrink, 1e8)
    raise InnerSolverError(f"inner solver exceeded {cfg.max_inner_iters} iterations")


def newton_minimize(
    value: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray],
    hess: Callable[[np.ndarray], np.ndarray],
    space: ParameterSpace,
    x0: np.ndarray,
    cfg: SolverConfig,
) -> np.ndarray | None:
    """Damped Newton descent with the same Armijo backtracking and stopping rule.

    Affine-invariant, so it survives the extreme conditioning that large
    strategic shifts induce (curvature grows like the squared feature norms,
    where first-order descent stalls).  Valid while the feasible set stays
    inactive; returns None to signal a fallback to projected gradient descent
    the moment a projection binds or a Newton system fails.
    """
    x = space.project(x0)
    fx = float(value(x))
    if not math.isfinite(fx):
        raise InnerSolverError("inner objective non-finite at the starting point")
    for _ in range(1000):
        g = np.asarray(grad(x), dtype=float)
        if float(np.linalg.norm(x - space.project(x - g))) <= cfg.inner_tol:
            return x
        try:
            direction = -np.linalg.solve(hess(x), g)
        except np.linalg.LinAlgError:
            return None
        slope = float(g @ direction)
        if not math.isfinite(slope) or slope >= 0.0:
            return None
        t = 1.0
        # slack absorbs float resolution of the value near the optimum
        slack = 1e-15 * (1.0 + abs(fx))
        while True:
            cand = x + t * direction
            if not np.allclose(space.project(cand), cand):
                return None  # constraint active: Newton model invalid here
            fc = float(value(cand))
            if fc <= fx + cfg.ls_sufficient_decrease * t * slope + slack:
                break
            t *= cfg.ls_shrink
            if t < 1e-20:
                return None
        x, fx = cand, fc
    return None


_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_minimize(
    fun: Callable[[float], float], lo: float, hi: float, tol: float, max_iters: int = 500
) -> float:
    """Golden-section search on [lo, hi] for a unimodal (e.g., convex) function.

    Derivative-free, so gradient kinks are harmless; deterministic for fixed
    inputs.  Returns the midpoint of the final bracket (width <= tol).
    """
    a, b = float(lo), float(hi)
    if b < a:
        raise ValueError("need lo <= hi")
    c = b - _INV_GOLDEN * (b - a)
    d = a + _INV_GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(max_iters):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_GOLDEN * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_GOLDEN * (b - a)
            fd = fun(d)
    return 0.5 * (a + b)


def _minimize_objective(
    loss: LossSpec,
    X: np.ndarray,
    Y: np.ndarray,
    w: np.ndarray | None,
    space: ParameterSpace,
    warm: np.ndarray,
    cfg: SolverConfig,
) -> np.ndarray:
    """Minimize the (weighted) mean loss over the given support."""
    if w is None:
        w_eff = np.full(len(Y), 1.0 / len(Y))
        value = lambda th: float(np.mean(loss.value_batch(X, Y, th)))
        grad = lambda th: np.mean(loss.grad_batch(X, Y, th), axis=0)
    else:
        w_eff = w
        value = lambda th: float(np.dot(w, loss.value_batch(X, Y, th)))
        grad = lambda th: w @ loss.grad_batch(X, Y, th)
    if loss.smooth:
        if loss.hess_mean is not None:
            hess = lambda th: loss.hess_mean(w_eff, X, Y, th)
            result = newton_minimize(value, grad, hess, space, warm, cfg)
            if result is None:  # a cold start avoids saturated warm-start plateaus
                result = newton_minimize(value, grad, hess, space, np.zeros(space.dim), cfg)
            if result is not None:
                return result
        return projected_gradient_minimize(value, grad, space, warm, cfg)
    if space.dim == 1 and space.kind in ("interval", "box"):
        xm = golden_section_minimize(
            lambda v: value(np.array([v])), float(space.lo[0]), float(space.hi[0]), cfg.inner_tol
        )
        return np.array([xm])
    raise InnerSolverError("non-smooth inner problems are only supported on one-dimensional intervals")


# ---------------------------------------------------------------------------
# Outer loop
# ---------------------------------------------------------------------------


def _safe_risk(map: DistributionMap, loss: LossSpec, theta, cfg: SolverConfig, seed: int, t: int) -> RiskEstimate:
    try:
        return performative_risk(map, loss, theta, cfg.risk_eval_n, child_seed(seed, 1_000_000 + t))
    except PerfpredError:
        return RiskEstimate(float("nan"), 0.0, 1, exact=False)


def _oscillating(iterates: list[np.ndarray], cfg: SolverConfig) -> bool:
    # sustained 2-cycle: theta_{s+2} ~ theta_s while successive steps stay large
    w = cfg.oscillation_window
    top = len(iterates) - 1
    if top < w + 1:
        return False
    for s in range(top - 1 - w, top - 1):
        two_apart = float(np.linalg.norm(iterates[s + 2] - iterates[s]))
        one_apart = float(np.linalg.norm(iterates[s + 1] - iterates[s]))
        if two_apart > cfg.outer_tol or one_apart <= 1e3 * cfg.outer_tol:
            return False
    return True


def _run_dynamic(
    map: DistributionMap,
    loss: LossSpec,
    space: ParameterSpace,
    theta0,
    cfg: SolverConfig,
    seed: int,
    step_fn: Callable[[np.ndarray, int], tuple[np.ndarray, int]],
    record_n: bool,
) -> Trajectory:
    theta = space.project(as_theta(theta0, space.dim))
    traj = Trajectory()
    traj.iterates.append(theta)
    traj.risks.append(_safe_risk(map, loss, theta, cfg, seed, 0))
    for t in range(cfg.max_outer_iters):
        theta_next, n_used = step_fn(theta, t)
        if not np.all(np.isfinite(theta_next)):
            traj.verdict = VERDICT_DIVERGED
            return traj
        step_norm = float(np.linalg.norm(theta_next - theta))
        traj.step_norms.append(step_norm)
        if record_n:
            traj.n_schedule.append(n_used)
        traj.iterates.append(theta_next)
        traj.risks.append(_safe_risk(map, loss, theta_next, cfg, seed, t + 1))
        if float(np.linalg.norm(theta_next)) > cfg.divergence_radius:
            traj.verdict = VERDICT_DIVERGED
            return traj
        if step_norm <= cfg.outer_tol:
            traj.verdict = VERDICT_CONVERGED
            traj.converged_at = len(traj.step_norms) - 1
            return traj
        if _oscillating(traj.iterates, cfg):
            traj.verdict = VERDICT_OSCILLATING
            return traj
        theta = theta_next
    traj.verdict = VERDICT_MAX_ITERS
    return traj


def _retrain_step(map: DistributionMap, loss: LossSpec, space: ParameterSpace, cfg: SolverConfig):
    """Build the next-iterate solver on D(theta): closed form, population, or fresh draws."""
    forms = map.closed_forms(loss)

    def step(theta: np.ndarray, t: int, sample_args=None) -> np.ndarray:
        if forms is not None and forms.argmin is not None and sample_args is None:
            return space.project(forms.argmin(theta, space))
        if sample_args is not None:
            n_t, step_seed = sample_args
            X, Y = map.sample(theta, n_t, step_seed)
            w = None
        else:
            pop = map.population(theta)
            if pop is None:
                raise InnerSolverError(
                    "map has neither a closed-form minimizer nor a finite population; pass n_per_step"
                )
            X, Y, w = pop
        return _minimize_objective(loss, X, Y, w, space, theta, cfg)

    return step


def rrm(
    map: DistributionMap,
    loss: LossSpec,
    space: ParameterSpace,
    theta0,
    cfg: SolverConfig | None = None,
    n_per_step: int | None = None,
    seed: int = 0,
) -> Trajectory:
    """Repeated risk minimization: retrain to optimality on each deployment.

    Population-level procedure: the inner problem on D(theta_t) is solved
    through the map's closed-form minimizer when available, the exact finite
    population otherwise, and failing both, a Monte Carlo objective over
    ``n_per_step`` draws held under common random numbers across steps (so
    the approximate retraining map is a fixed deterministic map).
    """
    cfg = cfg or SolverConfig()
    if n_per_step:

        def step(theta, t):
            X, Y = map.sample(theta, n_per_step, seed)  # same seed every step: common draws
            return _minimize_objective(loss, X, Y, None, space, theta, cfg), n_per_step

    else:
        inner = _retrain_step(map, loss, space, cfg)

        def step(theta, t):
            return inner(theta, t), 0

    return _run_dynamic(map, loss, space, theta0, cfg, seed, step, record_n=bool(n_per_step))


def rerm(
    map: DistributionMap,
    loss: LossSpec,
    space: ParameterSpace,
    theta0,
    schedule: SampleSchedule,
    cfg: SolverConfig | None = None,
    seed: int = 0,
) -> Trajectory:
    """Repeated empirical risk minimization: retrain on n_t fresh draws per step.

    Draws are fresh across steps (independent per-step seeds) but fixed
    within one inner solve.  With the ``exact`` schedule this coincides with
    :func:`rrm`.
    """
    cfg = cfg or SolverConfig()
    if schedule.kind == "exact":
        inner = _retrain_step(map, loss, space, cfg)

        def step(theta, t):
            return inner(theta, t), 0

        return _run_dynamic(map, loss, space, theta0, cfg, seed, step, record_n=False)

    inner = _retrain_step(map, loss, space, cfg)

    def step(theta, t):
        n_t = schedule.n_at(t)
        if n_t < 1:
            raise ValueError(f"schedule produced n_t={n_t} < 1 at step {t}")
        return inner(theta, t, sample_args=(n_t, child_seed(seed, t))), n_t

    return _run_dynamic(map, loss, space, theta0, cfg, seed, step, record_n=True)


def _gradient_estimate(
    map: DistributionMap,
    loss: LossSpec,
    theta: np.ndarray,
    n: int | None,
    seed: int,
    force_mc: bool,
) -> np.ndarray:
    g, _ = risk_gradient(map, loss, theta, theta, n if n else 1, seed, force_monte_carlo=force_mc)
    return g


def rgd(
    map: DistributionMap,
    loss: LossSpec,
    space: ParameterSpace,
    theta0,
    eta: float,
    cfg: SolverConfig | None = None,
    n_per_step: int | None = None,
    seed: int = 0,
) -> Trajectory:
    """Repeated gradient descent: one projected gradient step per deployment.

    The gradient of the loss at theta_t over D(theta_t) is exact where the
    map allows (closed form or population); otherwise a Monte Carlo mean over
    ``n_per_step`` draws under common random numbers.  The classical safe step
    size is eta <= 2 / (beta + gamma).
    """
    cfg = cfg or SolverConfig()
    if eta < 0:
        raise ValueError("step size eta must be >= 0")

    def step(theta, t):
        g = _gradient_estimate(map, loss, theta, n_per_step, seed, force_mc=False)
        return space.project(theta - eta * g), n_per_step or 0

    return _run_dynamic(map, loss, space, theta0, cfg, seed, step, record_n=bool(n_per_step))


def regd(
    map: DistributionMap,
    loss: LossSpec,
    space: ParameterSpace,
    theta0,
    eta: float,
    schedule: SampleSchedule,
    cfg: SolverConfig | None = None,
    seed: int = 0,
) -> Trajectory:
    """Repeated empirical gradient descent: one step on the empirical gradient
    of n_t fresh draws per deployment.  With the ``exact`` schedule the update
    rule and trajectory coincide bit-for-bit with :func:`rgd`.
    """
    cfg = cfg or SolverConfig()
    if eta < 0:
        raise ValueError("step size eta must be >= 0")
    if schedule.kind == "exact":
        return rgd(map, loss, space, theta0, eta, cfg, n_per_step=None, seed=seed)

    def step(theta, t):
        n_t = schedule.n_at(t)
        if n_t < 1:
            raise ValueError(f"schedule produced n_t={n_t} < 1 at step {t}")
        g = _gradient_estimate(map, loss, theta, n_t, child_seed(seed, t), force_mc=True)
        return space.project(theta - eta * g), n_t

    return _run_dynamic(map, loss, space, theta0, cfg, seed, step, record_n=True)


def retrain_once(
    map: DistributionMap,
    loss: LossSpec,
    space: ParameterSpace,
    theta,
    cfg: SolverConfig | None = None,
) -> np.ndarray:
    """One exact retraining step G(theta): the inner argmin on D(theta).

    Useful as a re-solve check: at a performatively stable point,
    ||G(theta) - theta|| vanishes.
    """
    cfg = cfg or SolverConfig()
    inner = _retrain_step(map, loss, space, cfg)
    return inner(space.project(as_theta(theta, space.dim)), 0)


def stability_residual(
    map: DistributionMap,
    loss: LossSpec,
    space: ParameterSpace,
    theta,
    cfg: SolverConfig | None = None,
) -> float:
    """||G(theta) - theta||: zero exactly at fixed points of retraining."""
    theta = as_theta(theta, space.dim)
    return float(np.linalg.norm(retrain_once(map, loss, space, theta, cfg) - theta))


# ---------------------------------------------------------------------------
# Theorem iteration bounds
# ---------------------------------------------------------------------------


def theoretical_iteration_bound(
    kind: str,
    eps: float,
    beta: float,
    gamma: float,
    eta: float | None = None,
    theta0_dist: float = 1.0,
    delta: float = 1e-6,
) -> int:
    """Sufficient iteration count for the stated convergence guarantees.

    ``kind`` is one of rrm / rgd / rerm / regd (the latter two use the
    finite-sample rates, which assume the ``guarantee`` sampling schedule).
    Raises :class:`NoConvergenceGuarantee`, naming the violated inequality,
    when the preconditions fail; callers may still run the dynamic.
    """
    if min(beta, gamma) <= 0 or eps < 0 or delta <= 0 or theta0_dist < 0:
        raise ValueError("need beta, gamma, delta > 0 and eps, theta0_dist >= 0")
    if kind in ("rgd", "regd"):
        if eta is None or eta <= 0:
            raise ValueError("gradient dynamics need a step size eta > 0")
        if eta > 2.0 / (beta + gamma):
            raise NoConvergenceGuarantee(f"eta > 2/(beta+gamma) = {2.0 / (beta + gamma):g}: no guarantee")
    if kind == "rrm":
        if eps >= gamma / beta:
            raise NoConvergenceGuarantee(f"epsilon >= gamma/beta = {gamma / beta:g}: no RRM guarantee")
        rate = 1.0 - eps * beta / gamma
    elif kind == "rerm":
        if eps >= gamma / (2.0 * beta):
            raise NoConvergenceGuarantee(f"epsilon >= gamma/(2 beta) = {gamma / (2 * beta):g}: no RERM guarantee")
        rate = 1.0 - 2.0 * eps * beta / gamma
    elif kind == "rgd":
        cutoff = gamma / ((beta + gamma) * (1.0 + 1.5 * eta * beta))
        if eps >= cutoff:
            raise NoConvergenceGuarantee(
                f"epsilon >= gamma/((beta+gamma)(1+1.5 eta beta)) = {cutoff:g}: no RGD guarantee"
            )
        rate = eta * (beta * gamma / (beta + gamma) - eps * (1.5 * eta * beta**2 + beta))
    elif kind == "regd":
        cutoff = gamma / ((beta + gamma) * (1.0 + 1.5 * eta * beta))
        if eps >= cutoff:
            raise NoConvergenceGuarantee(
                f"epsilon >= gamma/((beta+gamma)(1+1.5 eta beta)) = {cutoff:g}: no REGD guarantee"
            )
        rate = eta * (beta * gamma / (beta + gamma) - eps * (3.0 * eta * beta**2 + 2.0 * beta))
        if rate <= 0:
            raise NoConvergenceGuarantee("finite-sample REGD rate is non-positive at this eta: no guarantee")
    else:
        raise ValueError(f"unknown dynamic kind {kind!r}")
    if theta0_dist <= delta:
        return 0
    return int(math.ceil(math.log(theta0_dist / delta) / rate))
