"""Primitive types and risk evaluation for performative prediction.

The objects here encode the basic setting: a parameter vector theta drawn
from a closed convex set, a distribution map D(theta) over instances
z = (x, y) that reacts to the deployed parameters, and a pointwise loss
l(z; theta).  On top of them sit the two central risk functionals:

    performative risk        PR(theta)        = E_{Z ~ D(theta)} l(Z; theta)
    decoupled risk           DPR(theta, phi)  = E_{Z ~ D(theta)} l(Z; phi)

Both are evaluated either exactly (closed form or finite-population
enumeration, when the map provides them) or by Monte Carlo with
counter-based seeding, so that equal inputs always produce bit-identical
estimates and two evaluation parameters under one deployed parameter share
identical draws (common random numbers).
"""

from __future__ import annotations

import abc
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .rng import philox_key, raw_words


class PerfpredError(Exception):
    """Base class for errors raised by this package."""


class DimensionMismatchError(PerfpredError):
    """A vector has the wrong dimension for the object consuming it."""


class NonFiniteLossError(PerfpredError):
    """A loss or gradient evaluation produced NaN or infinity."""

    def __init__(self, message: str, sample_index: int | None = None):
        super().__init__(message)
        self.sample_index = sample_index


class RegimeError(PerfpredError):
    """Map parameters leave the regime where the map is well defined."""


def as_theta(theta, dim: int | None = None) -> np.ndarray:
    """Coerce a scalar or sequence to a 1-D float parameter vector."""
    v = np.atleast_1d(np.asarray(theta, dtype=float))
    if v.ndim != 1:
        raise DimensionMismatchError(f"parameter must be a vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatchError(f"parameter has dimension {v.shape[0]}, expected {dim}")
    return v


@dataclass(frozen=True)
class Instance:
    """One observation z = (x, y): a feature vector and a scalar outcome."""

    x: np.ndarray
    y: float

    def as_z(self) -> np.ndarray:
        return np.concatenate([np.asarray(self.x, dtype=float).ravel(), [float(self.y)]])


# ---------------------------------------------------------------------------
# Parameter space
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParameterSpace:
    """A closed convex feasible set with Euclidean projection.

    Kinds: ``interval`` (1-D box), ``box`` (per-coordinate bounds), ``ball``
    (center and radius).  Projection clamps coordinates for interval/box and
    scales radially for ball; it is idempotent and non-expansive.
    """

    kind: str
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    center: np.ndarray | None = None
    radius: float | None = None

    def __post_init__(self):
        if self.kind in ("interval", "box"):
            lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
            hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
            if lo.shape != hi.shape or lo.ndim != 1:
                raise DimensionMismatchError("bounds must be 1-D arrays of equal length")
            if np.any(lo > hi):
                raise ValueError("lower bound exceeds upper bound")
            object.__setattr__(self, "lo", lo)
            object.__setattr__(self, "hi", hi)
        elif self.kind == "ball":
            c = np.atleast_1d(np.asarray(self.center, dtype=float))
            if self.radius is None or self.radius < 0:
                raise ValueError("ball radius must be >= 0")
            object.__setattr__(self, "center", c)
        else:
            raise ValueError(f"unknown parameter-space kind {self.kind!r}")

    @staticmethod
    def interval(lo: float, hi: float) -> "ParameterSpace":
        return ParameterSpace("interval", lo=np.array([lo]), hi=np.array([hi]))

    @staticmethod
    def box(lo, hi) -> "ParameterSpace":
        return ParameterSpace("box", lo=np.asarray(lo, dtype=float), hi=np.asarray(hi, dtype=float))

    @staticmethod
    def ball(center, radius: float) -> "ParameterSpace":
        return ParameterSpace("ball", center=np.asarray(center, dtype=float), radius=float(radius))

    @property
    def dim(self) -> int:
        return len(self.lo) if self.kind in ("interval", "box") else len(self.center)

    def project(self, v) -> np.ndarray:
        v = as_theta(v, self.dim)
        if self.kind in ("interval", "box"):
            return np.clip(v, self.lo, self.hi)
        delta = v - self.center
        norm = float(np.linalg.norm(delta))
        if norm <= self.radius:
            return v.copy()
        return self.center + delta * (self.radius / norm)

    def contains(self, v, tol: float = 1e-12) -> bool:
        v = as_theta(v, self.dim)
        return bool(np.linalg.norm(v - self.project(v)) <= tol)

    def diameter(self) -> float:
        if self.kind in ("interval", "box"):
            return float(np.linalg.norm(self.hi - self.lo))
        return 2.0 * self.radius

    def grid(self, resolution: int) -> np.ndarray:
        """Feasible grid points, shape (k, dim).  Supports dim <= 2."""
        if resolution < 2:
            raise ValueError("grid resolution must be >= 2")
        if self.kind in ("interval", "box"):
            axes = [np.linspace(self.lo[i], self.hi[i], resolution) for i in range(self.dim)]
        else:
            axes = [
                np.linspace(self.center[i] - self.radius, self.center[i] + self.radius, resolution)
                for i in range(self.dim)
            ]
        if self.dim == 1:
            pts = axes[0][:, None]
        elif self.dim == 2:
            g0, g1 = np.meshgrid(axes[0], axes[1], indexing="ij")
            pts = np.column_stack([g0.ravel(), g1.ravel()])
        else:
            raise ValueError("grids are only supported in dimension <= 2")
        if self.kind == "ball":
            keep = np.linalg.norm(pts - self.center, axis=1) <= self.radius + 1e-15
            pts = pts[keep]
        return pts


def project(space: ParameterSpace, v) -> np.ndarray:
    """Euclidean projection of v onto the feasible set."""
    return space.project(v)


# ---------------------------------------------------------------------------
# Loss specification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LossConstants:
    """Declared regularity constants; ``None`` means not certified."""

    beta: float | None = None     # joint smoothness
    gamma: float | None = None    # strong convexity
    L_z: float | None = None      # Lipschitz constant in z
    L_theta: float | None = None  # Lipschitz constant in theta


@dataclass(frozen=True)
class LossSpec:
    """A pointwise loss with its gradient in theta and declared constants.

    ``value_batch`` and ``grad_batch`` are vectorized over instances:
    X has shape (n, m-1), Y shape (n,), and they return shapes (n,) and
    (n, d).  ``smooth`` is False for losses with gradient kinks.
    """

    name: str
    value_batch: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    grad_batch: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    constants: LossConstants = field(default_factory=LossConstants)
    smooth: bool = True
    theta_dim: int | None = None  # None: any dimension
    params: dict = field(default_factory=dict)
    notes: str = ""
    # optional weighted-mean Hessian (w, X, Y, theta) -> (d, d); enables the
    # curvature-aware inner solver on badly conditioned induced objectives
    hess_mean: Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray] | None = None

    def check_theta(self, theta) -> np.ndarray:
        return as_theta(theta, self.theta_dim)

    def value(self, z: Instance, theta) -> float:
        theta = self.check_theta(theta)
        x = np.asarray(z.x, dtype=float).reshape(1, -1)
        return float(self.value_batch(x, np.array([float(z.y)]), theta)[0])

    def grad(self, z: Instance, theta) -> np.ndarray:
        theta = self.check_theta(theta)
        x = np.asarray(z.x, dtype=float).reshape(1, -1)
        return np.asarray(self.grad_batch(x, np.array([float(z.y)]), theta)[0], dtype=float)

    def with_constants(self, **updates) -> "LossSpec":
        merged = {**self.constants.__dict__, **updates}
        return LossSpec(
            name=self.name,
            value_batch=self.value_batch,
            grad_batch=self.grad_batch,
            constants=LossConstants(**merged),
            smooth=self.smooth,
            theta_dim=self.theta_dim,
            params=dict(self.params),
            notes=self.notes,
            hess_mean=self.hess_mean,
        )


# ---------------------------------------------------------------------------
# Distribution maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClosedForms:
    """Exact oracles a map can expose for a specific loss.

    All fields optional.  ``dpr(theta_deploy, theta_eval)`` is the exact
    decoupled risk, ``dpr_grad`` its gradient in the evaluation parameter,
    ``argmin(theta_deploy, space)`` the exact risk minimizer on
    D(theta_deploy), and ``theta_ps`` / ``theta_po`` the stable point and
    performative optimum where known.
    """

    dpr: Optional[Callable[[np.ndarray, np.ndarray], float]] = None
    dpr_grad: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    argmin: Optional[Callable[[np.ndarray, ParameterSpace], np.ndarray]] = None
    theta_ps: np.ndarray | None = None
    theta_po: np.ndarray | None = None

    def pr(self, theta: np.ndarray) -> float:
        if self.dpr is None:
            raise ValueError("no closed-form decoupled risk available")
        return self.dpr(theta, theta)


class DistributionMap(abc.ABC):
    """A map theta -> distribution over instances z = (x, y).

    Deterministic contract: ``sample(theta, n, seed)`` depends only on
    (theta, seed, sample index); deploying the same theta twice induces the
    same distribution.  Subclasses set ``instance_dim`` (m: feature dimension
    plus one), ``theta_dim`` and ``words_per_sample``, and implement
    ``_transform``, which receives one row of raw 64-bit words per sample
    (convert with :func:`perfpred.rng.to_open_unit` as needed).
    """

    instance_dim: int
    theta_dim: int
    declared_sensitivity: float | None = None
    words_per_sample: int = 1

    @abc.abstractmethod
    def _transform(self, theta: np.ndarray, words: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Turn an (n, words_per_sample) uint64 array into (X, Y)."""

    def check_theta(self, theta) -> np.ndarray:
        return as_theta(theta, self.theta_dim)

    def sample(self, theta, n: int, seed: int, start: int = 0) -> tuple[np.ndarray, np.ndarray]:
        """Draw instances for sample indices [start, start + n)."""
        theta = self.check_theta(theta)
        if n < 1:
            raise ValueError("need n >= 1 samples")
        w = raw_words(philox_key(seed), start, n, self.words_per_sample)
        return self._transform(theta, w)

    def sample_instances(self, theta, n: int, seed: int, start: int = 0) -> list[Instance]:
        """Like :meth:`sample`, but materialized as Instance objects."""
        X, Y = self.sample(theta, n, seed, start=start)
        return [Instance(x=X[i].copy(), y=float(Y[i])) for i in range(n)]

    def population(self, theta) -> tuple[np.ndarray, np.ndarray, np.ndarray] | None:
        """Exact finite support (X, Y, weights) of D(theta), if the map has one."""
        return None

    def closed_forms(self, loss: LossSpec) -> ClosedForms | None:
        """Exact risk oracles for the given loss, if known."""
        return None

    def exact_w1(self, theta_a, theta_b) -> float | None:
        """Exact Wasserstein-1 distance between D(theta_a) and D(theta_b), if known."""
        return None

    def default_space(self) -> ParameterSpace:
        raise NotImplementedError

    def coupled_sample(self, theta_a, theta_b, n: int, seed: int):
        """CRN-coupled draws (Z_a, Z_b) from D(theta_a) and D(theta_b).

        Returns (Za, Zb) with rows z = (x..., y); the mean row distance upper
        bounds W1.  Population-backed maps may override with an exact coupling.
        """
        theta_a = self.check_theta(theta_a)
        theta_b = self.check_theta(theta_b)
        w = raw_words(philox_key(seed), 0, n, self.words_per_sample)
        xa, ya = self._transform(theta_a, w)
        xb, yb = self._transform(theta_b, w)
        za = np.column_stack([xa, ya])
        zb = np.column_stack([xb, yb])
        return za, zb, None  # weights None: equal 1/n


# ---------------------------------------------------------------------------
# Risk estimates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RiskEstimate:
    """Mean risk with its Monte Carlo standard error.

    ``exact`` marks values computed from a closed form or full-population
    enumeration; then ``std_error`` is zero and ``n_samples`` merely echoes
    the requested draw budget.
    """

    mean: float
    std_error: float
    n_samples: int
    exact: bool = False

    def __post_init__(self):
        if self.std_error < 0:
            raise ValueError("std_error must be >= 0")
        if self.n_samples < 1:
            raise ValueError("n_samples must be a positive integer")
        if self.exact and self.std_error != 0.0:
            raise ValueError("exact estimates carry zero std_error")


def _guard_finite(values: np.ndarray, what: str) -> None:
    bad = ~np.isfinite(values)
    if bad.any():
        bad_rows = bad if bad.ndim == 1 else bad.any(axis=1)
        idx = int(np.flatnonzero(bad_rows)[0])
        raise NonFiniteLossError(f"non-finite {what} at sample index {idx}", sample_index=idx)


def decoupled_risk(
    map: DistributionMap,
    loss: LossSpec,
    theta_deploy,
    theta_eval,
    n: int,
    seed: int,
    force_monte_carlo: bool = False,
) -> RiskEstimate:
    """Decoupled performative risk DPR(theta_deploy, theta_eval).

    Mean loss of theta_eval over D(theta_deploy): exact when the map offers a
    closed form or a finite population (unless ``force_monte_carlo``), else a
    Monte Carlo mean over n i.i.d. draws with standard error.
    """
    theta_deploy = map.check_theta(theta_deploy)
    theta_eval = loss.check_theta(theta_eval)
    if n < 1:
        raise ValueError("need n >= 1")
    if not force_monte_carlo:
        forms = map.closed_forms(loss)
        if forms is not None and forms.dpr is not None:
            return RiskEstimate(float(forms.dpr(theta_deploy, theta_eval)), 0.0, n, exact=True)
        pop = map.population(theta_deploy)
        if pop is not None:
            X, Y, w = pop
            vals = loss.value_batch(X, Y, theta_eval)
            _guard_finite(vals, "loss value")
            return RiskEstimate(float(np.dot(w, vals)), 0.0, n, exact=True)
    X, Y = map.sample(theta_deploy, n, seed)
    vals = loss.value_batch(X, Y, theta_eval)
    _guard_finite(vals, "loss value")
    mean = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return RiskEstimate(mean, se, n, exact=False)


def performative_risk(
    map: DistributionMap,
    loss: LossSpec,
    theta,
    n: int,
    seed: int,
    force_monte_carlo: bool = False,
) -> RiskEstimate:
    """Performative risk PR(theta) = DPR(theta, theta)."""
    return decoupled_risk(map, loss, theta, theta, n, seed, force_monte_carlo=force_monte_carlo)


def joint_smoothness_violation(loss: LossSpec, X: np.ndarray, Y: np.ndarray, thetas: np.ndarray) -> float:
    """Worst violation of the beta-joint-smoothness inequalities on a grid.

    Checks both gradient-Lipschitz conditions (in theta at fixed z, and in z
    at fixed theta) over consecutive pairs of the supplied instances and
    parameters.  Positive return = declared beta fails somewhere; values
    <= 0 certify the grid.
    """
    beta = loss.constants.beta
    if beta is None:
        raise ValueError(f"loss {loss.name!r} declares no smoothness constant")
    worst = -np.inf
    n = (len(Y) // 2) * 2
    dz = np.sqrt(
        np.sum((X[0:n:2] - X[1:n:2]) ** 2, axis=1) + (Y[0:n:2] - Y[1:n:2]) ** 2
    )
    for t in range(len(thetas)):
        g = loss.grad_batch(X, Y, thetas[t])
        dg = np.linalg.norm(g[0:n:2] - g[1:n:2], axis=1)
        worst = max(worst, float(np.max(dg - beta * dz)))
    for t in range(0, len(thetas) - 1, 2):
        dt = np.linalg.norm(thetas[t] - thetas[t + 1])
        g1 = loss.grad_batch(X, Y, thetas[t])
        g2 = loss.grad_batch(X, Y, thetas[t + 1])
        worst = max(worst, float(np.max(np.linalg.norm(g1 - g2, axis=1)) - beta * dt))
    return worst


def strong_convexity_violation(loss: LossSpec, X: np.ndarray, Y: np.ndarray, thetas: np.ndarray) -> float:
    """Worst violation of the gamma-strong-convexity inequality on a grid.

    For consecutive parameter pairs (theta, theta') and every supplied
    instance, evaluates
        l(z; theta') + grad(z; theta')^T (theta - theta')
        + gamma/2 * ||theta - theta'||^2 - l(z; theta).
    Positive return = declared gamma fails somewhere.
    """
    gamma = loss.constants.gamma
    if gamma is None:
        raise ValueError(f"loss {loss.name!r} declares no strong-convexity constant")
    worst = -np.inf
    for t in range(0, len(thetas) - 1, 2):
        th, th2 = thetas[t], thetas[t + 1]
        lhs = loss.value_batch(X, Y, th)
        rhs = (
            loss.value_batch(X, Y, th2)
            + loss.grad_batch(X, Y, th2) @ (th - th2)
            + 0.5 * gamma * float(np.dot(th - th2, th - th2))
        )
        worst = max(worst, float(np.max(rhs - lhs)))
    return worst


def risk_gradient(
    map: DistributionMap,
    loss: LossSpec,
    theta_deploy,
    theta_eval,
    n: int,
    seed: int,
    force_monte_carlo: bool = False,
) -> tuple[np.ndarray, float]:
    """Mean gradient of the loss in theta_eval over D(theta_deploy).

    Returns (gradient, std_error) where std_error is the root of the summed
    per-component variances of the Monte Carlo mean (zero when exact).
    """
    theta_deploy = map.check_theta(theta_deploy)
    theta_eval = loss.check_theta(theta_eval)
    if n < 1:
        raise ValueError("need n >= 1")
    if not force_monte_carlo:
        forms = map.closed_forms(loss)
        if forms is not None and forms.dpr_grad is not None:
            return np.atleast_1d(np.asarray(forms.dpr_grad(theta_deploy, theta_eval), dtype=float)), 0.0
        pop = map.population(theta_deploy)
        if pop is not None:
            X, Y, w = pop
            grads = loss.grad_batch(X, Y, theta_eval)
            _guard_finite(grads, "loss gradient")
            return np.asarray(w @ grads, dtype=float), 0.0
    X, Y = map.sample(theta_deploy, n, seed)
    grads = loss.grad_batch(X, Y, theta_eval)
    _guard_finite(grads, "loss gradient")
    mean = np.mean(grads, axis=0)
    if n > 1:
        se = float(np.sqrt(np.sum(np.var(grads, axis=0, ddof=1)) / n))
    else:
        se = 0.0
    return np.asarray(mean, dtype=float), se
