"""Concrete parameter-reactive distribution maps with exact oracles.

Three families:

* ``BiasedCoinMap`` -- a single feature X uniform on {-1, +1} and a binary
  outcome Y | X ~ Bernoulli(1/2 + mu*X + eps*theta*X).  The feature marginal
  is theta-invariant; uniformity on {+-1} is the unique choice under which
  the map's quadratic closed forms hold exactly (it forces E[X] = 0).
* ``PointMassMap`` -- scalar outcome placed deterministically by theta:
  Y = eps*theta, Y = 1 + eps*theta, or a step Y = 1{theta < 1/2}.  These are
  the minimal carriers of the non-convergence constructions.
* ``GaussianFamilyMap`` -- theta = (mean part, scale part) in R^{2p} mapped
  to N(eps1 * mu, eps2^2 * diag(sigma^2)); its sensitivity constant is
  max(|eps1|, |eps2|).

Each map exposes whatever exact structure it has: a finite population,
closed-form decoupled risk / minimizer for its companion losses, and exact
Wasserstein-1 distances where available.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtri

from .rng import to_open_unit
from .core import (
    ClosedForms,
    DistributionMap,
    LossSpec,
    ParameterSpace,
    RegimeError,
    as_theta,
)

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
_EFFECTIVELY_UNBOUNDED = 1e10


class BiasedCoinMap(DistributionMap):
    """Bernoulli outcome whose bias tilts with the deployed parameter.

    Requires |mu| <= 1/2 and |mu + eps| <= 1/2 so the conditional success
    probability 1/2 + (mu + eps*theta)*x stays in [0, 1] for theta in [0, 1].
    The standard regime mu in (0, 1/2), eps < 1/2 - mu gives a convex
    performative risk; eps >= 1/2 with |mu + eps| <= 1/2 gives a concave one.
    """

    instance_dim = 2
    theta_dim = 1
    words_per_sample = 1  # sign bit for X, top 53 bits for the outcome draw

    def __init__(self, mu: float, eps: float):
        self.mu = float(mu)
        self.eps = float(eps)
        if self.eps < 0:
            raise RegimeError("performativity strength eps must be >= 0")
        if abs(self.mu) > 0.5 or abs(self.mu + self.eps) > 0.5:
            raise RegimeError(
                f"bias probability escapes [0,1] on theta in [0,1]: "
                f"need |mu| <= 1/2 and |mu + eps| <= 1/2, got mu={self.mu}, eps={self.eps}"
            )
        self.declared_sensitivity = self.eps

    def _tilt(self, theta: np.ndarray) -> float:
        a = self.mu + self.eps * float(theta[0])
        if abs(a) > 0.5 + 1e-12:
            raise RegimeError(f"bias probability escapes [0,1] at theta={float(theta[0])}")
        return a

    def _transform(self, theta, words):
        a = self._tilt(theta)
        w = words[:, 0]
        x = 1.0 - 2.0 * (w & np.uint64(1))  # low bit, disjoint from the outcome bits
        y = (to_open_unit(w) < 0.5 + a * x).astype(float)
        return x[:, None], y

    def population(self, theta):
        a = self._tilt(self.check_theta(theta))
        X = np.array([[1.0], [1.0], [-1.0], [-1.0]])
        Y = np.array([1.0, 0.0, 1.0, 0.0])
        q_pos = 0.5 + a
        q_neg = 0.5 - a
        w = 0.5 * np.array([q_pos, 1.0 - q_pos, q_neg, 1.0 - q_neg])
        return X, Y, w

    def closed_forms(self, loss: LossSpec):
        if loss.name != "squared_affine":
            return None
        mu, eps = self.mu, self.eps

        def dpr(td, te):
            a = mu + eps * float(td[0])
            phi = float(te[0])
            return 0.25 + phi * phi - 2.0 * a * phi

        def dpr_grad(td, te):
            a = mu + eps * float(td[0])
            return np.array([2.0 * float(te[0]) - 2.0 * a])

        def argmin(td, space: ParameterSpace):
            return space.project(np.array([mu + eps * float(td[0])]))

        return ClosedForms(
            dpr=dpr,
            dpr_grad=dpr_grad,
            argmin=argmin,
            theta_ps=self._stable_point(),
            theta_po=self._optimal_point(),
        )

    def _stable_point(self):
        # fixed point of theta -> clip(mu + eps*theta, 0, 1)
        if self.eps < 1.0:
            cand = self.mu / (1.0 - self.eps)
            if 0.0 <= cand <= 1.0:
                return np.array([cand])
        if np.clip(self.mu, 0.0, 1.0) == 0.0:
            return np.array([0.0])
        if np.clip(self.mu + self.eps, 0.0, 1.0) == 1.0:
            return np.array([1.0])
        return None

    def _optimal_point(self):
        # interior minimizer of PR(theta) = 1/4 - 2*mu*theta + (1 - 2*eps)*theta^2
        if 1.0 - 2.0 * self.eps > 0.0:
            cand = self.mu / (1.0 - 2.0 * self.eps)
            if 0.0 <= cand <= 1.0:
                return np.array([cand])
        return None

    def exact_w1(self, theta_a, theta_b):
        ta = self.check_theta(theta_a)
        tb = self.check_theta(theta_b)
        # X-marginal is shared; the optimal plan moves Y mass |delta bias| a distance 1
        return abs(self._tilt(ta) - self._tilt(tb))

    def default_space(self) -> ParameterSpace:
        return ParameterSpace.interval(0.0, 1.0)


def coin_closed_forms(map: BiasedCoinMap):
    """The biased coin's exact oracles under its companion squared loss.

    Returns a dict with the retraining map ``G`` (exact squared-loss
    minimizer on D(theta), clipped to [0, 1]), the risk curve ``PR``,
    and the stable / optimal points (None where they fall outside the
    closed-form regime, e.g. the concave case).
    """
    from .losses import squared_loss_affine

    forms = map.closed_forms(squared_loss_affine())
    space = map.default_space()
    return {
        "G": lambda theta: forms.argmin(as_theta(theta, 1), space),
        "PR": lambda theta: forms.pr(as_theta(theta, 1)),
        "theta_ps": forms.theta_ps,
        "theta_po": forms.theta_po,
    }


class PointMassMap(DistributionMap):
    """Deterministic scalar outcome driven by theta; no feature coordinates.

    Kinds: ``linear_eps`` (Y = eps*theta), ``affine_eps`` (Y = 1 + eps*theta),
    ``step_half`` (Y = 1 if theta < 1/2 else 0).  The first two are
    eps-sensitive exactly; the step map is not eps-sensitive for any eps and
    therefore declares no sensitivity.
    """

    instance_dim = 1
    theta_dim = 1
    words_per_sample = 1

    KINDS = ("linear_eps", "affine_eps", "step_half")

    def __init__(self, kind: str, eps: float = 0.0):
        if kind not in self.KINDS:
            raise ValueError(f"unknown point-mass kind {kind!r}")
        self.kind = kind
        self.eps = float(eps)
        self.declared_sensitivity = None if kind == "step_half" else abs(self.eps)

    def outcome(self, theta) -> float:
        t = float(self.check_theta(theta)[0])
        if self.kind == "linear_eps":
            return self.eps * t
        if self.kind == "affine_eps":
            return 1.0 + self.eps * t
        return 1.0 if t < 0.5 else 0.0

    def _transform(self, theta, words):
        y = np.full(words.shape[0], self.outcome(theta))
        return np.empty((words.shape[0], 0)), y

    def population(self, theta):
        return np.empty((1, 0)), np.array([self.outcome(theta)]), np.array([1.0])

    def exact_w1(self, theta_a, theta_b):
        return abs(self.outcome(theta_a) - self.outcome(theta_b))

    def closed_forms(self, loss: LossSpec):
        if self.kind == "linear_eps" and loss.name == "linear":
            return self._linear_loss_forms(float(loss.params["beta"]))
        if self.kind in ("affine_eps", "step_half") and loss.name == "squared_location":
            return self._squared_location_forms()
        return None

    def _linear_loss_forms(self, beta: float):
        eps = self.eps

        def dpr(td, te):
            return eps * beta * float(td[0]) * float(te[0])

        def dpr_grad(td, te):
            return np.array([eps * beta * float(td[0])])

        def argmin(td, space: ParameterSpace):
            # linear objective c*phi: minimized at an extreme point of the space
            c = eps * beta * float(td[0])
            if c > 0:
                return self._low_end(space)
            if c < 0:
                return self._high_end(space)
            return space.project(np.zeros(1))

        return ClosedForms(dpr=dpr, dpr_grad=dpr_grad, argmin=argmin, theta_ps=np.array([0.0]))

    @staticmethod
    def _low_end(space: ParameterSpace):
        if space.kind in ("interval", "box"):
            return space.lo.copy()
        return space.center - np.array([space.radius])

    @staticmethod
    def _high_end(space: ParameterSpace):
        if space.kind in ("interval", "box"):
            return space.hi.copy()
        return space.center + np.array([space.radius])

    def _squared_location_forms(self):
        def dpr(td, te):
            return (self.outcome(td) - float(te[0])) ** 2

        def dpr_grad(td, te):
            return np.array([-2.0 * (self.outcome(td) - float(te[0]))])

        def argmin(td, space: ParameterSpace):
            return space.project(np.array([self.outcome(td)]))

        theta_ps = None
        theta_po = None
        if self.kind == "affine_eps":
            if self.eps != 1.0:
                theta_ps = np.array([1.0 / (1.0 - self.eps)])
                theta_po = np.array([1.0 / (1.0 - self.eps)])
        else:  # step_half: no stable point exists; the optimum sits at the jump
            theta_po = np.array([0.5])
        return ClosedForms(dpr=dpr, dpr_grad=dpr_grad, argmin=argmin, theta_ps=theta_ps, theta_po=theta_po)

    def default_space(self) -> ParameterSpace:
        if self.kind == "linear_eps":
            return ParameterSpace.interval(-1.0, 1.0)
        if self.kind == "affine_eps":
            return ParameterSpace.interval(-_EFFECTIVELY_UNBOUNDED, _EFFECTIVELY_UNBOUNDED)
        return ParameterSpace.interval(0.0, 1.0)


class GaussianFamilyMap(DistributionMap):
    """Gaussian whose mean and scale are linear readouts of theta.

    theta = (mu_1..mu_p, sigma_1..sigma_p) induces
    N(eps1 * mu, eps2^2 * diag(sigma^2)); sensitivity max(|eps1|, |eps2|).
    Exact W1 is available in one dimension only (p = 1); higher p relies on
    coupled sampling.
    """

    def __init__(self, eps1: float, eps2: float, p: int = 1):
        if p < 1:
            raise ValueError("need p >= 1")
        self.eps1 = float(eps1)
        self.eps2 = float(eps2)
        self.p = int(p)
        self.instance_dim = self.p
        self.theta_dim = 2 * self.p
        self.words_per_sample = self.p
        self.declared_sensitivity = max(abs(self.eps1), abs(self.eps2))

    def _split(self, theta: np.ndarray):
        return theta[: self.p], theta[self.p :]

    def _transform(self, theta, words):
        mu, sigma = self._split(theta)
        z = self.eps1 * mu + self.eps2 * sigma * ndtri(to_open_unit(words))
        return z[:, : self.p - 1], z[:, self.p - 1]

    def exact_w1(self, theta_a, theta_b):
        if self.p != 1:
            return None
        mu_a, sg_a = self._split(self.check_theta(theta_a))
        mu_b, sg_b = self._split(self.check_theta(theta_b))
        shift = self.eps1 * (mu_a[0] - mu_b[0])
        spread = abs(self.eps2 * sg_a[0]) - abs(self.eps2 * sg_b[0])
        if spread == 0.0:
            return abs(shift)
        # mean of |N(shift, spread^2)|
        return abs(spread) * _SQRT_2_OVER_PI * math.exp(-(shift**2) / (2.0 * spread**2)) + shift * math.erf(
            shift / (abs(spread) * math.sqrt(2.0))
        )

    def default_space(self) -> ParameterSpace:
        b = np.full(self.theta_dim, _EFFECTIVELY_UNBOUNDED)
        return ParameterSpace.box(-b, b)


MAP_CATALOG = {
    "biased_coin": lambda **kw: BiasedCoinMap(mu=kw["mu"], eps=kw["eps"]),
    "point_mass_linear": lambda **kw: PointMassMap("linear_eps", eps=kw["eps"]),
    "point_mass_affine": lambda **kw: PointMassMap("affine_eps", eps=kw["eps"]),
    "step_half": lambda **kw: PointMassMap("step_half"),
    "gaussian_family": lambda **kw: GaussianFamilyMap(eps1=kw["eps1"], eps2=kw["eps2"], p=int(kw.get("p", 1))),
}


def make_map(name: str, **params) -> DistributionMap:
    """Construct a catalog map by name (CLI entry point).

    The ``strategic`` map is built separately from a dataset; see
    :mod:`perfpred.strategic`.
    """
    if name not in MAP_CATALOG:
        raise KeyError(f"unknown map name {name!r}; known: {sorted(MAP_CATALOG)} + ['strategic']")
    try:
        return MAP_CATALOG[name](**params)
    except KeyError as exc:
        raise ValueError(f"map {name!r} is missing parameter {exc}") from None
