"""Loss catalog: values, gradients in theta, and certified regularity constants.

Every loss declares whichever of (beta, gamma, L_z, L_theta) it can certify;
``None`` means "left to empirical estimation".  Gradients are exact
derivatives of the values, so central finite differences reproduce them
(away from the hinge kink).  The quadratic regularization wrapper
``regularize`` shifts the certified constants accordingly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import expit

from .core import LossConstants, LossSpec


def squared_loss_affine() -> LossSpec:
    """(y - theta*x - 1/2)^2 for a scalar parameter and scalar feature.

    Companion loss of the biased coin; both curvature constants equal 2 on
    the coin's support (x^2 = 1), with equality in the strong-convexity
    inequality since the loss is an exact quadratic in theta.
    """

    def value(X, Y, theta):
        r = Y - theta[0] * X[:, 0] - 0.5
        return r * r

    def grad(X, Y, theta):
        r = Y - theta[0] * X[:, 0] - 0.5
        return (-2.0 * X[:, 0] * r)[:, None]

    def hess(w, X, Y, theta):
        return np.array([[2.0 * float(np.dot(w, X[:, 0] * X[:, 0]))]])

    return LossSpec(
        name="squared_affine",
        value_batch=value,
        grad_batch=grad,
        constants=LossConstants(beta=2.0, gamma=2.0),
        theta_dim=1,
        notes="for maps with features supported on {-1, +1}",
        hess_mean=hess,
    )


def squared_loss_location() -> LossSpec:
    """(y - theta)^2: scalar location fit, ignoring features."""

    def value(X, Y, theta):
        r = Y - theta[0]
        return r * r

    def grad(X, Y, theta):
        return (-2.0 * (Y - theta[0]))[:, None]

    return LossSpec(
        name="squared_location",
        value_batch=value,
        grad_batch=grad,
        constants=LossConstants(beta=2.0, gamma=2.0),
        theta_dim=1,
        hess_mean=lambda w, X, Y, theta: np.array([[2.0]]),
    )


def linear_loss(beta: float) -> LossSpec:
    """beta * y * theta: convex and beta-jointly smooth but not strongly convex."""
    beta = float(beta)

    def value(X, Y, theta):
        return beta * Y * theta[0]

    def grad(X, Y, theta):
        return (beta * Y)[:, None]

    return LossSpec(
        name="linear",
        value_batch=value,
        grad_batch=grad,
        constants=LossConstants(beta=beta, gamma=0.0),
        theta_dim=1,
        params={"beta": beta},
        hess_mean=lambda w, X, Y, theta: np.zeros((1, 1)),  # singular alone; regularization adds curvature
    )


def hinge_reg_loss(C: float, gamma: float) -> LossSpec:
    """C * max(-1, y*theta) + (gamma/2) * (theta - 1)^2.

    gamma-strongly convex but not jointly smooth: the gradient jumps by C*y
    at y*theta = -1.  Kink convention: exactly at the kink the flat branch's
    zero slope is used, so the subgradient there is gamma*(theta - 1).
    """
    C = float(C)
    gamma = float(gamma)

    def value(X, Y, theta):
        return C * np.maximum(-1.0, Y * theta[0]) + 0.5 * gamma * (theta[0] - 1.0) ** 2

    def grad(X, Y, theta):
        active = (Y * theta[0] > -1.0).astype(float)
        return (C * Y * active + gamma * (theta[0] - 1.0))[:, None]

    return LossSpec(
        name="hinge_reg",
        value_batch=value,
        grad_batch=grad,
        constants=LossConstants(gamma=gamma),
        smooth=False,
        theta_dim=1,
        params={"C": C, "gamma": gamma},
    )


def default_hinge_scale(gamma: float, eps: float) -> float:
    """A hinge weight large enough that retraining's 2-cycle argument binds."""
    return 10.0 * max(float(gamma), 1.0 / (2.0 * float(eps)))


def logistic_l2_loss(gamma: float) -> LossSpec:
    """Per-sample logistic loss with L2 regularization.

        l(z; theta) = -y * s + log(1 + exp(s)) + (gamma/2) * ||theta||^2,
        s = theta^T x

    evaluated overflow-safely via max(s, 0) + log1p(exp(-|s|)).  The gradient
    is the exact derivative, (sigmoid(s) - y) * x + gamma * theta.  Joint
    smoothness depends on the feature norms of the induced dataset; see
    :func:`logistic_smoothness`.
    """
    gamma = float(gamma)

    def value(X, Y, theta):
        s = X @ theta
        softplus = np.maximum(s, 0.0) + np.log1p(np.exp(-np.abs(s)))
        return -Y * s + softplus + 0.5 * gamma * float(theta @ theta)

    def grad(X, Y, theta):
        s = X @ theta
        return (expit(s) - Y)[:, None] * X + gamma * theta

    def hess(w, X, Y, theta):
        p = expit(X @ theta)
        return (X * (w * p * (1.0 - p))[:, None]).T @ X + gamma * np.eye(len(theta))

    return LossSpec(
        name="logistic_l2",
        value_batch=value,
        grad_batch=grad,
        constants=LossConstants(gamma=gamma),
        params={"gamma": gamma},
        hess_mean=hess,
    )


def logistic_smoothness(X: np.ndarray, gamma: float) -> float:
    """Smoothness certificate for the regularized logistic objective on a dataset.

    beta = max(2, mean(||x_i||^2) / 4 + gamma): the data-dependent curvature
    bound of the log-partition term plus the regularizer, floored at the
    2-Lipschitz-in-z constant of the gradient for binary outcomes.
    """
    return max(2.0, float(np.mean(np.sum(X * X, axis=1))) / 4.0 + float(gamma))


def regularize(loss: LossSpec, alpha: float, theta0, space_diameter: float | None = None) -> LossSpec:
    """Add (alpha/2) * ||theta - theta0||^2 to a loss.

    Certified constants shift: gamma += alpha, beta += alpha, and (when the
    feasible set's diameter is supplied) L_theta += alpha * diameter; the
    Lipschitz constant in z is unchanged.  alpha = 0 is the identity wrapper.
    """
    alpha = float(alpha)
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    theta0 = np.atleast_1d(np.asarray(theta0, dtype=float))
    if alpha == 0.0:
        return loss

    base_value, base_grad = loss.value_batch, loss.grad_batch

    def value(X, Y, theta):
        d = theta - theta0
        return base_value(X, Y, theta) + 0.5 * alpha * float(d @ d)

    def grad(X, Y, theta):
        return base_grad(X, Y, theta) + alpha * (theta - theta0)

    base_hess = loss.hess_mean
    hess = None
    if base_hess is not None:
        hess = lambda w, X, Y, theta: base_hess(w, X, Y, theta) + alpha * np.eye(len(theta))

    c = loss.constants
    L_theta = None
    if c.L_theta is not None and space_diameter is not None:
        L_theta = c.L_theta + alpha * float(space_diameter)
    # a distinct name: closed forms registered for the base loss do not apply
    name = loss.name if loss.name.endswith("+l2") else loss.name + "+l2"
    return LossSpec(
        name=name,
        value_batch=value,
        grad_batch=grad,
        constants=LossConstants(
            beta=None if c.beta is None else c.beta + alpha,
            gamma=None if c.gamma is None else c.gamma + alpha,
            L_z=c.L_z,
            L_theta=L_theta,
        ),
        smooth=loss.smooth,
        theta_dim=loss.theta_dim,
        params={**loss.params, "reg_alpha": alpha + loss.params.get("reg_alpha", 0.0)},
        notes=loss.notes,
        hess_mean=hess,
    )


@dataclass(frozen=True)
class LossCatalogEntry:
    """A named loss family: factory, required parameters, and provenance notes."""

    name: str
    factory: Callable[..., LossSpec]
    required_params: tuple[str, ...]
    applicable_maps: tuple[str, ...]
    notes: str


LOSS_CATALOG = {
    e.name: e
    for e in (
        LossCatalogEntry(
            "squared_affine", squared_loss_affine, (),
            ("biased_coin",),
            "beta = gamma = 2 from the unit second derivative in theta on x^2 = 1 supports",
        ),
        LossCatalogEntry(
            "squared_location", squared_loss_location, (),
            ("point_mass_affine", "step_half", "gaussian_family"),
            "beta = gamma = 2; the population minimizer is the mean outcome",
        ),
        LossCatalogEntry(
            "linear", linear_loss, ("beta",),
            ("point_mass_linear",),
            "convex but gamma = 0: retraining selects extreme points",
        ),
        LossCatalogEntry(
            "hinge_reg", hinge_reg_loss, ("C", "gamma"),
            ("point_mass_linear",),
            "strongly convex, not jointly smooth; gradient jumps by C*y at y*theta = -1",
        ),
        LossCatalogEntry(
            "logistic_l2", logistic_l2_loss, ("gamma",),
            ("strategic",),
            "smoothness is dataset-dependent; certify per induced dataset via logistic_smoothness",
        ),
    )
}


def make_loss(name: str, **params) -> LossSpec:
    """Construct a catalog loss by name (CLI entry point)."""
    if name not in LOSS_CATALOG:
        raise KeyError(f"unknown loss name {name!r}; known: {sorted(LOSS_CATALOG)}")
    entry = LOSS_CATALOG[name]
    missing = [p for p in entry.required_params if p not in params]
    if missing:
        raise ValueError(f"loss {name!r} is missing parameters {missing}")
    return entry.factory(**{p: params[p] for p in entry.required_params})
