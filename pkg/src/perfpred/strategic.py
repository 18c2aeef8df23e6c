"""Strategic classification as a parameter-reactive distribution map.

Agents drawn from a fixed base dataset best-respond to a deployed linear
classifier: with linear utility u(x', theta) = -<theta, x'> and quadratic
manipulation cost ||x' - x||^2 / (2 eps) restricted to a strategic feature
subset S, the best response shifts exactly the strategic coordinates:

    x'_S = x_S - eps * theta_S,

outcomes y are unaffected.  Deploying theta therefore rigidly translates the
empirical base measure, which makes the map eps-sensitive: each base point
moves by eps * ||theta_S - theta'_S|| between two deployments, so the same
bound holds for the optimal transport between the induced distributions (and
is attained, the shift being a rigid translation).

The credit-scoring experiment treats the dataset rows as the true population
(no resampling): retraining dynamics run on exact empirical objectives, and
the per-step performative risk is recorded both after each deployment's
distribution shift and after the subsequent optimization, exposing the
rise-and-fall risk profile of retraining under performativity.  Only this
linear-utility / quadratic-cost pair is implemented; the finite-sample
procedures bootstrap-resample rows as their sampling mechanism.
"""

from __future__ import annotations

import csv as _csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import DimensionMismatchError, DistributionMap, LossSpec, ParameterSpace, as_theta
from .dynamics import SolverConfig, Trajectory, _minimize_objective, rgd, rrm
from .losses import logistic_l2_loss, logistic_smoothness
from .rng import to_open_unit

_STRATEGIC_SPACE_BOUND = 1e12  # effectively unconstrained; beyond any divergence radius


@dataclass(frozen=True)
class StrategicDataset:
    """Standardized base data with a designated strategic feature subset.

    Features are standardized to zero mean and unit variance column-wise;
    the recorded means/scales belong to the base data and are never
    reapplied to induced (shifted) datasets.
    """

    features: np.ndarray
    outcomes: np.ndarray
    strategic_set: tuple[int, ...]
    feature_means: np.ndarray
    feature_scales: np.ndarray
    feature_names: tuple[str, ...] | None = None

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        y = np.asarray(self.outcomes, dtype=float)
        if X.ndim != 2 or y.ndim != 1 or len(y) != X.shape[0]:
            raise DimensionMismatchError("features must be (n, k) with matching outcomes (n,)")
        if not np.all(np.isin(y, (0.0, 1.0))):
            raise ValueError("non-binary outcome in dataset")
        k = X.shape[1]
        if any(j < 0 or j >= k for j in self.strategic_set):
            raise ValueError(f"strategic feature index out of range 0..{k - 1}")
        if X.shape[0] > 1:
            if np.max(np.abs(X.mean(axis=0))) > 1e-8 or np.max(np.abs(X.var(axis=0) - 1.0)) > 1e-8:
                raise ValueError("features are not standardized to mean 0, variance 1")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "outcomes", y)
        object.__setattr__(self, "strategic_set", tuple(int(j) for j in self.strategic_set))

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def positive_rate(self) -> float:
        return float(np.mean(self.outcomes))


@dataclass(frozen=True)
class StrategicMapConfig:
    """Cost scale of the fixed linear-utility / quadratic-cost response game."""

    eps: float

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("cost scale eps must be > 0")

    def utility(self, x_prime: np.ndarray, theta: np.ndarray) -> float:
        return -float(np.dot(theta, x_prime))

    def cost(self, x_prime: np.ndarray, x: np.ndarray, strategic_set) -> float:
        d = np.asarray(x_prime, dtype=float) - np.asarray(x, dtype=float)
        s = list(strategic_set)
        return float(np.dot(d[s], d[s])) / (2.0 * self.eps)


def best_response(x, theta, cfg: StrategicMapConfig, strategic_set) -> np.ndarray:
    """The agent's utility-maximizing feature vector: x_S - eps * theta_S on S.

    Non-strategic coordinates (and the outcome) are unchanged.
    """
    x = np.asarray(x, dtype=float).copy()
    theta = as_theta(theta, x.shape[-1])
    s = list(strategic_set)
    x[..., s] = x[..., s] - cfg.eps * theta[s]
    return x


def _shift_vector(theta: np.ndarray, cfg: StrategicMapConfig, strategic_set, k: int) -> np.ndarray:
    v = np.zeros(k)
    s = list(strategic_set)
    v[s] = -cfg.eps * theta[s]
    return v


class StrategicMap(DistributionMap):
    """The distribution map induced by best responses over a base dataset.

    D(theta) is the empirical measure of best-responded rows; sampling
    bootstrap-resamples rows, while ``population`` exposes the exact finite
    support used by population-level dynamics.
    """

    words_per_sample = 1

    def __init__(self, dataset: StrategicDataset, cfg: StrategicMapConfig):
        self.dataset = dataset
        self.cfg = cfg
        self.theta_dim = dataset.n_features
        self.instance_dim = dataset.n_features + 1
        self.declared_sensitivity = cfg.eps

    def _shifted(self, theta: np.ndarray) -> np.ndarray:
        return self.dataset.features + _shift_vector(theta, self.cfg, self.dataset.strategic_set, self.theta_dim)

    def _transform(self, theta, words):
        u = to_open_unit(words[:, 0])
        idx = np.minimum((u * self.dataset.n_rows).astype(int), self.dataset.n_rows - 1)
        X = self._shifted(theta)
        return X[idx], self.dataset.outcomes[idx]

    def population(self, theta):
        theta = self.check_theta(theta)
        n = self.dataset.n_rows
        return self._shifted(theta), self.dataset.outcomes.copy(), np.full(n, 1.0 / n)

    def exact_w1(self, theta_a, theta_b):
        ta = self.check_theta(theta_a)
        tb = self.check_theta(theta_b)
        s = list(self.dataset.strategic_set)
        # rigid translation of the empirical measure: W1 equals the shift norm
        return self.cfg.eps * float(np.linalg.norm(ta[s] - tb[s]))

    def coupled_sample(self, theta_a, theta_b, n: int, seed: int):
        # exact coupling: every base row moves rigidly under both deployments
        Xa, Ya, w = self.population(theta_a)
        Xb, Yb, _ = self.population(theta_b)
        return np.column_stack([Xa, Ya]), np.column_stack([Xb, Yb]), w

    def default_space(self) -> ParameterSpace:
        b = np.full(self.theta_dim, _STRATEGIC_SPACE_BOUND)
        return ParameterSpace.box(-b, b)


def strategic_map(dataset: StrategicDataset, cfg: StrategicMapConfig) -> StrategicMap:
    return StrategicMap(dataset, cfg)


@dataclass(frozen=True)
class InducedSample:
    """The materialized empirical measure D(theta): best-responded rows.

    Induced views are never re-standardized; shifts live in the base data's
    standardized units.
    """

    features: np.ndarray
    outcomes: np.ndarray
    declared_sensitivity: float


def induced_distribution(dataset: StrategicDataset, theta, cfg: StrategicMapConfig) -> InducedSample:
    """Best-responded copy of the dataset under a deployed parameter vector."""
    theta = as_theta(theta, dataset.n_features)
    X = dataset.features + _shift_vector(theta, cfg, dataset.strategic_set, dataset.n_features)
    return InducedSample(features=X, outcomes=dataset.outcomes.copy(), declared_sensitivity=cfg.eps)


# ---------------------------------------------------------------------------
# Ingestion
# ---------------------------------------------------------------------------


def _standardize(X: np.ndarray, names) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    means = X.mean(axis=0)
    scales = X.std(axis=0)
    dead = np.flatnonzero(scales == 0.0)
    if dead.size:
        label = names[dead[0]] if names else f"#{dead[0]}"
        raise ValueError(f"feature column {label!r} is constant; cannot standardize")
    return (X - means) / scales, means, scales


def load_dataset(
    path,
    outcome_column: str,
    strategic_columns,
    target_positive_rate: float | None = None,
    seed: int = 0,
) -> StrategicDataset:
    """Load a headered numeric CSV into a standardized strategic dataset.

    The outcome column must be binary {0, 1}.  When ``target_positive_rate``
    is given, the minority-compatible class is kept whole and the other
    subsampled (deterministically per seed) so the positive rate matches the
    target; standardization statistics are computed on the balanced base
    sample.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = _csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"empty file: {path}") from None
        header = [h.strip() for h in header]
        rows = []
        for r, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}:{r}: expected {len(header)} cells, got {len(row)}")
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                bad = next(c for c in row if not _is_float(c))
                raise ValueError(f"{path}:{r}: non-numeric cell {bad!r}") from None
    if not rows:
        raise ValueError(f"no data rows in {path}")
    data = np.array(rows)
    if outcome_column not in header:
        raise ValueError(f"missing outcome column {outcome_column!r}; file has {header}")
    feature_names = [h for h in header if h != outcome_column]
    strategic_names = [c if isinstance(c, str) else feature_names[c] for c in strategic_columns]
    for c in strategic_names:
        if c not in feature_names:
            raise ValueError(f"missing strategic column {c!r}; features are {feature_names}")
    y = data[:, header.index(outcome_column)]
    if not np.all(np.isin(y, (0.0, 1.0))):
        bad = y[~np.isin(y, (0.0, 1.0))][0]
        raise ValueError(f"non-binary outcome value {bad!r} in column {outcome_column!r}")
    X = data[:, [header.index(c) for c in feature_names]]
    if target_positive_rate is not None:
        keep = _balance_indices(y, target_positive_rate, seed)
        X, y = X[keep], y[keep]
    X, means, scales = _standardize(X, feature_names)
    return StrategicDataset(
        features=X,
        outcomes=y,
        strategic_set=tuple(feature_names.index(c) for c in strategic_names),
        feature_means=means,
        feature_scales=scales,
        feature_names=tuple(feature_names),
    )


def _is_float(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def _balance_indices(y: np.ndarray, rate: float, seed: int) -> np.ndarray:
    """Subsample to the target positive rate, keeping the scarce class whole."""
    if not 0.0 < rate < 1.0:
        raise ValueError("target positive rate must lie in (0, 1)")
    pos = np.flatnonzero(y == 1.0)
    neg = np.flatnonzero(y == 0.0)
    if pos.size == 0 or neg.size == 0:
        raise ValueError("cannot balance a single-class dataset")
    rng = np.random.default_rng(seed)
    if pos.size / len(y) <= rate:
        total = int(pos.size / rate)
        keep_neg = rng.choice(neg, size=total - pos.size, replace=False)
        keep = np.concatenate([pos, keep_neg])
    else:
        total = int(neg.size / (1.0 - rate))
        keep_pos = rng.choice(pos, size=total - neg.size, replace=False)
        keep = np.concatenate([keep_pos, neg])
    return np.sort(keep)


def synthesize_credit_data(n: int, m: int, strategic_count: int, seed: int = 0) -> StrategicDataset:
    """Self-contained substitute for external credit data.

    Gaussian features with a planted logistic ground truth; deterministic
    per seed.  ``m`` counts the instance dimension (features plus outcome),
    and the first ``strategic_count`` feature columns form the strategic set.
    """
    if n < 10 or m < 2:
        raise ValueError("need n >= 10 and m >= 2")
    k = m - 1
    if not 0 < strategic_count <= k:
        raise ValueError("need 1 <= strategic_count <= m - 1")
    rng = np.random.default_rng(seed)
    # strategic features are left-skewed (credit-utilization style: a bulk of
    # moderate values, a tail of severe ones) and carry strong positive class
    # signal; deployment shifts then visibly raise the just-trained risk
    X_strat = -np.exp(rng.standard_normal((n, strategic_count)))
    X_rest = rng.standard_normal((n, k - strategic_count))
    X = np.column_stack([X_strat, X_rest])
    X = (X - X.mean(axis=0)) / X.std(axis=0)
    w = np.concatenate([np.full(strategic_count, 2.0), rng.normal(size=k - strategic_count) * 0.4])
    logits = X @ w + 0.3
    y = (rng.random(n) < 1.0 / (1.0 + np.exp(-logits))).astype(float)
    X, means, scales = _standardize(X, None)
    return StrategicDataset(
        features=X,
        outcomes=y,
        strategic_set=tuple(range(strategic_count)),
        feature_means=means,
        feature_scales=scales,
    )


# ---------------------------------------------------------------------------
# Credit-scoring experiment
# ---------------------------------------------------------------------------


@dataclass
class CreditExperimentResult:
    """A retraining run on the credit simulator with its risk decomposition.

    ``pr_post_shift[t]`` is PR(theta_t): the risk right after deployment t's
    distribution shift.  ``pr_post_train[t]`` is the risk of theta_{t+1} still
    measured on D(theta_t): right after the optimization phase and before the
    next deployment.  Accuracy is 0-1 correctness at probability threshold
    1/2, recorded at the same two stages.
    """

    trajectory: Trajectory
    pr_base_training: float
    pr_post_shift: list[float]
    pr_post_train: list[float]
    accuracy_post_shift: list[float]
    accuracy_post_train: list[float]
    beta_per_step: list[float]
    beta_max: float
    gamma: float
    eps: float
    threshold: float
    config: dict = field(default_factory=dict)

    @property
    def optimization_falls(self) -> list[float]:
        """Per-step drop pr_post_shift[t] - pr_post_train[t]; >= 0 when the inner solve improves."""
        return [self.pr_post_shift[t] - self.pr_post_train[t] for t in range(len(self.pr_post_train))]

    @property
    def deployment_changes(self) -> list[float]:
        """Risk change across each deployment: pr_post_shift[t+1] - pr_post_train[t]."""
        return [self.pr_post_shift[t + 1] - self.pr_post_train[t] for t in range(len(self.pr_post_train))]

    def to_json(self) -> dict:
        return {
            "config": self.config,
            "verdict": self.trajectory.verdict,
            "pr_base_training": self.pr_base_training,
            "pr_post_shift": self.pr_post_shift,
            "pr_post_train": self.pr_post_train,
            "accuracy_post_shift": self.accuracy_post_shift,
            "accuracy_post_train": self.accuracy_post_train,
            "beta_per_step": self.beta_per_step,
            "beta_max": self.beta_max,
            "gamma": self.gamma,
            "eps": self.eps,
            "rrm_threshold_gamma_over_beta": self.threshold,
        }


def _accuracy(X: np.ndarray, y: np.ndarray, theta: np.ndarray) -> float:
    return float(np.mean((X @ theta > 0.0) == (y == 1.0)))


def base_risk_minimizer(
    dataset: StrategicDataset, loss: LossSpec, space: ParameterSpace, cfg: SolverConfig
) -> np.ndarray:
    """The supervised-learning solution on the unshifted base data."""
    return _minimize_objective(
        loss, dataset.features, dataset.outcomes, None, space, np.zeros(dataset.n_features), cfg
    )


def run_credit_experiment(
    dataset: StrategicDataset,
    cfg: StrategicMapConfig,
    dynamic: str = "rrm",
    gamma_reg: float | None = None,
    eta: float | None = None,
    solver: SolverConfig | None = None,
    seed: int = 0,
) -> CreditExperimentResult:
    """Run RRM or RGD on the credit simulator at the population level.

    The dataset rows are treated as the true distribution.  The regularizer
    defaults to gamma = 1000 / n; RGD's step size defaults to 2 / (beta + gamma)
    with beta certified on the base data.  The initial iterate is the risk
    minimizer on the base dataset.  Smoothness is re-certified on each induced
    dataset and the trajectory maximum reported, since the strategic shift
    changes feature norms.
    """
    if dynamic not in ("rrm", "rgd"):
        raise ValueError("dynamic must be 'rrm' or 'rgd'")
    solver = solver or SolverConfig()
    gamma = 1000.0 / dataset.n_rows if gamma_reg is None else float(gamma_reg)
    loss = logistic_l2_loss(gamma)
    dmap = StrategicMap(dataset, cfg)
    space = dmap.default_space()
    theta0 = base_risk_minimizer(dataset, loss, space, solver)
    if dynamic == "rrm":
        traj = rrm(dmap, loss, space, theta0, cfg=solver, seed=seed)
    else:
        if eta is None:
            eta = 2.0 / (logistic_smoothness(dataset.features, gamma) + gamma)
        traj = rgd(dmap, loss, space, theta0, eta=eta, cfg=solver, seed=seed)

    pr_post_shift, pr_post_train = [], []
    acc_post_shift, acc_post_train = [], []
    betas = []
    for t, theta_t in enumerate(traj.iterates):
        X_t, Y_t, _ = dmap.population(theta_t)
        pr_post_shift.append(float(np.mean(loss.value_batch(X_t, Y_t, theta_t))))
        acc_post_shift.append(_accuracy(X_t, Y_t, theta_t))
        betas.append(logistic_smoothness(X_t, gamma))
        if t + 1 < len(traj.iterates):
            theta_next = traj.iterates[t + 1]
            pr_post_train.append(float(np.mean(loss.value_batch(X_t, Y_t, theta_next))))
            acc_post_train.append(_accuracy(X_t, Y_t, theta_next))
    beta_max = max(betas)
    pr_base = float(np.mean(loss.value_batch(dataset.features, dataset.outcomes, theta0)))
    return CreditExperimentResult(
        trajectory=traj,
        pr_base_training=pr_base,
        pr_post_shift=pr_post_shift,
        pr_post_train=pr_post_train,
        accuracy_post_shift=acc_post_shift,
        accuracy_post_train=acc_post_train,
        beta_per_step=betas,
        beta_max=beta_max,
        gamma=gamma,
        eps=cfg.eps,
        threshold=gamma / beta_max,
        config={
            "dynamic": dynamic,
            "eps": cfg.eps,
            "gamma": gamma,
            "eta": eta,
            "n_rows": dataset.n_rows,
            "n_features": dataset.n_features,
            "strategic_set": list(dataset.strategic_set),
            "seed": seed,
        },
    )
