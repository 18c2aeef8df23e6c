"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
report.  Every tolerance is pinned here; the runtime budgets are asserted
against wall-clock time.
"""

import time

import numpy as np
import pytest

from perfpred import (
    BiasedCoinMap,
    GaussianFamilyMap,
    ParameterSpace,
    PointMassMap,
    SampleSchedule,
    SolverConfig,
    StrategicMap,
    StrategicMapConfig,
    brute_force_optimum,
    closeness_check,
    estimate_lipschitz_theta,
    estimate_lipschitz_z,
    estimate_sensitivity,
    hinge_reg_loss,
    linear_loss,
    logistic_l2_loss,
    performative_risk,
    regd,
    regularize,
    rerm,
    rgd,
    rrm,
    run_credit_experiment,
    squared_loss_affine,
    squared_loss_location,
    stackelberg_gap,
    synthesize_credit_data,
    theoretical_iteration_bound,
    w1_1d,
)
from perfpred.strategic import base_risk_minimizer

from oracles import lp_transport_w1


class _Budget:
    def __init__(self, criterion: int, seconds: float, note: str):
        self.criterion = criterion
        self.seconds = seconds
        self.note = note

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.t0
        status = "PASS" if exc_type is None else "FAIL"
        print(f"[criterion {self.criterion:2d}] {status} ({elapsed:6.2f}s / {self.seconds:g}s) {self.note}")
        if exc_type is None:
            assert elapsed < self.seconds, f"criterion {self.criterion} exceeded its {self.seconds}s budget"


COIN = dict(mu=0.3, eps=0.1)
UNIT = ParameterSpace.interval(0.0, 1.0)


def test_criterion_01_coin_convergence_and_rate():
    with _Budget(1, 1.0, "coin retraining converges at the exact geometric rate"):
        map = BiasedCoinMap(**COIN)
        loss = squared_loss_affine()
        bound = theoretical_iteration_bound("rrm", 0.1, 2.0, 2.0, theta0_dist=1.0 / 3.0, delta=1e-6)
        assert bound == 15
        traj = rrm(map, loss, UNIT, [0.0])
        assert traj.verdict == "converged"
        assert traj.n_steps <= bound
        assert abs(traj.final_theta[0] - 1.0 / 3.0) <= 1e-6
        ratios = traj.contraction_ratios([1.0 / 3.0], floor=1e-13)
        assert len(ratios) >= 5
        assert np.all(ratios >= 0.1 - 1e-6) and np.all(ratios <= 0.1 + 1e-6)


def test_criterion_02_contraction_tightness():
    with _Budget(2, 1.0, "unit sensitivity walks, supercritical sensitivity diverges at factor 1.5"):
        loss = squared_loss_location()
        critical = PointMassMap("affine_eps", eps=1.0)
        traj = rrm(critical, loss, critical.default_space(), [0.0], cfg=SolverConfig(max_outer_iters=100))
        assert traj.verdict != "converged"
        ratios = np.array(traj.step_norms[1:]) / np.array(traj.step_norms[:-1])
        assert np.all(np.abs(ratios - 1.0) <= 1e-9)

        super_ = PointMassMap("affine_eps", eps=1.5)
        traj = rrm(super_, loss, super_.default_space(), [0.0], cfg=SolverConfig(max_outer_iters=200))
        assert traj.verdict == "diverged"
        ratios = np.array(traj.step_norms[1:]) / np.array(traj.step_norms[:-1])
        assert np.all(np.abs(ratios - 1.5) <= 1e-9)


def test_criterion_03_linear_counterexample_grid():
    with _Budget(3, 1.0, "convex non-strongly-convex loss oscillates on {-1, 1} for all 9 parameter pairs"):
        space = ParameterSpace.interval(-1.0, 1.0)
        for eps in (0.1, 1.0, 10.0):
            for beta in (0.1, 1.0, 10.0):
                traj = rrm(PointMassMap("linear_eps", eps=eps), linear_loss(beta), space, [0.5])
                assert traj.verdict == "oscillating", (eps, beta)
                tail = sorted(float(v[0]) for v in traj.iterates[-2:])
                assert tail == [-1.0, 1.0], (eps, beta)


def test_criterion_04_hinge_counterexample():
    with _Budget(4, 1.0, "non-smooth strongly convex loss cycles on {2, -1/(2 eps)}"):
        traj = rrm(
            PointMassMap("linear_eps", eps=0.25),
            hinge_reg_loss(C=1e4, gamma=1.0),
            ParameterSpace.interval(-2.0, 2.0),
            [2.0],
        )
        assert traj.verdict == "oscillating"
        tail = sorted(float(v[0]) for v in traj.iterates[-2:])
        assert abs(tail[0] - (-2.0)) <= 1e-6
        assert abs(tail[1] - 2.0) <= 1e-6


def test_criterion_05_no_stable_point():
    with _Budget(5, 5.0, "step map cycles {1, 0}; grid search pins the optimum at the jump"):
        map = PointMassMap("step_half")
        loss = squared_loss_location()
        traj = rrm(map, loss, UNIT, [0.0])
        assert traj.verdict == "oscillating"
        assert [float(v[0]) for v in traj.iterates[1:5]] == [1.0, 0.0, 1.0, 0.0]
        res = brute_force_optimum(map, loss, UNIT, grid_resolution=1001, n=1, seed=0)
        assert abs(res.theta_po[0] - 0.5) <= 1e-3
        assert abs(res.pr - 0.25) <= 1e-3


def test_criterion_06_gradient_descent_rates():
    with _Budget(6, 1.0, "gradient dynamics match the classical and shifted contraction bounds"):
        beta = gamma = 2.0
        eta = 2.0 / (beta + gamma)
        frozen = BiasedCoinMap(mu=0.3, eps=0.0)
        loss = squared_loss_affine()
        traj = rgd(frozen, loss, UNIT, [0.0], eta=eta, cfg=SolverConfig(max_outer_iters=50, outer_tol=1e-15))
        static_bound = 1.0 - eta * beta * gamma / (beta + gamma)
        ratios = traj.contraction_ratios([0.3], floor=1e-12)
        assert np.all(ratios <= static_bound + 1e-6)

        map = BiasedCoinMap(**COIN)
        traj = rgd(map, loss, UNIT, [0.0], eta=eta)
        assert traj.verdict == "converged"
        assert abs(traj.final_theta[0] - 1.0 / 3.0) <= 1e-6
        shifted_bound = 1.0 - eta * (beta * gamma / (beta + gamma) - 0.1 * (1.5 * eta * beta**2 + beta))
        ratios = traj.contraction_ratios([1.0 / 3.0], floor=1e-12)
        assert np.all(ratios <= shifted_bound + 1e-6)


def test_criterion_07_closeness_bound():
    with _Budget(7, 5.0, "stable-to-optimal gap obeys 2 L_z eps / gamma on the coin family"):
        loss = squared_loss_affine()
        for eps in (0.05, 0.1, 0.2):
            map = BiasedCoinMap(mu=0.3, eps=eps)
            traj = rrm(map, loss, UNIT, [0.0], cfg=SolverConfig(outer_tol=1e-12))
            report = closeness_check(map, loss, traj, UNIT)
            exact_gap = 0.3 * eps / ((1.0 - eps) * (1.0 - 2.0 * eps))
            assert report.gap == pytest.approx(exact_gap, abs=1e-9)
            assert exact_gap <= report.bound
            assert report.L_z_estimated
            assert not report.violation


def test_criterion_08_concave_performative_risk():
    with _Budget(8, 1.0, "risk curve is strictly concave on the 101-point grid"):
        map = BiasedCoinMap(mu=-0.1, eps=0.6)
        loss = squared_loss_affine()
        grid = np.linspace(0.0, 1.0, 101)
        pr = np.array([performative_risk(map, loss, [t], 1, 0).mean for t in grid])
        second = pr[:-2] - 2.0 * pr[1:-1] + pr[2:]
        assert np.all(second < 0.0)


def test_criterion_09_sensitivity_certification():
    with _Budget(9, 30.0, "declared sensitivities certified: exact, empirical, and coupled"):
        for kind, eps in (("linear_eps", 0.5), ("affine_eps", 2.0)):
            map = PointMassMap(kind, eps=eps)
            pairs = [([-0.9], [0.4]), ([0.05], [0.6]), ([-0.3], [-0.1])]
            rep = estimate_sensitivity(map, pairs, n=10, seed=0)
            assert rep.method == "exact_1d"
            assert abs(rep.sup_ratio - eps) <= 1e-9

        gauss = GaussianFamilyMap(eps1=0.7, eps2=0.4, p=1)
        pairs = [([0.0, 1.0], [2.0, 1.0]), ([-1.0, 0.5], [0.7, 0.5])]
        rep = estimate_sensitivity(gauss, pairs, n=100_000, seed=1, method="sorted_empirical_1d")
        for ratio, se, (ta, tb) in zip(rep.ratios, rep.w1_std_errors, rep.pairs):
            dist = float(np.linalg.norm(np.subtract(ta, tb)))
            assert abs(ratio - 0.7) <= max(3.0 * se / dist, 1e-9)

        data = synthesize_credit_data(n=500, m=6, strategic_count=2, seed=0)
        smap = StrategicMap(data, StrategicMapConfig(eps=0.25))
        rng = np.random.default_rng(0)
        pairs = [(rng.normal(size=5), rng.normal(size=5)) for _ in range(200)]
        rep = estimate_sensitivity(smap, pairs, n=10, seed=0, method="coupling_bound")
        assert rep.sup_ratio <= 0.25 * (1.0 + 1e-12)


def test_criterion_10_transport_oracle_equivalence():
    with _Budget(10, 10.0, "order-statistics W1 equals the exhaustive transport LP on 500 instances"):
        rng = np.random.default_rng(42)
        worst = 0.0
        for _ in range(500):
            a = rng.normal(scale=rng.uniform(0.5, 3.0), size=rng.integers(1, 7))
            b = rng.normal(loc=rng.uniform(-2, 2), size=rng.integers(1, 7))
            worst = max(worst, abs(w1_1d(a, b) - lp_transport_w1(a, b)))
        assert worst <= 1e-10


def test_criterion_11_finite_sample_schedule():
    with _Budget(11, 120.0, "finite-sample dynamics land in the delta-ball at the guaranteed iteration counts"):
        coin = BiasedCoinMap(**COIN)
        loss = squared_loss_affine()
        delta, p, K = 0.05, 0.1, 8.0
        schedule = SampleSchedule.guarantee(eps=0.1, delta=delta, p=p, m=coin.instance_dim, K=K)

        t_rerm = theoretical_iteration_bound("rerm", 0.1, 2.0, 2.0, theta0_dist=1.0 / 3.0, delta=delta)
        hits = 0
        for seed in range(20):
            traj = rerm(coin, loss, UNIT, [0.0], schedule,
                        cfg=SolverConfig(max_outer_iters=t_rerm, outer_tol=1e-300), seed=seed)
            hits += abs(traj.final_theta[0] - 1.0 / 3.0) <= delta
        assert hits >= 17, f"RERM hit the ball in only {hits}/20 runs"

        eta = 0.25
        t_regd = theoretical_iteration_bound("regd", 0.1, 2.0, 2.0, eta=eta, theta0_dist=1.0 / 3.0, delta=delta)
        hits = 0
        for seed in range(20):
            traj = regd(coin, loss, UNIT, [0.0], eta=eta, schedule=schedule,
                        cfg=SolverConfig(max_outer_iters=t_regd, outer_tol=1e-300), seed=seed)
            hits += abs(traj.final_theta[0] - 1.0 / 3.0) <= delta
        assert hits >= 17, f"REGD hit the ball in only {hits}/20 runs"


def test_criterion_12_regularized_retraining():
    with _Budget(12, 5.0, "quadratic regularization restores convergence with a bounded objective gap"):
        eps, beta = 0.25, 1.0
        alpha = np.sqrt(eps) * beta / (1.0 - eps)
        map = PointMassMap("linear_eps", eps=eps)
        base = linear_loss(beta)
        space = ParameterSpace.interval(-1.0, 1.0)
        reg = regularize(base, alpha, [0.0], space_diameter=space.diameter())
        traj = rrm(map, reg, space, [0.5])
        assert traj.verdict == "converged"
        L_z = estimate_lipschitz_z(map, base, space)
        L_t = estimate_lipschitz_theta(map, base, space)
        grid = brute_force_optimum(map, base, space, grid_resolution=1001, n=1, seed=0)
        gap = performative_risk(map, base, traj.final_theta, 1, 0).mean - grid.pr
        bound = 2.0 * (L_t + alpha + eps * L_z) * L_z * eps / alpha + alpha / 2.0
        assert gap <= bound


def test_criterion_13_strategic_qualitative_reproduction():
    with _Budget(13, 120.0, "credit simulator: converges at small cost scale, fails at large, zigzag risk trace"):
        data = synthesize_credit_data(n=2000, m=11, strategic_count=3, seed=42)
        gamma = 1000.0 / 2000
        solver = SolverConfig(max_outer_iters=2000)
        ladder = [0.01, 0.1, 1.0, 10.0, 30.0]
        results = {}
        for eps in ladder:
            results[eps] = run_credit_experiment(
                data, StrategicMapConfig(eps=eps), dynamic="rrm", gamma_reg=gamma, solver=solver, seed=0
            )
        smallest = results[ladder[0]].trajectory
        assert smallest.verdict == "converged"
        assert smallest.step_norms[-1] <= 1e-7
        largest = results[ladder[-1]].trajectory
        assert largest.verdict in ("oscillating", "diverged")

        # zigzag at a converging cost scale: each deployment's post-shift risk
        # sits above the post-training risk of the same step (strictly so for
        # every step of the transient), and the first deployment visibly
        # raises the risk above the base training value
        res = results[1.0]
        assert res.trajectory.verdict == "converged"
        falls = res.optimization_falls
        assert min(falls) >= -1e-12
        material = [t for t, s in enumerate(res.trajectory.step_norms) if s > 1e-4]
        assert material and all(falls[t] > 0.0 for t in material)
        assert res.pr_post_shift[0] - res.pr_base_training > 1e-3


def test_criterion_14_stackelberg_objective_bound():
    with _Budget(14, 60.0, "2-feature strategic toy: objective gap within the certified bound"):
        data = synthesize_credit_data(n=400, m=3, strategic_count=2, seed=7)
        cfg = StrategicMapConfig(eps=0.1)
        map = StrategicMap(data, cfg)
        gamma = 1.0
        loss = logistic_l2_loss(gamma)
        space = ParameterSpace.box([-2.0, -2.0], [2.0, 2.0])
        theta0 = base_risk_minimizer(data, loss, space, SolverConfig())
        traj = rrm(map, loss, space, theta0, cfg=SolverConfig())
        assert traj.verdict == "converged"
        rep = stackelberg_gap(map, loss, traj.final_theta, space, grid_resolution=41)
        assert rep.gap is not None
        assert rep.gap <= rep.bound + rep.grid_tolerance
