"""Config-driven batch experiment runner.

A single TOML (or JSON) file describes one experiment: a distribution map, a
loss, a feasible set, a dynamic, and optional diagnostics.  Every run writes
three artifacts into its output directory:

* ``trajectory.csv``   -- one row per iterate (dynamics CSV format);
* ``report.json``      -- verdict, final parameters, diagnostics reports;
* ``manifest.json``    -- the fully resolved config echo, library version and
  seed; re-running from the echoed config reproduces the trajectory file
  bit-for-bit.

Exit codes encode outcomes so shell harnesses can assert non-convergence:
0 = converged (or a diagnostics-only run), 2 = oscillating / diverged /
iteration budget exhausted, 1 = errors (bad config, solver failure).

``reproduce <name>`` runs a named preset with an embedded assertion and
prints PASS or FAIL; presets cover the convergent coin, the three
non-convergence constructions, the no-stable-point step map, the concave
risk curve, regularized retraining of the linear loss, and the two
credit-simulator regimes.

Config grammar (TOML shown; JSON mirrors the structure)::

    seed = 7                    # optional, default 0
    out = "runs/coin"           # optional, overridden by --out

    [map]
    name = "biased_coin"        # biased_coin | point_mass_linear |
                                # point_mass_affine | step_half |
                                # gaussian_family | strategic
    mu = 0.3                    # map-specific numeric parameters
    eps = 0.1

    [loss]
    name = "squared_affine"     # squared_affine | squared_location |
                                # linear | hinge_reg | logistic_l2
    # beta = 1.0  C = 1e4  gamma = 1.0   (loss-specific)
    [loss.regularize]           # optional quadratic wrapper
    alpha = 0.5
    center = [0.0]

    [space]                     # optional; defaults to the map's space
    kind = "interval"           # interval | box | ball
    lo = 0.0
    hi = 1.0                    # box: lo/hi arrays; ball: center + radius

    [dynamic]
    kind = "rrm"                # rrm | rgd | rerm | regd
    theta0 = [0.0]
    eta = 0.5                   # rgd/regd step size
    n_per_step = 0              # rrm/rgd: Monte Carlo draws (0 = exact)
    outer_tol = 1e-7
    max_iters = 500

    [schedule]                  # rerm/regd sample sizes
    kind = "guarantee"          # constant | guarantee | exact
    n = 1000                    # constant
    K = 8.0
    delta = 0.05
    p = 0.1                     # schedule parameters; eps/m default to the map's

    [strategic]                 # map.name == "strategic" data source
    n = 2000
    m = 11
    strategic_count = 3
    data_seed = 0
    gamma = 0.5                 # regularizer, default 1000/n
    # csv = "file.csv"  outcome_column = "y"  strategic_columns = ["u1"]

    [diagnostics]
    sensitivity = true          # W1 sensitivity certification
    n_pairs = 20
    brute_force = true          # grid search for the performative optimum
    grid = 1001
    n = 10000
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import DistributionMap, LossSpec, ParameterSpace, PerfpredError, performative_risk
from .diagnostics import brute_force_optimum, estimate_sensitivity
from .dist_maps import MAP_CATALOG, make_map
from .dynamics import (
    NoConvergenceGuarantee,
    SampleSchedule,
    SolverConfig,
    Trajectory,
    rerm,
    regd,
    rgd,
    rrm,
    save_trajectory_csv,
    theoretical_iteration_bound,
)
from .losses import LOSS_CATALOG, make_loss, regularize
from .strategic import StrategicMapConfig, StrategicMap, load_dataset, run_credit_experiment, synthesize_credit_data

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2


class ConfigError(PerfpredError):
    """A config file failed validation; the message names the field path."""


def load_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text()
    if path.suffix == ".json":
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    try:
        import tomllib  # Python >= 3.11
    except ModuleNotFoundError:
        import tomli as tomllib
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML: {exc}") from None


def _section(cfg: dict, name: str, required: bool = False) -> dict:
    sec = cfg.get(name, {})
    if required and not sec:
        raise ConfigError(f"{name}: section is required")
    if not isinstance(sec, dict):
        raise ConfigError(f"{name}: expected a table/object")
    return sec


def _numeric(sec: dict, path: str, key: str, default=None, required: bool = False):
    if key not in sec:
        if required:
            raise ConfigError(f"{path}.{key}: required numeric field is missing")
        return default
    v = sec[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number, got {v!r}")
    return float(v)


def build_map(cfg: dict) -> tuple[DistributionMap, dict]:
    sec = _section(cfg, "map", required=True)
    name = sec.get("name")
    if name is None:
        raise ConfigError("map.name: required")
    if name == "strategic":
        return _build_strategic_map(cfg)
    if name not in MAP_CATALOG:
        raise ConfigError(f"map.name: unknown map {name!r}; known: {sorted(MAP_CATALOG)} + ['strategic']")
    params = {k: v for k, v in sec.items() if k != "name"}
    try:
        return make_map(name, **params), {}
    except (ValueError, PerfpredError) as exc:
        raise ConfigError(f"map: {exc}") from None


def _build_strategic_map(cfg: dict) -> tuple[StrategicMap, dict]:
    sec = _section(cfg, "strategic", required=True)
    eps = _numeric(_section(cfg, "map", required=True), "map", "eps", required=True)
    if "csv" in sec:
        dataset = load_dataset(
            sec["csv"],
            outcome_column=sec.get("outcome_column", "y"),
            strategic_columns=sec.get("strategic_columns", []),
            target_positive_rate=sec.get("target_positive_rate"),
            seed=int(sec.get("data_seed", 0)),
        )
    else:
        dataset = synthesize_credit_data(
            n=int(sec.get("n", 2000)),
            m=int(sec.get("m", 11)),
            strategic_count=int(sec.get("strategic_count", 3)),
            seed=int(sec.get("data_seed", 0)),
        )
    return StrategicMap(dataset, StrategicMapConfig(eps=eps)), {"dataset_rows": dataset.n_rows}


def build_loss(cfg: dict, space: ParameterSpace | None = None) -> LossSpec:
    sec = _section(cfg, "loss", required=True)
    name = sec.get("name")
    if name is None:
        raise ConfigError("loss.name: required")
    if name not in LOSS_CATALOG:
        raise ConfigError(f"loss.name: unknown loss {name!r}; known: {sorted(LOSS_CATALOG)}")
    params = {k: v for k, v in sec.items() if k not in ("name", "regularize")}
    try:
        loss = make_loss(name, **params)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"loss: {exc}") from None
    reg = sec.get("regularize")
    if reg:
        alpha = _numeric(reg, "loss.regularize", "alpha", required=True)
        center = reg.get("center", [0.0])
        diameter = space.diameter() if space is not None else None
        loss = regularize(loss, alpha, center, space_diameter=diameter)
    return loss


def build_space(cfg: dict, map: DistributionMap) -> ParameterSpace:
    sec = _section(cfg, "space")
    if not sec:
        return map.default_space()
    kind = sec.get("kind")
    try:
        if kind == "interval":
            return ParameterSpace.interval(_numeric(sec, "space", "lo", required=True),
                                           _numeric(sec, "space", "hi", required=True))
        if kind == "box":
            return ParameterSpace.box(sec["lo"], sec["hi"])
        if kind == "ball":
            return ParameterSpace.ball(sec["center"], _numeric(sec, "space", "radius", required=True))
    except KeyError as exc:
        raise ConfigError(f"space: missing field {exc}") from None
    except (ValueError, PerfpredError) as exc:
        raise ConfigError(f"space: {exc}") from None
    raise ConfigError(f"space.kind: expected interval | box | ball, got {kind!r}")


def build_solver(cfg: dict, max_iters_override: int | None = None) -> SolverConfig:
    sec = _section(cfg, "dynamic")
    kwargs = {}
    for key, field in (
        ("inner_tol", "inner_tol"),
        ("outer_tol", "outer_tol"),
        ("max_iters", "max_outer_iters"),
        ("max_inner_iters", "max_inner_iters"),
        ("divergence_radius", "divergence_radius"),
        ("oscillation_window", "oscillation_window"),
        ("risk_eval_n", "risk_eval_n"),
    ):
        if key in sec:
            v = sec[key]
            kwargs[field] = int(v) if field in ("max_outer_iters", "max_inner_iters", "oscillation_window", "risk_eval_n") else float(v)
    if max_iters_override is not None:
        kwargs["max_outer_iters"] = int(max_iters_override)
    try:
        return SolverConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"dynamic: {exc}") from None


def build_schedule(cfg: dict, map: DistributionMap) -> SampleSchedule:
    sec = _section(cfg, "schedule")
    kind = sec.get("kind", "guarantee")
    try:
        if kind == "constant":
            return SampleSchedule.constant(int(sec.get("n", 0)))
        if kind == "exact":
            return SampleSchedule.exact()
        if kind == "guarantee":
            eps = _numeric(sec, "schedule", "eps", default=map.declared_sensitivity)
            if eps is None:
                raise ConfigError("schedule.eps: required (map declares no sensitivity)")
            return SampleSchedule.guarantee(
                eps=eps,
                delta=_numeric(sec, "schedule", "delta", default=0.05),
                p=_numeric(sec, "schedule", "p", default=0.1),
                m=int(sec.get("m", map.instance_dim)),
                K=_numeric(sec, "schedule", "K", default=8.0),
            )
    except ValueError as exc:
        raise ConfigError(f"schedule: {exc}") from None
    raise ConfigError(f"schedule.kind: expected constant | guarantee | exact, got {kind!r}")


def _guarantee_warning(cfg: dict, map: DistributionMap, loss: LossSpec, kind: str) -> str | None:
    eps = map.declared_sensitivity
    beta, gamma = loss.constants.beta, loss.constants.gamma
    if eps is None or beta is None or gamma in (None, 0.0):
        return None
    eta = _numeric(_section(cfg, "dynamic"), "dynamic", "eta", default=None)
    try:
        theoretical_iteration_bound(kind, eps, beta, gamma, eta=eta, theta0_dist=1.0, delta=0.5)
    except NoConvergenceGuarantee as exc:
        return str(exc)
    except ValueError:
        return None
    return None


def run_experiment(cfg: dict, out_dir, seed_override=None, force_mc=False, max_iters=None, quiet=False):
    """Execute one configured experiment; returns (exit_code, trajectory | None)."""
    out = Path(out_dir if out_dir is not None else cfg.get("out", "runs/experiment"))
    out.mkdir(parents=True, exist_ok=True)
    seed = int(seed_override if seed_override is not None else cfg.get("seed", 0))
    map, extra = build_map(cfg)
    space = build_space(cfg, map)
    loss = build_loss(cfg, space)
    solver = build_solver(cfg, max_iters)
    dyn = _section(cfg, "dynamic")
    kind = dyn.get("kind")
    diag = _section(cfg, "diagnostics")
    report: dict = {"seed": seed}
    traj = None

    if kind is not None:
        if kind not in ("rrm", "rgd", "rerm", "regd"):
            raise ConfigError(f"dynamic.kind: expected rrm | rgd | rerm | regd, got {kind!r}")
        theta0 = dyn.get("theta0")
        if theta0 is None:
            raise ConfigError("dynamic.theta0: required when a dynamic is configured")
        warn = _guarantee_warning(cfg, map, loss, kind)
        if warn and not quiet:
            print(f"warning: {warn}", file=sys.stderr)
        n_per_step = int(dyn.get("n_per_step", 0)) or None
        if force_mc and not n_per_step:
            n_per_step = int(diag.get("n", 10_000))
        if kind == "rrm":
            traj = rrm(map, loss, space, theta0, cfg=solver, n_per_step=n_per_step, seed=seed)
        elif kind == "rgd":
            eta = _numeric(dyn, "dynamic", "eta", required=True)
            traj = rgd(map, loss, space, theta0, eta, cfg=solver, n_per_step=n_per_step, seed=seed)
        elif kind == "rerm":
            traj = rerm(map, loss, space, theta0, build_schedule(cfg, map), cfg=solver, seed=seed)
        else:
            eta = _numeric(dyn, "dynamic", "eta", required=True)
            traj = regd(map, loss, space, theta0, eta, build_schedule(cfg, map), cfg=solver, seed=seed)
        save_trajectory_csv(traj, out / "trajectory.csv")
        report.update(
            verdict=traj.verdict,
            converged_at=traj.converged_at,
            n_steps=traj.n_steps,
            final_theta=traj.final_theta.tolist(),
            final_risk=traj.risks[-1].mean,
        )

    if diag.get("sensitivity"):
        pairs = diag.get("pairs")
        if pairs is None:
            rng = np.random.default_rng(seed)
            pts = [space.project(rng.uniform(-1, 1, space.dim)) for _ in range(2 * int(diag.get("n_pairs", 20)))]
            pairs = [(pts[2 * i], pts[2 * i + 1]) for i in range(len(pts) // 2)
                     if float(np.linalg.norm(pts[2 * i] - pts[2 * i + 1])) > 1e-12]
        rep = estimate_sensitivity(map, pairs, n=int(diag.get("n", 10_000)), seed=seed)
        report["sensitivity"] = rep.to_json()
    if diag.get("brute_force"):
        bf = brute_force_optimum(
            map, loss, space, int(diag.get("grid", 1001)),
            n=int(diag.get("n", 10_000)), seed=seed, force_monte_carlo=force_mc,
        )
        report["brute_force"] = bf.to_json()

    (out / "report.json").write_text(json.dumps(report, indent=2))
    manifest = {"version": __version__, "seed": seed, "config": _jsonable(cfg)}
    manifest.update(extra)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
    if not quiet:
        if traj is not None:
            print(f"verdict: {traj.verdict}  final theta: {traj.final_theta}  steps: {traj.n_steps}")
        print(f"artifacts in {out}")
    if traj is None:
        return EXIT_OK, None
    return (EXIT_OK if traj.verdict == "converged" else EXIT_NOT_CONVERGED), traj


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer, np.floating)):
        return obj.item()
    return obj


def run_strategic_sim(cfg: dict, out_dir, seed_override=None, quiet=False):
    sec = _section(cfg, "strategic", required=True)
    seed = int(seed_override if seed_override is not None else cfg.get("seed", 0))
    out = Path(out_dir if out_dir is not None else cfg.get("out", "runs/strategic"))
    out.mkdir(parents=True, exist_ok=True)
    map, _ = _build_strategic_map(cfg)
    solver = build_solver(cfg)
    result = run_credit_experiment(
        map.dataset,
        map.cfg,
        dynamic=sec.get("dynamic", "rrm"),
        gamma_reg=_numeric(sec, "strategic", "gamma", default=None),
        eta=_numeric(sec, "strategic", "eta", default=None),
        solver=solver,
        seed=seed,
    )
    save_trajectory_csv(result.trajectory, out / "trajectory.csv")
    (out / "experiment.json").write_text(json.dumps(_jsonable(result.to_json()), indent=2))
    manifest = {"version": __version__, "seed": seed, "config": _jsonable(cfg)}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2))
    if not quiet:
        print(f"verdict: {result.trajectory.verdict}  steps: {result.trajectory.n_steps}")
        print(f"artifacts in {out}")
    return (EXIT_OK if result.trajectory.verdict == "converged" else EXIT_NOT_CONVERGED), result


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------


def _preset_coin():
    return {
        "seed": 0,
        "map": {"name": "biased_coin", "mu": 0.3, "eps": 0.1},
        "loss": {"name": "squared_affine"},
        "dynamic": {"kind": "rrm", "theta0": [0.0]},
    }


def _assert_coin(traj: Trajectory, _report):
    target = 0.3 / 0.9
    if traj.verdict != "converged":
        return False, f"expected convergence, got {traj.verdict}"
    if abs(float(traj.final_theta[0]) - target) > 1e-6:
        return False, f"final {traj.final_theta[0]!r} not within 1e-6 of {target}"
    if traj.n_steps > 15:
        return False, f"took {traj.n_steps} steps, bound is 15"
    return True, f"converged to {float(traj.final_theta[0]):.9f} in {traj.n_steps} steps"


def _preset_ce_a():
    return {
        "seed": 0,
        "map": {"name": "point_mass_linear", "eps": 0.5},
        "loss": {"name": "linear", "beta": 1.0},
        "dynamic": {"kind": "rrm", "theta0": [0.5]},
    }


def _assert_cycle(traj: Trajectory, values, tol):
    if traj.verdict != "oscillating":
        return False, f"expected oscillation, got {traj.verdict}"
    tail = sorted(float(v[0]) for v in traj.iterates[-2:])
    want = sorted(values)
    if any(abs(a - b) > tol for a, b in zip(tail, want)):
        return False, f"cycle {tail} differs from {want}"
    return True, f"oscillates on {want}"


def _preset_ce_b():
    return {
        "seed": 0,
        "map": {"name": "point_mass_linear", "eps": 0.25},
        "loss": {"name": "hinge_reg", "C": 1e4, "gamma": 1.0},
        "space": {"kind": "interval", "lo": -2.0, "hi": 2.0},
        "dynamic": {"kind": "rrm", "theta0": [2.0]},
    }


def _preset_ce_c():
    return {
        "seed": 0,
        "map": {"name": "point_mass_affine", "eps": 1.5},
        "loss": {"name": "squared_location"},
        "dynamic": {"kind": "rrm", "theta0": [0.0], "max_iters": 100},
    }


def _assert_ce_c(traj: Trajectory, _report):
    if traj.verdict != "diverged":
        return False, f"expected divergence, got {traj.verdict}"
    steps = traj.step_norms
    ratios = [steps[i + 1] / steps[i] for i in range(len(steps) - 1)]
    if any(abs(r - 1.5) > 1e-9 for r in ratios):
        return False, "step-norm growth is not a clean 1.5 factor"
    return True, f"diverged with step growth factor 1.5 after {traj.n_steps} steps"


def _preset_no_stable():
    return {
        "seed": 0,
        "map": {"name": "step_half"},
        "loss": {"name": "squared_location"},
        "dynamic": {"kind": "rrm", "theta0": [0.0]},
        "diagnostics": {"brute_force": True, "grid": 1001},
    }


def _assert_no_stable(traj: Trajectory, report):
    ok, msg = _assert_cycle(traj, [0.0, 1.0], 1e-9)
    if not ok:
        return ok, msg
    bf = report.get("brute_force", {})
    theta_po = bf.get("theta_po", [None])[0]
    pr = bf.get("pr")
    if theta_po is None or abs(theta_po - 0.5) > 1e-3:
        return False, f"grid optimum {theta_po} not within 1e-3 of 0.5"
    if abs(pr - 0.25) > 1e-3:
        return False, f"grid risk {pr} not within 1e-3 of 0.25"
    return True, f"{msg}; grid optimum {theta_po:.4f} with risk {pr:.4f}"


def _preset_concave():
    return {
        "seed": 0,
        "map": {"name": "biased_coin", "mu": -0.1, "eps": 0.6},
        "loss": {"name": "squared_affine"},
    }


def _run_concave(out):
    from .dist_maps import make_map as _mk

    map = _mk("biased_coin", mu=-0.1, eps=0.6)
    loss = make_loss("squared_affine")
    grid = np.linspace(0.0, 1.0, 101)
    pr = np.array([performative_risk(map, loss, [t], 1, 0).mean for t in grid])
    second = pr[:-2] - 2 * pr[1:-1] + pr[2:]
    ok = bool(np.all(second < 0))
    msg = f"all {len(second)} interior second differences negative" if ok else "second differences not all negative"
    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(json.dumps({"grid": grid.tolist(), "pr": pr.tolist()}, indent=2))
    return ok, msg


def _preset_regularized():
    # alpha = sqrt(eps) * beta / (1 - eps) at eps = 0.25, beta = 1
    return {
        "seed": 0,
        "map": {"name": "point_mass_linear", "eps": 0.25},
        "loss": {"name": "linear", "beta": 1.0, "regularize": {"alpha": 2.0 / 3.0, "center": [0.0]}},
        "space": {"kind": "interval", "lo": -1.0, "hi": 1.0},
        "dynamic": {"kind": "rrm", "theta0": [0.5]},
    }


def _assert_regularized(traj: Trajectory, _report):
    if traj.verdict != "converged":
        return False, f"expected convergence, got {traj.verdict}"
    map = make_map("point_mass_linear", eps=0.25)
    base_loss = make_loss("linear", beta=1.0)
    space = ParameterSpace.interval(-1.0, 1.0)
    from .diagnostics import estimate_lipschitz_theta, estimate_lipschitz_z

    alpha = 2.0 / 3.0
    eps = 0.25
    L_z = estimate_lipschitz_z(map, base_loss, space)
    L_t = estimate_lipschitz_theta(map, base_loss, space)
    bf = brute_force_optimum(map, base_loss, space, 1001, n=1, seed=0)
    pr_final = performative_risk(map, base_loss, traj.final_theta, 1, 0).mean
    gap = pr_final - bf.pr
    bound = 2.0 * (L_t + alpha + eps * L_z) * L_z * eps / alpha + alpha / 2.0
    if gap > bound:
        return False, f"objective gap {gap:.4g} exceeds bound {bound:.4g}"
    return True, f"converged; objective gap {gap:.3g} within bound {bound:.3g}"


def _preset_credit(eps):
    return {
        "seed": 0,
        "map": {"name": "strategic", "eps": eps},
        "strategic": {"n": 2000, "m": 11, "strategic_count": 3, "data_seed": 42, "dynamic": "rrm"},
        "dynamic": {"max_iters": 2000},
    }


def _assert_credit_small(result):
    v = result.trajectory.verdict
    if v != "converged":
        return False, f"expected convergence at small cost scale, got {v}"
    return True, f"converged in {result.trajectory.n_steps} steps"


def _assert_credit_large(result):
    v = result.trajectory.verdict
    if v not in ("oscillating", "diverged"):
        return False, f"expected oscillation or divergence at large cost scale, got {v}"
    return True, f"failed to converge as expected ({v}, {result.trajectory.n_steps} steps)"


PRESETS = {
    "coin": (_preset_coin, _assert_coin),
    "counterexample-a": (_preset_ce_a, lambda traj, rep: _assert_cycle(traj, [-1.0, 1.0], 1e-9)),
    "counterexample-b": (_preset_ce_b, lambda traj, rep: _assert_cycle(traj, [2.0, -2.0], 1e-6)),
    "counterexample-c": (_preset_ce_c, _assert_ce_c),
    "no-stable-point": (_preset_no_stable, _assert_no_stable),
    "concave-pr": (_preset_concave, None),
    "regularized-linear": (_preset_regularized, _assert_regularized),
    "credit-small-eps": (lambda: _preset_credit(0.01), _assert_credit_small),
    "credit-large-eps": (lambda: _preset_credit(30.0), _assert_credit_large),
}


def cmd_reproduce(args) -> int:
    name = args.preset
    if name not in PRESETS:
        print(f"error: unknown preset {name!r}; known: {sorted(PRESETS)}", file=sys.stderr)
        return EXIT_ERROR
    out = args.out if args.out is not None else f"runs/{name}"
    builder, assertion = PRESETS[name]
    try:
        if name == "concave-pr":
            ok, msg = _run_concave(out)
        elif name.startswith("credit"):
            _, result = run_strategic_sim(builder(), out, quiet=True)
            ok, msg = assertion(result)
        else:
            cfg = builder()
            report_path = Path(out) / "report.json"
            _, traj = run_experiment(cfg, out, quiet=True)
            report = json.loads(report_path.read_text()) if report_path.exists() else {}
            ok, msg = assertion(traj, report)
    except PerfpredError as exc:
        print(f"FAIL {name}: {exc}")
        return EXIT_ERROR
    print(f"{'PASS' if ok else 'FAIL'} {name}: {msg}")
    return EXIT_OK if ok else EXIT_ERROR


def _add_common(p):
    p.add_argument("--config", required=True, help="TOML or JSON experiment config")
    p.add_argument("--out", default=None, help="output directory (default: config 'out' or runs/<name>)")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--force-monte-carlo", action="store_true", help="bypass closed forms in risk evaluation")
    p.add_argument("--max-iters", type=int, default=None, help="override dynamic.max_iters")
    p.add_argument("--quiet", action="store_true")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="perfpred", description="Performative-prediction experiment runner")
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in ("run", "run-rrm", "run-rgd", "run-rerm", "run-regd", "diagnose-sensitivity", "brute-force-pr"):
        _add_common(sub.add_parser(cmd))
    _add_common(sub.add_parser("strategic-sim"))
    rep = sub.add_parser("reproduce")
    rep.add_argument("preset", help=f"one of {sorted(PRESETS)}")
    rep.add_argument("--out", default=None)
    rep.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)

    if args.command == "reproduce":
        return cmd_reproduce(args)
    try:
        cfg = load_config(args.config)
        if args.command == "strategic-sim":
            code, _ = run_strategic_sim(cfg, args.out, seed_override=args.seed, quiet=args.quiet)
            return code
        if args.command in ("run-rrm", "run-rgd", "run-rerm", "run-regd"):
            cfg.setdefault("dynamic", {})["kind"] = args.command.removeprefix("run-")
        elif args.command == "diagnose-sensitivity":
            cfg.pop("dynamic", None)
            cfg.setdefault("diagnostics", {})["sensitivity"] = True
        elif args.command == "brute-force-pr":
            cfg.pop("dynamic", None)
            cfg.setdefault("diagnostics", {})["brute_force"] = True
        code, _ = run_experiment(
            cfg,
            args.out,
            seed_override=args.seed,
            force_mc=args.force_monte_carlo,
            max_iters=args.max_iters,
            quiet=args.quiet,
        )
        return code
    except (PerfpredError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
