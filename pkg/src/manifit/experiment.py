"""Configuration-driven benchmark runner.

One experiment = ``trials`` independent repetitions of: sample the manifold,
corrupt with Gaussian noise, fit every requested field at every bandwidth
r = lambda * sqrt(sigma), project a fresh tube sample onto each fitted
manifold, and score both the initial and the projected sets against the
ground truth. Per-trial random streams derive from the master seed and the
trial index alone, so results are independent of execution order and worker
count, and reports are bit-reproducible.
"""
from __future__ import annotations

import concurrent.futures
import json
import math
import statistics
import time
from dataclasses import dataclass, field as dc_field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from ._version import __version__
from .errors import ConfigError, InvalidInput
from .fields import FieldKind, FittedField
from .manifolds import ManifoldKind, ManifoldSpec, NoiseSpec, add_gaussian_noise, sample_manifold, sample_tube
from .metrics import hausdorff_to_manifold
from .rng import derive_seed
from .solver import SolverOptions, Status, project_batch

SCHEMA_VERSION = 1

_SEED_STREAMS = ("manifold", "noise", "tube", "dense")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a benchmark run depends on; no hidden defaults for the
    protocol quantities (sigma, lambda grid, beta, sample counts, trials)."""

    manifold: ManifoldSpec
    n_samples: int
    n_initial: int
    sigma: float
    lambda_grid: tuple
    beta: int
    methods: tuple
    trials: int
    master_seed: int
    solver: SolverOptions = SolverOptions()
    net_scale: float = 1.0
    dense_count: int = 100_000
    workers: int = 1
    output_dir: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "lambda_grid",
                           tuple(float(v) for v in self.lambda_grid))
        object.__setattr__(self, "methods",
                           tuple(FieldKind(m) for m in self.methods))

    def validate(self):
        problems = []
        if self.trials < 1:
            problems.append("experiment.trials: must be >= 1")
        if self.n_samples < 1:
            problems.append("experiment.n_samples: must be >= 1")
        if self.n_initial < 1:
            problems.append("experiment.n_initial: must be >= 1")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            problems.append("experiment.sigma: must be positive")
        if not self.lambda_grid:
            problems.append("experiment.lambda_grid: must be nonempty")
        elif any(not (math.isfinite(v) and v > 0) for v in self.lambda_grid):
            problems.append("experiment.lambda_grid: entries must be positive")
        if not self.methods:
            problems.append("experiment.methods: must name at least one method")
        if int(self.beta) != self.beta or self.beta < 2:
            problems.append("experiment.beta: must be an integer >= 2")
        if self.dense_count < 1:
            problems.append("experiment.dense_count: must be >= 1")
        if not (math.isfinite(self.net_scale) and self.net_scale > 0):
            problems.append("experiment.net_scale: must be positive")
        if self.workers < 1:
            problems.append("experiment.workers: must be >= 1")
        if problems:
            raise ConfigError("; ".join(problems))

    def describe(self) -> dict:
        solver = {
            "tolerance": self.solver.tolerance,
            "max_iters": self.solver.max_iters,
            "initial_step": self.solver.initial_step,
            "backtrack_factor": self.solver.backtrack_factor,
            "min_step": self.solver.min_step,
            "max_displacement": self.solver.max_displacement,
            "gradient_mode": self.solver.gradient_mode.value,
            "fd_step": self.solver.fd_step,
        }
        return {
            "manifold": self.manifold.describe(),
            "n_samples": self.n_samples,
            "n_initial": self.n_initial,
            "sigma": self.sigma,
            "lambda_grid": list(self.lambda_grid),
            "beta": self.beta,
            "methods": [m.value for m in self.methods],
            "trials": self.trials,
            "master_seed": self.master_seed,
            "solver": solver,
            "net_scale": self.net_scale,
            "dense_count": self.dense_count,
        }


def _manifold_from_table(table: dict) -> ManifoldSpec:
    kind = table.get("kind")
    if kind is None:
        raise ConfigError("manifold.kind: missing")
    try:
        kind = ManifoldKind(kind)
    except ValueError:
        raise ConfigError(f"manifold.kind: unknown kind {kind!r}") from None
    kwargs = {}
    if kind in (ManifoldKind.CIRCLE, ManifoldKind.SPHERE):
        kwargs["radius"] = float(table.get("radius", 1.0))
    elif kind is ManifoldKind.TORUS:
        kwargs["major_radius"] = float(table.get("major_radius", 2.0))
        kwargs["minor_radius"] = float(table.get("minor_radius", 0.5))
    else:
        if "basis" not in table:
            raise ConfigError("manifold.basis: required for affine manifolds")
        kwargs["basis"] = table["basis"]
        if "offset" in table:
            kwargs["offset"] = table["offset"]
        kwargs["extent"] = float(table.get("extent", 1.0))
    try:
        return ManifoldSpec(kind=kind, **kwargs)
    except InvalidInput as exc:
        raise ConfigError(f"manifold: {exc}") from exc


def _solver_from_table(table: dict) -> SolverOptions:
    known = {"tolerance", "max_iters", "initial_step", "backtrack_factor",
             "min_step", "max_displacement", "gradient_mode", "fd_step"}
    unknown = set(table) - known
    if unknown:
        raise ConfigError(f"solver: unknown keys {sorted(unknown)}")
    try:
        return SolverOptions(**table)
    except (InvalidInput, ValueError) as exc:
        raise ConfigError(f"solver: {exc}") from exc


def load_config(path) -> ExperimentConfig:
    """Parse and validate a TOML experiment configuration file."""
    path = Path(path)
    try:
        with path.open("rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    if "manifold" not in doc:
        raise ConfigError(f"{path}: missing [manifold] table")
    if "experiment" not in doc:
        raise ConfigError(f"{path}: missing [experiment] table")
    manifold = _manifold_from_table(doc["manifold"])
    exp = doc["experiment"]
    required = ("n_samples", "n_initial", "sigma", "lambda_grid", "beta",
                "methods", "trials", "master_seed")
    missing = [key for key in required if key not in exp]
    if missing:
        raise ConfigError(
            f"{path}: missing experiment keys: {', '.join(missing)}"
        )
    try:
        methods = tuple(FieldKind(m) for m in exp["methods"])
    except ValueError as exc:
        raise ConfigError(f"{path}: experiment.methods: {exc}") from exc
    solver = _solver_from_table(doc.get("solver", {}))
    out_table = doc.get("output", {})
    config = ExperimentConfig(
        manifold=manifold,
        n_samples=int(exp["n_samples"]),
        n_initial=int(exp["n_initial"]),
        sigma=float(exp["sigma"]),
        lambda_grid=tuple(exp["lambda_grid"]),
        beta=int(exp["beta"]),
        methods=methods,
        trials=int(exp["trials"]),
        master_seed=int(exp["master_seed"]),
        solver=solver,
        net_scale=float(exp.get("net_scale", 1.0)),
        dense_count=int(exp.get("dense_count", 100_000)),
        workers=int(exp.get("workers", 1)),
        output_dir=out_table.get("directory"),
    )
    config.validate()
    return config


def trial_seeds(master_seed: int, trial: int) -> dict:
    return {name: derive_seed(master_seed, trial, i)
            for i, name in enumerate(_SEED_STREAMS)}


def _lambda_key(lam: float) -> str:
    return repr(float(lam))


def _status_counts(traces) -> dict:
    counts = {status.value: 0 for status in Status}
    for tr in traces:
        counts[tr.status.value] += 1
    return counts


def _run_trial(config: ExperimentConfig, trial: int):
    spec = config.manifold
    seeds = trial_seeds(config.master_seed, trial)
    clean = sample_manifold(spec, config.n_samples, seeds["manifold"])
    data = add_gaussian_noise(clean, NoiseSpec(config.sigma, seeds["noise"]))
    tube_radius = 0.5 * math.sqrt(config.sigma / spec.ambient_dim)
    initial = sample_tube(spec, config.n_initial, tube_radius, seeds["tube"])
    initial_report = hausdorff_to_manifold(initial, spec, config.dense_count,
                                           seeds["dense"])
    methods_payload = {}
    timing = {}
    for method in config.methods:
        per_lambda = {}
        method_timing = {}
        for lam in config.lambda_grid:
            r = lam * math.sqrt(config.sigma)
            started = time.perf_counter()
            fitted = FittedField(data, method, r=r, d=spec.intrinsic_dim,
                                 beta=config.beta, net_scale=config.net_scale)
            projected, traces = project_batch(initial, fitted, config.solver)
            wall = time.perf_counter() - started
            report = hausdorff_to_manifold(projected, spec, config.dense_count,
                                           seeds["dense"])
            counts = _status_counts(traces)
            accepted = sorted(tr.n_accepted for tr in traces)
            per_lambda[_lambda_key(lam)] = {
                "r": r,
                "hausdorff": report.to_dict(),
                "statuses": counts,
                "converged_fraction": counts[Status.CONVERGED.value] / len(traces),
                "monotone": all(tr.is_monotone() for tr in traces),
                "median_accepted_steps": float(statistics.median(accepted)),
            }
            method_timing[_lambda_key(lam)] = wall
        methods_payload[method.value] = per_lambda
        timing[method.value] = method_timing
    payload = {
        "trial": trial,
        "seeds": seeds,
        "tube_radius": tube_radius,
        "initial": initial_report.to_dict(),
        "methods": methods_payload,
    }
    return payload, timing


def _trial_task(args):
    config, trial = args
    return _run_trial(config, trial)


def _summarize(config: ExperimentConfig, trials_payload: list) -> dict:
    def median_of(values):
        return float(statistics.median(values))

    summary = {
        "initial": {
            "median_symmetric": median_of(
                [t["initial"]["symmetric"] for t in trials_payload]),
            "median_forward": median_of(
                [t["initial"]["forward"] for t in trials_payload]),
            "median_backward": median_of(
                [t["initial"]["backward"] for t in trials_payload]),
        },
        "methods": {},
    }
    for method in config.methods:
        per_lambda = {}
        for lam in config.lambda_grid:
            key = _lambda_key(lam)
            cells = [t["methods"][method.value][key] for t in trials_payload]
            per_lambda[key] = {
                "lambda": float(lam),
                "median_symmetric": median_of(
                    [c["hausdorff"]["symmetric"] for c in cells]),
                "median_forward": median_of(
                    [c["hausdorff"]["forward"] for c in cells]),
                "median_backward": median_of(
                    [c["hausdorff"]["backward"] for c in cells]),
                "converged_fraction": float(
                    sum(c["converged_fraction"] for c in cells) / len(cells)),
                "monotone": all(c["monotone"] for c in cells),
            }
        best_key = min(
            per_lambda,
            key=lambda k: (per_lambda[k]["median_symmetric"], per_lambda[k]["lambda"]),
        )
        summary["methods"][method.value] = {
            "per_lambda": per_lambda,
            "best_lambda": per_lambda[best_key]["lambda"],
            "best_median_symmetric": per_lambda[best_key]["median_symmetric"],
            "best_median_forward": per_lambda[best_key]["median_forward"],
        }
    return summary


@dataclass
class ExperimentReport:
    """Per-trial metrics plus aggregate summary and provenance.

    Wall-clock timings live in ``timing`` and are excluded from the
    canonical serialization, which is what determinism is judged on.
    """

    schema_version: int
    code_version: str
    config: dict
    trials: list
    summary: dict
    timing: dict = dc_field(default_factory=dict)

    def payload(self, include_timing: bool = True) -> dict:
        out = {
            "schema_version": self.schema_version,
            "code_version": self.code_version,
            "config": self.config,
            "trials": self.trials,
            "summary": self.summary,
        }
        if include_timing:
            out["timing"] = self.timing
        return out

    def canonical_json(self) -> str:
        """Deterministic content only, byte-stable encoding."""
        return json.dumps(self.payload(include_timing=False), sort_keys=True,
                          separators=(",", ":"), allow_nan=False)

    def to_json(self) -> str:
        return json.dumps(self.payload(include_timing=True), sort_keys=True,
                          indent=2)

    def write(self, path):
        Path(path).write_text(self.to_json() + "\n")


def run_experiment(config: ExperimentConfig,
                   execution_order=None) -> ExperimentReport:
    """Run the full protocol and aggregate a report.

    ``execution_order`` optionally permutes the order trials are launched in
    (results are identical either way; the hook exists to demonstrate that).
    """
    config.validate()
    order = (list(range(config.trials)) if execution_order is None
             else [int(t) for t in execution_order])
    if sorted(order) != list(range(config.trials)):
        raise InvalidInput("execution_order must be a permutation of the trials")
    started = time.perf_counter()
    if config.workers > 1 and config.trials > 1:
        jobs = [(config, t) for t in order]
        with concurrent.futures.ProcessPoolExecutor(max_workers=config.workers) as pool:
            raw = list(pool.map(_trial_task, jobs))
    else:
        raw = [_run_trial(config, t) for t in order]
    raw.sort(key=lambda pair: pair[0]["trial"])
    trials_payload = [payload for payload, _ in raw]
    per_trial_timing = {str(payload["trial"]): tm for payload, tm in raw}
    total = time.perf_counter() - started
    summary = _summarize(config, trials_payload)
    return ExperimentReport(
        schema_version=SCHEMA_VERSION,
        code_version=__version__,
        config=config.describe(),
        trials=trials_payload,
        summary=summary,
        timing={"total_seconds": total, "per_trial": per_trial_timing},
    )
