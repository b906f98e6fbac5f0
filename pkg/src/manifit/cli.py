"""Command-line interface.

Subcommands: ``sample`` writes a synthetic cloud CSV, ``project`` projects a
query CSV onto a manifold fitted to a data CSV, ``eval`` writes a Hausdorff
report for two clouds (or a cloud against an analytic manifold), and
``experiment`` runs a TOML-configured benchmark.

Exit codes: 0 on success, 2 on configuration/usage errors, 3 on data errors.
"""
from __future__ import annotations

import argparse
import statistics
import sys
from pathlib import Path

from ._version import __version__
from .cloud_io import read_cloud_csv, write_cloud_csv, write_json
from .errors import (
    ConfigError,
    DataError,
    DimensionError,
    EmptySetError,
    InvalidInput,
    ManifoldFitError,
    TubeExceedsReach,
)
from .experiment import SCHEMA_VERSION, load_config, run_experiment
from .fields import FieldKind, FittedField
from .manifolds import ManifoldKind, ManifoldSpec, NoiseSpec, add_gaussian_noise, sample_manifold
from .metrics import hausdorff, hausdorff_to_manifold
from .solver import GradientMode, SolverOptions, project_batch

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3


def _add_manifold_args(parser: argparse.ArgumentParser, required: bool):
    parser.add_argument("--manifold", choices=["circle", "sphere", "torus"],
                        required=required,
                        help="analytic ground-truth manifold")
    parser.add_argument("--radius", type=float, default=1.0,
                        help="circle/sphere radius (default 1)")
    parser.add_argument("--major-radius", type=float, default=2.0,
                        help="torus major radius (default 2)")
    parser.add_argument("--minor-radius", type=float, default=0.5,
                        help="torus minor radius (default 0.5)")


def _manifold_from_args(args) -> ManifoldSpec:
    kind = ManifoldKind(args.manifold)
    if kind is ManifoldKind.TORUS:
        return ManifoldSpec(kind=kind, major_radius=args.major_radius,
                            minor_radius=args.minor_radius)
    return ManifoldSpec(kind=kind, radius=args.radius)


def _cmd_sample(args) -> int:
    spec = _manifold_from_args(args)
    cloud = sample_manifold(spec, args.n, args.seed)
    if args.sigma > 0:
        cloud = add_gaussian_noise(cloud, NoiseSpec(args.sigma, args.seed + 1))
    write_cloud_csv(cloud, args.out)
    print(f"wrote {cloud.n} points ({cloud.dim} columns) to {args.out}")
    return EXIT_OK


def _solver_from_args(args) -> SolverOptions:
    return SolverOptions(
        tolerance=args.tolerance,
        max_iters=args.max_iters,
        max_displacement=args.max_displacement,
        gradient_mode=GradientMode(args.gradient_mode),
    )


def _cmd_project(args) -> int:
    data = read_cloud_csv(args.data)
    queries = read_cloud_csv(args.queries)
    if data.dim != queries.dim:
        raise DataError(
            f"dimension mismatch: {args.data} has {data.dim} columns, "
            f"{args.queries} has {queries.dim}"
        )
    fitted = FittedField(data, FieldKind(args.method), r=args.r, d=args.d,
                         beta=args.beta, net_scale=args.net_scale)
    projected, traces = project_batch(queries, fitted, _solver_from_args(args),
                                      workers=args.threads)
    write_cloud_csv(projected, args.out)
    statuses = {}
    for tr in traces:
        statuses[tr.status.value] = statuses.get(tr.status.value, 0) + 1
    summary = {
        "schema_version": SCHEMA_VERSION,
        "code_version": __version__,
        "n_points": queries.n,
        "method": args.method,
        "r": args.r,
        "beta": args.beta,
        "d": args.d,
        "statuses": statuses,
        "converged_fraction": statuses.get("converged", 0) / max(queries.n, 1),
        "monotone": all(tr.is_monotone() for tr in traces),
        "median_accepted_steps": float(statistics.median(
            sorted(tr.n_accepted for tr in traces))) if traces else 0.0,
    }
    if args.trace_out:
        write_json(summary, args.trace_out)
    print(f"wrote {projected.n} projected points to {args.out} "
          f"({summary['converged_fraction']:.1%} converged)")
    return EXIT_OK


def _cmd_eval(args) -> int:
    points = read_cloud_csv(args.points)
    if args.target is not None:
        target = read_cloud_csv(args.target)
        report = hausdorff(points, target)
        payload = {"mode": "set-to-set"}
    elif args.manifold is not None:
        spec = _manifold_from_args(args)
        report = hausdorff_to_manifold(points, spec, args.dense_count, args.seed)
        payload = {"mode": "set-to-manifold", "manifold": spec.describe()}
    else:
        raise ConfigError("eval needs either --target or --manifold")
    payload.update({
        "schema_version": SCHEMA_VERSION,
        "code_version": __version__,
    })
    payload.update(report.to_dict())
    write_json(payload, args.out)
    print(f"symmetric Hausdorff {report.symmetric!r} -> {args.out}")
    return EXIT_OK


def _cmd_experiment(args) -> int:
    config = load_config(args.config)
    if args.threads is not None:
        config = type(config)(**{**config.__dict__, "workers": args.threads})
    report = run_experiment(config)
    out_dir = Path(args.out or config.output_dir or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / "report.json"
    report.write(report_path)
    for method, summary in report.summary["methods"].items():
        print(f"{method}: best lambda {summary['best_lambda']} "
              f"median symmetric Hausdorff {summary['best_median_symmetric']:.6g}")
    print(f"report written to {report_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="manifit",
        description="Fit manifolds to noisy point clouds and project points onto them.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sample = sub.add_parser("sample", help="write a synthetic cloud CSV")
    _add_manifold_args(p_sample, required=True)
    p_sample.add_argument("--n", type=int, required=True, help="number of points")
    p_sample.add_argument("--sigma", type=float, default=0.0,
                          help="Gaussian noise level (0 = noiseless)")
    p_sample.add_argument("--seed", type=int, default=0)
    p_sample.add_argument("--out", required=True, help="output CSV path")
    p_sample.set_defaults(func=_cmd_sample)

    p_project = sub.add_parser("project", help="project a query CSV onto a fitted manifold")
    p_project.add_argument("--data", required=True, help="sample cloud CSV")
    p_project.add_argument("--queries", required=True, help="query cloud CSV")
    p_project.add_argument("--method", choices=[k.value for k in FieldKind],
                           required=True)
    p_project.add_argument("--r", type=float, required=True, help="bandwidth")
    p_project.add_argument("--beta", type=int, required=True,
                           help="weight exponent (>= 2)")
    p_project.add_argument("--d", type=int, required=True, help="intrinsic dimension")
    p_project.add_argument("--net-scale", type=float, default=1.0,
                           help="covering net radius factor (cf18 only)")
    p_project.add_argument("--tolerance", type=float, default=None,
                           help="solver tolerance on the squared field norm")
    p_project.add_argument("--max-iters", type=int, default=500)
    p_project.add_argument("--max-displacement", type=float, default=2.0,
                           help="escape guard, in units of r")
    p_project.add_argument("--gradient-mode",
                           choices=[m.value for m in GradientMode],
                           default=GradientMode.APPROX_RESIDUAL.value)
    p_project.add_argument("--threads", type=int, default=1)
    p_project.add_argument("--out", required=True, help="projected CSV path")
    p_project.add_argument("--trace-out", default=None,
                           help="trace summary JSON path")
    p_project.set_defaults(func=_cmd_project)

    p_eval = sub.add_parser("eval", help="Hausdorff report for two clouds or cloud vs manifold")
    p_eval.add_argument("--points", required=True, help="point cloud CSV")
    p_eval.add_argument("--target", default=None, help="second cloud CSV")
    _add_manifold_args(p_eval, required=False)
    p_eval.add_argument("--dense-count", type=int, default=100_000,
                        help="on-manifold sample size for the backward estimate")
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--out", required=True, help="report JSON path")
    p_eval.set_defaults(func=_cmd_eval)

    p_exp = sub.add_parser("experiment", help="run a TOML-configured benchmark")
    p_exp.add_argument("--config", required=True, help="TOML config path")
    p_exp.add_argument("--out", default=None, help="output directory")
    p_exp.add_argument("--threads", type=int, default=None,
                       help="override the configured worker count")
    p_exp.set_defaults(func=_cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InvalidInput, TubeExceedsReach) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, DimensionError, EmptySetError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ManifoldFitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
