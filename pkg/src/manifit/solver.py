"""Project points onto the zero set of a bias field by descent on the squared
field norm, with backtracking line search; and subspace-constrained descent
for scalar ridge fields.

Per-point failures never raise out of the solvers: every outcome is a status
on the returned trace, so batch runs always complete.
"""
from __future__ import annotations

import concurrent.futures
import math
from dataclasses import dataclass, field as dc_field
from enum import Enum

import numpy as np

from .errors import AllWeightsZero, EmptyNeighborhood, InvalidInput, StencilEscape
from .fields import FieldKind, FittedField, ridge_direction
from .geometry import PointCloud


# Sufficient-decrease coefficient for the backtracking line search. Plain
# decrease would accept near-reflections across the zero set (the objective
# drops a few percent while the iterate ping-pongs), so acceptance requires
# phi(cand) <= phi - ARMIJO_C * step * ||g||^2, which still guarantees the
# strictly decreasing trace.
ARMIJO_C = 0.1


class Status(str, Enum):
    CONVERGED = "converged"
    MAX_ITERS = "max_iters"
    STALLED = "stalled"
    ESCAPED = "escaped"
    UNPROCESSABLE = "unprocessable"


class GradientMode(str, Enum):
    APPROX_RESIDUAL = "approx_residual"
    NUMERIC = "numeric"


@dataclass(frozen=True)
class SolverOptions:
    """Knobs for the descent projection.

    ``tolerance`` applies to the squared field norm; None resolves to
    1e-12 * r^2 at solve time (the field's natural squared scale).
    ``fd_step`` (None -> 1e-4 * r) is the central-difference step used by
    NUMERIC gradients and ridge fields. ``max_displacement`` is in units of
    r and realizes the tube-membership guard.
    """

    tolerance: float | None = None
    max_iters: int = 500
    initial_step: float = 1.0
    backtrack_factor: float = 0.5
    min_step: float = 1e-10
    max_displacement: float = 2.0
    gradient_mode: GradientMode = GradientMode.APPROX_RESIDUAL
    fd_step: float | None = None

    def __post_init__(self):
        if self.tolerance is not None and not self.tolerance > 0:
            raise InvalidInput("tolerance must be positive")
        if self.max_iters < 1:
            raise InvalidInput("max_iters must be >= 1")
        if not 0 < self.backtrack_factor < 1:
            raise InvalidInput("backtrack_factor must be in (0, 1)")
        if not self.min_step > 0:
            raise InvalidInput("min_step must be positive")
        if not self.initial_step > 0:
            raise InvalidInput("initial_step must be positive")
        if not self.max_displacement > 0:
            raise InvalidInput("max_displacement must be positive")
        if self.fd_step is not None and not self.fd_step > 0:
            raise InvalidInput("fd_step must be positive")
        object.__setattr__(self, "gradient_mode", GradientMode(self.gradient_mode))

    def resolved_tolerance(self, r: float) -> float:
        return self.tolerance if self.tolerance is not None else 1e-12 * r * r

    def resolved_fd_step(self, r: float) -> float:
        return self.fd_step if self.fd_step is not None else 1e-4 * r


@dataclass(frozen=True)
class StepRecord:
    """One line-search attempt: objective at the candidate, step size, verdict."""

    objective: float
    step: float
    accepted: bool


@dataclass
class ProjectionTrace:
    """Per-point record of the descent: every attempt plus the outcome.

    Accepted objectives are strictly decreasing by construction (a candidate
    is accepted only on strict decrease).
    """

    status: Status
    initial_objective: float = math.nan
    final_objective: float = math.nan
    iterates: list[StepRecord] = dc_field(default_factory=list)

    @property
    def accepted_objectives(self) -> list[float]:
        return [rec.objective for rec in self.iterates if rec.accepted]

    @property
    def n_accepted(self) -> int:
        return sum(1 for rec in self.iterates if rec.accepted)

    def is_monotone(self) -> bool:
        seq = [self.initial_objective] + self.accepted_objectives
        seq = [v for v in seq if not math.isnan(v)]
        return all(b < a for a, b in zip(seq, seq[1:]))


def _descend(objective, direction, p0, *, tolerance, stop_on_gradient,
             opts: SolverOptions, guard_radius: float):
    """Shared backtracking descent loop.

    ``objective(x)`` returns the scalar to decrease (may raise
    EmptyNeighborhood/AllWeightsZero). ``direction(x)`` returns the step
    direction g (the update is x - step * g) or raises. When
    ``stop_on_gradient`` is true, convergence means ||g|| <= tolerance,
    otherwise objective <= tolerance.
    """
    x = np.array(p0, dtype=float)
    trace = ProjectionTrace(status=Status.MAX_ITERS)
    try:
        phi = float(objective(x))
    except (EmptyNeighborhood, AllWeightsZero, StencilEscape):
        trace.status = Status.UNPROCESSABLE
        return np.array(p0, dtype=float), trace
    trace.initial_objective = phi

    def finish(status):
        trace.status = status
        trace.final_objective = phi
        return x, trace

    if not stop_on_gradient and phi <= tolerance:
        return finish(Status.CONVERGED)
    try:
        g = direction(x)
    except (EmptyNeighborhood, StencilEscape) as exc:
        if isinstance(exc, StencilEscape):
            trace.status = Status.UNPROCESSABLE
            return np.array(p0, dtype=float), trace
        return finish(Status.ESCAPED)
    if stop_on_gradient and float(np.linalg.norm(g)) <= tolerance:
        return finish(Status.CONVERGED)

    for _ in range(opts.max_iters):
        slope = float(g @ g)
        step = opts.initial_step
        moved = False
        escaped = False
        while step >= opts.min_step:
            cand = x - step * g
            try:
                phi_cand = float(objective(cand))
            except (EmptyNeighborhood, AllWeightsZero):
                trace.iterates.append(StepRecord(math.inf, step, False))
                step *= opts.backtrack_factor
                continue
            if not (phi_cand < phi and phi_cand <= phi - ARMIJO_C * step * slope):
                trace.iterates.append(StepRecord(phi_cand, step, False))
                step *= opts.backtrack_factor
                continue
            if float(np.linalg.norm(cand - p0)) > guard_radius:
                trace.iterates.append(StepRecord(phi_cand, step, False))
                escaped = True
                break
            trace.iterates.append(StepRecord(phi_cand, step, True))
            x = cand
            phi = phi_cand
            moved = True
            break
        if escaped:
            return finish(Status.ESCAPED)
        if not moved:
            return finish(Status.STALLED)
        if not stop_on_gradient and phi <= tolerance:
            return finish(Status.CONVERGED)
        try:
            g = direction(x)
        except (EmptyNeighborhood, StencilEscape) as exc:
            if isinstance(exc, StencilEscape):
                trace.status = Status.UNPROCESSABLE
                return np.array(p0, dtype=float), trace
            return finish(Status.ESCAPED)
        if stop_on_gradient and float(np.linalg.norm(g)) <= tolerance:
            return finish(Status.CONVERGED)
    return finish(Status.MAX_ITERS)


def _numeric_gradient(objective, x: np.ndarray, h: float) -> np.ndarray:
    grad = np.empty_like(x)
    for j in range(x.shape[0]):
        step = np.zeros_like(x)
        step[j] = h
        grad[j] = (objective(x + step) - objective(x - step)) / (2.0 * h)
    return grad


def project_point(p, field: FittedField, opts: SolverOptions | None = None):
    """Project p onto the zero set of a vector bias field.

    Descends ||f(x)||^2 from p. Under APPROX_RESIDUAL the direction is
    2 f(x) (one field evaluation per step: the field's Jacobian is close to
    the averaged projector and f already lies in its range); under NUMERIC
    it is the central-difference gradient of the squared norm. Returns
    ``(point, trace)``; every failure mode is a trace status.
    """
    if field.kind is FieldKind.KM17:
        raise InvalidInput("km17 fields are projected with scgd_project")
    opts = opts if opts is not None else SolverOptions()
    eps = opts.resolved_tolerance(field.r)
    guard = opts.max_displacement * field.r
    p0 = np.asarray(p, dtype=float)

    last_bias = {}

    def objective(x):
        v = field.bias(x)
        last_bias[0] = v
        return float(v @ v)

    if opts.gradient_mode is GradientMode.APPROX_RESIDUAL:
        def direction(x):
            # objective(x) was just evaluated at x; reuse its field value
            return 2.0 * last_bias[0]
    else:
        h = opts.resolved_fd_step(field.r)

        def direction(x):
            return _numeric_gradient(objective, x, h)

    return _descend(objective, direction, p0, tolerance=eps,
                    stop_on_gradient=False, opts=opts, guard_radius=guard)


def scgd_project(p, field: FittedField, opts: SolverOptions | None = None):
    """Subspace-constrained descent of the km17 scalar field from p.

    Steps along the gradient projected onto the top D-d Hessian eigenspace,
    with the same backtracking and status vocabulary as project_point;
    converged when the projected gradient norm falls below sqrt(tolerance).
    """
    if field.kind is not FieldKind.KM17:
        raise InvalidInput("scgd_project requires a km17 field")
    opts = opts if opts is not None else SolverOptions()
    eps = opts.resolved_tolerance(field.r)
    h = opts.resolved_fd_step(field.r)
    guard = opts.max_displacement * field.r
    return scgd_minimize(field.asdf, p, field.d, grad_tolerance=math.sqrt(eps),
                         opts=opts, guard_radius=guard, fd_step=h)


def scgd_minimize(fn, p, d: int, *, grad_tolerance: float, opts: SolverOptions,
                  guard_radius: float, fd_step: float):
    """Generic subspace-constrained descent on a scalar field ``fn``.

    Exposed separately so closed-form test fields can drive the machinery.
    """
    last_value = {}

    def objective(x):
        val = float(fn(x))
        last_value[0] = val
        return val

    def direction(x):
        # objective(x) was just evaluated at x; reuse it as the stencil center
        return ridge_direction(fn, x, d, fd_step, value_at_x=last_value.get(0))

    return _descend(objective, direction, np.asarray(p, dtype=float),
                    tolerance=grad_tolerance, stop_on_gradient=True,
                    opts=opts, guard_radius=guard_radius)


def _project_one(point, field, opts):
    if field.kind is FieldKind.KM17:
        return scgd_project(point, field, opts)
    return project_point(point, field, opts)


def _project_chunk(args):
    points, field, opts = args
    return [_project_one(points[i], field, opts) for i in range(points.shape[0])]


def project_batch(P: PointCloud, field: FittedField,
                  opts: SolverOptions | None = None, workers: int = 1):
    """Element-wise projection of a cloud; output order matches input.

    Unprocessable points are carried through unchanged and flagged in their
    trace. With ``workers > 1`` the points are distributed across processes;
    results are reassembled in input order, so the output is independent of
    the worker count.
    """
    opts = opts if opts is not None else SolverOptions()
    if P.dim != field.cloud.dim:
        raise InvalidInput(
            f"query cloud dimension {P.dim} != field dimension {field.cloud.dim}"
        )
    if P.n == 0:
        return PointCloud(np.empty((0, P.dim))), []
    if workers <= 1:
        results = [_project_one(P.points[i], field, opts) for i in range(P.n)]
    else:
        chunk_ids = np.array_split(np.arange(P.n), min(4 * workers, P.n))
        jobs = [(P.points[ids], field, opts) for ids in chunk_ids if ids.size]
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            results = [item for chunk in pool.map(_project_chunk, jobs)
                       for item in chunk]
    out = np.vstack([pt for pt, _ in results])
    traces = [tr for _, tr in results]
    return PointCloud(out), traces
