"""Iterative minimization methods and the shared run loop.

The centerpiece is BNQN (backtracking New Q-Newton's method) in its
theta-capped "new variant" form: shift the Hessian by delta_j * |grad|^tau
until the smallest absolute eigenvalue clears kappa * |grad|^tau, solve with
the eigenvalue-reflected matrix, cap the direction by theta, and backtrack
with the Armijo third-rule.  theta=0 gives the compact-sublevel flavor,
theta=1 the general one.

Also here: the line-search-free precursor NQN, plain Newton optimization,
backtracking gradient descent, and the one-complex-variable Newton /
random relaxed Newton iterations, all driven by the same trace-producing
``run`` loop.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .complexpoly import RelaxationDisk, newton_map_1d, relaxed_newton_map, sample_relaxed_alpha
from .errors import BnqnError, LineSearchUnderflow, NoAdmissibleDelta, SingularMatrix
from .linalg import SymmetricMatrix, minsp, reflected_direction
from .objective import UNDECIDED, LimitClass, ObjectiveFunction, PolyModulusObjective

__all__ = [
    "IterationTrace",
    "Method",
    "SolverConfig",
    "StepRecord",
    "armijo_search",
    "bnqn_step",
    "btgd_step",
    "export_trace_csv",
    "newton_opt_step",
    "nqn_step",
    "random_deltas",
    "run",
    "select_delta",
]

_UNDERFLOW_LIMIT = 1e-300


class Method(enum.Enum):
    NEWTON_OPT = "newton-opt"
    NQN = "nqn"
    BNQN_NEW_VARIANT = "bnqn"
    BACKTRACKING_GD = "btgd"
    NEWTON_1D = "newton1d"
    RANDOM_RELAXED_NEWTON_1D = "rrn1d"


@dataclass(frozen=True)
class SolverConfig:
    """Parameters shared by the iteration methods.

    ``deltas`` are the candidate Hessian shifts (pairwise distinct; supply
    m+1 of them for an m-dimensional objective so admissibility is
    guaranteed).  ``kappa`` is derived: half the minimal gap between shifts.
    """

    deltas: tuple[float, ...] = (0.0, 1.0, -1.0)
    tau: float = 1.0
    theta: float = 0.0
    gamma0: float = 1.0
    grad_tol: float = 1e-10
    max_iter: int = 10000
    armijo_factor: float = 1.0 / 3.0
    shrink_factor: float = 1.0 / 3.0
    seed: int | None = None
    kappa: float = field(init=False, compare=False)

    def __post_init__(self):
        deltas = tuple(float(d) for d in self.deltas)
        object.__setattr__(self, "deltas", deltas)
        if len(deltas) < 2:
            raise ValueError("need at least two candidate shifts")
        gap = min(abs(a - b) for a, b in itertools.combinations(deltas, 2))
        if gap == 0.0:
            raise ValueError("shift candidates must be pairwise distinct")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.theta < 0:
            raise ValueError("theta must be nonnegative")
        if not 0.0 < self.gamma0 <= 1.0:
            raise ValueError("gamma0 must lie in (0, 1]")
        if self.grad_tol < 0:
            raise ValueError("grad_tol must be nonnegative")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if not 0.0 < self.armijo_factor < 1.0 or not 0.0 < self.shrink_factor < 1.0:
            raise ValueError("line-search factors must lie in (0, 1)")
        object.__setattr__(self, "kappa", 0.5 * gap)


def random_deltas(count: int, seed) -> tuple[float, ...]:
    """Seeded shift candidates, uniform in [-1, 1] with pairwise gap >= 0.1."""
    if count < 2:
        raise ValueError("need at least two shifts")
    if count > 20:
        raise ValueError("cannot fit that many 0.1-separated shifts in [-1, 1]")
    rng = np.random.default_rng(seed)
    out: list[float] = []
    while len(out) < count:
        cand = float(rng.uniform(-1.0, 1.0))
        if all(abs(cand - d) >= 0.1 for d in out):
            out.append(cand)
    return tuple(out)


@dataclass(frozen=True)
class StepRecord:
    gamma: float
    delta_index: int
    grad_norm: float


@dataclass
class IterationTrace:
    """Full record of one run.

    ``points`` has one more entry than the per-step lists ``step_sizes`` and
    ``delta_indices``; ``grad_norms`` aligns with ``points`` (the gradient
    norm at each visited point, so every entry but possibly the last is
    positive).  ``delta_index`` is -1 for methods that do not shift the
    Hessian.  ``failure`` carries the diagnostic when a step raised instead
    of finishing.
    """

    points: list[np.ndarray]
    step_sizes: list[float]
    delta_indices: list[int]
    grad_norms: list[float]
    terminal: LimitClass
    converged: bool
    failure: str | None = None

    @property
    def iterations(self) -> int:
        return len(self.step_sizes)

    @property
    def final_point(self) -> np.ndarray:
        return self.points[-1]


def _norm(v) -> float:
    if len(v) == 2:
        return math.hypot(float(v[0]), float(v[1]))
    return float(np.linalg.norm(v))


def _dot(u, v) -> float:
    if len(u) == 2:
        return float(u[0]) * float(v[0]) + float(u[1]) * float(v[1])
    return float(np.dot(u, v))


def select_delta(hess: SymmetricMatrix, grad_norm: float, cfg: SolverConfig):
    """Smallest shift index whose perturbed Hessian clears the minsp bar.

    Returns ``(j, hess + deltas[j] * grad_norm**tau * Id)``.  With m+1
    pairwise distinct candidates for an m-dimensional Hessian a winner always
    exists (each eigenvalue can disqualify at most one shift).
    """
    scale = grad_norm**cfg.tau
    threshold = cfg.kappa * scale
    for j, d in enumerate(cfg.deltas):
        shifted = hess.shifted(d * scale)
        if minsp(shifted) >= threshold:
            return j, shifted
    raise NoAdmissibleDelta(
        f"no shift in {cfg.deltas} reaches minsp >= {threshold:.3e}"
    )


def _armijo(f, z, w_hat, gamma0, f_z, slope, armijo_factor, shrink_factor):
    # Accept via f(trial) <= f(z) - gamma*slope/3 rather than the difference
    # form f(trial) - f(z) <= -gamma*slope/3: the two agree in exact
    # arithmetic, but near a critical point with f > 0 the true decrease can
    # sit below one ulp of f(z), where the difference form can never pass.
    gamma = gamma0
    while True:
        trial = z - gamma * w_hat
        if f.value(trial) <= f_z - gamma * slope * armijo_factor:
            return gamma
        gamma = gamma * shrink_factor
        if gamma < _UNDERFLOW_LIMIT:
            raise LineSearchUnderflow(
                "step size underflow; direction is not a descent direction or values are NaN"
            )


def armijo_search(f: ObjectiveFunction, z, w_hat, gamma0: float) -> float:
    """Largest gamma in {gamma0, gamma0/3, ...} passing the third-rule test.

    Requires <w_hat, grad f(z)> > 0, which guarantees termination.
    """
    z = np.asarray(z, dtype=float)
    w_hat = np.asarray(w_hat, dtype=float)
    slope = _dot(w_hat, f.gradient(z))
    return _armijo(f, z, w_hat, gamma0, f.value(z), slope, 1.0 / 3.0, 1.0 / 3.0)


def _bnqn_core(f, z, grad, grad_norm, hess, cfg):
    j, shifted = select_delta(hess, grad_norm, cfg)
    w = reflected_direction(shifted, grad)
    w_hat = w / max(1.0, cfg.theta * _norm(w))
    slope = _dot(w_hat, grad)
    gamma = _armijo(
        f, z, w_hat, cfg.gamma0, f.value(z), slope, cfg.armijo_factor, cfg.shrink_factor
    )
    return z - gamma * w_hat, gamma, j


def _btgd_core(f, z, grad, grad_norm, cfg):
    w_hat = grad / max(1.0, cfg.theta * grad_norm)
    slope = _dot(w_hat, grad)
    gamma = _armijo(
        f, z, w_hat, cfg.gamma0, f.value(z), slope, cfg.armijo_factor, cfg.shrink_factor
    )
    return z - gamma * w_hat, gamma


def _nqn_core(z, grad, grad_norm, hess, cfg):
    scale = grad_norm**cfg.tau
    for j, d in enumerate(cfg.deltas):
        shifted = hess.shifted(d * scale)
        if _determinant(shifted) != 0.0:
            break
    else:
        raise NoAdmissibleDelta(f"every shift in {cfg.deltas} left the matrix singular")
    w = reflected_direction(shifted, grad)
    return z - w, j


def _determinant(matrix: SymmetricMatrix) -> float:
    if matrix.dim == 2:
        a, b, c = matrix.upper
        return a * c - b * b
    return float(np.linalg.det(matrix.full()))


def _newton_core(z, grad, hess):
    try:
        step = np.linalg.solve(hess.full(), grad)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix(f"Hessian is singular at {z}") from exc
    return z - step


def bnqn_step(f: ObjectiveFunction, z, cfg: SolverConfig):
    """One BNQN step; returns (next point, StepRecord)."""
    z = np.asarray(z, dtype=float)
    grad, hess = f.gradient_and_hessian(z)
    gn = _norm(grad)
    z_next, gamma, j = _bnqn_core(f, z, grad, gn, hess, cfg)
    return z_next, StepRecord(gamma, j, gn)


def nqn_step(f: ObjectiveFunction, z, cfg: SolverConfig) -> np.ndarray:
    """One NQN step: determinant-tested shift, full reflected step, no search."""
    z = np.asarray(z, dtype=float)
    grad, hess = f.gradient_and_hessian(z)
    z_next, _ = _nqn_core(z, grad, _norm(grad), hess, cfg)
    return z_next


def newton_opt_step(f: ObjectiveFunction, z) -> np.ndarray:
    """Classical Newton optimization step z - H^-1 grad."""
    z = np.asarray(z, dtype=float)
    grad, hess = f.gradient_and_hessian(z)
    return _newton_core(z, grad, hess)


def btgd_step(f: ObjectiveFunction, z, cfg: SolverConfig) -> np.ndarray:
    """Backtracking gradient descent with the same theta cap and Armijo rule."""
    z = np.asarray(z, dtype=float)
    grad = f.gradient(z)
    z_next, _ = _btgd_core(f, z, grad, _norm(grad), cfg)
    return z_next


_NEEDS_HESSIAN = (Method.BNQN_NEW_VARIANT, Method.NQN, Method.NEWTON_OPT)
_ONE_DIM = (Method.NEWTON_1D, Method.RANDOM_RELAXED_NEWTON_1D)


def run(
    f: ObjectiveFunction,
    z0,
    method: Method,
    cfg: SolverConfig | None = None,
    *,
    rng=None,
    relaxation: RelaxationDisk | None = None,
    class_tol: float = 1e-6,
) -> IterationTrace:
    """Iterate ``method`` from ``z0`` until convergence, divergence, or the cap.

    Convergence means |grad F| <= cfg.grad_tol.  Points beyond the
    objective's divergence radius classify as Diverged; hitting max_iter
    leaves the trace Undecided.  Step failures are captured in
    ``IterationTrace.failure`` rather than raised.

    The one-complex-variable methods need a polynomial-modulus objective and
    iterate its polynomial directly; the random relaxed variant draws a fresh
    relaxation factor per step from ``rng`` (seeded from cfg.seed when not
    given).
    """
    if cfg is None:
        cfg = SolverConfig()
    method = Method(method)
    z = np.array([float(v) for v in z0], dtype=float)
    if not np.all(np.isfinite(z)):
        raise ValueError(f"initial point must be finite, got {z0!r}")

    one_dim = method in _ONE_DIM
    poly = None
    disk = None
    if one_dim:
        if not isinstance(f, PolyModulusObjective):
            raise TypeError("the one-variable methods need a PolyModulusObjective")
        if len(z) != 2:
            raise ValueError("the one-variable methods iterate in the complex plane")
        poly = f.g
        if method is Method.RANDOM_RELAXED_NEWTON_1D:
            disk = relaxation if relaxation is not None else RelaxationDisk(0.7)
            if rng is None:
                rng = np.random.default_rng(cfg.seed)
    needs_hessian = method in _NEEDS_HESSIAN

    points = [z]
    step_sizes: list[float] = []
    delta_indices: list[int] = []
    grad_norms: list[float] = []
    converged = False
    hit_cap = False
    failure = None

    while True:
        if needs_hessian:
            grad, hess = f.gradient_and_hessian(z)
        else:
            grad = f.gradient(z)
            hess = None
        gn = _norm(grad)
        grad_norms.append(gn)
        if gn <= cfg.grad_tol:
            converged = True
            break
        if _norm(z) > f.divergence_radius:
            break
        if len(step_sizes) >= cfg.max_iter:
            hit_cap = True
            break
        try:
            if method is Method.BNQN_NEW_VARIANT:
                z_next, gamma, dj = _bnqn_core(f, z, grad, gn, hess, cfg)
            elif method is Method.BACKTRACKING_GD:
                z_next, gamma = _btgd_core(f, z, grad, gn, cfg)
                dj = -1
            elif method is Method.NQN:
                z_next, dj = _nqn_core(z, grad, gn, hess, cfg)
                gamma = 1.0
            elif method is Method.NEWTON_OPT:
                z_next = _newton_core(z, grad, hess)
                gamma, dj = 1.0, -1
            elif method is Method.NEWTON_1D:
                w = newton_map_1d(poly, complex(z[0], z[1]))
                z_next = np.array([w.real, w.imag])
                gamma, dj = 1.0, -1
            else:  # RANDOM_RELAXED_NEWTON_1D
                alpha = sample_relaxed_alpha(disk, rng)
                w = relaxed_newton_map(poly, complex(z[0], z[1]), alpha)
                z_next = np.array([w.real, w.imag])
                gamma, dj = 1.0, -1
        except BnqnError as exc:
            failure = f"{type(exc).__name__}: {exc}"
            break
        points.append(z_next)
        step_sizes.append(gamma)
        delta_indices.append(dj)
        z = z_next

    if failure is not None:
        terminal = UNDECIDED
        converged = False
    elif hit_cap:
        terminal = UNDECIDED
    elif one_dim:
        terminal = f.classify_roots_only(z, class_tol)
    else:
        terminal = f.classify(z, class_tol)
    return IterationTrace(
        points, step_sizes, delta_indices, grad_norms, terminal, converged, failure
    )


def export_trace_csv(trace: IterationTrace, path) -> None:
    """Write a 2-D trace as CSV rows ``k,x,y,gamma,delta_index,grad_norm``.

    One row per visited point; the step columns are empty on the terminal
    row, and the terminal classification follows as a ``# terminal=...``
    comment line.
    """
    if len(trace.points[0]) != 2:
        raise ValueError("trace export is defined for 2-dimensional runs")
    lines = ["k,x,y,gamma,delta_index,grad_norm"]
    n = len(trace.step_sizes)
    for k, point in enumerate(trace.points):
        x, y = float(point[0]), float(point[1])
        gn = f"{trace.grad_norms[k]:.17g}" if k < len(trace.grad_norms) else ""
        if k < n:
            lines.append(
                f"{k},{x:.17g},{y:.17g},{trace.step_sizes[k]:.17g},{trace.delta_indices[k]},{gn}"
            )
        else:
            lines.append(f"{k},{x:.17g},{y:.17g},,,{gn}")
    lines.append(f"# terminal={trace.terminal}")
    with open(path, "w", encoding="ascii") as handle:
        handle.write("\n".join(lines) + "\n")
