"""Basin-of-attraction sweeps: per-point runs over a grid, plus exports.

Each grid point is an independent solver run, so sweeps parallelize over
rows on a process pool (capped by the BNQN_THREADS environment variable).
Output goes to binary PPM images (escape-time shaded) and CSV tables.
"""

from __future__ import annotations

import math
import multiprocessing
import os
from dataclasses import dataclass

import numpy as np

from .complexpoly import Polynomial, RelaxationDisk
from .errors import BnqnError
from .objective import UNDECIDED, LimitClass, PolyModulusObjective
from .solvers import Method, SolverConfig, run

__all__ = [
    "BasinMap",
    "GridSpec",
    "degree2_reference",
    "export_csv",
    "export_ppm",
    "render_basin",
    "worker_count",
]

# Fixed palette: root basins by root index (cycled), criticals black,
# divergent white, undecided gray.
ROOT_COLORS = (
    (230, 60, 60),
    (60, 120, 230),
    (70, 190, 90),
    (235, 185, 60),
    (165, 85, 210),
    (60, 200, 200),
    (240, 130, 50),
    (130, 130, 240),
)
CRITICAL_COLOR = (0, 0, 0)
DIVERGED_COLOR = (255, 255, 255)
UNDECIDED_COLOR = (128, 128, 128)


def worker_count() -> int:
    """Worker cap: BNQN_THREADS when set, else the available parallelism."""
    env = os.environ.get("BNQN_THREADS")
    if env is not None:
        try:
            n = int(env)
        except ValueError as exc:
            raise ValueError(f"BNQN_THREADS must be an integer, got {env!r}") from exc
        return max(1, n)
    return os.cpu_count() or 1


@dataclass(frozen=True)
class GridSpec:
    """Corner-inclusive rectangular sampling grid.

    Sample (i, j) sits at the convex combination
    (x_min*(nx-1-i) + x_max*i)/(nx-1), which keeps the endpoints exact and
    puts a sample exactly on zero whenever the window is symmetric and the
    index count is odd.
    """

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("window must satisfy x_min < x_max and y_min < y_max")
        if self.nx < 1 or self.ny < 1:
            raise ValueError("resolution must be positive")

    def x_coord(self, i: int) -> float:
        if self.nx == 1:
            return self.x_min
        k = self.nx - 1
        return (self.x_min * (k - i) + self.x_max * i) / k

    def y_coord(self, j: int) -> float:
        if self.ny == 1:
            return self.y_min
        k = self.ny - 1
        return (self.y_min * (k - j) + self.y_max * j) / k

    def point(self, i: int, j: int) -> tuple[float, float]:
        return self.x_coord(i), self.y_coord(j)


@dataclass
class BasinMap:
    """Per-grid-point terminal classes and iteration counts, indexed [i][j]."""

    grid: GridSpec
    classes: list[list[LimitClass]]
    iterations: np.ndarray

    def class_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for column in self.classes:
            for cls in column:
                counts[str(cls)] = counts.get(str(cls), 0) + 1
        return counts


# Worker-process state for the sweep pool (populated by the initializer).
_SWEEP: dict = {}


def _sweep_init(coeffs, method_value, cfg, grid, class_tol, rho):
    _SWEEP["obj"] = PolyModulusObjective(Polynomial(coeffs))
    _SWEEP["method"] = Method(method_value)
    _SWEEP["cfg"] = cfg
    _SWEEP["grid"] = grid
    _SWEEP["class_tol"] = class_tol
    _SWEEP["rho"] = rho


def _sweep_point(obj, method, cfg, grid, i, j, class_tol, rho):
    rng = None
    relaxation = None
    if method is Method.RANDOM_RELAXED_NEWTON_1D:
        base_seed = cfg.seed if cfg.seed is not None else 0
        rng = np.random.default_rng(base_seed ^ (i * grid.ny + j))
        relaxation = RelaxationDisk(rho)
    try:
        trace = run(
            obj,
            grid.point(i, j),
            method,
            cfg,
            rng=rng,
            relaxation=relaxation,
            class_tol=class_tol,
        )
    except BnqnError:
        return UNDECIDED, cfg.max_iter
    return trace.terminal, trace.iterations


def _sweep_row(i: int):
    grid = _SWEEP["grid"]
    out = []
    for j in range(grid.ny):
        out.append(
            _sweep_point(
                _SWEEP["obj"],
                _SWEEP["method"],
                _SWEEP["cfg"],
                grid,
                i,
                j,
                _SWEEP["class_tol"],
                _SWEEP["rho"],
            )
        )
    return out


def render_basin(
    g: Polynomial,
    grid: GridSpec,
    method: Method,
    cfg: SolverConfig | None = None,
    *,
    class_tol: float = 1e-6,
    rho: float = 0.7,
    workers: int | None = None,
) -> BasinMap:
    """Run the method from every grid point and classify the outcomes.

    Deterministic given cfg.seed: the random relaxed variant re-seeds each
    point from seed XOR its row-major index.  Per-point failures land as
    Undecided; the sweep never aborts.
    """
    if cfg is None:
        cfg = SolverConfig()
    method = Method(method)
    if workers is None:
        workers = worker_count()
    workers = max(1, min(workers, grid.nx))

    init_args = (tuple(g.coeffs), method.value, cfg, grid, class_tol, rho)
    if workers == 1 or grid.nx * grid.ny < 1024:
        _sweep_init(*init_args)
        rows = [_sweep_row(i) for i in range(grid.nx)]
    else:
        with multiprocessing.Pool(workers, initializer=_sweep_init, initargs=init_args) as pool:
            rows = pool.map(_sweep_row, range(grid.nx))

    classes = [[cell[0] for cell in row] for row in rows]
    iterations = np.array([[cell[1] for cell in row] for row in rows], dtype=int)
    return BasinMap(grid, classes, iterations)


def degree2_reference(z1, z2, grid: GridSpec) -> BasinMap:
    """Analytic degree-2 picture: half-planes cut by the perpendicular bisector.

    Root(0) marks the z1 side, Root(1) the z2 side; points within 1e-12 of
    the bisector classify as CriticalNonRoot at the midpoint.
    """
    z1 = complex(z1)
    z2 = complex(z2)
    if z1 == z2:
        raise ValueError("need two distinct roots")
    midpoint = 0.5 * (z1 + z2)
    axis = z1 - z2
    axis_norm = abs(axis)
    classes: list[list[LimitClass]] = []
    for i in range(grid.nx):
        column = []
        for j in range(grid.ny):
            x, y = grid.point(i, j)
            p = complex(x, y) - midpoint
            side = p.real * axis.real + p.imag * axis.imag
            if abs(side) / axis_norm <= 1e-12:
                column.append(LimitClass.critical(midpoint))
            elif side > 0:
                column.append(LimitClass.root(0))
            else:
                column.append(LimitClass.root(1))
        classes.append(column)
    iterations = np.zeros((grid.nx, grid.ny), dtype=int)
    return BasinMap(grid, classes, iterations)


def _pixel(cls: LimitClass, iters: int) -> tuple[int, int, int]:
    if cls.kind == "Root":
        base = ROOT_COLORS[cls.root_index % len(ROOT_COLORS)]
    elif cls.kind == "CriticalNonRoot":
        base = CRITICAL_COLOR
    elif cls.kind == "Diverged":
        base = DIVERGED_COLOR
    else:
        base = UNDECIDED_COLOR
    # escape-time shading, presentation only; iters=0 keeps the base color
    factor = 1.0 / (1.0 + 0.25 * math.log1p(iters))
    return tuple(min(255, max(0, int(round(channel * factor)))) for channel in base)


def export_ppm(basin_map: BasinMap, path) -> None:
    """Binary PPM (P6), one pixel per grid point, top row at y_max."""
    grid = basin_map.grid
    payload = bytearray()
    for j in range(grid.ny - 1, -1, -1):
        for i in range(grid.nx):
            payload.extend(_pixel(basin_map.classes[i][j], int(basin_map.iterations[i, j])))
    header = f"P6\n{grid.nx} {grid.ny}\n255\n".encode("ascii")
    try:
        with open(path, "wb") as handle:
            handle.write(header)
            handle.write(bytes(payload))
    except OSError as exc:
        raise OSError(f"cannot write PPM to {path}: {exc}") from exc


def export_csv(basin_map: BasinMap, path) -> None:
    """Row-major CSV: ``i,j,x,y,class,root_index,iterations``."""
    grid = basin_map.grid
    lines = ["i,j,x,y,class,root_index,iterations"]
    for i in range(grid.nx):
        for j in range(grid.ny):
            x, y = grid.point(i, j)
            cls = basin_map.classes[i][j]
            root_index = "" if cls.root_index is None else str(cls.root_index)
            lines.append(
                f"{i},{j},{x:.17g},{y:.17g},{cls.kind},{root_index},{int(basin_map.iterations[i, j])}"
            )
    try:
        with open(path, "w", encoding="ascii") as handle:
            handle.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc
