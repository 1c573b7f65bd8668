"""Objective functions F: R^m -> R with analytic gradient and Hessian.

The workhorse is the polynomial-modulus objective F(x, y) = |g(x+iy)|^2 / 2,
whose minima are exactly the roots of g.  Derivatives come from complex
differentiation: with w = g'(z) conj(g(z)) and u = g''(z) conj(g(z)),

    grad F = (Re w, -Im w)
    hess F = [[Re u + |g'|^2, -Im u], [-Im u, |g'|^2 - Re u]]

which costs O(deg) per evaluation and avoids symbolic expansion.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass, field

import numpy as np

from .complexpoly import Polynomial, all_roots
from .linalg import SymmetricMatrix

__all__ = [
    "BilinearTestObjective",
    "DIVERGED",
    "LimitClass",
    "ObjectiveFunction",
    "PolyModulusObjective",
    "RationalModulusObjective",
    "UNDECIDED",
    "classify_limit",
]

_ROOT_TOL = 1e-12  # residual tolerance handed to all_roots for classification


@dataclass(frozen=True)
class LimitClass:
    """Terminal classification of an iteration.

    ``point`` is informational only (the matched critical point) and does not
    take part in equality; two CriticalNonRoot values always compare equal.
    """

    kind: str  # "Root" | "CriticalNonRoot" | "Diverged" | "Undecided"
    root_index: int | None = None
    point: complex | None = field(default=None, compare=False)

    @classmethod
    def root(cls, index: int) -> "LimitClass":
        return cls("Root", root_index=index)

    @classmethod
    def critical(cls, point: complex) -> "LimitClass":
        return cls("CriticalNonRoot", point=complex(point))

    @property
    def is_root(self) -> bool:
        return self.kind == "Root"

    def __str__(self):
        if self.kind == "Root":
            return f"Root({self.root_index})"
        return self.kind


DIVERGED = LimitClass("Diverged")
UNDECIDED = LimitClass("Undecided")


class ObjectiveFunction(abc.ABC):
    """Value/gradient/Hessian triple on R^m.

    Implementations must keep the analytic derivatives consistent with
    central finite differences of ``value`` (the testable contract).
    """

    dimension: int = 2
    divergence_radius: float = 1e12

    @abc.abstractmethod
    def value(self, point) -> float: ...

    @abc.abstractmethod
    def gradient(self, point) -> np.ndarray: ...

    @abc.abstractmethod
    def hessian(self, point) -> SymmetricMatrix: ...

    def gradient_and_hessian(self, point):
        """Both derivatives at once; overridden where a fused path is cheaper."""
        return self.gradient(point), self.hessian(point)

    def classify(self, point, tol: float) -> LimitClass:
        """Terminal classification; the generic fallback knows no roots."""
        x = np.asarray(point, dtype=float)
        if float(np.linalg.norm(x)) > self.divergence_radius:
            return DIVERGED
        return UNDECIDED


class PolyModulusObjective(ObjectiveFunction):
    """F(x, y) = |g(x+iy)|^2 / 2 for a complex polynomial g of degree >= 1.

    Nonnegative, zero exactly on the roots of g, and with compact sublevel
    sets, so descent iterations cannot escape to infinity.
    """

    dimension = 2

    def __init__(self, g: Polynomial):
        if g.degree < 1:
            raise ValueError("polynomial-modulus objective needs degree >= 1")
        self.g = g
        self.dg = g.derivative()
        self.ddg = self.dg.derivative()
        self.divergence_radius = 1e8 * (1.0 + g.cauchy_root_bound())
        self._roots = None
        self._critical_points = None

    def value(self, point) -> float:
        gz = self.g(complex(point[0], point[1]))
        return 0.5 * (gz.real * gz.real + gz.imag * gz.imag)

    def gradient(self, point) -> np.ndarray:
        z = complex(point[0], point[1])
        w = self.dg(z) * self.g(z).conjugate()
        return np.array([w.real, -w.imag])

    def hessian(self, point) -> SymmetricMatrix:
        z = complex(point[0], point[1])
        gz = self.g(z)
        dgz = self.dg(z)
        u = self.ddg(z) * gz.conjugate()
        s = dgz.real * dgz.real + dgz.imag * dgz.imag
        return SymmetricMatrix(2, (u.real + s, -u.imag, s - u.real))

    def gradient_and_hessian(self, point):
        z = complex(point[0], point[1])
        gz = self.g(z)
        dgz = self.dg(z)
        gz_conj = gz.conjugate()
        w = dgz * gz_conj
        u = self.ddg(z) * gz_conj
        s = dgz.real * dgz.real + dgz.imag * dgz.imag
        grad = np.array([w.real, -w.imag])
        hess = SymmetricMatrix(2, (u.real + s, -u.imag, s - u.real))
        return grad, hess

    def roots(self) -> tuple[complex, ...]:
        """Roots of g (computed once, order fixed by the root finder)."""
        if self._roots is None:
            self._roots = tuple(all_roots(self.g, _ROOT_TOL))
        return self._roots

    def critical_points(self) -> tuple[complex, ...]:
        """Roots of g' (empty for degree-1 polynomials)."""
        if self._critical_points is None:
            if self.dg.degree < 1:
                self._critical_points = ()
            else:
                self._critical_points = tuple(all_roots(self.dg, _ROOT_TOL))
        return self._critical_points

    def classify(self, point, tol: float) -> LimitClass:
        return classify_limit(self, point, tol)

    def classify_roots_only(self, point, tol: float) -> LimitClass:
        """Classification against roots of g alone (for the 1-D iterations)."""
        z = complex(point[0], point[1])
        index, dist = _nearest(self.roots(), z)
        if dist <= tol:
            return LimitClass.root(index)
        if abs(z) > self.divergence_radius:
            return DIVERGED
        return UNDECIDED


def _nearest(candidates, z):
    best_index = -1
    best_dist = math.inf
    for i, c in enumerate(candidates):
        d = abs(z - c)
        if d < best_dist:
            best_index = i
            best_dist = d
    return best_index, best_dist


def classify_limit(obj: PolyModulusObjective, point, tol: float = 1e-6) -> LimitClass:
    """Classify the terminal point of a converged run.

    Root wins over CriticalNonRoot when both are within tol (a multiple root
    is still a root); Diverged needs the point outside the divergence radius;
    anything else is Undecided.
    """
    z = complex(point[0], point[1])
    index, dist = _nearest(obj.roots(), z)
    if dist <= tol:
        return LimitClass.root(index)
    crit_index, crit_dist = _nearest(obj.critical_points(), z)
    if crit_dist <= tol:
        return LimitClass.critical(obj.critical_points()[crit_index])
    if abs(z) > obj.divergence_radius:
        return DIVERGED
    return UNDECIDED


class BilinearTestObjective(ObjectiveFunction):
    """F(x, y) = x*y: one saddle at the origin, constant Hessian."""

    dimension = 2

    def value(self, point) -> float:
        return float(point[0]) * float(point[1])

    def gradient(self, point) -> np.ndarray:
        return np.array([float(point[1]), float(point[0])])

    def hessian(self, point) -> SymmetricMatrix:
        return SymmetricMatrix(2, (0.0, 1.0, 0.0))


class RationalModulusObjective(ObjectiveFunction):
    """F(x, y) = |g(x+iy)|^2 / 2 for a rational g = P/Q.

    Built for the P/P' quotient, whose zeros are those of P with all
    multiplicities reduced to one.  Evaluation at a pole of g returns +inf
    for ``value``; derivative calls there are undefined.
    """

    dimension = 2

    def __init__(self, numerator: Polynomial, denominator: Polynomial):
        if numerator.degree < 1:
            raise ValueError("numerator must have degree >= 1")
        if denominator.is_zero:
            raise ValueError("denominator must be nonzero")
        self.p = numerator
        self.q = denominator
        self.dp = numerator.derivative()
        self.ddp = self.dp.derivative()
        self.dq = denominator.derivative()
        self.ddq = self.dq.derivative()
        self.divergence_radius = 1e8 * (1.0 + numerator.cauchy_root_bound())

    @classmethod
    def newton_quotient(cls, p: Polynomial) -> "RationalModulusObjective":
        """g = P/P'; simple zeros exactly at the zeros of P."""
        return cls(p, p.derivative())

    def _g_series(self, z):
        """g, g', g'' at z via the quotient rule."""
        pz, qz = self.p(z), self.q(z)
        dpz, dqz = self.dp(z), self.dq(z)
        ddpz, ddqz = self.ddp(z), self.ddq(z)
        g = pz / qz
        dg = (dpz * qz - pz * dqz) / (qz * qz)
        ddg = (ddpz / qz) - (2.0 * dpz * dqz + pz * ddqz) / (qz * qz) + (
            2.0 * pz * dqz * dqz
        ) / (qz * qz * qz)
        return g, dg, ddg

    def value(self, point) -> float:
        z = complex(point[0], point[1])
        qz = self.q(z)
        if qz == 0:
            return math.inf
        gz = self.p(z) / qz
        return 0.5 * (gz.real * gz.real + gz.imag * gz.imag)

    def gradient(self, point) -> np.ndarray:
        z = complex(point[0], point[1])
        g, dg, _ = self._g_series(z)
        w = dg * g.conjugate()
        return np.array([w.real, -w.imag])

    def hessian(self, point) -> SymmetricMatrix:
        z = complex(point[0], point[1])
        g, dg, ddg = self._g_series(z)
        u = ddg * g.conjugate()
        s = dg.real * dg.real + dg.imag * dg.imag
        return SymmetricMatrix(2, (u.real + s, -u.imag, s - u.real))
