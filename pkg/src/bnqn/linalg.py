"""Small dense symmetric eigen-machinery.

Sized for the dimensions this package actually runs (m <= 16): closed form
for 2x2, cyclic Jacobi sweeps above that.  Eigenvectors follow the sign
convention "first nonzero component positive" so decompositions are
deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularMatrix

__all__ = ["EigenDecomposition", "SymmetricMatrix", "eigh", "minsp", "reflected_direction", "sp"]


class SymmetricMatrix:
    """Real symmetric m-by-m matrix stored as its packed upper triangle.

    Each off-diagonal entry is stored once, so symmetry is structural.  The
    packed layout is row-major over i <= j.
    """

    __slots__ = ("dim", "upper")

    def __init__(self, dim: int, upper):
        upper = tuple(float(v) for v in upper)
        if len(upper) != dim * (dim + 1) // 2:
            raise ValueError(f"need {dim * (dim + 1) // 2} packed entries, got {len(upper)}")
        self.dim = dim
        self.upper = upper

    @classmethod
    def from_full(cls, matrix) -> "SymmetricMatrix":
        """Build from a full array; off-diagonal pairs are averaged."""
        a = np.asarray(matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        m = a.shape[0]
        packed = []
        for i in range(m):
            packed.append(a[i, i])
            for j in range(i + 1, m):
                packed.append(0.5 * (a[i, j] + a[j, i]))
        return cls(m, packed)

    @classmethod
    def from_diagonal(cls, values) -> "SymmetricMatrix":
        values = [float(v) for v in values]
        m = len(values)
        packed = []
        for i in range(m):
            packed.append(values[i])
            packed.extend([0.0] * (m - i - 1))
        return cls(m, packed)

    def _index(self, i: int, j: int) -> int:
        if i > j:
            i, j = j, i
        return i * self.dim - i * (i - 1) // 2 + (j - i)

    def __getitem__(self, key):
        i, j = key
        return self.upper[self._index(i, j)]

    def full(self) -> np.ndarray:
        m = self.dim
        out = np.empty((m, m))
        k = 0
        for i in range(m):
            for j in range(i, m):
                out[i, j] = self.upper[k]
                out[j, i] = self.upper[k]
                k += 1
        return out

    def shifted(self, s: float) -> "SymmetricMatrix":
        """A + s*Id without touching off-diagonal storage."""
        if self.dim == 2:
            a, b, c = self.upper
            return SymmetricMatrix(2, (a + s, b, c + s))
        packed = list(self.upper)
        k = 0
        for i in range(self.dim):
            packed[k] = packed[k] + s
            k += self.dim - i
        return SymmetricMatrix(self.dim, packed)

    def __eq__(self, other):
        return (
            isinstance(other, SymmetricMatrix)
            and self.dim == other.dim
            and self.upper == other.upper
        )

    def __hash__(self):
        return hash((self.dim, self.upper))

    def __repr__(self):
        return f"SymmetricMatrix({self.dim}, {self.upper!r})"


@dataclass(frozen=True)
class EigenDecomposition:
    """Spectral factorization: eigenvalues ascending, orthonormal columns."""

    eigenvalues: tuple[float, ...]
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        q = self.eigenvectors
        return q @ np.diag(self.eigenvalues) @ q.T


def _eig2_values(a: float, b: float, c: float) -> tuple[float, float]:
    """Ascending eigenvalues of [[a, b], [b, c]]."""
    if b == 0.0:
        return (a, c) if a <= c else (c, a)
    t = 0.5 * (a + c)
    d = 0.5 * (a - c)
    r = math.hypot(d, b)
    return t - r, t + r


def _eig2_system(a: float, b: float, c: float):
    """(l1, l2, u1x, u1y, u2x, u2y) for [[a, b], [b, c]], l1 <= l2.

    u1, u2 are the orthonormal eigenvectors for l1, l2, sign-normalized so the
    first nonzero component is positive.
    """
    if b == 0.0:
        if a <= c:
            return a, c, 1.0, 0.0, 0.0, 1.0
        return c, a, 0.0, 1.0, 1.0, 0.0
    t = 0.5 * (a + c)
    d = 0.5 * (a - c)
    r = math.hypot(d, b)
    l1 = t - r
    l2 = t + r
    # eigenvector for the larger eigenvalue, picking the better-conditioned form
    if d >= 0.0:
        vx, vy = d + r, b
    else:
        vx, vy = b, r - d
    n = math.hypot(vx, vy)
    u2x, u2y = vx / n, vy / n
    u1x, u1y = -u2y, u2x
    if u2x < 0.0 or (u2x == 0.0 and u2y < 0.0):
        u2x, u2y = -u2x, -u2y
    if u1x < 0.0 or (u1x == 0.0 and u1y < 0.0):
        u1x, u1y = -u1x, -u1y
    return l1, l2, u1x, u1y, u2x, u2y


def _jacobi(full: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi sweeps; returns (eigenvalues unsorted, accumulated Q)."""
    a = full.copy()
    m = a.shape[0]
    q = np.eye(m)
    scale = math.sqrt(float(np.sum(a * a)))
    if scale == 0.0:
        return np.zeros(m), q
    target = 1e-14 * scale
    for sweep in range(100):
        # measure the off-diagonal part directly; total-minus-diagonal cancels
        hollow = a.copy()
        np.fill_diagonal(hollow, 0.0)
        off = float(np.linalg.norm(hollow))
        if off <= target:
            break
        for p in range(m - 1):
            for r in range(p + 1, m):
                apr = a[p, r]
                if apr == 0.0:
                    continue
                small = 100.0 * abs(apr)
                if sweep > 3 and abs(a[p, p]) + small == abs(a[p, p]) and abs(a[r, r]) + small == abs(a[r, r]):
                    a[p, r] = a[r, p] = 0.0
                    continue
                theta = 0.5 * (a[r, r] - a[p, p]) / apr
                if abs(theta) > 1e150:  # rotation angle ~ 1/(2 theta); avoid theta*theta overflow
                    t = 0.5 / theta
                elif theta >= 0.0:
                    t = 1.0 / (theta + math.sqrt(1.0 + theta * theta))
                else:
                    t = -1.0 / (-theta + math.sqrt(1.0 + theta * theta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                tau = s / (1.0 + c)
                a[p, p] -= t * apr
                a[r, r] += t * apr
                a[p, r] = a[r, p] = 0.0
                for i in range(m):
                    if i != p and i != r:
                        aip = a[i, p]
                        air = a[i, r]
                        a[i, p] = aip - s * (air + tau * aip)
                        a[p, i] = a[i, p]
                        a[i, r] = air + s * (aip - tau * air)
                        a[r, i] = a[i, r]
                for i in range(m):
                    qip = q[i, p]
                    qir = q[i, r]
                    q[i, p] = qip - s * (qir + tau * qip)
                    q[i, r] = qir + s * (qip - tau * qir)
    return np.diag(a).copy(), q


def eigh(matrix: SymmetricMatrix) -> EigenDecomposition:
    """Full spectral factorization with eigenvalues sorted ascending."""
    m = matrix.dim
    if m == 1:
        return EigenDecomposition((matrix.upper[0],), np.array([[1.0]]))
    if m == 2:
        l1, l2, u1x, u1y, u2x, u2y = _eig2_system(*matrix.upper)
        return EigenDecomposition((l1, l2), np.array([[u1x, u2x], [u1y, u2y]]))
    values, vectors = _jacobi(matrix.full())
    order = np.argsort(values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]
    for k in range(m):
        col = vectors[:, k]
        for entry in col:
            if entry != 0.0:
                if entry < 0.0:
                    vectors[:, k] = -col
                break
    return EigenDecomposition(tuple(float(v) for v in values), vectors)


def sp(matrix: SymmetricMatrix) -> float:
    """Spectral radius: the largest |eigenvalue|."""
    if matrix.dim == 2:
        l1, l2 = _eig2_values(*matrix.upper)
        return max(abs(l1), abs(l2))
    return max(abs(v) for v in eigh(matrix).eigenvalues)


def minsp(matrix: SymmetricMatrix) -> float:
    """Smallest |eigenvalue|; nonzero exactly when the matrix is invertible."""
    if matrix.dim == 2:
        l1, l2 = _eig2_values(*matrix.upper)
        return min(abs(l1), abs(l2))
    return min(abs(v) for v in eigh(matrix).eigenvalues)


def reflected_direction(matrix: SymmetricMatrix, grad) -> np.ndarray:
    """Solve with the eigenvalue-reflected matrix: Q |L|^-1 Q^T grad.

    Equivalently the positive-eigenspace part of A^-1 grad minus the negative
    part; always a descent direction for grad when it is nonzero.
    """
    if matrix.dim == 2:
        a, b, c = matrix.upper
        l1, l2, u1x, u1y, u2x, u2y = _eig2_system(a, b, c)
        if l1 == 0.0 or l2 == 0.0:
            raise SingularMatrix("matrix has a zero eigenvalue")
        gx = float(grad[0])
        gy = float(grad[1])
        c1 = (gx * u1x + gy * u1y) / abs(l1)
        c2 = (gx * u2x + gy * u2y) / abs(l2)
        return np.array([c1 * u1x + c2 * u2x, c1 * u1y + c2 * u2y])
    decomp = eigh(matrix)
    if min(abs(v) for v in decomp.eigenvalues) == 0.0:
        raise SingularMatrix("matrix has a zero eigenvalue")
    coeffs = decomp.eigenvectors.T @ np.asarray(grad, dtype=float)
    return decomp.eigenvectors @ (coeffs / np.abs(decomp.eigenvalues))
