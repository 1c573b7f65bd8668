"""Complex polynomials and the classical one-variable root-finding iterations.

Coefficients are stored lowest degree first throughout.  The string form used
by the CLI is a comma-separated list of ``re+imi`` tokens in the same order,
e.g. ``-1,0,1`` for z^2 - 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DerivativeVanishes, NoConvergence, PoleHit

__all__ = [
    "Polynomial",
    "RelaxationDisk",
    "all_roots",
    "bisector_newton_map",
    "format_complex",
    "newton_map_1d",
    "parse_complex",
    "parse_polynomial",
    "poly_derivative",
    "poly_eval",
    "polynomial_to_string",
    "relaxed_newton_map",
    "sample_relaxed_alpha",
    "schroder_conjugacy_defect",
]

# |p'(z)| below this scale-aware threshold counts as an exceptional point of
# the Newton map.
_POLE_TOL = 1e-14


class Polynomial:
    """Immutable complex-coefficient polynomial, lowest-degree coefficient first.

    Trailing zero coefficients are trimmed so the leading coefficient is
    nonzero for everything except the zero polynomial.  Coefficients must be
    finite.
    """

    __slots__ = ("coeffs", "_derivative")

    def __init__(self, coeffs):
        cs = [complex(c) for c in coeffs]
        if not cs:
            raise ValueError("need at least one coefficient")
        for c in cs:
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise ValueError(f"non-finite coefficient {c!r}")
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)
        self._derivative = None

    @classmethod
    def from_roots(cls, roots, lead=1.0):
        """Expand lead * prod (z - r) over the given roots."""
        cs = [complex(lead)]
        for r in roots:
            r = complex(r)
            cs = [0j] + cs
            for k in range(len(cs) - 1):
                cs[k] = cs[k] - r * cs[k + 1]
        return cls(cs)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def is_zero(self):
        return len(self.coeffs) == 1 and self.coeffs[0] == 0

    def __call__(self, z):
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def derivative(self) -> "Polynomial":
        """Formal derivative (memoized; the object stays immutable)."""
        if self._derivative is None:
            if len(self.coeffs) == 1:
                self._derivative = Polynomial([0j])
            else:
                self._derivative = Polynomial(
                    [k * c for k, c in enumerate(self.coeffs)][1:]
                )
        return self._derivative

    def cauchy_root_bound(self):
        """1 + max |c_k / c_n|; every root lies in this disk (0 for constants)."""
        if self.degree == 0:
            return 0.0
        lead = abs(self.coeffs[-1])
        return 1.0 + max(abs(c) for c in self.coeffs[:-1]) / lead

    def __eq__(self, other):
        return isinstance(other, Polynomial) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"Polynomial({list(self.coeffs)!r})"

    def __getstate__(self):
        return self.coeffs

    def __setstate__(self, state):
        self.coeffs = state
        self._derivative = None


@dataclass(frozen=True)
class RelaxationDisk:
    """Disk |alpha - 1| <= rho from which relaxed-Newton factors are drawn."""

    rho: float

    def __post_init__(self):
        if not 0.5 < self.rho < 1.0:
            raise ValueError(f"rho must lie in (0.5, 1), got {self.rho}")


def poly_eval(p: Polynomial, z) -> complex:
    """Horner evaluation of p at z."""
    return p(complex(z))


def poly_derivative(p: Polynomial) -> Polynomial:
    return p.derivative()


def _check_derivative(p, z, dpz):
    scale = _POLE_TOL * (1.0 + abs(z)) ** max(p.degree - 1, 0)
    if abs(dpz) < scale:
        raise DerivativeVanishes(f"|p'({z})| = {abs(dpz):.3e} below pole tolerance")


def newton_map_1d(p: Polynomial, z) -> complex:
    """One Newton step z - p(z)/p'(z) for a complex polynomial."""
    z = complex(z)
    dpz = p.derivative()(z)
    _check_derivative(p, z, dpz)
    return z - p(z) / dpz


def relaxed_newton_map(p: Polynomial, z, alpha) -> complex:
    """Relaxed Newton step z - alpha * p(z)/p'(z); alpha=1 is the plain map."""
    z = complex(z)
    dpz = p.derivative()(z)
    _check_derivative(p, z, dpz)
    return z - complex(alpha) * (p(z) / dpz)


def sample_relaxed_alpha(disk: RelaxationDisk, rng) -> complex:
    """Draw alpha uniformly (area measure) from |alpha - 1| <= rho.

    Rejection sampling from the bounding square; deterministic for a fixed
    ``numpy.random.Generator``.
    """
    r = disk.rho
    rr = r * r
    while True:
        u = rng.uniform(-r, r)
        v = rng.uniform(-r, r)
        if u * u + v * v <= rr:
            return complex(1.0 + u, v)


def bisector_newton_map(y: float) -> float:
    """Newton map of z^2 - 1 restricted to the imaginary axis, in z = iy.

    Conjugate to angle doubling via y = cot(pi t), which makes the dynamics
    on the axis chaotic.
    """
    if y == 0.0:
        raise PoleHit("bisector map has a pole at y = 0")
    return (y * y - 1.0) / (2.0 * y)


_ZSQ_MINUS_ONE = Polynomial([-1.0, 0.0, 1.0])


def schroder_conjugacy_defect(z) -> float:
    """|phi(N(z)) - phi(z)^2| for N the Newton map of z^2 - 1, phi(z)=(z-1)/(z+1).

    The Moebius map phi conjugates N to w -> w^2, so the defect is zero up to
    roundoff away from the poles z in {-1, 0}.
    """
    z = complex(z)
    if z == -1 or z == 0:
        raise PoleHit(f"{z} is excluded (pole of the conjugacy or of the map)")
    try:
        nz = newton_map_1d(_ZSQ_MINUS_ONE, z)
    except DerivativeVanishes as exc:
        raise PoleHit(str(exc)) from exc
    if nz == -1:
        raise PoleHit("Newton image hits the pole of the conjugacy")
    phi_nz = (nz - 1.0) / (nz + 1.0)
    phi_z = (z - 1.0) / (z + 1.0)
    return abs(phi_nz - phi_z * phi_z)


def all_roots(p: Polynomial, tol: float, max_iter: int = 500) -> list[complex]:
    """All complex roots of p, with multiplicity, via Durand-Kerner iteration.

    Starts from the standard perturbed circle (0.4+0.9i)^k scaled by the
    Cauchy root bound and iterates until every estimate r satisfies
    |p(r)| <= tol * (1+|r|)^deg * max|coeff|.  Multiple roots come back as
    clusters of nearby estimates.

    Raises NoConvergence if the residual bound is not met within max_iter
    rounds; callers may retry with a larger cap.
    """
    n = p.degree
    if n < 1:
        raise ValueError("all_roots needs degree >= 1")
    lead = p.coeffs[-1]
    monic = tuple(c / lead for c in p.coeffs)
    max_coeff = max(abs(c) for c in p.coeffs)
    radius = max(p.cauchy_root_bound(), 1e-3)
    seed = 0.4 + 0.9j
    zs = [radius * seed**k for k in range(1, n + 1)]

    def monic_eval(z):
        acc = 0j
        for c in reversed(monic):
            acc = acc * z + c
        return acc

    for _ in range(max_iter):
        for i in range(n):
            zi = zs[i]
            denom = 1.0 + 0j
            for j in range(n):
                if j != i:
                    denom *= zi - zs[j]
            if denom == 0:
                # coincident estimates: nudge deterministically
                zi += (1e-8 + 1e-8j) * (i + 1)
                denom = 1.0 + 0j
                for j in range(n):
                    if j != i:
                        denom *= zi - zs[j]
            zs[i] = zi - monic_eval(zi) / denom
        ok = True
        for z in zs:
            if abs(p(z)) > tol * (1.0 + abs(z)) ** n * max_coeff:
                ok = False
                break
        if ok:
            return list(zs)
    raise NoConvergence(f"Durand-Kerner did not meet the residual bound in {max_iter} rounds")


def parse_complex(token: str) -> complex:
    """Parse one ``re+imi`` token (also plain reals and pure imaginaries)."""
    text = token.strip().replace(" ", "")
    if not text:
        raise ValueError("empty coefficient token")
    try:
        return complex(text.replace("i", "j"))
    except ValueError as exc:
        raise ValueError(f"cannot parse {token!r} as a complex number") from exc


def parse_polynomial(text: str, highest_first: bool = False) -> Polynomial:
    """Parse a comma-separated coefficient list, lowest degree first by default."""
    tokens = [t for t in text.split(",")]
    if not tokens or all(not t.strip() for t in tokens):
        raise ValueError("empty polynomial string")
    coeffs = [parse_complex(t) for t in tokens]
    if highest_first:
        coeffs.reverse()
    return Polynomial(coeffs)


def format_complex(z) -> str:
    """Render a complex number as ``re+imi`` with 17 significant digits."""
    z = complex(z)
    if z.imag == 0.0:
        return f"{z.real:.17g}"
    if z.real == 0.0:
        return f"{z.imag:.17g}i"
    sign = "+" if z.imag >= 0 else "-"
    return f"{z.real:.17g}{sign}{abs(z.imag):.17g}i"


def polynomial_to_string(p: Polynomial) -> str:
    return ",".join(format_complex(c) for c in p.coeffs)
