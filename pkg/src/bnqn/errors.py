"""Exception types shared across the package."""


class BnqnError(Exception):
    """Base class for every error raised by this package."""


class DerivativeVanishes(BnqnError):
    """The one-variable Newton map hit a point where p' is numerically zero."""


class PoleHit(BnqnError):
    """An iteration map or conjugacy was evaluated at one of its poles."""


class NoConvergence(BnqnError):
    """An iterative routine exhausted its iteration cap."""


class SingularMatrix(BnqnError):
    """A matrix that must be inverted has a zero eigenvalue."""


class NoAdmissibleDelta(BnqnError):
    """Every configured Hessian shift failed the admissibility test."""


class LineSearchUnderflow(BnqnError):
    """Backtracking shrank the step size below the representable range."""
