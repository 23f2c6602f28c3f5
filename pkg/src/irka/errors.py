"""Exception hierarchy.

Every error raised by the library derives from :class:`IrkaError` so callers
can catch the whole family at once.  Several classes also inherit from the
matching builtin (``ValueError``, ``ArithmeticError``) so generic handlers
keep working.
"""


class IrkaError(Exception):
    """Base class for all library errors."""


class SingularShift(IrkaError, ArithmeticError):
    """``sigma*I - A`` is numerically singular (the shift hit the spectrum)."""


class NoConvergence(IrkaError, ArithmeticError):
    """The dense eigensolver failed to converge."""


class UnstableMatrix(IrkaError, ValueError):
    """A stability precondition was violated."""


class RankDeficient(IrkaError, ValueError):
    """A basis lost numerical rank."""


class RankCollapse(IrkaError, ArithmeticError):
    """The Loewner matrix is numerically singular."""


class BadSpec(IrkaError, ValueError):
    """Invalid spectrum descriptor."""


class SizeMismatch(IrkaError, ValueError):
    """Operands have incompatible sizes."""


class DimensionMismatch(SizeMismatch):
    """State-space data with inconsistent dimensions."""


class EmptySet(IrkaError, ValueError):
    """An operation needs a nonempty point set."""


class PoleHit(IrkaError, ArithmeticError):
    """Evaluation point coincides with a pole / shift."""


class ShiftCollision(IrkaError, ArithmeticError):
    """Two shifts coincide (numerically)."""


class ShiftEigCollision(IrkaError, ArithmeticError):
    """A shift coincides with a reduced pole; a Cauchy entry would blow up."""


class DenominatorCollapse(IrkaError, ArithmeticError):
    """A denominator in the certificate products vanished."""


class ZeroEigenvalue(IrkaError, ArithmeticError):
    """Relative eigenvalue bound requested with a zero eigenvalue."""


class CertificateInvalid(IrkaError, ValueError):
    """The backward-stability gate ``eps_bullet < 1/2`` does not hold."""


class ParseError(IrkaError, ValueError):
    """Malformed input file."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnsupportedField(ParseError):
    """Matrix Market field (complex, pattern, ...) that is not supported."""
