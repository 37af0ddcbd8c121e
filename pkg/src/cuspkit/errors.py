"""Exception hierarchy shared by all modules."""


class CuspkitError(Exception):
    """Base class for every error raised by cuspkit."""


class DomainError(CuspkitError, ValueError):
    """An argument lies outside the domain of an operation."""


class PoleError(DomainError):
    """Evaluation at a pole (e.g. gamma at a nonpositive integer)."""


class NonFiniteError(CuspkitError, ArithmeticError):
    """A NaN or Inf was produced where a finite value is required."""


class QuadratureError(CuspkitError, ArithmeticError):
    """An adaptive quadrature failed to meet its tolerance."""


class PreconditionError(CuspkitError, ValueError):
    """A documented precondition of an operation does not hold."""


class InsufficientDecayError(PreconditionError):
    """A spectral multiplier decays too slowly for Plancherel inversion."""


class TruncationError(CuspkitError, ArithmeticError):
    """A truncated integral or series could not meet its tolerance."""


class StabilityError(PreconditionError):
    """A time step violates the CFL-type stability bound."""


class BoundaryContaminationError(CuspkitError, ArithmeticError):
    """A wave solution reached the artificial outer boundary."""


class InfeasibleError(CuspkitError, ArithmeticError):
    """A construction could not meet its requested accuracy."""


class AtomOverflowError(CuspkitError, MemoryError):
    """A point-mass computation exceeded the configured atom cap."""


class AmbiguousGroupingError(CuspkitError, ValueError):
    """Two coset classes collide within the merge tolerance."""


class TailCertificateError(CuspkitError, ArithmeticError):
    """A series tail could not be certified below tolerance."""


class EmptyListError(CuspkitError, ValueError):
    """An eigenvalue list is empty."""
