"""Exception hierarchy shared by all modules."""


class FreeQIDError(Exception):
    """Base class for library errors."""


class DomainError(FreeQIDError, ValueError):
    """Argument outside the half-plane (or set) where a transform is defined."""


class PoleError(FreeQIDError, ZeroDivisionError):
    """Evaluation at (or numerically on top of) a declared pole."""


class SingularWindow(FreeQIDError, ValueError):
    """Integration window touches a non-integrable singularity."""


class DivergentMoment(FreeQIDError, ValueError):
    """Requested moment does not exist for the given measure."""


class NonIntegrableCorrection(FreeQIDError, ArithmeticError):
    """Drift correction integral between pair and triplet failed to converge."""


class NonIntegrable(FreeQIDError, ArithmeticError):
    """Kernel is not integrable against the given measure."""


class NoConvergence(FreeQIDError, ArithmeticError):
    """Iterative solver did not reach tolerance.

    ``iterates`` holds the last iterates (possibly an array) for diagnosis.
    """

    def __init__(self, message, iterates=None):
        super().__init__(message)
        self.iterates = iterates


class LeftHalfPlaneEscape(NoConvergence):
    """Damped Newton step could not keep the iterate in the upper half-plane."""


class ValidityError(FreeQIDError, ValueError):
    """Parameters violate the existence condition of a construction."""


class NoClosedForm(FreeQIDError, NotImplementedError):
    """The model has no Voiculescu transform in closed form (e.g. not FQID)."""


class Unsupported(FreeQIDError, NotImplementedError):
    """Requested case is deliberately not implemented."""


class DuplicateNode(FreeQIDError, ValueError):
    """Interpolation nodes are not pairwise distinct."""


class HalfPoint(FreeQIDError, ValueError):
    """The Bernoulli parameter 1/2 has no quasi-infinitely divisible triplet."""


class NotCertified(FreeQIDError, ValueError):
    """Class membership required by an operation was not established."""


class BranchError(FreeQIDError, ArithmeticError):
    """A closed-form square-root branch produced a value off the upper half-plane."""
