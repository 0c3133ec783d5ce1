"""Exception hierarchy shared by all modules."""


class PDeltaError(Exception):
    """Base class for every error raised by the package."""


class DomainError(PDeltaError, ValueError):
    """An argument lies outside the domain of the operation."""


class SingularityError(PDeltaError, ArithmeticError):
    """Evaluation at a point where the quantity is genuinely infinite."""


class MeshMismatchError(PDeltaError, ValueError):
    """A field does not belong to the mesh it is used with."""


class CertificationError(PDeltaError):
    """A sampled inequality could not be certified with a finite constant."""


class SolverError(PDeltaError):
    """Base class for failures of the nonlinear solver."""

    def __init__(self, message, history=None, tag=None):
        super().__init__(message)
        self.history = list(history or [])
        self.tag = tag

    def tagged(self, tag):
        """Return a copy of this error carrying a ladder/step tag."""
        err = type(self)(f"{self} [{tag}]", self.history, tag)
        return err


class MaxIterations(SolverError):
    pass


class LineSearchFailure(SolverError):
    pass


class LinearSolveFailure(SolverError):
    pass


class MollificationFailure(PDeltaError):
    def __init__(self, message, achieved):
        super().__init__(message)
        self.achieved = achieved


class ConfigError(PDeltaError):
    """Configuration could not be parsed or validated.

    ``errors`` is a list of ``(field, message)`` pairs.
    """

    def __init__(self, errors, line=None):
        self.errors = list(errors)
        self.line = line
        text = "; ".join(f"{f}: {m}" for f, m in self.errors)
        super().__init__(text)
