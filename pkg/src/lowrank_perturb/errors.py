"""Exception types shared across the package."""


class ArgumentError(ValueError):
    """An argument is outside its documented range."""


class EigenConvergenceError(RuntimeError):
    """The symmetric eigensolver did not reach its accuracy target."""

    def __init__(self, msg, n, residual):
        super().__init__(msg)
        self.n = n
        self.residual = residual


class MultipletSplitError(ValueError):
    """A rank-p selection cuts through a group of equal eigenvalues.

    The projector onto the selected eigenvectors is then not well defined.
    """


class ZeroGapError(ZeroDivisionError):
    """A bound divides by an eigengap that is zero."""

    def __init__(self, name):
        super().__init__(f"{name} == 0: bound is undefined")
        self.name = name


class NotPSDError(ValueError):
    """A PSD-only bound was requested for an indefinite matrix."""


class ContourError(ValueError):
    """An eigenvalue lies on (or too close to) an integration contour."""


class QuadratureError(RuntimeError):
    """Trapezoid doubling hit its cap before meeting the tolerance."""

    def __init__(self, msg, last, previous):
        super().__init__(msg)
        self.last = last
        self.previous = previous


class DatasetError(ValueError):
    """Input data could not be turned into a data matrix."""


class InvariantViolation(AssertionError):
    """A theorem-backed inequality failed beyond numerical tolerance."""
