"""Exception types shared across the package."""


class QotError(Exception):
    """Base class for all domain errors raised by this package."""


class NearDependentStates(QotError):
    """Gram matrix of the coherent frame has an eigenvalue below the cutoff."""


class BasisMismatch(QotError):
    """A basis was paired with a configuration it was not built from."""


class NonzeroMomentum(QotError):
    """A position-space operation received points with nonzero momentum."""


class InfeasibleMasses(QotError):
    """Marginal mass vectors do not balance within tolerance."""


class GridMismatch(QotError):
    """Two grid samples do not live on the same phase-space grid."""


class GridTooCoarse(QotError):
    """Grid refinement moved a value by more than its claimed tolerance."""


class NotHermitian(QotError):
    """A matrix expected to be Hermitian is not, within tolerance."""


class InconsistentConstraints(QotError):
    """A linearly dependent trace constraint carries an incompatible value."""


class MaxIterations(QotError):
    """The iterative solver hit its iteration limit before converging."""


class NumericalBreakdown(QotError):
    """An iterative method lost the invariants it relies on."""


class InfeasibleAnsatz(QotError):
    """Requested coupling parameters fall outside the positivity window."""


class PatternViolation(QotError):
    """A matrix does not have the zero pattern required by a block formula."""
