"""Exception types raised across the package."""


class QIncompatError(Exception):
    """Base class for all errors raised by qincompat."""


class InvalidInput(QIncompatError, ValueError):
    """Malformed or out-of-range input."""


class SingularMatrix(QIncompatError, ArithmeticError):
    """A negative matrix power was requested for a singular matrix."""


class ModelNotDifferentiable(QIncompatError):
    """The derivative of the state leaves the support of the state."""


class SingularFisher(QIncompatError):
    """The quantum Fisher information matrix is (numerically) singular."""


class DegenerateModel(QIncompatError):
    """Generators are linearly dependent at the working point."""


class NoIncompatibility(QIncompatError):
    """The commutator matrix vanishes, so every weight matrix is optimal.

    ``weight`` carries the conventional choice ``F / Tr F``.
    """

    def __init__(self, message, weight=None):
        super().__init__(message)
        self.weight = weight


class NoConstructionNeeded(QIncompatError):
    """The generators commute, the model is already compatible."""


class SolverFailure(QIncompatError):
    """A semidefinite program did not reach an optimal solution.

    ``status`` is the solver status and ``solution`` the last iterate.
    """

    def __init__(self, message, status=None, solution=None):
        super().__init__(message)
        self.status = status
        self.solution = solution
