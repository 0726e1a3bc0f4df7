"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`Dqc1TraceError`.
The ``exit_code`` attribute is what the command line front end returns when the
error escapes a command: 2 for invalid input, 3 for a violated mathematical
precondition, 4 for numerical non-convergence.
"""


class Dqc1TraceError(Exception):
    exit_code = 2


class InvalidInput(Dqc1TraceError, ValueError):
    exit_code = 2


class PreconditionError(Dqc1TraceError):
    exit_code = 3


class NumericalError(Dqc1TraceError, ArithmeticError):
    exit_code = 4


# polyapprox
class NoConvergence(NumericalError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class DegenerateReferences(NumericalError):
    pass


class SingularSystem(NumericalError):
    pass


class DegenerateCertificate(PreconditionError):
    pass


class SearchExceeded(NumericalError):
    pass


class RangeError(InvalidInput):
    """Target function leaves [-1, 1] on its domain."""


# jacobi
class InvalidDiscriminant(PreconditionError):
    pass


class RatioConditionFailed(PreconditionError):
    pass


class DegenerateGap(PreconditionError):
    pass


class CoefficientOverflow(NumericalError):
    pass


# quantum
class TooLarge(InvalidInput):
    pass


class NotUnitary(InvalidInput):
    pass


class LengthMismatch(InvalidInput):
    pass


class DimensionMismatch(InvalidInput):
    pass


# reduction
class NonPositiveCoupling(InvalidInput):
    pass


class DomainViolation(PreconditionError):
    pass


class CircuitTooDeep(PreconditionError):
    pass


class FactorMismatch(InvalidInput):
    pass


# oracle baseline
class NotHermitian(InvalidInput):
    pass
