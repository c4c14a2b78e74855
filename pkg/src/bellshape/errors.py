"""Exception hierarchy shared by all modules."""


class BellShapeError(Exception):
    """Base class for library errors."""


class EmptySequence(BellShapeError):
    pass


class WindowTooNarrow(BellShapeError):
    pass


class ParameterOutOfRange(BellShapeError, ValueError):
    pass


class MassMismatch(BellShapeError, ValueError):
    pass


class GridTooCoarse(BellShapeError, ValueError):
    pass


class NotAdmissible(BellShapeError):
    pass


class QuadratureFailure(BellShapeError, ArithmeticError):
    pass


class SingularitySampled(BellShapeError, ArithmeticError):
    pass


class ZeroCrossing(BellShapeError, ArithmeticError):
    pass


class NonDecayingTail(BellShapeError, ValueError):
    pass


class HorizonTooShort(BellShapeError):
    pass


class BranchViolation(BellShapeError, ValueError):
    pass


class BreakpointEvaluation(BellShapeError, ValueError):
    pass


class CancellationWarning(RuntimeWarning):
    """Scaling factor amplifies quadrature error beyond the requested accuracy."""


# errors the CLI maps to the "numeric failure" exit status
NUMERIC_ERRORS = (
    QuadratureFailure,
    SingularitySampled,
    ZeroCrossing,
    NonDecayingTail,
    HorizonTooShort,
    WindowTooNarrow,
    EmptySequence,
)
