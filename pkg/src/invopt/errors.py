"""Exception hierarchy shared by every invopt module."""


class InvOptError(Exception):
    """Base class for all invopt errors."""


class SchemaError(InvOptError, ValueError):
    """Malformed problem or instance data."""


class UnsupportedFormError(SchemaError):
    """Problem uses a form the library does not handle (e.g. negative lower bounds)."""


class ObservationError(InvOptError):
    """The observed point is not a valid feasible point."""


class ObservationInfeasibleError(ObservationError):
    def __init__(self, row, violation, variable=None):
        self.row = row
        self.variable = variable
        self.violation = violation
        where = f"row {row}" if variable is None else f"x[{variable}] >= 0"
        super().__init__(f"observation violates {where} by {violation:.3g}")


class ObservationFractionalError(ObservationError):
    def __init__(self, index, value):
        self.index = index
        self.value = value
        super().__init__(f"integer variable {index} has fractional value {value!r}")


class NotInteriorError(ObservationError):
    """Operation needs a strictly positive observation."""


class SolverError(InvOptError):
    """Numerical failure inside the LP/MILP engine or a model solve."""


class NumericalFailure(SolverError):
    pass


class DegenerateBasisError(SolverError):
    pass


class NotExtremeError(SolverError):
    pass


class ToleranceInfeasibleError(SolverError):
    pass


class CertificateMismatchError(SolverError):
    pass


class BigMTooSmallError(SolverError):
    pass


class SizeLimitError(InvOptError):
    """Instance too large for exhaustive enumeration."""


class InvalidShiftError(InvOptError, ValueError):
    pass


class ScaleError(InvOptError, ValueError):
    pass
