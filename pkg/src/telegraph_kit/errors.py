"""Exception hierarchy shared by the evaluators, the simulator and the CLI."""


class TelegraphError(Exception):
    """Base class for every error raised by telegraph_kit."""

    exit_code = 2


class ValidationError(TelegraphError, ValueError):
    """Arguments violate a documented precondition."""


class ScopeError(TelegraphError):
    """The requested law exists but is outside what the library derives.

    Raised for instance for the even-parity conditional law with two
    distinct switching rates.
    """

    def __init__(self, message):
        super().__init__(f"paper scope: {message}")


class CapabilityError(TelegraphError):
    """Evaluation is possible in principle but too deep/expensive; use Monte Carlo."""


class ConvergenceError(TelegraphError, ArithmeticError):
    """A series or quadrature failed to converge.

    Attributes
    ----------
    partial : float
        Value accumulated when the evaluation stopped.
    terms : int
        Number of terms (or subintervals) consumed.
    """

    exit_code = 3

    def __init__(self, message, partial=float("nan"), terms=0):
        super().__init__(f"{message} (partial={partial!r}, terms={terms})")
        self.partial = partial
        self.terms = terms


class AcceptanceError(TelegraphError):
    """Conditioned simulation accepts too few paths to be informative."""


class EstimationError(TelegraphError, ValueError):
    """Rate estimation is undefined for the given record."""


class StatisticalFailure(TelegraphError):
    """A Monte Carlo comparison found a discrepancy beyond the z threshold."""

    exit_code = 1
