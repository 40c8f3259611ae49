"""Exception types shared by the numerical modules."""


class DomainError(ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class ToleranceError(ArithmeticError):
    """A requested tolerance could not be certified.

    ``estimate`` carries the best value reached and ``error`` its error
    estimate, so callers can still report something useful.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
