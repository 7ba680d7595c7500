"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """A precondition on an argument was violated."""


class NumericalFailure(ArithmeticError):
    """A computation produced a non-finite value or a decomposition failed.

    ``where`` carries the offending node or parameter when one is known.
    """

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class ResourceLimitError(RuntimeError):
    """A requested quadrature would exceed the configured point budget."""

    def __init__(self, message, budget):
        super().__init__(message)
        self.budget = budget
