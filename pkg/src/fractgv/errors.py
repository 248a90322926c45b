"""Exception types shared across the package."""


class FormatError(ValueError):
    """A signal or config file could not be parsed."""

    def __init__(self, message, path=None, lineno=None):
        self.path = path
        self.lineno = lineno
        where = ""
        if path is not None:
            where += f"{path}"
        if lineno is not None:
            where += f":{lineno}"
        super().__init__(f"{where}: {message}" if where else message)


class NumericalError(ArithmeticError):
    """An iterative routine produced non-finite values or failed to converge."""

    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)


class TrainingError(RuntimeError):
    """Every cell of a grid search failed."""
