"""Exception types shared across lcirt."""


class LcirtError(Exception):
    pass


class ResponseValidationError(LcirtError, ValueError):
    """A response code outside its item's category range."""

    def __init__(self, row: int, column: int, value, reason: str = "out of range"):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(
            f"Invalid response {value!r} at row {row + 1}, item {column + 1}: {reason}"
        )


class EmptyDataError(LcirtError, ValueError):
    pass


class MissingColumnError(LcirtError, ValueError):
    pass


class SpecValidationError(LcirtError, ValueError):
    pass


class InfeasibleLogitsError(LcirtError, ArithmeticError):
    pass


class DegenerateLikelihoodError(LcirtError, ArithmeticError):
    pass


class NotNestedError(LcirtError, ValueError):
    pass
