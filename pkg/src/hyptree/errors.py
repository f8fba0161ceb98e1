"""Exception types shared across the package."""


class PrecisionError(ArithmeticError):
    """The active precision cannot represent a required quantity."""

    def __init__(self, message: str, required_terms: int | None = None, node=None):
        super().__init__(message)
        self.required_terms = required_terms
        self.node = node


class CapabilityError(ValueError):
    """A method was asked for a configuration it cannot produce."""


class TreeError(ValueError):
    """Malformed or inconsistent tree input."""


class NewickError(TreeError):
    """Newick parse failure at a given line and column (1-based)."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column
