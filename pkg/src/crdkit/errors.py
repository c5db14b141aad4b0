"""Exception types shared across the package.

The CLI maps InputError (and subclasses) to exit code 1 and ContractError
to exit code 2.
"""


class InputError(ValueError):
    """Bad user-supplied data: out-of-range ids, malformed files, empty sets."""


class ParseError(InputError):
    """Malformed text input; carries a 1-based line number."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class SizeError(InputError):
    """Input too large for an exponential-cost oracle."""


class ContractError(RuntimeError):
    """An internal precondition or invariant was violated."""
