"""Exception types shared across the package."""


class RationaleError(Exception):
    """Base class for all errors raised by this package."""


class InputError(RationaleError):
    """Malformed user input: metadata, tree documents, constraint text, options.

    `kind` is a stable machine-readable tag (e.g. "parse_error", "unknown_ref");
    `line`/`column` are 1-based positions when the input is text.
    """

    def __init__(self, message, kind="invalid", line=None, column=None):
        super().__init__(message)
        self.kind = kind
        self.line = line
        self.column = column


class UnboundVariableError(RationaleError):
    """An expression was evaluated at a point that does not bind all its variables."""

    def __init__(self, var):
        super().__init__(f"unbound variable {var}")
        self.var = var


class SolveBudgetExceeded(RationaleError):
    """A solve exceeded its configured time budget; carries partial progress."""

    def __init__(self, solved_members):
        super().__init__(f"solve budget exceeded after {solved_members} members")
        self.solved_members = solved_members
