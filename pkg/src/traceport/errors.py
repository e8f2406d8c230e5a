"""Exception types shared across the package.

ValidationError covers malformed inputs and violated preconditions; the CLI
maps it to exit code 2.  DegenerateComputationError covers inputs that are
well formed but make the requested computation meaningless (for example a
variance estimate of zero); the CLI maps it to exit code 3.
"""


class ValidationError(ValueError):
    """An input failed a documented contract."""


class DegenerateComputationError(RuntimeError):
    """The computation is infeasible or degenerate for this input."""
