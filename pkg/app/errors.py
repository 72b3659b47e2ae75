"""Exception types raised by the services.

Every error derives from HeraldError and carries the process exit code the
CLI uses when the error escapes a command:

- 2: bad argument, precondition or config file
- 3: numeric failure (non-convergence, root polishing)
"""


class HeraldError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 2


class InvalidArgumentError(HeraldError, ValueError):
    """An argument violates an operation's precondition."""


class ConfigError(HeraldError, ValueError):
    """A JSON config file is missing, unreadable or has the wrong shape."""


class RaisingOnFullError(HeraldError, ValueError):
    """A collective raising operator was applied with no atom left in g."""


class DegenerateStateError(HeraldError, ValueError):
    """A zero vector was passed where a direction is needed."""


class SizeLimitError(HeraldError, ValueError):
    """The brute-force tensor-product oracle was asked for too many atoms."""


class GridTooCoarseError(HeraldError, ValueError):
    """The time grid is too coarse for the fixed-step integrator."""


class InfeasibleError(HeraldError, ValueError):
    """The requested quantity is infinite (e.g. zero success probability)."""


class NonConvergenceError(HeraldError, RuntimeError):
    """Step halving changed the result by more than the tolerance."""

    exit_code = 3


class NumericFailureError(HeraldError, RuntimeError):
    """A numerical routine failed; `diagnostics` says where."""

    exit_code = 3

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
