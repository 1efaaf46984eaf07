"""Exception types shared across the solver.

Two failure families matter to callers: bad input (CLI exit code 2) and
resource guards tripping (exit code 3).
"""


class StorallocError(Exception):
    """Base class for all storalloc errors."""


class InputError(StorallocError, ValueError):
    """Malformed or out-of-domain user input."""


class GuardError(StorallocError, RuntimeError):
    """A configured resource guard refused to run the computation.

    Carries enough context (the estimate and the limit) for the caller to
    pick practical-mode parameters instead.
    """

    def __init__(self, message, estimate=None, limit=None):
        super().__init__(message)
        self.estimate = estimate
        self.limit = limit
