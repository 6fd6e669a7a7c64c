"""Exception hierarchy shared by every module."""


class GraphLimitsError(Exception):
    """Base class for all library errors."""


class ValidationError(GraphLimitsError, ValueError):
    """An input violates a type invariant or an operation precondition."""


class CapExceededError(GraphLimitsError):
    """An exact enumeration would exceed the configured work cap."""

    def __init__(self, what, required, cap):
        self.what = what
        self.required = required
        self.cap = cap
        super().__init__(
            f"{what}: {required:.4g} elementary terms exceeds cap {cap:.4g}"
            " (raise the cap or use a Monte-Carlo/heuristic mode)"
        )


class FalsificationError(GraphLimitsError):
    """A checked inequality came out with negative slack beyond tolerance."""
