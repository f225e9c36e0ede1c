"""Semantic exception hierarchy.

Callers can catch ``HoneymetricsError`` for anything raised by this
package, or the narrower classes when they need to distinguish a bad
input from a numerical failure (the CLI maps these to exit codes).
"""


class HoneymetricsError(Exception):
    """Base class for all errors raised by honeymetrics."""


class SpaceMismatchError(HoneymetricsError, ValueError):
    """Two models that must share a password space do not."""


class DomainError(HoneymetricsError, ValueError):
    """A parameter is outside its mathematical domain."""


class NumericalError(HoneymetricsError, RuntimeError):
    """A numerical routine failed to reach the requested accuracy.

    Carries the achieved error estimate in ``achieved`` when known.
    """

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved


class InstanceTooLargeError(HoneymetricsError, ValueError):
    """A brute-force oracle refused an instance; ``cost`` is the estimate."""

    def __init__(self, message: str, cost: float):
        super().__init__(message)
        self.cost = cost


class DegenerateSampleError(HoneymetricsError, ValueError):
    """An estimator cannot run on a degenerate input sample."""
