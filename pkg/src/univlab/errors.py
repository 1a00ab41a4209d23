"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: ConfigError -> 2, PrecisionError -> 3,
DomainError -> 4.
"""


class UnivlabError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(UnivlabError):
    """Malformed configuration, CLI arguments, or run-log records."""


class DomainError(UnivlabError):
    """Input outside an operation's stated domain."""


class PoleError(DomainError):
    """Evaluation requested at (or too close to) a pole."""


class HeightCapError(DomainError):
    """Requested imaginary part exceeds the documented evaluation cap."""


class SingularFactorError(DomainError):
    """An Euler factor is numerically singular; carries the offending prime."""

    def __init__(self, prime, magnitude):
        self.prime = prime
        self.magnitude = magnitude
        super().__init__(
            f"Euler factor at p={prime} is singular (|1 - z| = {magnitude:.3e})"
        )


class DegenerateTargetError(DomainError):
    """A target function (or an adjustment factor) vanishes on the grid."""


class PrecisionError(UnivlabError):
    """Requested tolerance could not be met; carries the achieved bound."""

    def __init__(self, message, achieved=None):
        self.achieved = achieved
        super().__init__(message)


class QuadratureAccuracyError(PrecisionError):
    """Oscillatory quadrature could not resolve the phase within budget."""
