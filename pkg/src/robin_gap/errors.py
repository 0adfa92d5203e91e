"""
Exception hierarchy for robin_gap.

Library code raises these; only the command-line entry point turns them into exit codes.
"""


class RobinGapError(Exception):
    """Base class for every error raised by robin_gap."""


class DomainError(RobinGapError, ValueError):
    """An argument lies outside the domain an operation supports."""


class BracketError(RobinGapError):
    """A root could not be bracketed by a sign change."""


class InterlacingError(RobinGapError):
    """Computed Bessel zeros violate the interlacing chain."""


class PrecisionLossError(RobinGapError, ArithmeticError):
    """Two independent evaluation routes disagree beyond tolerance."""


class CoefficientOverflowError(DomainError, OverflowError):
    """The Robin coupling is too large to be handled in double precision."""


class ConsistencyError(RobinGapError):
    """Two assembly paths of the same quantity disagree."""


class ConfigError(RobinGapError, ValueError):
    """The run configuration is invalid."""
