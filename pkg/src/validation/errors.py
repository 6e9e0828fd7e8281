"""
Error hierarchy for the QAT wave-packet toolkit.

Domain errors describe invalid inputs; numerical-tolerance errors describe a
computation whose accuracy guarantee could not be met. The CLI maps the two
families onto exit codes 1 and 2.
"""

from typing import List, Optional


class QatToolkitError(Exception):
    """Base class for all toolkit errors"""


class DomainError(QatToolkitError, ValueError):
    """Invalid argument, index or non-finite input"""


class ConfigValidationError(DomainError):
    """
    RunConfig failed validation.

    Args:
        messages: Line-precise validation messages
    """

    def __init__(self, messages: List[str]):
        self.messages = list(messages)
        super().__init__("; ".join(self.messages) if self.messages else "invalid configuration")


class FocalPointError(DomainError):
    """The Arnold map degenerates (u2(t') <= 0)"""


class GridMismatchError(DomainError):
    """Two grid states do not share the same axis"""


class NumericalToleranceError(QatToolkitError, ArithmeticError):
    """A computed invariant exceeded its tolerance"""

    def __init__(self, message: str, deviation: Optional[float] = None, tolerance: Optional[float] = None):
        self.deviation = deviation
        self.tolerance = tolerance
        super().__init__(message)


class ResolutionError(NumericalToleranceError):
    """The spatial grid does not resolve the state (window or spacing)"""


class StabilityError(NumericalToleranceError):
    """The time step violates the phase criterion"""
