"""
Error Types
===========
Every failure the toolkit raises on purpose derives from UrmError, so callers
(the sweep loop, the CLI) can tell numerical/config failures from bugs.

The second base class of each error keeps the builtin meaning, e.g. an
InvalidArgumentError is still a ValueError for code that only knows builtins.
"""

from typing import Optional


class UrmError(Exception):
    """Base class for all toolkit errors"""


class InvalidArgumentError(UrmError, ValueError):
    """Bad shapes, ranges or combinations of arguments"""


class ConfigError(UrmError, ValueError):
    """Scenario configuration does not match the scenario definition"""


class DegenerateGradientError(UrmError, ArithmeticError):
    """Level-set gradient requested at a singular point"""


class ProjectionFailureError(UrmError, RuntimeError):
    """Closest-point iteration did not converge"""

    def __init__(self, message: str, iterations: int = 0):
        super().__init__(message)
        self.iterations = iterations


class GeometryDegenerateError(UrmError, RuntimeError):
    """Empty surrogate domain / no active elements"""


class SolverFailureError(UrmError, RuntimeError):
    """Linear solve failed or missed the residual target"""

    def __init__(self, message: str, residual: Optional[float] = None):
        if residual is not None:
            message = f"{message} (attained residual {residual:.3e})"
        super().__init__(message)
        self.residual = residual


class RankDeficientError(UrmError, ValueError):
    """Requested more modes than the numerical rank, or singular reduced system"""

    def __init__(self, message: str, cutoff: Optional[float] = None,
                 condition: Optional[float] = None):
        super().__init__(message)
        self.cutoff = cutoff
        self.condition = condition


class UnsupportedTransportError(UrmError, NotImplementedError):
    """No configuration map is defined between two level sets"""
