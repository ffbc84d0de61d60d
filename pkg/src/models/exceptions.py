"""
Exception hierarchy for the verification engine.
"""

from typing import Optional, Tuple


class EngineError(Exception):
    """Base class for every error raised by the engine."""


class ConfigError(EngineError):
    """Invalid run file, registry name or option."""


class OffManifoldError(EngineError):
    """A point was handed to a manifold operation but does not lie on it."""

    def __init__(self, distance: float, tolerance: float):
        self.distance = distance
        self.tolerance = tolerance
        super().__init__(f"point is {distance:.3e} off the manifold (tolerance {tolerance:.1e})")


class DegenerateConstraintError(EngineError):
    """The constraint Jacobian is rank deficient at the point."""


class ProjectionError(EngineError):
    """Newton projection onto the constraint set did not converge."""


class NotMorseBottError(EngineError):
    """A problem failed the Morse-Bott kernel check."""


class NonTransversalError(EngineError):
    """Shooting solutions cluster without separating under refinement."""


class BudgetExhaustedError(EngineError):
    """The shooting budget ran out before the search finished."""


class UnsupportedSearchError(EngineError):
    """The shooting family has more than one continuous parameter."""


class UntrustedCountError(EngineError):
    """A mod-2 count could not be certified."""

    def __init__(self, pair: Tuple[str, str], reason: Optional[str] = None):
        self.pair = pair
        message = f"untrusted count for {pair[0]} -> {pair[1]}"
        if reason:
            message += f": {reason}"
        super().__init__(message)


class DSquaredError(EngineError):
    """Boundary matrices do not compose to zero."""


class GroupMismatchError(EngineError):
    """Novikov elements over different groups were combined."""


class EnergyDegeneracyError(EngineError):
    """Several terms share the maximal energy."""


class NovikovZeroDivisionError(EngineError):
    """Inversion of the zero element."""


class ResourceLimitError(EngineError):
    """An exponent left the allowed range during a series computation."""


class GridError(EngineError):
    """A path grid is not admissible for the requested operator."""


class NonPositiveSpectrumError(EngineError):
    """A squared operator has a nonpositive eigenvalue."""


class SingularActionError(EngineError):
    """A group action is rank deficient or has a non-orthonormal basis."""
