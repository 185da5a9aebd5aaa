"""
Exceptions raised by the WallStreetFeds simulator.
"""
from django.core.exceptions import ObjectDoesNotExist


class SimulationError(Exception):
    """Base class for every simulator error."""


class ArgumentError(SimulationError, ValueError):
    """An operation was called with arguments outside its domain."""


class DegenerateInputError(ArgumentError):
    """Inputs are well-formed but carry no usable signal (e.g. all zeros)."""


class ModelError(SimulationError):
    """Model parameters and data disagree on dimensions."""


class AggregationError(SimulationError):
    """Server aggregation received no updates or no positive weight."""


class CapacityError(SimulationError):
    """Exact computation requested beyond the supported size."""


class ConflictError(SimulationError):
    """An identifier is already in use."""


class NotFoundError(SimulationError, ObjectDoesNotExist):
    """A scenario, client, token or asset is unknown."""


class InsufficientFundsError(SimulationError):
    """An account does not hold enough of an asset."""


class LiquidityError(SimulationError):
    """A trade would drain a pool asset or cannot be settled."""


class ConfigError(SimulationError):
    """An experiment configuration failed validation."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__('; '.join(self.violations) or 'invalid configuration')


class InvariantViolation(SimulationError):
    """A runtime invariant was broken; every downstream number is suspect."""

    def __init__(self, invariant, detail=''):
        self.invariant = invariant
        self.detail = detail
        message = f'invariant violated: {invariant}'
        if detail:
            message = f'{message} ({detail})'
        super().__init__(message)
