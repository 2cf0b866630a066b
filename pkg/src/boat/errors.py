"""Exception types raised across the package."""


class BoatError(Exception):
    """Base class for all package errors."""


class ArgumentError(BoatError, ValueError):
    """An argument failed validation (shape, finiteness, bounds, enum value)."""


class InsufficientDataError(BoatError):
    """Not enough observations for the requested operation."""


class NumericalError(BoatError):
    """A numerical routine failed (factorization, rank deficiency)."""


class ConvergenceError(BoatError):
    """An iterative solver did not converge within its iteration budget."""


class OptimizationError(BoatError):
    """Acquisition maximization could not produce a finite result."""


class SchemaError(BoatError):
    """A CSV file does not match its declared schema."""


class ParseError(BoatError):
    """A cell or document could not be parsed."""


class ValidationError(BoatError):
    """Ingested data violates the design space or role declarations."""


class MigrationError(BoatError):
    """A persisted document has an incompatible schema version."""


class RevisionConflictError(BoatError):
    """A campaign write raced another writer (compare-and-swap failed)."""

    def __init__(self, message: str, current_revision: int | None = None):
        super().__init__(message)
        self.current_revision = current_revision


class ExtrapolationWarning(UserWarning):
    """A posterior query lies outside the box the model was fitted on."""
