"""Exception types raised across the package."""


class QknowError(ValueError):
    """Base class for all validation and inference errors."""


class StateError(QknowError):
    """A vector or matrix does not describe a valid quantum state."""


class DimensionError(QknowError):
    """Operands live in Hilbert spaces of different dimension."""


class MeasurementError(QknowError):
    """An effect or measurement violates the POVM conditions."""


class ImpossibleOutcomeError(QknowError):
    """Conditioning on an outcome that has (numerically) zero probability."""


class ScenarioError(QknowError):
    """A scenario document is malformed or inconsistent.

    ``location`` names the offending place in the document, e.g.
    ``observers[1] (Bob).weights``.
    """

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)
