"""Shared exception types with CLI exit-code mapping."""


class ValidationError(ValueError):
    """Malformed or contract-violating input (CLI exit code 2)."""


class DegreeOverflowError(ValidationError):
    """Spectral mass outside the declared coefficient window."""

    def __init__(self, message, leaked_magnitude=0.0):
        super().__init__(message)
        self.leaked_magnitude = leaked_magnitude


class CRCViolationError(RuntimeError):
    """Leading-coefficient ratio is not constant across the other variable
    (CLI exit code 3)."""

    def __init__(self, message, deviation=0.0):
        super().__init__(message)
        self.deviation = deviation


class NumericalInstabilityError(RuntimeError):
    """Tracked norm identity drifted beyond tolerance (CLI exit code 4)."""

    def __init__(self, message, kappa=0.0):
        super().__init__(message)
        self.kappa = kappa
