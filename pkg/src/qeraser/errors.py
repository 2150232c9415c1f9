"""Exception hierarchy shared by the library and the command line runner."""


class QuantumError(Exception):
    """Base class for all library errors."""


class LayoutError(QuantumError, ValueError):
    """Unknown, duplicate or mismatched subsystem labels."""


class DimensionError(QuantumError, ValueError):
    """Matrix or vector size does not match the layout it is attached to."""


class NotUnitaryError(QuantumError, ValueError):
    pass


class NotProjectorError(QuantumError, ValueError):
    pass


class BasisError(QuantumError, ValueError):
    """Measurement basis is not orthonormal or not complete."""


class DomainError(QuantumError, ValueError):
    """Time or parameter outside the domain of an evolving state."""


class InvariantViolation(QuantumError, AssertionError):
    """A checked physical invariant failed at run time."""


class ScenarioError(QuantumError, ValueError):
    """Scenario text failed to parse or validate.

    Carries the 1-based line and column of the offending token when known.
    """

    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(str(self))

    def __str__(self):
        if self.line is None:
            return self.message
        if self.column is None:
            return f"line {self.line}: {self.message}"
        return f"line {self.line}, column {self.column}: {self.message}"
