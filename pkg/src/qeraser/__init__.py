"""State-vector simulation of quantum erasers, delayed choice and observer experiments."""

from .errors import (
    BasisError,
    DimensionError,
    DomainError,
    InvariantViolation,
    LayoutError,
    NotProjectorError,
    NotUnitaryError,
    QuantumError,
    ScenarioError,
)
from .hilbert import (
    DensityOperator,
    MeasurementResult,
    Operator,
    ProjectionResult,
    StateVector,
    SystemLayout,
    apply,
    fidelity,
    inner,
    lift,
    measure,
    norm,
    partial_trace,
    project,
    tensor,
)

__version__ = "0.1.0"
