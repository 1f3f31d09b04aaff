"""Time-lock puzzles whose linear combinations can be computed and verified."""

from .errors import (
    FieldMismatch,
    InvalidKey,
    InvalidParameters,
    NonInvertible,
    OpeningMismatch,
    ProtocolAbort,
    ReceiverInputZero,
    RootFindingError,
    SolutionExtractionFailure,
    SolveCancelled,
    TamperDetected,
    TamperSuspected,
    TemporaError,
)
from .field import FieldElement, FieldParams
from .poly import DensePoly, PointValuePoly, find_roots, interpolate
from .timelock import ClientKeys, keygen

__version__ = "0.1.0"
