"""Exception hierarchy shared by every layer of the package."""


class TemporaError(Exception):
    """Base class for all errors raised by :mod:`tempora`."""


class FieldMismatch(TemporaError, ValueError):
    """Two operands live in different prime fields."""


class NonInvertible(TemporaError, ZeroDivisionError):
    """Inverse requested for an element with no inverse."""


class RootFindingError(TemporaError):
    """Randomized splitting did not converge within the retry cap."""


class PrimeGenerationError(TemporaError):
    """No prime found within the retry cap."""


class InvalidKey(TemporaError, ValueError):
    """RSA key material violates its invariants."""


class SolveCancelled(TemporaError):
    """A sequential squaring run was stopped by its progress callback."""


class TamperDetected(TemporaError):
    """Authenticated decryption failed for a baseline puzzle."""


class TamperSuspected(TemporaError):
    """An unblinded puzzle polynomial does not have the honest shape."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ReceiverInputZero(TemporaError, ValueError):
    """OLE+ receiver input is zero, so its inverse does not exist."""


class ProtocolAbort(TemporaError):
    """A protocol run stopped; ``party`` and ``phase`` say where."""

    def __init__(self, message, party=None, phase=None):
        super().__init__(message)
        self.party = party
        self.phase = phase


class OpeningMismatch(ProtocolAbort):
    """A coin-toss reveal does not open its commitment."""


class SolutionExtractionFailure(TemporaError):
    """No extracted root opens a leader's root commitment."""


class InvalidParameters(TemporaError, ValueError):
    """Public or configuration parameters were rejected."""
