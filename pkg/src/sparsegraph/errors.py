"""Exception types raised by sparsegraph."""


class SparseGraphError(Exception):
    """Base class for all sparsegraph errors."""


class GraphFormatError(SparseGraphError):
    """Input file could not be parsed. Carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DegenerateInputError(SparseGraphError):
    """Input describes an empty or otherwise unusable graph."""


class ValidationError(SparseGraphError):
    """Input data violates a structural invariant (self-loop, bad weight, ...)."""


class DisconnectedGraphError(SparseGraphError):
    """Operation requires a connected graph."""


class InvalidConfigError(SparseGraphError):
    """Configuration values out of range or inconsistent."""


class SolverError(SparseGraphError):
    """Factorization or solve failed (singular pivot, vertex not spanned, ...)."""


class DegenerateProbeError(SparseGraphError):
    """Probe vector collapsed to (numerical) zero; re-seed and retry."""


class DegeneratePartitionError(SparseGraphError):
    """Sign cut produced a single-sided partition."""
