"""Exception types shared across the package."""


class ConfdiamError(Exception):
    """Base class; ``code`` is a stable machine-readable identifier."""

    code = "error"

    def __init__(self, message, code=None):
        super().__init__(message)
        if code is not None:
            self.code = code


class DomainError(ConfdiamError, ValueError):
    code = "domain"


class UnsupportedAmbientError(ConfdiamError, NotImplementedError):
    code = "unsupported-ambient"


class MeshError(ConfdiamError, ValueError):
    code = "mesh-invalid"


class ConnectivityError(MeshError):
    code = "mesh-disconnected"


class GateViolation(ConfdiamError):
    code = "gate-violation"


class ConstructionError(ConfdiamError):
    code = "construction-failed"


class StalledSolverError(ConfdiamError):
    """Raised when no admissible descent step exists; carries the partial result."""

    code = "solver-stalled"

    def __init__(self, message, mesh=None, history=None):
        super().__init__(message)
        self.mesh = mesh
        self.history = history
