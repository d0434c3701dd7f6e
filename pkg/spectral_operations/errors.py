# spectral_operations/errors.py

from typing import List, Optional, Sequence


class MTCError(Exception):
    """Base class for every error raised by the solver."""


class ConfigurationError(MTCError, ValueError):
    """A numeric parameter is outside its admissible range."""


class ConfigError(ConfigurationError):
    """A run configuration document is malformed or violates a constraint."""

    def __init__(self, key_path: str, message: str):
        self.key_path = key_path
        super().__init__(f"{key_path}: {message}")


class DimensionError(MTCError, ValueError):
    """A coefficient or nodal vector does not match the grid."""


class DomainError(MTCError, ValueError):
    """A closed-form oracle was evaluated outside its domain."""


class CapabilityError(MTCError):
    """An exact-solution family lacks an analytic quantity that was requested."""


class StepFailureError(MTCError):
    """Fixed-point iteration of the stage equations did not converge."""

    def __init__(self, t: float, tau: float, iterations: int, increments: Sequence[float]):
        self.t = t
        self.tau = tau
        self.iterations = iterations
        self.increments: List[float] = list(increments)
        last = self.increments[-1] if self.increments else float("nan")
        super().__init__(
            f"stage iteration failed at t={t:.6g}, tau={tau:.3g}: "
            f"{iterations} iterations, last increment {last:.3e}"
        )


class ContinuationError(MTCError):
    """Simplified Newton failed on a continuation stage."""

    def __init__(self, stage: int, sigma: float, residuals: Sequence[float], reason: str):
        self.stage = stage
        self.sigma = sigma
        self.residuals: List[float] = list(residuals)
        self.reason = reason
        last = self.residuals[-1] if self.residuals else float("nan")
        super().__init__(
            f"continuation stage {stage} (sigma={sigma:.6g}) failed: {reason}; "
            f"last residual {last:.3e} after {len(self.residuals)} iterations"
        )


class SnapshotFormatError(MTCError):
    """A snapshot file is malformed or truncated."""


class UnsupportedVersionError(SnapshotFormatError):
    def __init__(self, version: Optional[int]):
        self.version = version
        super().__init__(f"unsupported snapshot version: {version}")
