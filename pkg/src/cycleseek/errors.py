"""Exception taxonomy shared across the package."""

from __future__ import annotations


class CycleseekError(Exception):
    """Base class for all library errors."""


class DimensionError(CycleseekError, ValueError):
    """State or matrix shape does not match the declared dimension."""


class FlowIntegrationError(CycleseekError):
    """Integration broke down (non-finite values, step underflow)."""

    def __init__(self, message: str, t: float, state=None):
        super().__init__(f"{message} at t={t!r}, state={state!r}")
        self.t = t
        self.state = state


class DomainEscapeError(CycleseekError):
    """Trajectory left the admissible region before the target time."""

    def __init__(self, escape_time: float, last_state):
        super().__init__(f"trajectory escaped at t={escape_time!r}")
        self.escape_time = escape_time
        self.last_state = last_state


class MonotonicityError(CycleseekError):
    """Scalar return-map iteration lost strict ordering beyond tolerance.

    Points at integrator accuracy: exact scalar flows preserve order.
    """


class TrapViolationError(CycleseekError):
    """A certified iterate left the trapping set; certificate diagnostic."""

    def __init__(self, message: str, iterate=None, index: int | None = None):
        super().__init__(message)
        self.iterate = iterate
        self.index = index


class CertificateRejected(CycleseekError):
    """Contraction certificate failed validation; carries the reason."""

    def __init__(self, reason: str, detail: str, report=None):
        super().__init__(f"certificate rejected ({reason}): {detail}")
        self.reason = reason
        self.report = report


class PreconditionError(CycleseekError, ValueError):
    """Operation preconditions not met; message carries margins."""


class AssumptionViolation(CycleseekError):
    """A structural model assumption failed on the supplied data."""


class InternalInconsistency(CycleseekError):
    """Two routes to the same quantity disagree beyond tolerance."""


class ReductionInvalid(CycleseekError):
    """Planar-to-scalar reduction invalid on the scan region."""


class LiftFailure(CycleseekError):
    """Angular clock stalled or failed to close while lifting."""


class ConfigError(CycleseekError, ValueError):
    """Malformed or unknown run configuration."""
