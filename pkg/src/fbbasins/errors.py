"""Exception types shared across the package."""


class FBError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(FBError):
    pass


class FixedPointViolated(FBError):
    pass


class SingularDifferential(FBError):
    pass


class CertificateViolated(FBError):
    pass


class NotInBasin(FBError):
    pass


class NoConvergenceWithinBudget(FBError):
    pass


class RatioViolation(FBError):
    """Convergence-rate fit exceeded the certified prediction; carries the report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class SupplierBoundViolated(FBError):
    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage


class NoPathAtResolution(FBError):
    """No raster path found; a finer resolution may succeed."""


class QTooCloseToK(FBError):
    pass


class CertificateSearchExhausted(FBError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class DegreeCapExceeded(FBError):
    pass


class MoverFailed(FBError):
    """Constructive search failed; carries a diagnostic dict for JSON dumps."""

    def __init__(self, message, diagnostic=None):
        super().__init__(message)
        self.diagnostic = diagnostic or {}


class GeneralPositionViolated(FBError):
    pass


class StageFailed(FBError):
    """A staged builder could not commit a stage; carries the stage index and cause."""

    def __init__(self, stage, cause, state_dump=None):
        super().__init__(f"stage {stage} failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.state_dump = state_dump


class ConfigError(FBError):
    """Bad CLI/config input (exit code 2)."""
