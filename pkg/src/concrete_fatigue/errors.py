"""Exception types shared across the package."""


class FatigueError(Exception):
    """Base class for all package errors."""


class SingularTangent(FatigueError):
    """Lateral stiffness or damage tangent is non-positive (material failure)."""

    def __init__(self, message, which="kappa"):
        super().__init__(message)
        self.which = which


class MissingSNEntry(FatigueError):
    """A load level has no finite fatigue life in the S-N table."""


class InvalidScenario(FatigueError):
    """A load scenario violates its structural invariants."""


class MissingGridEntry(FatigueError):
    """Dataset does not contain the canonical two-stage grid."""


class NonFiniteLoss(FatigueError):
    """Training produced a NaN or infinite loss."""


class ZeroVariance(FatigueError):
    """R^2 is undefined for targets without variance."""


class InsufficientData(FatigueError):
    """Too few usable cases to compute a statistic."""


class PredictorOutOfRange(FatigueError):
    """A predictor returned a value outside the accepted band."""


class VersionMismatch(FatigueError):
    """Model file was written by an incompatible format version."""


class CorruptFile(FatigueError):
    """Model file is truncated or malformed."""


class ConfigError(FatigueError):
    """Invalid run configuration."""


class SimulationFault(FatigueError):
    """A simulation ended in an unexpected way (runout or premature failure)."""

    def __init__(self, message, scenario=None):
        super().__init__(message if scenario is None else f"{message} [scenario: {scenario}]")
        self.scenario = scenario
