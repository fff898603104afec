"""Exception types shared across the package."""


class ContractLabError(Exception):
    """Base class for package-specific errors."""


class DimensionMismatch(ContractLabError, ValueError):
    """An array has the wrong length/shape for the configured type count."""


class QualityBelowThreshold(ContractLabError, ValueError):
    """A contract item's quality is below the platform threshold."""


class EvaluatorUnavailable(ContractLabError, RuntimeError):
    """External quality evaluator unreachable after all retries."""


class UnparseableResponse(ContractLabError, ValueError):
    """Evaluator response contains no numeric rating."""


class RatingOutOfScale(ContractLabError, ValueError):
    """Evaluator returned a rating outside the configured scale."""


class NonFiniteGradient(ContractLabError, RuntimeError):
    """A parameter update produced NaN/inf gradients and was aborted."""


class ConfigError(ContractLabError, ValueError):
    """Run configuration failed validation."""


class EmptyBuffer(ContractLabError, ValueError):
    """Operation requires a non-empty rollout buffer or metrics log."""
