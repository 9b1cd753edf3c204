"""
annealbench error hierarchy.

Every error carries a machine-readable ``error_class`` that the command-line
tool reports verbatim.
"""

from typing import Optional


class AnnealBenchError(Exception):
    """Base class for all annealbench failures."""

    error_class = "annealbench_error"


class DomainError(AnnealBenchError, ValueError):
    """Argument outside the domain of a formula (|m| > 1, T = 0 where undefined...)."""

    error_class = "domain_error"


class ConvergenceError(AnnealBenchError):
    """An iterative solver (bisection, Newton) did not converge."""

    error_class = "convergence_error"


class EigensolverError(AnnealBenchError):
    """Tridiagonal eigensolver failure; ``index`` is the first eigenpair that failed, if known."""

    error_class = "eigensolver_error"

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.index = index


class ParityClassificationError(AnnealBenchError):
    error_class = "parity_classification_error"


class NoInteriorMinimumError(AnnealBenchError):
    """Gap minimum sits on an endpoint of the scanned range."""

    error_class = "no_interior_minimum"


class DegenerateFitError(AnnealBenchError):
    error_class = "degenerate_fit"


class NoLZWindowError(AnnealBenchError):
    """No τ-interval where log(N·ε) is linear enough for a Landau-Zener fit."""

    error_class = "no_lz_window"


class NoBarrierError(AnnealBenchError):
    error_class = "no_barrier"


class NonMonotoneDataError(AnnealBenchError):
    error_class = "non_monotone_data"


class IntegrationError(AnnealBenchError):
    error_class = "integration_error"


class StepSizeUnderflowError(IntegrationError):
    error_class = "step_size_underflow"


class NormDriftError(IntegrationError):
    error_class = "norm_drift"


class ProbabilityLossError(IntegrationError):
    error_class = "probability_loss"


class DetailedBalanceError(AnnealBenchError):
    error_class = "detailed_balance_violation"


class OracleSizeError(AnnealBenchError, ValueError):
    error_class = "oracle_size_exceeded"


class ConfigError(AnnealBenchError):
    """Invalid run configuration; ``key`` names the offending entry."""

    error_class = "config_error"

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message)
        self.key = key
