"""Telegraph process with alternating switching rates: exact laws and simulation."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .counting import (AltSum, MLEstimate, RatePair, SwitchRecord, alt_sum, mle_rates, pmf,
                       simulate_switches)
from .errors import (AcceptanceError, CapabilityError, ConvergenceError, EstimationError,
                     ScopeError, StatisticalFailure, TelegraphError, ValidationError)
from .extremes import ExtremesQuery, SupportClass, classify_support
from .montecarlo import EmpiricalSummary, run_batch, simulate_batch
from .special_fns import MLParams, mittag_leffler
from .telegraph import MixedLaw, PathSample, ProcessParams

__all__ = [
    "BACKEND",
    "AcceptanceError",
    "AltSum",
    "CapabilityError",
    "ConvergenceError",
    "EmpiricalSummary",
    "EstimationError",
    "ExtremesQuery",
    "MLEstimate",
    "MLParams",
    "MixedLaw",
    "PathSample",
    "ProcessParams",
    "RatePair",
    "ScopeError",
    "StatisticalFailure",
    "SupportClass",
    "SwitchRecord",
    "TelegraphError",
    "ValidationError",
    "alt_sum",
    "classify_support",
    "mittag_leffler",
    "mle_rates",
    "pmf",
    "run_batch",
    "simulate_batch",
    "simulate_switches",
]
