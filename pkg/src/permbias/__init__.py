"""Permutations with bias: ranking law, sampler, likelihood test and Elo calibration."""

__version__ = "0.1.0"

from .calibration import EloObservation, LinearFit, elo_to_preferences, fit_huber, fit_ols
from .errors import PermBiasError
from .lrtest import Decision, TestConfig, TestResult, decide, exact_pvalue, lr_test, mc_pvalue, surprisal
from .model import (
    PreferenceVector,
    extreme_permutations,
    full_log_likelihood,
    likelihood,
    log_likelihood,
    validate,
)
from .sampler import KeyedDraw, RngStream, draw_keys, sample_batch, sample_permutation

__all__ = [
    "Decision",
    "EloObservation",
    "KeyedDraw",
    "LinearFit",
    "PermBiasError",
    "PreferenceVector",
    "RngStream",
    "TestConfig",
    "TestResult",
    "decide",
    "draw_keys",
    "elo_to_preferences",
    "exact_pvalue",
    "extreme_permutations",
    "fit_huber",
    "fit_ols",
    "full_log_likelihood",
    "likelihood",
    "log_likelihood",
    "lr_test",
    "mc_pvalue",
    "sample_batch",
    "sample_permutation",
    "surprisal",
    "validate",
]
