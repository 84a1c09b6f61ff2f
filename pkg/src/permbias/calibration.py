"""Elo rating to preference weights.

Log season-win probability is modelled as linear in Elo rating. The slope is
all that matters downstream: preference weights are ``exp(slope * elo)``
(centred for numeric range), and any intercept is a common multiplicative
factor that the ranking law ignores.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateDesign, ProbabilityOutOfRange, TooFewPoints
from .model import PreferenceVector

HUBER_T = 1.345
MAD_TO_SIGMA = 1.482602218505602  # 1 / Phi^-1(3/4)


@dataclass(frozen=True)
class EloObservation:
    team: str
    elo: float
    win_probability: float

    def __post_init__(self):
        if not math.isfinite(self.elo):
            raise ValueError(f"{self.team}: Elo rating must be finite, got {self.elo!r}")
        if not 0 < self.win_probability < 1:
            raise ProbabilityOutOfRange(
                f"{self.team}: win probability must lie in (0, 1), got {self.win_probability!r}"
            )


@dataclass(frozen=True)
class LinearFit:
    """``log(win_probability) ~ intercept + slope * elo``."""

    slope: float
    intercept: float
    method: str
    iterations: int
    converged: bool
    robust_weights: tuple[float, ...]
    r_squared: float
    scale: float

    def predict(self, elo) -> np.ndarray:
        return self.intercept + self.slope * np.asarray(elo, dtype=float)


def _design(data: Sequence[EloObservation]):
    if len(data) < 3:
        raise TooFewPoints(f"need at least 3 observations, got {len(data)}")
    x = np.array([d.elo for d in data], dtype=float)
    y = np.log(np.array([d.win_probability for d in data], dtype=float))
    if np.ptp(x) == 0:
        raise DegenerateDesign("all Elo ratings are equal; slope is not identifiable")
    return x, y


def _wls(xc: np.ndarray, y: np.ndarray, w: np.ndarray) -> np.ndarray:
    sw = np.sqrt(w)
    A = np.column_stack([np.ones_like(xc), xc]) * sw[:, None]
    beta, *_ = np.linalg.lstsq(A, y * sw, rcond=None)
    return beta


def _r_squared(y: np.ndarray, fitted: np.ndarray) -> float:
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot == 0:
        return 1.0
    return 1.0 - float(((y - fitted) ** 2).sum()) / ss_tot


def _finish(beta, x_mean, xc, y, method, iterations, converged, weights, scale) -> LinearFit:
    a, b = float(beta[0]), float(beta[1])
    return LinearFit(
        slope=b,
        intercept=a - b * x_mean,
        method=method,
        iterations=iterations,
        converged=converged,
        robust_weights=tuple(float(v) for v in weights),
        r_squared=_r_squared(y, a + b * xc),
        scale=scale,
    )


def fit_ols(data: Sequence[EloObservation]) -> LinearFit:
    x, y = _design(data)
    x_mean = float(x.mean())
    xc = x - x_mean
    ones = np.ones_like(x)
    beta = _wls(xc, y, ones)
    resid = y - beta[0] - beta[1] * xc
    scale = math.sqrt(float((resid**2).sum()) / (len(x) - 2)) if len(x) > 2 else 0.0
    return _finish(beta, x_mean, xc, y, "ols", 1, True, ones, scale)


def robust_scale(resid: np.ndarray) -> float:
    """Normalised median absolute residual (MAD about zero).

    Falls back to the normalised mean absolute residual when more than half of
    the residuals are exactly zero, and returns 0 only for a perfect fit.
    """
    a = np.abs(resid)
    s = MAD_TO_SIGMA * float(np.median(a))
    if s == 0:
        s = math.sqrt(math.pi / 2) * float(a.mean())
    return s


def huber_weights(resid: np.ndarray, threshold: float) -> np.ndarray:
    a = np.abs(resid)
    w = np.ones_like(a)
    big = a > threshold
    w[big] = threshold / a[big]
    return w


def fit_huber(
    data: Sequence[EloObservation],
    tuning: float = HUBER_T,
    tol: float = 1e-10,
    max_iter: int = 100,
) -> LinearFit:
    """Huber M-estimate by iteratively reweighted least squares.

    Starts from OLS. Each iteration re-estimates the residual scale by the
    normalised MAD, downweights residuals beyond ``tuning * scale`` and refits.
    Stops when no coefficient moves by more than ``tol`` relative to its size.
    A non-converged fit is returned with ``converged=False`` and a warning.
    """
    x, y = _design(data)
    x_mean = float(x.mean())
    xc = x - x_mean
    w = np.ones_like(x)
    beta = _wls(xc, y, w)
    scale = 0.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        resid = y - beta[0] - beta[1] * xc
        scale = robust_scale(resid)
        w = huber_weights(resid, tuning * scale) if scale > 0 else np.ones_like(x)
        new = _wls(xc, y, w)
        step = np.abs(new - beta)
        beta = new
        if np.all(step <= tol * np.maximum(np.abs(beta), np.finfo(float).tiny)):
            converged = True
            break
    if not converged:
        warnings.warn(f"Huber IRLS did not converge in {max_iter} iterations", RuntimeWarning, stacklevel=2)
    return _finish(beta, x_mean, xc, y, "huber", it, converged, w, scale)


def elo_to_preferences(fit: LinearFit | float, elos: Sequence[tuple[str, float]]) -> PreferenceVector:
    """Preference weights ``exp(slope * (elo - mean elo))`` for each team.

    ``fit`` may be a :class:`LinearFit` or a bare slope.
    """
    slope = fit.slope if isinstance(fit, LinearFit) else float(fit)
    if not math.isfinite(slope):
        raise ValueError(f"slope must be finite, got {slope!r}")
    teams = [t for t, _ in elos]
    e = np.array([v for _, v in elos], dtype=float)
    with np.errstate(over="ignore"):
        weights = np.exp(slope * (e - e.mean()))
    return PreferenceVector(weights, tuple(teams))


def synthetic_observations(
    n: int = 20,
    slope: float = 0.01,
    intercept: float = -22.0,
    noise: float = 0.1,
    outliers: Sequence[tuple[int, float]] = (),
    seed: int = 0,
    elo_range: tuple[float, float] = (1600.0, 2000.0),
) -> list[EloObservation]:
    """Fixture generator: Elo evenly spread, log-probabilities on a noisy line.

    ``outliers`` is a list of ``(index, shift)`` pairs added to the chosen
    log-probabilities. Parameters must keep every probability below 1.
    """
    rng = np.random.default_rng(seed)
    elo = np.linspace(*elo_range, n)
    logp = intercept + slope * elo + (rng.normal(0, noise, n) if noise > 0 else 0.0)
    for i, shift in outliers:
        logp[i] += shift
    return [EloObservation(f"team{i + 1:02d}", float(e), float(math.exp(lp))) for i, (e, lp) in enumerate(zip(elo, logp))]
