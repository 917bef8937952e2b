"""Monte-Carlo plug-in estimate of the smoothed score.

For targets without a closed-form smoothed density, the score of the
σ-smoothed density at y is estimated from n Gaussian perturbations ε_i:

    ĝ(y; σ) = (1/σ) · Σ_i ε_i e^{−f(y+σε_i)} / Σ_i e^{−f(y+σε_i)},

with numerator and denominator sharing the same ε draws.  All weight sums are
taken in the log domain: the denominator via one logsumexp, the numerator by
splitting each coordinate's ε into positive and negative parts so every log
is of a positive number.  The result is exp of differences of logsumexps and
cannot overflow; if every weight underflows outright the estimate is
meaningless and a ``DegenerateWeightsError`` is raised instead of returning
zeros.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy.special import logsumexp

from .smoothing import MeasurementAccumulator, SmoothingConfig
from .targets import TargetModel


class DegenerateWeightsError(FloatingPointError):
    """All Monte-Carlo weights vanished; the estimate would be 0/0."""


@dataclass(frozen=True)
class PlugInConfig:
    """Sample count and seed for the plug-in estimator.

    A config owns its stream: two configs built from the same seed produce
    bitwise-identical estimates call for call, while repeated calls on one
    config draw fresh ε each time.
    """

    n: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        object.__setattr__(self, "_rng", np.random.default_rng(self.seed))

    @property
    def rng(self) -> np.random.Generator:
        return self._rng  # type: ignore[attr-defined]


def _plugin_score(model: TargetModel, y: np.ndarray, sigma: float, n: int,
                  rng: np.random.Generator) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    eps = rng.standard_normal(y.shape[:-1] + (n, y.shape[-1]))
    logw = -model.energy(y[..., None, :] + sigma * eps)        # (..., n)
    log_den = logsumexp(logw, axis=-1)                         # (...,)
    if not np.all(np.isfinite(log_den)):
        raise DegenerateWeightsError(
            f"all {n} plug-in weights underflowed at sigma={sigma}")
    with np.errstate(divide="ignore"):
        log_eps = np.log(np.abs(eps))                          # (..., n, d)
    lw = logw[..., :, None]
    pos = logsumexp(np.where(eps > 0, lw + log_eps, -np.inf), axis=-2)
    neg = logsumexp(np.where(eps < 0, lw + log_eps, -np.inf), axis=-2)
    return (np.exp(pos - log_den[..., None]) - np.exp(neg - log_den[..., None])) / sigma


def estimate_score(model: TargetModel, y, sigma: float, cfg: PlugInConfig,
                   rng: np.random.Generator | None = None) -> np.ndarray:
    """Plug-in estimate of the smoothed score ∇φ(y; σ).

    ``rng`` overrides the config's own stream (used by samplers so one run
    stream governs the whole chain).
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return _plugin_score(model, y, sigma, cfg.n, rng if rng is not None else cfg.rng)


def estimate_score_conditional(model: TargetModel, y_t, acc: MeasurementAccumulator,
                               config: SmoothingConfig, cfg: PlugInConfig,
                               rng: np.random.Generator | None = None) -> np.ndarray:
    """Conditional score with the smoothed score replaced by its estimate.

    (1/t)·ĝ(ȳ_{1:t}; σ/√t) + (ȳ_{1:t} − y_t)/σ², with ``acc.mean`` holding
    ȳ_{1:t} including the current y_t.
    """
    t = acc.t
    if t < 1:
        raise ValueError("accumulator is empty (t = 0)")
    sigma = config.sigma
    g = estimate_score(model, acc.mean, sigma / math.sqrt(t), cfg, rng)
    return g / t + (acc.mean - np.asarray(y_t, dtype=float)) / sigma**2
