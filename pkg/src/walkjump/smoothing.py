"""Noisy-measurement smoothing machinery.

A clean draw X from the target is observed through m independent Gaussian
measurements Y_t = X + N(0, σ²I).  Everything the walks and jumps need lives
here:

* ``phi(model, y, sigma)`` — the log of the σ-smoothed unnormalized density,
  φ(y; σ) = log E_{x∼N(y, σ²I)}[e^{−f(x)}], in closed form for the two
  analytic target families;
* its gradient (the smoothed score) and Hessian;
* the running-mean accumulator that summarizes y_{1:t} without storing it;
* the conditional score/energy of the next measurement given the previous
  ones, which depends on the history only through the running mean;
* the posterior-mean jump x̂ = ȳ + (σ²/m)·∇φ(ȳ; σ/√m) mapping noisy means
  back to clean space.

The effective noise level of the accumulated mean is σ/√m: joint densities
with equal σ/√m share the same jump distribution, which is what makes
one-at-a-time accumulation worthwhile.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy.special import logsumexp

from .targets import (
    AnisotropicGaussian,
    GaussianMixtureTwo,
    TargetModel,
    UnsupportedModelError,
    _check_dim,
)


@dataclass(frozen=True)
class SmoothingConfig:
    """Noise level σ and measurement count m.

    The effective noise of the accumulated mean, σ/√m, is always derived,
    never stored.
    """

    sigma: float
    m: int = 1

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if int(self.m) < 1 or self.m != int(self.m):
            raise ValueError("m must be a positive integer")
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "m", int(self.m))

    @property
    def sigma_eff(self) -> float:
        """σ/√m, the noise level of the mean of m measurements."""
        return self.sigma / math.sqrt(self.m)


class MeasurementAccumulator:
    """Running mean ȳ_{1:t} of the measurements pushed so far.

    Holds exactly (t, mean) — never the history.  ``mean`` may be a single
    (d,) vector or a (walkers, d) batch; ``t`` is shared across the batch.
    """

    __slots__ = ("t", "mean")

    def __init__(self, d: int, n_walkers: int | None = None):
        self.t = 0
        shape = (d,) if n_walkers is None else (n_walkers, d)
        self.mean = np.zeros(shape)

    @classmethod
    def from_mean(cls, mean: np.ndarray, t: int) -> "MeasurementAccumulator":
        if t < 1:
            raise ValueError("from_mean requires t >= 1")
        mean = np.asarray(mean, dtype=float)
        acc = cls.__new__(cls)
        acc.t = int(t)
        acc.mean = mean
        return acc

    def push(self, y: np.ndarray) -> None:
        """Fold one measurement in: t += 1; mean += (y − mean)/t."""
        y = np.asarray(y, dtype=float)
        if y.shape != self.mean.shape:
            raise ValueError(f"measurement shape {y.shape} != state shape {self.mean.shape}")
        self.t += 1
        self.mean = self.mean + (y - self.mean) / self.t


# --------------------------------------------------------------------------
# Smoothed density: closed forms for the analytic families
# --------------------------------------------------------------------------

def phi(model: TargetModel, y, sigma: float) -> np.ndarray:
    """log E_{x∼N(y, σ²I)}[e^{−f(x)}], including the model's fixed constant.

    Gaussian target: smoothing a Gaussian widens each variance by σ², so
    φ(y) = ½ Σ_i [log(τ_i²/(τ_i²+σ²)) − y_i²/(τ_i²+σ²)].

    Two-mode target: each mode widens to variance s² = σ²+τ², so
    φ(y) = logsumexp over modes of (log weight − ‖y∓μ‖²/2s²) + (d/2)·log(τ²/s²).
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if isinstance(model, AnisotropicGaussian):
        y = _check_dim(y, model.d)
        v = model.variances + sigma**2
        return 0.5 * (np.sum(np.log(model.variances / v))
                      - np.sum(y * y / v, axis=-1))
    if isinstance(model, GaussianMixtureTwo):
        y = _check_dim(y, model.d)
        s2 = model.tau2 + sigma**2
        a = np.log(model.alpha) - np.sum((y - model.mu) ** 2, axis=-1) / (2 * s2)
        b = np.log1p(-model.alpha) - np.sum((y + model.mu) ** 2, axis=-1) / (2 * s2)
        const = 0.5 * model.d * np.log(model.tau2 / s2)
        return logsumexp(np.stack([a, b], axis=-1), axis=-1) + const
    raise UnsupportedModelError(
        f"no closed-form smoothed density for {type(model).__name__}; "
        "use the Monte-Carlo score estimator instead")


def score_smoothed(model: TargetModel, y, sigma: float) -> np.ndarray:
    """∇φ(y; σ), the score of the σ-smoothed density."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if isinstance(model, AnisotropicGaussian):
        y = _check_dim(y, model.d)
        return -y / (model.variances + sigma**2)
    if isinstance(model, GaussianMixtureTwo):
        y = _check_dim(y, model.d)
        s2 = model.tau2 + sigma**2
        t = np.tanh(y @ model.mu / s2 + model._logit_alpha_half)
        return (model.mu * t[..., None] - y) / s2
    raise UnsupportedModelError(
        f"no closed-form smoothed score for {type(model).__name__}")


def _sech2(u: np.ndarray) -> np.ndarray:
    # 1/cosh²(u) with exponentials of non-positive arguments only
    e = np.exp(-np.abs(u))
    return (2.0 * e / (1.0 + e * e)) ** 2


def hessian_smoothed(model: TargetModel, y, sigma: float) -> np.ndarray:
    """∇²φ(y; σ) as a (..., d, d) array.

    Gaussian: the constant matrix −diag(1/(τ_i²+σ²)).  Two-mode: writing
    s² = σ²+τ² and u = μᵀy/s² + ½log(α/(1−α)),

        ∇²φ = (1/s²)·(−I + sech²(u)·μμᵀ/s²),

    which peaks at the responsibility crossover (u = 0, i.e. y = 0 for
    α = ½) — the least log-concave point of the smoothed landscape.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if isinstance(model, AnisotropicGaussian):
        y = _check_dim(y, model.d)
        h = np.diag(-1.0 / (model.variances + sigma**2))
        return np.broadcast_to(h, y.shape[:-1] + (model.d, model.d)).copy()
    if isinstance(model, GaussianMixtureTwo):
        y = _check_dim(y, model.d)
        d = model.d
        s2 = model.tau2 + sigma**2
        u = y @ model.mu / s2 + model._logit_alpha_half
        outer = np.multiply.outer(model.mu, model.mu) / s2
        eye = np.eye(d)
        return (_sech2(u)[..., None, None] * outer - eye) / s2
    raise UnsupportedModelError(
        f"no closed-form smoothed Hessian for {type(model).__name__}")


# --------------------------------------------------------------------------
# Conditionals of the next measurement given the accumulated mean
# --------------------------------------------------------------------------

def conditional_score_from_mean(model: TargetModel, y_t, mean_with_current,
                                t: int, sigma: float) -> np.ndarray:
    """Score of log p(y_t | y_{1:t−1}) when ȳ_{1:t} (including y_t) is known.

    Equals (1/t)·∇φ(ȳ_{1:t}; σ/√t) + (ȳ_{1:t} − y_t)/σ².
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    g = score_smoothed(model, mean_with_current, sigma / math.sqrt(t))
    return g / t + (mean_with_current - y_t) / sigma**2


def score_conditional(model: TargetModel, y_t, acc: MeasurementAccumulator,
                      config: SmoothingConfig) -> np.ndarray:
    """Conditional score at y_t; ``acc.mean`` must already include y_t."""
    if acc.t < 1:
        raise ValueError("accumulator is empty (t = 0)")
    return conditional_score_from_mean(model, np.asarray(y_t, dtype=float),
                                       acc.mean, acc.t, config.sigma)


def conditional_energy(model: TargetModel, y_t, prev_mean, t: int,
                       sigma: float) -> np.ndarray:
    """−log p(y_t | y_{1:t−1}) up to a constant, as a function of y_t.

    With ȳ(y_t) = prev_mean + (y_t − prev_mean)/t,

        −[φ(ȳ; σ/√t) + t‖ȳ‖²/(2σ²) − ‖y_t‖²/(2σ²)].

    Its negative gradient is exactly ``conditional_score_from_mean``; the
    Metropolis-adjusted kernel walks this energy.
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    y_t = np.asarray(y_t, dtype=float)
    ybar = prev_mean + (y_t - prev_mean) / t
    quad = (t * np.sum(ybar * ybar, axis=-1) - np.sum(y_t * y_t, axis=-1)) / (2 * sigma**2)
    return -(phi(model, ybar, sigma / math.sqrt(t)) + quad)


def hessian_conditional(model: TargetModel, acc: MeasurementAccumulator,
                        config: SmoothingConfig) -> np.ndarray:
    """∇²_{y_m} log p(y_m | y_{1:m−1}) at the accumulated mean.

    Equals σ⁻²(1/m − 1)·I + m⁻²·∇²φ(ȳ_{1:m}; σ/√m): accumulation both
    shrinks the rough ∇²φ term by m⁻² and adds an increasingly negative
    isotropic part, which is why later conditionals are better conditioned.
    """
    m = config.m
    if acc.t != m:
        raise ValueError(f"accumulator holds t={acc.t} measurements, config expects m={m}")
    sig2 = config.sigma**2
    h = hessian_smoothed(model, acc.mean, config.sigma_eff)
    d = h.shape[-1]
    return (1.0 / m - 1.0) / sig2 * np.eye(d) + h / m**2


# --------------------------------------------------------------------------
# The jump back to clean space
# --------------------------------------------------------------------------

def jump_from_mean(model: TargetModel, ybar, sigma: float, m: int) -> np.ndarray:
    """Posterior mean E[X | y_{1:m}] given the measurement mean ȳ_{1:m}.

    x̂ = ȳ + (σ²/m)·∇φ(ȳ; σ/√m).  For the Gaussian target this reduces to
    the shrinkage map C(C + (σ²/m)I)⁻¹ ȳ.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    ybar = np.asarray(ybar, dtype=float)
    return ybar + (sigma**2 / m) * score_smoothed(model, ybar, sigma / math.sqrt(m))


def bayes_jump(model: TargetModel, acc: MeasurementAccumulator,
               config: SmoothingConfig) -> np.ndarray:
    """Jump from a full accumulator (acc.t must equal config.m)."""
    if acc.t != config.m:
        raise ValueError(f"jump requires t = m, got t={acc.t}, m={config.m}")
    return jump_from_mean(model, acc.mean, config.sigma, config.m)


def sample_jump_pairs(model: TargetModel, config: SmoothingConfig, n: int,
                      rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Exact (X, x̂) pairs under the forward measurement model.

    Draws X from the target and the measurement mean directly as
    ȳ = X + (σ/√m)·ξ, then applies the jump.  Used for universality and
    jump-error studies where no MCMC is needed.
    """
    x = model.sample_exact(n, rng)
    ybar = x + config.sigma_eff * rng.standard_normal(x.shape)
    return x, jump_from_mean(model, ybar, config.sigma, config.m)
