"""Target densities.

Every target is an unnormalized density p(x) ∝ e^{-f(x)} exposing the energy
f, its gradient, and an exact sampler for ground truth.  Two analytic families
are built in — a centered Gaussian with diagonal covariance and a symmetric
pair of Gaussian modes — plus a generic escape hatch for user-supplied
energies.  Energies drop all normalizing constants; scores are unaffected.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.special import logsumexp


class UnsupportedModelError(TypeError):
    """Raised when an operation needs analytic structure the model lacks."""


def _check_dim(x: np.ndarray, d: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != d:
        raise ValueError(f"expected points of dimension {d}, got shape {x.shape}")
    return x


@dataclass(frozen=True)
class AnisotropicGaussian:
    """Centered Gaussian with covariance diag(variances).

    Parameters
    ----------
    variances : array_like of shape (d,)
        Per-coordinate variances, all strictly positive.
    """

    variances: np.ndarray

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.variances, dtype=float))
        if v.ndim != 1 or v.size == 0:
            raise ValueError("variances must be a non-empty vector")
        if not np.all(v > 0):
            raise ValueError("variances must be strictly positive")
        v.flags.writeable = False
        object.__setattr__(self, "variances", v)

    @classmethod
    def elliptical(cls, d: int, narrow: float = 0.1) -> "AnisotropicGaussian":
        """The narrow-first-axis benchmark: variances (narrow, 1, ..., 1)."""
        if d < 1:
            raise ValueError("d must be >= 1")
        v = np.ones(d)
        v[0] = narrow
        return cls(v)

    @property
    def d(self) -> int:
        return self.variances.size

    @property
    def var_min(self) -> float:
        return float(self.variances.min())

    @property
    def var_max(self) -> float:
        return float(self.variances.max())

    def energy(self, x) -> np.ndarray:
        """f(x) = ½ Σ x_i²/τ_i², normalizer dropped."""
        x = _check_dim(x, self.d)
        return 0.5 * np.sum(x * x / self.variances, axis=-1)

    def grad_energy(self, x) -> np.ndarray:
        x = _check_dim(x, self.d)
        return x / self.variances

    def grad_lipschitz(self) -> float:
        """Smallest L with ‖∇f(x) − ∇f(y)‖ ≤ L‖x−y‖: here 1/min τ_i²."""
        return 1.0 / self.var_min

    def sample_exact(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if n < 0:
            raise ValueError("n must be >= 0")
        return rng.standard_normal((n, self.d)) * np.sqrt(self.variances)


@dataclass(frozen=True)
class GaussianMixtureTwo:
    """Two-component mixture α·N(μ, τ²I) + (1−α)·N(−μ, τ²I).

    Parameters
    ----------
    mu : array_like of shape (d,)
        Location of the first mode; the second sits at −μ.
    tau2 : float
        Shared component variance τ² > 0.
    alpha : float
        Weight of the +μ component, 0 < α < 1.
    """

    mu: np.ndarray
    tau2: float = 1.0
    alpha: float = 0.5

    def __post_init__(self):
        mu = np.atleast_1d(np.asarray(self.mu, dtype=float))
        if mu.ndim != 1 or mu.size == 0:
            raise ValueError("mu must be a non-empty vector")
        if not self.tau2 > 0:
            raise ValueError("tau2 must be positive")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        mu.flags.writeable = False
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "tau2", float(self.tau2))
        object.__setattr__(self, "alpha", float(self.alpha))

    @classmethod
    def symmetric_modes(cls, d: int, offset: float = 3.0, tau2: float = 1.0,
                        alpha: float = 0.5) -> "GaussianMixtureTwo":
        """Modes at ±offset·1_d."""
        return cls(np.full(d, float(offset)), tau2=tau2, alpha=alpha)

    @property
    def d(self) -> int:
        return self.mu.size

    @property
    def mode_distance_sq(self) -> float:
        """R² = μᵀμ (mode locations have norm R)."""
        return float(self.mu @ self.mu)

    # log-odds offset entering every responsibility computation
    @property
    def _logit_alpha_half(self) -> float:
        return 0.5 * float(np.log(self.alpha) - np.log1p(-self.alpha))

    def energy(self, x) -> np.ndarray:
        """−log[α e^{−‖x−μ‖²/2τ²} + (1−α) e^{−‖x+μ‖²/2τ²}], via logsumexp."""
        x = _check_dim(x, self.d)
        a = np.log(self.alpha) - np.sum((x - self.mu) ** 2, axis=-1) / (2 * self.tau2)
        b = np.log1p(-self.alpha) - np.sum((x + self.mu) ** 2, axis=-1) / (2 * self.tau2)
        return -logsumexp(np.stack([a, b], axis=-1), axis=-1)

    def grad_energy(self, x) -> np.ndarray:
        x = _check_dim(x, self.d)
        # responsibility difference q₊ − q₋ = tanh(μᵀx/τ² + ½ log(α/(1−α)))
        t = np.tanh(x @ self.mu / self.tau2 + self._logit_alpha_half)
        return (x - self.mu * t[..., None]) / self.tau2

    def grad_lipschitz(self) -> float:
        """Bound on ‖∇²f‖: max eigenvalue magnitude over x is ≤ 1/τ² + R²/τ⁴."""
        return 1.0 / self.tau2 + self.mode_distance_sq / self.tau2**2

    def sample_exact(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if n < 0:
            raise ValueError("n must be >= 0")
        signs = np.where(rng.random(n) < self.alpha, 1.0, -1.0)
        return signs[:, None] * self.mu + np.sqrt(self.tau2) * rng.standard_normal((n, self.d))


@dataclass(frozen=True)
class GenericEnergy:
    """User-supplied energy model: f and ∇f as callables over (..., d) arrays.

    No analytic smoothed quantities exist for this family; downstream code
    must fall back to the Monte-Carlo score estimator.
    """

    f: Callable[[np.ndarray], np.ndarray]
    grad_f: Callable[[np.ndarray], np.ndarray]
    d: int

    def energy(self, x) -> np.ndarray:
        x = _check_dim(x, self.d)
        return np.asarray(self.f(x), dtype=float)

    def grad_energy(self, x) -> np.ndarray:
        x = _check_dim(x, self.d)
        return np.asarray(self.grad_f(x), dtype=float)

    def sample_exact(self, n: int, rng: np.random.Generator) -> np.ndarray:
        raise UnsupportedModelError("generic energies have no exact sampler")


TargetModel = Union[AnisotropicGaussian, GaussianMixtureTwo, GenericEnergy]

ANALYTIC_MODELS = (AnisotropicGaussian, GaussianMixtureTwo)
