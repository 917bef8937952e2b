"""Sample-quality metrics.

The headline metric is a one-direction surrogate for the sliced 2-Wasserstein
distance: project both sample sets onto a unit vector θ, sort, and take the
RMS gap between order statistics.  The projection direction defaults to
whatever axis is hardest for the model at hand — the narrow axis of an
anisotropic Gaussian, the mode axis of a two-mode mixture.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .targets import AnisotropicGaussian, GaussianMixtureTwo, TargetModel


@dataclass(frozen=True)
class SlicedW2Config:
    theta: np.ndarray          # unit projection direction, (d,)
    n: int                     # samples per side

    def __post_init__(self):
        theta = np.atleast_1d(np.asarray(self.theta, dtype=float))
        nrm = float(np.linalg.norm(theta))
        if abs(nrm - 1.0) > 1e-12:
            raise ValueError(f"theta must be a unit vector (norm {nrm})")
        theta.flags.writeable = False
        object.__setattr__(self, "theta", theta)
        if self.n < 1:
            raise ValueError("n must be >= 1")


def sliced_w2(xs: np.ndarray, ys: np.ndarray, cfg: SlicedW2Config) -> float:
    """√( (1/n) Σ_i (X∥_(i) − Y∥_(i))² ) on the θ-projections.

    Both sets must already have equal counts (see ``match_counts``); sorting
    is the only coupling.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape[0] != ys.shape[0]:
        raise ValueError(f"sample count mismatch: {xs.shape[0]} vs {ys.shape[0]}")
    if np.isnan(xs).any() or np.isnan(ys).any():
        raise ValueError("NaN in metric input")
    px = np.sort(xs @ cfg.theta)
    py = np.sort(ys @ cfg.theta)
    return float(np.sqrt(np.mean((px - py) ** 2)))


def match_counts(xs: np.ndarray, ys: np.ndarray,
                 rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Shuffle and truncate the larger set so both sides have equal counts."""
    n = min(xs.shape[0], ys.shape[0])
    if xs.shape[0] > n:
        xs = xs[rng.permutation(xs.shape[0])[:n]]
    if ys.shape[0] > n:
        ys = ys[rng.permutation(ys.shape[0])[:n]]
    return xs, ys


def default_theta(model: TargetModel) -> np.ndarray:
    """Hardest projection direction for the built-in families.

    Anisotropic Gaussian: the basis vector of the narrowest coordinate.
    Two-mode mixture: μ/‖μ‖ — the only direction that sees both modes.
    """
    if isinstance(model, AnisotropicGaussian):
        theta = np.zeros(model.d)
        theta[int(np.argmin(model.variances))] = 1.0
        return theta
    if isinstance(model, GaussianMixtureTwo):
        nrm = np.linalg.norm(model.mu)
        if nrm == 0:
            raise ValueError("mixture with mu = 0 has no mode axis")
        return model.mu / nrm
    raise TypeError(f"no default projection direction for {type(model).__name__}")


def minor_mode_fraction(model: GaussianMixtureTwo, samples: np.ndarray) -> float:
    """Fraction of samples on the lighter mode's side of the separating
    hyperplane μᵀx = 0."""
    if not isinstance(model, GaussianMixtureTwo):
        raise TypeError("minor_mode_fraction is defined for the two-mode mixture")
    proj = np.asarray(samples, dtype=float) @ model.mu
    if model.alpha <= 0.5:
        return float(np.mean(proj > 0))
    return float(np.mean(proj < 0))
