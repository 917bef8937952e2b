"""Closed-form geometry of accumulated-measurement densities.

Everything here is exact arithmetic on model parameters (plus one optional
Monte-Carlo routine): spectra and condition numbers of the joint and
conditional precisions for the Gaussian family, the decreasing curvature
bound ζ(m) certifying when conditionals go log-concave, a growth-condition
Hessian bound for generic energies, the jump-error bound, and the expected
conditional Hessian chain.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from . import smoothing
from .smoothing import SmoothingConfig
from .targets import AnisotropicGaussian, GaussianMixtureTwo, TargetModel, UnsupportedModelError


@dataclass(frozen=True)
class SpectrumReport:
    """Eigenvalues (ascending), condition number, degeneracy count."""

    eigenvalues: np.ndarray
    kappa: float
    degenerate_count: int


@dataclass(frozen=True)
class BoundReport:
    """A signed curvature bound; certified means strictly negative."""

    value: float
    is_negative_definite_certified: bool
    derivative: float | None = None


# --------------------------------------------------------------------------
# Condition numbers (Gaussian family)
# --------------------------------------------------------------------------

def condition_number_smoothed(model: AnisotropicGaussian, sigma: float) -> float:
    """κ of the σ-smoothed Gaussian: (1 + σ⁻²τ_max²)/(1 + σ⁻²τ_min²)."""
    _require_gaussian(model)
    s2 = sigma**2
    return (1 + model.var_max / s2) / (1 + model.var_min / s2)


def condition_number_conditional(model: AnisotropicGaussian, sigma: float, t: int) -> float:
    """κ of p(y_t | y_{1:t−1}); strictly decreasing in t, always > 1.

    Per coordinate the conditional precision is σ⁻²(1 − a_i) with
    a_i = 1/(t + σ²/τ_i²), so κ = (1 − a_min)/(1 − a_max); at t = 1 this is
    the smoothed-density condition number.
    """
    _require_gaussian(model)
    if t < 1:
        raise ValueError("t must be >= 1")
    s2 = sigma**2
    q_narrow = t + s2 / model.var_min
    q_wide = t + s2 / model.var_max
    # (1 − 1/q_narrow)/(1 − 1/q_wide), kept as one product for accuracy
    return ((q_narrow - 1) * q_wide) / (q_narrow * (q_wide - 1))


def joint_precision_spectrum(model: AnisotropicGaussian, sigma: float, m: int,
                             validate: bool = False,
                             dense_budget: int = 5000) -> SpectrumReport:
    """Full spectrum of the joint precision of (y_1, …, y_m).

    Per coordinate i the m×m precision block is σ⁻²(I − a_i·11ᵀ) with
    a_i = 1/(m + σ²/τ_i²): m−1 eigenvalues σ⁻² and one 1/(σ² + m·τ_i²).
    Altogether (m−1)·d degenerate copies of σ⁻² plus d small values, giving
    κ = 1 + m·σ⁻²·τ_max².  With ``validate`` the closed form is checked
    against a dense eigendecomposition of the assembled matrix.
    """
    _require_gaussian(model)
    if m < 2:
        raise ValueError("joint spectrum needs m >= 2; use condition_number_smoothed")
    d = model.d
    s2 = sigma**2
    small = 1.0 / (s2 + m * model.variances)
    eigs = np.sort(np.concatenate([np.full((m - 1) * d, 1.0 / s2), small]))
    kappa = 1 + m * model.var_max / s2
    report = SpectrumReport(eigs, float(kappa), (m - 1) * d)
    if validate:
        if m * d > dense_budget:
            raise ValueError(f"dense validation limited to m*d <= {dense_budget}")
        dense = np.sort(np.linalg.eigvalsh(assemble_joint_precision(model, sigma, m)))
        err = float(np.max(np.abs(dense - eigs)))
        if err > 1e-10:
            raise ArithmeticError(f"closed-form spectrum off by {err:.3e}")
    return report


def assemble_joint_precision(model: AnisotropicGaussian, sigma: float, m: int) -> np.ndarray:
    """Explicit (md)×(md) joint precision, blocks ordered (measurement, coord)."""
    _require_gaussian(model)
    d = model.d
    s2 = sigma**2
    F = np.zeros((m * d, m * d))
    eye_m = np.eye(m)
    ones_m = np.ones((m, m))
    for i, tau2 in enumerate(model.variances):
        a = 1.0 / (m + s2 / tau2)
        block = (eye_m - a * ones_m) / s2
        F[i::d, i::d] = block
    return F


# --------------------------------------------------------------------------
# Curvature bounds
# --------------------------------------------------------------------------

def conditional_hessian_bound(m: int, sigma: float | None, tau: float, R: float,
                              sigma2: float | None = None) -> BoundReport:
    """ζ(m): upper bound on the conditional Hessian's largest eigenvalue for
    targets supported within radius R smeared by component noise τ.

        ζ(m) = (1/σ²)·(τ²/(mτ² + σ²) − 1) + R²/(mτ² + σ²)²
             = (R²σ² − ((m−1)τ² + σ²)(mτ² + σ²)) / (σ²(mτ² + σ²)²)

    The single-fraction form is what gets evaluated: at a boundary such as
    σ² = R² − τ² with m = 1 the numerator cancels exactly in floats.  Pass
    ``sigma2`` directly to keep such cancellations intact (σ → σ² round-trips
    through sqrt are not exact).  Decreasing in m (derivative reported);
    ζ(m) < 0 certifies that the next conditional is strongly log-concave.
    For the symmetric two-mode mixture the bound is attained at ȳ = 0.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if sigma2 is None:
        if sigma is None:
            raise ValueError("need sigma or sigma2")
        sigma2 = sigma * sigma
    if sigma2 <= 0:
        raise ValueError("sigma must be positive")
    s2 = sigma2
    t2 = tau**2
    denom = m * t2 + s2
    value = (R**2 * s2 - ((m - 1) * t2 + s2) * denom) / (s2 * denom**2)
    deriv = -t2 * (2 * R**2 * s2 + s2 * t2 + m * t2**2) / (s2 * denom**3)
    if tau > 0 and deriv > 1e-12:
        raise ArithmeticError(f"curvature bound failed to decrease: ζ'({m}) = {deriv}")
    return BoundReport(float(value), bool(value < 0), float(deriv))


def conditional_hessian_profile(model: GaussianMixtureTwo, sigma: float, m: int,
                                grid: np.ndarray) -> np.ndarray:
    """Largest eigenvalue of the conditional Hessian at each running mean
    ``g * mu/‖mu‖`` for g in ``grid`` (offsets along the mode axis)."""
    if not isinstance(model, GaussianMixtureTwo):
        raise UnsupportedModelError("tightness check is defined for the two-mode mixture")
    grid = np.asarray(grid, dtype=float)
    axis = model.mu / np.linalg.norm(model.mu)
    points = grid[:, None] * axis
    cfg = SmoothingConfig(sigma, m)
    # σ⁻²(1/m − 1)·I + m⁻²·∇²φ(ȳ; σ/√m), batched over the grid
    h = smoothing.hessian_smoothed(model, points, cfg.sigma_eff) / m**2
    coef = (1.0 / m - 1.0) / sigma**2
    h[..., np.arange(model.d), np.arange(model.d)] += coef
    return np.linalg.eigvalsh(h)[..., -1]


def conditional_hessian_max(model: GaussianMixtureTwo, sigma: float, m: int,
                            grid: np.ndarray | None = None) -> float:
    """Largest eigenvalue of the conditional Hessian, maximized over ȳ along
    the mode axis (where the maximum lives; it sits at ȳ = 0 for α = ½)."""
    if grid is None:
        if not isinstance(model, GaussianMixtureTwo):
            raise UnsupportedModelError("tightness check is defined for the two-mode mixture")
        reach = float(np.linalg.norm(model.mu)) + 5 * (sigma + math.sqrt(model.tau2))
        grid = np.linspace(-reach, reach, 4001)
    return float(np.max(conditional_hessian_profile(model, sigma, m, grid)))


def hessian_bound_from_growth(L: float, mu_growth: float, Delta: float,
                              x0: np.ndarray, y: np.ndarray, sigma: float) -> float:
    """Scalar multiplying I in the smoothed-Hessian upper bound for an
    L-smooth energy whose gradient grows like ‖∇f(x)‖ ≥ μ‖x−x₀‖ − Δ:

        (−1 + 3Ld/(μ²σ²) + 3Δ²/(μ²σ²) + 3‖x₀−y‖²/(μ²σ⁶)) / σ².
    """
    if mu_growth <= 0 or sigma <= 0:
        raise ValueError("mu_growth and sigma must be positive")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    d = x0.size
    m2 = mu_growth**2
    s2 = sigma**2
    bracket = (-1.0 + 3 * L * d / (m2 * s2) + 3 * Delta**2 / (m2 * s2)
               + 3 * float(np.sum((x0 - y) ** 2)) / (m2 * s2**3))
    return bracket / s2


def jump_mse_bound(L: float, sigma: float, m: int, d: int) -> float:
    """Upper bound on E‖x̂ − X‖² for an L-smooth target:
    σ²d/m + 2dL(σ²/m)².  A function of σ²/m only."""
    if m < 1:
        raise ValueError("m must be >= 1")
    r = sigma**2 / m
    return d * r + 2 * d * L * r**2


def mean_jump_error(model: TargetModel, sigma: float, m: int, n: int,
                    rng: np.random.Generator) -> float:
    """Coupled Monte-Carlo estimate of E‖x̂ − X‖² under exact measurements."""
    x, xhat = smoothing.sample_jump_pairs(model, SmoothingConfig(sigma, m), n, rng)
    return float(np.mean(np.sum((xhat - x) ** 2, axis=-1)))


# --------------------------------------------------------------------------
# Expected conditional Hessians along the accumulation chain
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ExpectedHessianChain:
    """E[∇² log p(y_t | y_{1:t−1})] for t = 1..m, plus trace diagnostics.

    ``trace_diff_se`` holds standard errors of consecutive trace differences
    under the coupled sampling scheme (zeros for the exact Gaussian path).
    """

    matrices: list
    traces: np.ndarray
    trace_diff_se: np.ndarray


def expected_conditional_hessians(model: TargetModel, sigma: float, m: int,
                                  n_mc: int = 0,
                                  rng: np.random.Generator | None = None) -> ExpectedHessianChain:
    """Chain of expected conditional Hessians under the forward model.

    Gaussian targets: exact — the conditional Hessian is constant in y, the
    per-coordinate value −σ⁻²(1 − 1/(t + σ²/τ_i²)).  Mixture targets: Monte
    Carlo over y_{1:t} with common random numbers across t (the same clean
    draw and noise vector serve every t), so consecutive trace differences
    are estimated with far less variance than independent chains would give.
    """
    s2 = sigma**2
    if isinstance(model, AnisotropicGaussian):
        mats = []
        traces = np.empty(m)
        for t in range(1, m + 1):
            a = 1.0 / (t + s2 / model.variances)
            h = np.diag(-(1 - a) / s2)
            mats.append(h)
            traces[t - 1] = np.trace(h)
        return ExpectedHessianChain(mats, traces, np.zeros(max(m - 1, 0)))

    if isinstance(model, GaussianMixtureTwo):
        if n_mc < 1 or rng is None:
            raise ValueError("mixture chain needs n_mc >= 1 and an rng")
        d = model.d
        x = model.sample_exact(n_mc, rng)
        xi = rng.standard_normal((n_mc, d))
        mats = []
        trace_samples = np.empty((m, n_mc))
        for t in range(1, m + 1):
            ybar = x + (sigma / math.sqrt(t)) * xi
            h = smoothing.hessian_smoothed(model, ybar, sigma / math.sqrt(t))
            h = (1.0 / t - 1.0) / s2 * np.eye(d) + h / t**2
            mats.append(h.mean(axis=0))
            trace_samples[t - 1] = np.trace(h, axis1=-2, axis2=-1)
        traces = trace_samples.mean(axis=1)
        diffs = trace_samples[1:] - trace_samples[:-1]
        se = diffs.std(axis=1, ddof=1) / math.sqrt(n_mc)
        return ExpectedHessianChain(mats, traces, se)

    raise UnsupportedModelError(
        f"expected Hessian chain needs an analytic model, got {type(model).__name__}")


def _require_gaussian(model) -> None:
    if not isinstance(model, AnisotropicGaussian):
        raise UnsupportedModelError("this quantity is defined for the Gaussian family")
