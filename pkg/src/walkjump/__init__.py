"""Walk-jump sampling toolkit.

Accumulate Gaussian-noisy measurements of a target density one at a time,
walk each conditional with a Langevin kernel while it is still log-concave,
and jump back to clean space through the posterior mean.
"""

__version__ = "0.1.0"

from .targets import (
    AnisotropicGaussian,
    GaussianMixtureTwo,
    GenericEnergy,
    TargetModel,
    UnsupportedModelError,
)
from .smoothing import (
    MeasurementAccumulator,
    SmoothingConfig,
    bayes_jump,
    hessian_conditional,
    hessian_smoothed,
    jump_from_mean,
    phi,
    sample_jump_pairs,
    score_conditional,
    score_smoothed,
)
from .score_estimation import DegenerateWeightsError, PlugInConfig, estimate_score
from .kernels import KernelParams, KernelState, NonFiniteScoreError
from .samplers import ColdUniform, FixedPoint, RunResult, SamplerConfig, run
from .metrics import SlicedW2Config, default_theta, minor_mode_fraction, sliced_w2

__all__ = [
    "AnisotropicGaussian",
    "GaussianMixtureTwo",
    "GenericEnergy",
    "TargetModel",
    "UnsupportedModelError",
    "MeasurementAccumulator",
    "SmoothingConfig",
    "bayes_jump",
    "hessian_conditional",
    "hessian_smoothed",
    "jump_from_mean",
    "phi",
    "sample_jump_pairs",
    "score_conditional",
    "score_smoothed",
    "DegenerateWeightsError",
    "PlugInConfig",
    "estimate_score",
    "KernelParams",
    "KernelState",
    "NonFiniteScoreError",
    "ColdUniform",
    "FixedPoint",
    "RunResult",
    "SamplerConfig",
    "run",
    "SlicedW2Config",
    "default_theta",
    "minor_mode_fraction",
    "sliced_w2",
    "__version__",
]
