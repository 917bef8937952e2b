"""Noisy-measurement machinery against independent quadrature oracles.

The closed-form φ/score/Hessian implementations are compared with direct
numerical integration of the measurement model, so any sign or constant slip
in the analytic derivations shows up here.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import (
    fd_grad,
    fd_jacobian,
    quad_log_joint,
    quad_phi,
    quad_posterior_moments,
)
from walkjump import smoothing
from walkjump.metrics import SlicedW2Config, sliced_w2
from walkjump.smoothing import (
    MeasurementAccumulator,
    SmoothingConfig,
    bayes_jump,
    conditional_energy,
    hessian_conditional,
    hessian_smoothed,
    jump_from_mean,
    phi,
    sample_jump_pairs,
    score_conditional,
    score_smoothed,
)
from walkjump.targets import (
    AnisotropicGaussian,
    GaussianMixtureTwo,
    GenericEnergy,
    UnsupportedModelError,
)

GAUSS_1 = AnisotropicGaussian((1.0,))
GAUSS_03 = AnisotropicGaussian((0.3,))
MIX_HALF = GaussianMixtureTwo(np.array([3.0]), tau2=1.0, alpha=0.5)
MIX_FIFTH = GaussianMixtureTwo(np.array([3.0]), tau2=1.0, alpha=0.2)
ALL_1D = [GAUSS_1, GAUSS_03, MIX_HALF, MIX_FIFTH]


# ---------------------------------------------------------------- phi / score

@pytest.mark.parametrize("model", ALL_1D)
@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
def test_phi_matches_quadrature(model, sigma):
    for y in (-4.0, -1.0, 0.0, 0.7, 3.0):
        want = quad_phi(model, y, sigma)
        got = float(phi(model, np.array([y]), sigma))
        assert got == pytest.approx(want, abs=1e-9)


def test_phi_gaussian_shape():
    # unit prior + unit noise: φ(y) − φ(0) = −y²/4
    for y in (-2.0, 0.5, 3.0):
        diff = float(phi(GAUSS_1, np.array([y]), 1.0) - phi(GAUSS_1, np.array([0.0]), 1.0))
        assert diff == pytest.approx(-y * y / 4.0, abs=1e-12)


def test_phi_mixture_symmetric():
    ys = np.linspace(-5, 5, 11)[:, None]
    a = phi(MIX_HALF, ys, 0.8)
    b = phi(MIX_HALF, -ys, 0.8)
    np.testing.assert_array_equal(a, b)


def test_score_pinned_gaussian():
    assert score_smoothed(GAUSS_1, np.array([2.0]), 1.0)[0] == -1.0


@pytest.mark.parametrize("model,d", [
    (AnisotropicGaussian((0.1, 1.0)), 2),
    (GaussianMixtureTwo(np.array([3.0, 3.0]), tau2=1.0, alpha=0.2), 2),
])
def test_score_matches_fd_phi(model, d):
    rng = np.random.default_rng(5)
    for _ in range(100):
        y = 3.0 * rng.standard_normal(d)
        sigma = rng.uniform(0.5, 3.0)
        g = score_smoothed(model, y, sigma)
        fd = fd_grad(lambda p: float(phi(model, p, sigma)), y, h=1e-5)
        assert np.linalg.norm(fd - g) <= 1e-5 * (1.0 + np.linalg.norm(g))


def test_score_mixture_pinned_point():
    # the α=1/5 mixture at y=3, σ=2: match finite differences of φ to 1e−6
    g = score_smoothed(MIX_FIFTH, np.array([3.0]), 2.0)[0]
    fd = fd_grad(lambda p: float(phi(MIX_FIFTH, p, 2.0)), np.array([3.0]), h=1e-4)[0]
    assert g == pytest.approx(fd, abs=1e-6)


def test_score_batched():
    ys = np.random.default_rng(6).standard_normal((7, 2))
    model = GaussianMixtureTwo(np.array([3.0, 3.0]), tau2=1.0, alpha=0.2)
    batch = score_smoothed(model, ys, 1.5)
    assert batch.shape == (7, 2)
    np.testing.assert_allclose(batch[4], score_smoothed(model, ys[4], 1.5), rtol=1e-14)


def test_hessian_matches_fd_score():
    models = [AnisotropicGaussian((0.1, 1.0)),
              GaussianMixtureTwo(np.array([3.0, -1.0]), tau2=0.7, alpha=0.35)]
    rng = np.random.default_rng(7)
    for model in models:
        for sigma in (0.7, 2.0):
            for _ in range(20):
                y = 2.5 * rng.standard_normal(model.d)
                h = hessian_smoothed(model, y, sigma)
                fd = fd_jacobian(lambda p: score_smoothed(model, p, sigma), y, h=1e-5)
                assert np.max(np.abs(h - fd)) <= 1e-6 * (1.0 + np.max(np.abs(h)))


def test_hessian_mixture_pinned_positive_curvature():
    # component variance + noise variance = 1 at the origin: (R²/s² − 1)/s² = 8
    model = GaussianMixtureTwo(np.array([3.0]), tau2=0.5, alpha=0.5)
    h = hessian_smoothed(model, np.array([0.0]), math.sqrt(0.5))
    assert h.shape == (1, 1)
    assert h[0, 0] == 8.0


def test_hessian_smoothed_batched():
    model = GaussianMixtureTwo(np.array([3.0, 3.0]), tau2=1.0, alpha=0.2)
    ys = np.random.default_rng(8).standard_normal((5, 2))
    hb = hessian_smoothed(model, ys, 1.2)
    assert hb.shape == (5, 2, 2)
    np.testing.assert_allclose(hb[2], hessian_smoothed(model, ys[2], 1.2), rtol=1e-14)


def test_large_projection_no_overflow():
    # cosh(μᵀy/s²) overflows naive evaluation around |u| ~ 710
    model = GaussianMixtureTwo(np.array([3.0]), tau2=1.0, alpha=0.5)
    y = np.array([1e4])
    h = hessian_smoothed(model, y, 0.5)
    assert np.all(np.isfinite(h))
    assert np.all(np.isfinite(score_smoothed(model, y, 0.5)))


# ------------------------------------------------------------------ SmoothingConfig

def test_config_validation():
    cfg = SmoothingConfig(sigma=2.0, m=4)
    assert cfg.sigma_eff == 1.0
    with pytest.raises(ValueError):
        SmoothingConfig(sigma=0.0, m=1)
    with pytest.raises(ValueError):
        SmoothingConfig(sigma=1.0, m=0)
    with pytest.raises(ValueError):
        SmoothingConfig(sigma=1.0, m=1.5)


# ------------------------------------------------------------------ accumulator

@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False),
                min_size=1, max_size=60))
@settings(max_examples=200)
def test_accumulator_matches_batch_mean(values):
    acc = MeasurementAccumulator(d=1)
    for v in values:
        acc.push(np.array([v]))
    batch = float(np.mean(values))
    scale = max(1.0, abs(batch))
    assert abs(float(acc.mean[0]) - batch) <= 1e-12 * scale
    assert acc.t == len(values)


def test_accumulator_long_run_exactness():
    rng = np.random.default_rng(10)
    ys = rng.standard_normal((10**4, 3))
    acc = MeasurementAccumulator(d=3)
    for y in ys:
        acc.push(y)
    np.testing.assert_allclose(acc.mean, ys.mean(axis=0), rtol=0, atol=1e-12)


def test_accumulator_shapes_and_validation():
    acc = MeasurementAccumulator(d=2, n_walkers=4)
    assert acc.t == 0
    np.testing.assert_array_equal(acc.mean, np.zeros((4, 2)))
    acc.push(np.ones((4, 2)))
    np.testing.assert_array_equal(acc.mean, np.ones((4, 2)))
    with pytest.raises(ValueError):
        acc.push(np.ones((3, 2)))
    with pytest.raises(ValueError):
        MeasurementAccumulator.from_mean(np.zeros(2), t=0)
    got = MeasurementAccumulator.from_mean(np.array([1.0, 2.0]), t=5)
    assert got.t == 5


# ------------------------------------------------------------------ conditionals

def test_conditional_score_t1_reduces_exactly():
    rng = np.random.default_rng(11)
    model = GaussianMixtureTwo(np.array([3.0, 3.0]), tau2=1.0, alpha=0.2)
    for _ in range(10):
        y = 2.0 * rng.standard_normal(2)
        acc = MeasurementAccumulator.from_mean(y.copy(), t=1)
        got = score_conditional(model, y, acc, SmoothingConfig(sigma=1.3, m=1))
        np.testing.assert_array_equal(got, score_smoothed(model, y, 1.3))


@pytest.mark.parametrize("model", [GAUSS_03, MIX_FIFTH])
def test_conditional_score_matches_quadrature_fd(model):
    sigma = 1.5
    rng = np.random.default_rng(12)
    for t in (2, 5):
        history = list(rng.normal(0.0, 2.0, size=t - 1))
        for y0 in (-2.0, 0.4, 3.0):
            def log_joint(yt):
                return quad_log_joint(model, history + [float(yt[0])], sigma)

            fd = fd_grad(log_joint, np.array([y0]), h=1e-4)
            mean = np.array([(sum(history) + y0) / t])
            acc = MeasurementAccumulator.from_mean(mean, t=t)
            got = score_conditional(model, np.array([y0]), acc,
                                    SmoothingConfig(sigma=sigma, m=t))
            assert float(got[0]) == pytest.approx(float(fd[0]), abs=1e-5)


def test_conditional_energy_differences_match_quadrature():
    # energies are defined up to a y_t-independent constant, so compare
    # *differences* in the current measurement against the quadrature joint
    model = MIX_FIFTH
    sigma, t = 2.0, 4
    history = [0.5, -1.0, 2.0]
    prev = np.array([sum(history) / 3.0])
    pairs = [(-1.0, 2.5), (0.0, 3.5), (1.0, -3.0)]
    for ya, yb in pairs:
        de = float(conditional_energy(model, np.array([ya]), prev, t, sigma)
                   - conditional_energy(model, np.array([yb]), prev, t, sigma))
        dlog = quad_log_joint(model, history + [ya], sigma) \
            - quad_log_joint(model, history + [yb], sigma)
        assert de == pytest.approx(-dlog, abs=1e-8)


def test_conditional_energy_gradient_is_negative_score():
    model = GaussianMixtureTwo(np.array([3.0, 3.0]), tau2=1.0, alpha=0.2)
    sigma, t = 1.2, 3
    prev = np.array([0.3, -0.8])
    rng = np.random.default_rng(13)
    for _ in range(10):
        y = 2.0 * rng.standard_normal(2)
        fd = fd_grad(lambda p: float(conditional_energy(model, p, prev, t, sigma)), y, h=1e-5)
        mean = prev + (y - prev) / t
        acc = MeasurementAccumulator.from_mean(mean, t=t)
        g = score_conditional(model, y, acc, SmoothingConfig(sigma=sigma, m=t))
        assert np.linalg.norm(fd + g) <= 1e-6 * (1.0 + np.linalg.norm(g))


def test_joint_density_permutation_and_sufficiency():
    # the quadrature joint is permutation-invariant and depends on the
    # measurements only through their mean and sum of squares
    model = MIX_HALF
    sigma = 1.3
    ys = [0.0, 1.0, 2.0]
    base = quad_log_joint(model, ys, sigma)
    for perm in ([2.0, 0.0, 1.0], [1.0, 2.0, 0.0]):
        assert quad_log_joint(model, perm, sigma) == pytest.approx(base, abs=1e-10)
    # a different multiset with the same mean (1.0) and sum of squares (5.0):
    # solve a+b+c=3, a²+b²+c²=5 with a=0.3
    a = 0.3
    b = (2.7 + math.sqrt(2 * 4.91 - 2.7**2)) / 2.0
    c = 2.7 - b
    assert a + b + c == pytest.approx(3.0, abs=1e-12)
    assert a * a + b * b + c * c == pytest.approx(5.0, abs=1e-12)
    assert quad_log_joint(model, [a, b, c], sigma) == pytest.approx(base, abs=1e-9)


# ------------------------------------------------------------------ Hessians

def test_hessian_conditional_m1_reduces():
    model = MIX_FIFTH
    y = np.array([1.1])
    acc = MeasurementAccumulator.from_mean(y, t=1)
    got = hessian_conditional(model, acc, SmoothingConfig(sigma=0.9, m=1))
    np.testing.assert_array_equal(got, hessian_smoothed(model, y, 0.9))


def test_hessian_conditional_t_mismatch():
    acc = MeasurementAccumulator.from_mean(np.array([0.0]), t=2)
    with pytest.raises(ValueError):
        hessian_conditional(MIX_HALF, acc, SmoothingConfig(sigma=1.0, m=3))


@pytest.mark.parametrize("alpha", [0.5, 0.2])
def test_hessian_identity_posterior_covariance(alpha):
    # conditional curvature = −σ⁻² + σ⁻⁴·var(X | ȳ), variance by quadrature
    model = GaussianMixtureTwo(np.array([3.0]), tau2=1.0, alpha=alpha)
    sigma = 2.0
    for t in (1, 2, 5):
        for ybar in (0.0, 1.5, -2.0):
            acc = MeasurementAccumulator.from_mean(np.array([ybar]), t=t)
            got = float(hessian_conditional(model, acc,
                                            SmoothingConfig(sigma=sigma, m=t))[0, 0])
            _, var = quad_posterior_moments(model, ybar, sigma / math.sqrt(t))
            want = -1.0 / sigma**2 + var / sigma**4
            assert got == pytest.approx(want, abs=1e-6)


def test_hessian_conditional_matches_fd_of_conditional_score():
    model = MIX_FIFTH
    sigma, t = 2.0, 4
    prev = np.array([0.7])
    rng = np.random.default_rng(14)
    for _ in range(50):
        y = np.array([4.0 * rng.standard_normal()])

        def cond_score(p):
            mean = prev + (p - prev) / t
            acc = MeasurementAccumulator.from_mean(mean, t=t)
            return score_conditional(model, p, acc, SmoothingConfig(sigma=sigma, m=t))

        fd = fd_jacobian(cond_score, y, h=1e-4)
        mean = prev + (y - prev) / t
        acc = MeasurementAccumulator.from_mean(mean, t=t)
        got = hessian_conditional(model, acc, SmoothingConfig(sigma=sigma, m=t))
        assert np.max(np.abs(got - fd)) <= 1e-5 * (1.0 + np.max(np.abs(got)))


# ------------------------------------------------------------------ jump

def test_jump_gaussian_pinned():
    # unit prior, effective noise 1 (σ=2, m=4): posterior mean halves ȳ
    acc = MeasurementAccumulator.from_mean(np.array([2.0]), t=4)
    got = bayes_jump(GAUSS_1, acc, SmoothingConfig(sigma=2.0, m=4))
    assert float(got[0]) == 1.0


def test_jump_gaussian_closed_form_vector():
    model = AnisotropicGaussian((0.1, 1.0, 4.0))
    rng = np.random.default_rng(15)
    sigma, m = 1.5, 9
    s2 = sigma**2 / m
    for _ in range(10):
        ybar = 2.0 * rng.standard_normal(3)
        want = model.variances / (model.variances + s2) * ybar
        got = jump_from_mean(model, ybar, sigma, m)
        np.testing.assert_allclose(got, want, rtol=1e-12)


def test_jump_noiseless_limit_and_symmetry():
    ybar = np.array([1.7])
    out = jump_from_mean(MIX_FIFTH, ybar, 1e-8, 1)
    assert abs(float(out[0]) - 1.7) < 1e-10
    assert float(jump_from_mean(MIX_HALF, np.array([0.0]), 1.0, 1)[0]) == 0.0


def test_jump_mixture_matches_posterior_mean_quadrature():
    model = MIX_FIFTH
    for sigma, m in ((1.0, 1), (2.0, 4)):
        for ybar in (-2.0, 0.0, 0.9, 3.5):
            got = float(jump_from_mean(model, np.array([ybar]), sigma, m)[0])
            want, _ = quad_posterior_moments(model, ybar, sigma / math.sqrt(m))
            assert got == pytest.approx(want, abs=1e-8)


def test_bayes_jump_requires_matching_t():
    acc = MeasurementAccumulator.from_mean(np.array([0.0]), t=3)
    with pytest.raises(ValueError):
        bayes_jump(GAUSS_1, acc, SmoothingConfig(sigma=1.0, m=4))


def test_jump_unsupported_model():
    gen = GenericEnergy(f=lambda x: np.sum(x * x, axis=-1), grad_f=lambda x: 2 * x, d=1)
    with pytest.raises(UnsupportedModelError):
        jump_from_mean(gen, np.array([1.0]), 1.0, 1)


def test_jump_pairs_universality_cheap():
    # matched effective noise: (σ=1, m=4) vs (σ=0.5, m=1) give the same jump law
    model = AnisotropicGaussian((0.1, 1.0))
    n = 30_000
    x4 = sample_jump_pairs(model, SmoothingConfig(sigma=1.0, m=4), n,
                           np.random.default_rng(16))[1]
    x1 = sample_jump_pairs(model, SmoothingConfig(sigma=0.5, m=1), n,
                           np.random.default_rng(17))[1]
    cfg = SlicedW2Config(theta=np.array([1.0, 0.0]), n=n)
    assert sliced_w2(x4, x1, cfg) <= 0.05
