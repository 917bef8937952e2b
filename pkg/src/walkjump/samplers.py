"""Sampling schemes: walks over measurements, then the jump.

* ``oat``    — one measurement at a time: for t = 1..m, cold-start y_t, run
  n_t kernel steps against the conditional score of p(y_t | y_{1:t−1}), commit
  the final iterate into the running mean, and after the last round jump to
  clean space.  Per-walker state is (t, mean, kernel state) — O(d) memory no
  matter how large m is.
* ``aao``    — all measurements at once: one chain in (m·d)-dimensional space
  on the joint density, every block cold-started, jump at the end.
* ``m1``     — the single-measurement special case (m = 1): walk the smoothed
  density once, jump.
* ``direct`` — the kernel on the raw target energy, no smoothing, no jump.

During a round the conditional score needs the mean *including* the moving
iterate; that mean is computed on the fly as prev + (y − prev)/t so the
committed history never drifts.
"""

from __future__ import annotations

from dataclasses import dataclass
import math
from typing import Union

import numpy as np

from . import smoothing
from .kernels import (
    KernelParams,
    KernelState,
    NonFiniteScoreError,
    make_stepper,
    prime_mala,
)
from .metrics import default_theta
from .score_estimation import _plugin_score
from .smoothing import SmoothingConfig
from .targets import TargetModel

SCHEMES = ("oat", "aao", "m1", "direct")


@dataclass(frozen=True)
class ColdUniform:
    """Per-round start: Unif([−1,1]^d) plus N(0, σ²I) (σ = 0 for direct)."""


@dataclass(frozen=True)
class FixedPoint:
    point: np.ndarray

    def __post_init__(self):
        p = np.atleast_1d(np.asarray(self.point, dtype=float))
        p.flags.writeable = False
        object.__setattr__(self, "point", p)


InitSpec = Union[ColdUniform, FixedPoint]


@dataclass(frozen=True)
class SamplerConfig:
    scheme: str
    smoothing: SmoothingConfig
    kernel: KernelParams
    n_t: int                      # steps per measurement (oat) or total steps
    n_walkers: int
    init: InitSpec = ColdUniform()
    score_mode: str = "analytic"  # "analytic" | "plugin"
    score_n_mc: int = 500

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.scheme == "m1" and self.smoothing.m != 1:
            raise ValueError("m1 requires smoothing.m == 1")
        if self.n_t < 1 or self.n_walkers < 1:
            raise ValueError("n_t and n_walkers must be >= 1")
        if self.score_mode not in ("analytic", "plugin"):
            raise ValueError(f"unknown score mode {self.score_mode!r}")

    @property
    def total_steps(self) -> int:
        return self.smoothing.m * self.n_t if self.scheme in ("oat", "m1") else self.n_t


@dataclass
class TrajectoryLog:
    """Subsampled walk history: positions and the clean-space jump estimate."""

    measurement: np.ndarray       # (k,) round index (0 for direct)
    step: np.ndarray              # (k,) global kernel-step index
    positions: np.ndarray         # (k, w, d)
    jumps: np.ndarray             # (k, w, d)


class TrajectoryRecorder:
    """Collects steps 1, 1+stride, 2·stride+1, …  — the first kernel step is
    always recorded so trajectories show where walkers started; the row count
    is n_walkers · ceil(total_steps/stride).  stride=None records nothing."""

    def __init__(self, stride: int | None):
        if stride is not None and stride < 1:
            raise ValueError("stride must be >= 1")
        self.stride = stride
        self._rows: list[tuple[int, int, np.ndarray, np.ndarray]] = []

    def wants(self, global_step: int) -> bool:
        return self.stride is not None and (global_step - 1) % self.stride == 0

    def record(self, measurement: int, global_step: int,
               positions: np.ndarray, jumps: np.ndarray) -> None:
        self._rows.append((measurement, global_step, positions.copy(), jumps.copy()))

    def finalize(self) -> TrajectoryLog | None:
        if not self._rows:
            return None
        ms, steps, pos, jmp = zip(*self._rows)
        return TrajectoryLog(np.array(ms), np.array(steps), np.stack(pos), np.stack(jmp))


@dataclass
class RunResult:
    samples: np.ndarray           # (n_walkers, d) clean samples (raw for direct)
    grad_evals: int
    mean: np.ndarray | None = None        # final ȳ_{1:m} (walk schemes)
    trajectory: TrajectoryLog | None = None


def _init_positions(cfg: SamplerConfig, shape: tuple, rng: np.random.Generator,
                    noise_sigma: float) -> np.ndarray:
    if isinstance(cfg.init, FixedPoint):
        if cfg.init.point.shape[0] != shape[-1]:
            raise ValueError("fixed init point has wrong dimension")
        return np.broadcast_to(cfg.init.point, shape).copy()
    pos = rng.uniform(-1.0, 1.0, shape)
    if noise_sigma > 0:
        pos += noise_sigma * rng.standard_normal(shape)
    return pos


def _conditional_callables(model, cfg: SamplerConfig, prev_mean, t: int,
                           rng: np.random.Generator):
    """score/energy/grad closures for round t, with ȳ computed on the fly."""
    sigma = cfg.smoothing.sigma
    inv_t = 1.0 / t
    inv_sig2 = 1.0 / sigma**2
    sigma_t = sigma / math.sqrt(t)

    if cfg.score_mode == "plugin":
        n_mc = cfg.score_n_mc

        def score_fn(y):
            ybar = prev_mean + (y - prev_mean) * inv_t
            g = _plugin_score(model, ybar, sigma_t, n_mc, rng)
            return g * inv_t + (ybar - y) * inv_sig2
    else:
        def score_fn(y):
            ybar = prev_mean + (y - prev_mean) * inv_t
            g = smoothing.score_smoothed(model, ybar, sigma_t)
            return g * inv_t + (ybar - y) * inv_sig2

    def energy_fn(y):
        return smoothing.conditional_energy(model, y, prev_mean, t, sigma)

    def grad_fn(y):
        return -score_fn(y)

    return score_fn, energy_fn, grad_fn


def _run_measurement_rounds(model, cfg: SamplerConfig, rng: np.random.Generator,
                            recorder: TrajectoryRecorder) -> tuple[np.ndarray, int]:
    """The oat/m1 walk: returns (ȳ_{1:m}, grad_evals)."""
    w, d = cfg.n_walkers, model.d
    sigma, m = cfg.smoothing.sigma, cfg.smoothing.m
    prev_mean = np.zeros((w, d))
    grad_evals = 0
    global_step = 0
    mala = cfg.kernel.kind == "mala"

    for t in range(1, m + 1):
        pos = _init_positions(cfg, (w, d), rng, sigma)
        state = KernelState.at(pos, rng)           # velocity reset each round
        score_fn, energy_fn, grad_fn = _conditional_callables(model, cfg, prev_mean, t, rng)
        stepper = make_stepper(cfg.kernel, score_fn, energy_fn, grad_fn)
        if mala:
            prime_mala(state, energy_fn, grad_fn)
        try:
            for _ in range(cfg.n_t):
                stepper(state)
                global_step += 1
                if recorder.wants(global_step):
                    ybar = prev_mean + (state.position - prev_mean) / t
                    recorder.record(t, global_step, state.position,
                                    smoothing.jump_from_mean(model, ybar, sigma, t))
        except NonFiniteScoreError as exc:
            raise NonFiniteScoreError(
                f"{exc} [measurement t={t}/{m}, step {global_step}]") from exc
        prev_mean += (state.position - prev_mean) / t
        grad_evals += state.grad_evals
    return prev_mean, grad_evals


def _run_joint(model, cfg: SamplerConfig, rng: np.random.Generator,
               recorder: TrajectoryRecorder) -> tuple[np.ndarray, int]:
    """The aao walk in (m·d)-space: returns (ȳ_{1:m}, grad_evals)."""
    w, d = cfg.n_walkers, model.d
    sigma, m = cfg.smoothing.sigma, cfg.smoothing.m
    inv_sig2 = 1.0 / sigma**2
    sigma_m = cfg.smoothing.sigma_eff
    plugin = cfg.score_mode == "plugin"
    n_mc = cfg.score_n_mc

    def joint_score(flat):
        y = flat.reshape(w, m, d)
        ybar = y.mean(axis=1)
        if plugin:
            g = _plugin_score(model, ybar, sigma_m, n_mc, rng)
        else:
            g = smoothing.score_smoothed(model, ybar, sigma_m)
        out = (ybar[:, None, :] - y) * inv_sig2
        out += (g / m)[:, None, :]
        return out.reshape(w, m * d)

    def joint_energy(flat):
        y = flat.reshape(w, m, d)
        ybar = y.mean(axis=1)
        quad = (m * np.sum(ybar**2, axis=-1) - np.sum(y**2, axis=(1, 2))) * (0.5 * inv_sig2)
        return -(smoothing.phi(model, ybar, sigma_m) + quad)

    def joint_grad(flat):
        return -joint_score(flat)

    pos = _init_positions(cfg, (w, m, d), rng, sigma).reshape(w, m * d)
    state = KernelState.at(pos, rng)
    stepper = make_stepper(cfg.kernel, joint_score, joint_energy, joint_grad)
    if cfg.kernel.kind == "mala":
        prime_mala(state, joint_energy, joint_grad)
    for k in range(1, cfg.n_t + 1):
        stepper(state)
        if recorder.wants(k):
            ybar = state.position.reshape(w, m, d).mean(axis=1)
            recorder.record(m, k, ybar,
                            smoothing.jump_from_mean(model, ybar, sigma, m))
    ybar = state.position.reshape(w, m, d).mean(axis=1)
    return ybar, state.grad_evals


def _run_direct(model, cfg: SamplerConfig, rng: np.random.Generator,
                recorder: TrajectoryRecorder) -> tuple[np.ndarray, int]:
    w, d = cfg.n_walkers, model.d

    def score_fn(x):
        return -model.grad_energy(x)

    pos = _init_positions(cfg, (w, d), rng, noise_sigma=0.0)
    state = KernelState.at(pos, rng)
    stepper = make_stepper(cfg.kernel, score_fn, model.energy, model.grad_energy)
    if cfg.kernel.kind == "mala":
        prime_mala(state, model.energy, model.grad_energy)
    for k in range(1, cfg.n_t + 1):
        stepper(state)
        if recorder.wants(k):
            recorder.record(0, k, state.position, state.position)
    return state.position, state.grad_evals


def run(model: TargetModel, cfg: SamplerConfig,
        rng: np.random.Generator | int,
        trajectory_stride: int | None = None) -> RunResult:
    """Execute one run of the configured scheme.

    Deterministic given (model, cfg, seed): all draws come from one stream in
    a fixed order, walkers batched along the leading axis.
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    recorder = TrajectoryRecorder(trajectory_stride)

    if cfg.scheme in ("oat", "m1"):
        mean, evals = _run_measurement_rounds(model, cfg, rng, recorder)
        samples = smoothing.jump_from_mean(model, mean, cfg.smoothing.sigma, cfg.smoothing.m)
        return RunResult(samples, evals, mean=mean, trajectory=recorder.finalize())
    if cfg.scheme == "aao":
        mean, evals = _run_joint(model, cfg, rng, recorder)
        samples = smoothing.jump_from_mean(model, mean, cfg.smoothing.sigma, cfg.smoothing.m)
        return RunResult(samples, evals, mean=mean, trajectory=recorder.finalize())
    raw, evals = _run_direct(model, cfg, rng, recorder)
    return RunResult(raw, evals, trajectory=recorder.finalize())


def trajectory_rows(result: RunResult, model: TargetModel) -> tuple[list[str], np.ndarray]:
    """Flatten a recorded trajectory to (header, rows).

    Columns: walker, measurement, step, x_0..x_{d−1}, jump_proj — the last
    being the clean-space jump estimate projected on the model's hard axis,
    so mode membership can be read straight off the file.
    """
    log = result.trajectory
    if log is None:
        raise ValueError("run was not recorded; pass trajectory_stride")
    k, w, d = log.positions.shape
    theta = default_theta(model)
    proj = log.jumps @ theta                                  # (k, w)
    cols = ["walker", "measurement", "step"] + [f"x{i}" for i in range(d)] + ["jump_proj"]
    rows = np.empty((k * w, len(cols)))
    rows[:, 0] = np.tile(np.arange(w), k)
    rows[:, 1] = np.repeat(log.measurement, w)
    rows[:, 2] = np.repeat(log.step, w)
    rows[:, 3:3 + d] = log.positions.reshape(k * w, d)
    rows[:, 3 + d] = proj.reshape(k * w)
    return cols, rows
