"""Langevin transition kernels.

Four kernels advance a batch of walkers one step against a score callable
(positions (w, d) -> scores (w, d)):

* ``uld_sachs``   — splitting integrator for underdamped Langevin; one score
  evaluation per step, reused for both velocity kicks.
* ``uld_cheng``   — exact underdamped transition with the score frozen at the
  step's start; per-coordinate joint Gaussian over (position, velocity).
* ``uld_shenlee`` — randomized-midpoint quadrature of the underdamped
  integral solution; two score evaluations per step.
* ``mala``        — Euler proposal with Metropolis correction; needs energy
  and gradient callables and caches the current-point values so each step
  costs one fresh gradient.

All kernels use the velocity scale u = 1/L.  Score evaluations per step:
Sachs/Cheng/MALA 1, Shen-Lee 2 (MALA additionally pays one gradient at chain
start, see ``prime_mala``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

KERNEL_KINDS = ("mala", "uld_sachs", "uld_cheng", "uld_shenlee")

# score evaluations per step, by kind
EVALS_PER_STEP = {"mala": 1, "uld_sachs": 1, "uld_cheng": 1, "uld_shenlee": 2}


class NonFiniteScoreError(RuntimeError):
    """The score callable returned NaN or Inf; the walk has diverged."""


@dataclass(frozen=True)
class KernelParams:
    delta: float
    gamma: float = 5.0 / 3.0
    L: float = 1.0
    kind: str = "uld_sachs"

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not self.L > 0:
            raise ValueError("L must be positive")
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}; expected one of {KERNEL_KINDS}")

    @property
    def gamma_delta(self) -> float:
        """Effective friction per step, the quantity tuned on grids."""
        return self.gamma * self.delta


@dataclass
class KernelState:
    """One batch of walkers: positions, velocities, stream, eval counter."""

    position: np.ndarray            # (w, d)
    velocity: np.ndarray            # (w, d), zeros unless mid-run
    rng: np.random.Generator
    grad_evals: int = 0
    # MALA cache: energy/gradient at the current position
    energy: np.ndarray | None = None
    grad: np.ndarray | None = None

    @classmethod
    def at(cls, position: np.ndarray, rng: np.random.Generator) -> "KernelState":
        position = np.atleast_2d(np.asarray(position, dtype=float))
        return cls(position=position, velocity=np.zeros_like(position), rng=rng)


def _check_score(g: np.ndarray, where: str) -> None:
    if not np.isfinite(np.sum(g)):
        bad = int(np.count_nonzero(~np.isfinite(g).all(axis=-1)))
        raise NonFiniteScoreError(f"non-finite score during {where} ({bad} walkers affected)")


def step_sachs(state: KernelState, score_fn: Callable, params: KernelParams) -> KernelState:
    """Half drift, one score evaluation, kick, friction+noise+kick, half drift."""
    delta, gamma, L = params.delta, params.gamma, params.L
    x, v = state.position, state.velocity
    x += 0.5 * delta * v
    g = score_fn(x)
    state.grad_evals += 1
    _check_score(g, "uld_sachs step")
    kick = (0.5 * delta / L) * g
    v += kick
    v *= np.exp(-gamma * delta)
    v += kick
    v += np.sqrt((1.0 / L) * -np.expm1(-2 * gamma * delta)) * state.rng.standard_normal(x.shape)
    x += 0.5 * delta * v
    return state


def step_cheng(state: KernelState, score_fn: Callable, params: KernelParams) -> KernelState:
    """Exact underdamped transition with the score frozen at the current point."""
    delta, gamma, L = params.delta, params.gamma, params.L
    u = 1.0 / L
    x, v = state.position, state.velocity
    g = score_fn(x)
    state.grad_evals += 1
    _check_score(g, "uld_cheng step")

    em1 = -np.expm1(-gamma * delta)            # 1 - e^{-γδ}
    em2 = -np.expm1(-2 * gamma * delta)        # 1 - e^{-2γδ}
    eta = 1.0 - em1                            # e^{-γδ}
    mean_x = x + (em1 / gamma) * v + (u / gamma) * (delta - em1 / gamma) * g
    mean_v = eta * v + (u / gamma) * em1 * g

    var_x = (2 * u / gamma) * (delta - 2 * em1 / gamma + em2 / (2 * gamma))
    var_v = u * em2
    cov_xv = (u / gamma) * em1**2
    sx = np.sqrt(var_x)
    b = cov_xv / sx
    c = np.sqrt(max(var_v - b * b, 0.0))

    z1 = state.rng.standard_normal(x.shape)
    z2 = state.rng.standard_normal(x.shape)
    state.position = mean_x + sx * z1
    state.velocity = mean_v + b * z1 + c * z2
    return state


def step_shenlee(state: KernelState, score_fn: Callable, params: KernelParams) -> KernelState:
    """Randomized-midpoint step: evaluate the score at a uniformly random
    interior time, then complete the underdamped integral solution with the
    correctly correlated Gaussian increments for midpoint, position, and
    velocity."""
    delta, gamma, L = params.delta, params.gamma, params.L
    u = 1.0 / L
    x, v = state.position, state.velocity
    w = x.shape[0]

    a = state.rng.random((w, 1))
    z1 = state.rng.standard_normal(x.shape)
    z2 = state.rng.standard_normal(x.shape)
    z3 = state.rng.standard_normal(x.shape)

    c = a * delta                              # midpoint time
    e1a = -np.expm1(-gamma * c)                # 1 - e^{-γc}
    e2a = -np.expm1(-2 * gamma * c)
    e1d = -np.expm1(-gamma * delta)
    e2d = -np.expm1(-2 * gamma * delta)
    eb = np.exp(-gamma * (delta - c))          # e^{-γ(δ-c)}

    # Brownian-integral covariance (per coordinate), scale 2γu folded in
    s = 2 * gamma * u
    v11 = s / gamma**2 * (c - 2 * e1a / gamma + e2a / (2 * gamma))
    v22 = s / gamma**2 * (delta - 2 * e1d / gamma + e2d / (2 * gamma))
    v33 = s * e2d / (2 * gamma)
    c12 = s / gamma**2 * (c - (1 + eb) * e1a / gamma + eb * e2a / (2 * gamma))
    c13 = s * eb / gamma * (e1a / gamma - e2a / (2 * gamma))
    c23 = s / gamma * (e1d / gamma - e2d / (2 * gamma))

    # per-walker 3x3 Cholesky, guarded against the a -> 0 corner
    l11 = np.sqrt(np.maximum(v11, 0.0))
    safe11 = np.where(l11 > 0, l11, 1.0)
    l21 = c12 / safe11
    l22 = np.sqrt(np.maximum(v22 - l21**2, 0.0))
    l31 = c13 / safe11
    safe22 = np.where(l22 > 0, l22, 1.0)
    l32 = (c23 - l31 * l21) / safe22
    l33 = np.sqrt(np.maximum(v33 - l31**2 - l32**2, 0.0))

    g0 = score_fn(x)
    state.grad_evals += 1
    _check_score(g0, "uld_shenlee midpoint")
    x_mid = (x + (e1a / gamma) * v + (u / gamma) * (c - e1a / gamma) * g0
             + l11 * z1)
    g_mid = score_fn(x_mid)
    state.grad_evals += 1
    _check_score(g_mid, "uld_shenlee step")

    state.position = (x + (e1d / gamma) * v
                      + (u * delta / gamma) * (1.0 - eb) * g_mid
                      + l21 * z1 + l22 * z2)
    state.velocity = ((1.0 - e1d) * v + u * delta * eb * g_mid
                      + l31 * z1 + l32 * z2 + l33 * z3)
    return state


def prime_mala(state: KernelState, energy_fn: Callable, grad_fn: Callable) -> KernelState:
    """Evaluate energy and gradient at the current position once, so every
    subsequent step costs exactly one fresh gradient."""
    state.energy = np.asarray(energy_fn(state.position), dtype=float)
    state.grad = np.asarray(grad_fn(state.position), dtype=float)
    state.grad_evals += 1
    return state


def step_mala(state: KernelState, energy_fn: Callable, grad_fn: Callable,
              params: KernelParams) -> KernelState:
    """Euler proposal x' = x − δ∇f + √(2δ)ξ with Metropolis correction.

    Non-finite proposal energy auto-rejects; velocity is untouched.
    """
    delta = params.delta
    if state.grad is None:
        prime_mala(state, energy_fn, grad_fn)
    x, e0, g0 = state.position, state.energy, state.grad

    xi = state.rng.standard_normal(x.shape)
    xp = x - delta * g0 + np.sqrt(2 * delta) * xi
    ep = np.asarray(energy_fn(xp), dtype=float)
    gp = np.asarray(grad_fn(xp), dtype=float)
    state.grad_evals += 1

    fwd = np.sum((xp - x + delta * g0) ** 2, axis=-1)
    rev = np.sum((x - xp + delta * gp) ** 2, axis=-1)
    log_acc = e0 - ep + (fwd - rev) / (4 * delta)
    log_acc = np.where(np.isfinite(ep) & np.isfinite(np.sum(gp, axis=-1)), log_acc, -np.inf)

    accept = np.log(state.rng.random(x.shape[0])) < log_acc
    mask = accept[:, None]
    state.position = np.where(mask, xp, x)
    state.energy = np.where(accept, ep, e0)
    state.grad = np.where(mask, gp, g0)
    return state


def make_stepper(params: KernelParams, score_fn: Callable | None = None,
                 energy_fn: Callable | None = None,
                 grad_fn: Callable | None = None) -> Callable[[KernelState], KernelState]:
    """Bind a kernel kind to its callables: returns state -> state."""
    kind = params.kind
    if kind == "mala":
        if energy_fn is None or grad_fn is None:
            raise ValueError("mala requires energy_fn and grad_fn")
        return lambda state: step_mala(state, energy_fn, grad_fn, params)
    if score_fn is None:
        raise ValueError(f"{kind} requires score_fn")
    step = {"uld_sachs": step_sachs, "uld_cheng": step_cheng,
            "uld_shenlee": step_shenlee}[kind]
    return lambda state: step(state, score_fn, params)
