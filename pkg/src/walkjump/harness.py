"""Experiment harness: config resolution, grids, seeds, persistence.

A config is a nested mapping (read from YAML) fully determining a set of
cells; every (cell, seed) pair produces one CSV row.  Rows are flushed in
deterministic order as they complete, so a killed run leaves a valid prefix,
and rerunning any (config, seed) cell reproduces its row bit for bit — with
the sole exception of the wall_ms column, which measures this run.

The ``SAMPLE_THREADS`` environment variable (default 1) sizes the cell pool;
row order in the CSV is independent of it.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
import copy
import itertools
import json
import os
import time
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .kernels import KernelParams
from .metrics import SlicedW2Config, default_theta, minor_mode_fraction, sliced_w2
from .samplers import ColdUniform, FixedPoint, SamplerConfig, run, trajectory_rows
from .smoothing import SmoothingConfig
from .targets import AnisotropicGaussian, GaussianMixtureTwo, TargetModel

RESULTS_SCHEMA_VERSION = 1
TRAJECTORIES_SCHEMA_VERSION = 1

RESULT_COLUMNS = [
    "scheme", "model", "d", "sigma", "m", "kernel", "delta", "gamma_delta", "L",
    "n_t", "n_walkers", "init", "score_mode", "score_n_mc",
    "seed", "w2", "minor_mode_fraction", "grad_evals", "wall_ms",
]

# grid/case axes -> config paths
AXIS_PATHS = {
    "scheme": ("scheme",),
    "sigma": ("smoothing", "sigma"),
    "m": ("smoothing", "m"),
    "d": ("model", "d"),
    "delta": ("kernel", "delta"),
    "gamma_delta": ("kernel", "gamma_delta"),
    "kernel": ("kernel", "kind"),
    "L": ("kernel", "L"),
    "n_t": ("sampler", "n_t"),
    "budget": ("sampler", "budget"),
    "n_walkers": ("sampler", "n_walkers"),
    "n_mc": ("score", "n_mc"),
    "score_mode": ("score", "mode"),
}

_SCHEMA = {
    "name": None,
    "notes": None,
    "model": {"kind": None, "d": None, "narrow": None, "variances": None,
              "mu": None, "tau2": None, "alpha": None},
    "scheme": None,
    "smoothing": {"sigma": None, "m": None},
    "kernel": {"kind": None, "delta": None, "gamma_delta": None, "gamma": None, "L": None},
    "sampler": {"n_t": None, "budget": None, "n_walkers": None, "init": None},
    "score": {"mode": None, "n_mc": None},
    "metric": {"n_truth": None},
    "seeds": None,
    "grid": None,
    "trajectory": {"stride": None},
    "output": None,
}


class ConfigError(ValueError):
    pass


def _validate_keys(config: dict, schema=_SCHEMA, path: str = "") -> None:
    for key, value in config.items():
        here = f"{path}.{key}" if path else key
        if key not in schema:
            raise ConfigError(f"unknown config key: {here}")
        sub = schema[key]
        if isinstance(sub, dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key {here} must be a mapping")
            _validate_keys(value, sub, here)


def validate_config(config: dict) -> None:
    """Fail fast on unknown keys, including inside the grid."""
    if not isinstance(config, dict):
        raise ConfigError("config must be a mapping")
    _validate_keys(config)
    grid = config.get("grid") or {}
    if not isinstance(grid, dict):
        raise ConfigError("grid must be a mapping of axis -> list")
    for axis, values in grid.items():
        if axis == "cases":
            for i, case in enumerate(values):
                for k in case:
                    if k not in AXIS_PATHS:
                        raise ConfigError(f"unknown config key: grid.cases[{i}].{k}")
            continue
        if axis not in AXIS_PATHS:
            raise ConfigError(f"unknown config key: grid.{axis}")
        if not isinstance(values, (list, tuple)):
            raise ConfigError(f"grid.{axis} must be a list")


def _set_path(config: dict, path: tuple, value) -> None:
    node = config
    for key in path[:-1]:
        node = node.setdefault(key, {})
    node[path[-1]] = value


def resolve_cells(config: dict) -> list[dict]:
    """Expand the grid into fully resolved per-cell configs (grid removed)."""
    validate_config(config)
    base = copy.deepcopy(config)
    grid = base.pop("grid", None) or {}
    cases = grid.pop("cases", [{}])
    axes = sorted(grid)  # deterministic cell order
    cells = []
    for combo in itertools.product(*(grid[a] for a in axes)):
        for case in cases:
            cell = copy.deepcopy(base)
            for axis, value in zip(axes, combo):
                _set_path(cell, AXIS_PATHS[axis], value)
            for axis, value in case.items():
                _set_path(cell, AXIS_PATHS[axis], value)
            cells.append(cell)
    return cells


# --------------------------------------------------------------------------
# Building runtime objects from a resolved cell
# --------------------------------------------------------------------------

def build_model(spec: dict) -> TargetModel:
    kind = spec.get("kind")
    if kind in ("elliptical", "gaussian"):
        if "variances" in spec and spec["variances"] is not None:
            return AnisotropicGaussian(np.asarray(spec["variances"], dtype=float))
        d = int(spec.get("d", 1))
        return AnisotropicGaussian.elliptical(d, narrow=float(spec.get("narrow", 0.1)))
    if kind == "gmm":
        d = int(spec.get("d", 1))
        mu = spec.get("mu", 3.0)
        mu = np.full(d, float(mu)) if np.isscalar(mu) else np.asarray(mu, dtype=float)
        return GaussianMixtureTwo(mu, tau2=float(spec.get("tau2", 1.0)),
                                  alpha=float(spec.get("alpha", 0.5)))
    raise ConfigError(f"unknown model kind {kind!r}")


def _build_init(spec):
    if spec is None or spec == "cold_unif":
        return ColdUniform()
    if isinstance(spec, dict) and "point" in spec:
        return FixedPoint(np.asarray(spec["point"], dtype=float))
    raise ConfigError(f"unknown sampler.init {spec!r}")


def build_sampler_config(cell: dict, model: TargetModel) -> SamplerConfig:
    scheme = cell.get("scheme", "oat")
    smooth_spec = cell.get("smoothing", {})
    sigma = float(smooth_spec.get("sigma", 1.0))
    m = int(smooth_spec.get("m", 1))
    if scheme == "m1":
        m = 1
    smooth = SmoothingConfig(sigma, m)

    samp = cell.get("sampler", {})
    budget = samp.get("budget")
    n_t = samp.get("n_t")
    if (budget is None) == (n_t is None):
        raise ConfigError("exactly one of sampler.n_t and sampler.budget is required")
    if budget is not None:
        budget = int(budget)
        if scheme in ("oat",):
            if budget % m:
                raise ConfigError(f"budget {budget} not divisible by m={m}")
            n_t = budget // m
        else:
            n_t = budget  # m1 / aao / direct walk the full budget in one chain
    n_t = int(n_t)

    kern = cell.get("kernel", {})
    delta = float(kern.get("delta", 0.03))
    if kern.get("gamma") is not None and kern.get("gamma_delta") is not None:
        raise ConfigError("give kernel.gamma or kernel.gamma_delta, not both")
    if kern.get("gamma") is not None:
        gamma = float(kern["gamma"])
    else:
        gamma = float(kern.get("gamma_delta", 0.05)) / delta
    L = kern.get("L")
    if L is None:
        # walks on σ-smoothed conditionals are 1/σ²-smooth; direct uses the
        # target's own smoothness
        L = model.grad_lipschitz() if scheme == "direct" else 1.0 / sigma**2
    params = KernelParams(delta=delta, gamma=gamma, L=float(L),
                          kind=kern.get("kind", "uld_sachs"))

    score = cell.get("score", {})
    return SamplerConfig(
        scheme=scheme,
        smoothing=smooth,
        kernel=params,
        n_t=n_t,
        n_walkers=int(samp.get("n_walkers", 100)),
        init=_build_init(samp.get("init")),
        score_mode=score.get("mode", "analytic"),
        score_n_mc=int(score.get("n_mc", 500)),
    )


# --------------------------------------------------------------------------
# Running cells
# --------------------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def run_cell(cell: dict, cell_index: int, seed: int) -> tuple[dict, object, TargetModel]:
    """One (cell, seed) run: returns (record, result, model)."""
    model = build_model(cell.get("model", {}))
    cfg = build_sampler_config(cell, model)
    stride = (cell.get("trajectory") or {}).get("stride")

    ss = np.random.SeedSequence((seed, cell_index))
    walk_ss, truth_ss = ss.spawn(2)

    start = time.perf_counter_ns()
    result = run(model, cfg, np.random.default_rng(walk_ss), trajectory_stride=stride)
    wall_ms = (time.perf_counter_ns() - start) // 1_000_000

    truth_rng = np.random.default_rng(truth_ss)
    n_truth = int((cell.get("metric") or {}).get("n_truth") or cfg.n_walkers)
    truth = model.sample_exact(n_truth, truth_rng)
    gen = result.samples
    n = min(len(truth), len(gen))
    w2 = sliced_w2(truth[:n], gen[:n], SlicedW2Config(default_theta(model), n))

    minor = (minor_mode_fraction(model, gen)
             if isinstance(model, GaussianMixtureTwo) else None)

    record = {
        "scheme": cfg.scheme,
        "model": cell.get("model", {}).get("kind"),
        "d": model.d,
        "sigma": cfg.smoothing.sigma,
        "m": cfg.smoothing.m,
        "kernel": cfg.kernel.kind,
        "delta": cfg.kernel.delta,
        "gamma_delta": cfg.kernel.gamma_delta,
        "L": cfg.kernel.L,
        "n_t": cfg.n_t,
        "n_walkers": cfg.n_walkers,
        "init": "fixed_point" if isinstance(cfg.init, FixedPoint) else "cold_unif",
        "score_mode": cfg.score_mode,
        "score_n_mc": cfg.score_n_mc if cfg.score_mode == "plugin" else None,
        "seed": seed,
        "w2": w2,
        "minor_mode_fraction": minor,
        "grad_evals": result.grad_evals,
        "wall_ms": int(wall_ms),
    }
    return record, result, model


def run_experiment(config: dict | str | Path, out_dir: str | Path | None = None) -> Path:
    """Run every (cell, seed) pair; write results.csv, manifest.json and,
    when trajectory recording is on, trajectories.csv.  Returns the output
    directory."""
    if not isinstance(config, dict):
        with open(config) as fh:
            config = yaml.safe_load(fh)
    validate_config(config)
    out = Path(out_dir or config.get("output") or "results")
    out.mkdir(parents=True, exist_ok=True)

    cells = resolve_cells(config)
    seeds = [int(s) for s in (config.get("seeds") or [0])]
    jobs = [(cell, ci, seed) for ci, cell in enumerate(cells) for seed in seeds]

    manifest = {
        "name": config.get("name"),
        "toolkit_version": __version__,
        "numpy_version": np.__version__,
        "schema": {"results": RESULTS_SCHEMA_VERSION,
                   "trajectories": TRAJECTORIES_SCHEMA_VERSION},
        "columns": RESULT_COLUMNS,
        "config": config,
        "n_cells": len(cells),
        "seeds": seeds,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=str) + "\n")

    threads = int(os.environ.get("SAMPLE_THREADS", "1"))
    traj_path = out / "trajectories.csv"
    traj_file = None

    with open(out / "results.csv", "w", buffering=1) as fh:
        fh.write(",".join(RESULT_COLUMNS) + "\n")
        try:
            if threads > 1:
                with ThreadPoolExecutor(max_workers=threads) as pool:
                    futures = [pool.submit(run_cell, *job) for job in jobs]
                    outputs = (f.result() for f in futures)
                    traj_file = _write_rows(fh, outputs, jobs, traj_path, traj_file)
            else:
                outputs = (run_cell(*job) for job in jobs)
                traj_file = _write_rows(fh, outputs, jobs, traj_path, traj_file)
        finally:
            if traj_file is not None:
                traj_file.close()
    return out


def _write_rows(fh, outputs, jobs, traj_path, traj_file):
    for (cell, ci, seed), (record, result, model) in zip(jobs, outputs):
        fh.write(",".join(_fmt(record[c]) for c in RESULT_COLUMNS) + "\n")
        if result.trajectory is not None:
            cols, rows = trajectory_rows(result, model)
            if traj_file is None:
                traj_file = open(traj_path, "w", buffering=1)
                traj_file.write(",".join(["cell", "seed"] + cols) + "\n")
            prefix = f"{ci},{seed},"
            for row in rows:
                traj_file.write(prefix + ",".join(repr(float(v)) for v in row) + "\n")
    return traj_file


# --------------------------------------------------------------------------
# Presets: the stock experiment definitions
# --------------------------------------------------------------------------

def presets() -> dict[str, dict]:
    """Named experiment configs at their published scale.

    These are definitions, not test fixtures: several take hours at full
    scale.  Scale them down from the CLI with --set overrides.
    """
    tuned_kernel = {"kind": "uld_sachs", "delta": 0.03, "gamma_delta": 0.05}
    common = {
        "kernel": dict(tuned_kernel),
        "sampler": {"budget": 1_000_000, "n_walkers": 100},
        "seeds": list(range(10)),
    }

    def cfg(name, model, grid, notes=None, **extra):
        out = {"name": name, "model": model, **copy.deepcopy(common), "grid": grid}
        out.update(extra)
        if notes:
            out["notes"] = notes
        return out

    ell = {"kind": "elliptical", "d": 8, "narrow": 0.1}
    gmm = {"kind": "gmm", "d": 8, "mu": 3.0, "tau2": 1.0, "alpha": 0.2}

    return {
        "elliptical_vs_dim": cfg(
            "elliptical_vs_dim", dict(ell),
            {"d": [2, 4, 8, 16],
             "cases": [{"scheme": "direct"},
                       {"scheme": "oat", "sigma": 1.0, "m": 1000},
                       {"scheme": "oat", "sigma": 2.0, "m": 1000}]}),
        "elliptical_vs_sigma": cfg(
            "elliptical_vs_sigma", dict(ell),
            {"cases": [{"scheme": "direct"}]
             + [{"scheme": "oat", "sigma": s, "m": 1000} for s in [0.5, 1.0, 2.0, 4.0]]}),
        "gmm_vs_dim": cfg(
            "gmm_vs_dim", dict(gmm),
            {"d": [2, 4, 8, 16],
             "cases": [{"scheme": "direct"},
                       {"scheme": "m1", "sigma": 2.0},
                       {"scheme": "aao", "sigma": 2.0, "m": 200},
                       {"scheme": "oat", "sigma": 2.0, "m": 1000}]}),
        "gmm_vs_sigma": cfg(
            "gmm_vs_sigma", dict(gmm),
            {"cases": [{"scheme": "direct"}]
             + [{"scheme": "oat", "sigma": s, "m": 1000} for s in [1.0, 2.0, 4.0]]}),
        "tunneling": cfg(
            # walkers start in the dominant mode at +μ = (3, 3); the minor
            # mode at (−3, −3) carries mass 1 − α = 1/5
            "tunneling", {"kind": "gmm", "d": 2, "mu": 3.0, "tau2": 1.0, "alpha": 0.8},
            # direct walks the raw energy (curvature down to −R²/τ⁴), so it
            # gets a smaller step than the σ²-smoothed conditionals
            {"cases": [{"scheme": "direct", "budget": 100_000, "delta": 0.02},
                       {"scheme": "oat", "sigma": 2.0, "m": 100, "budget": 100_000}]},
            sampler={"budget": 100_000, "n_walkers": 100,
                     "init": {"point": [3.0, 3.0]}},
            trajectory={"stride": 100},
            seeds=[0],
            notes=("100K counts total kernel steps; the per-measurement split is "
                   "m=100 × n_t=1000.  The alternative reading (100K measurement "
                   "rounds) is runnable by setting smoothing.m=100000 and "
                   "sampler.budget accordingly.")),
        "kernel_zoo": cfg(
            "kernel_zoo", dict(gmm),
            {"kernel": ["mala", "uld_sachs", "uld_cheng", "uld_shenlee"],
             "cases": [{"scheme": "oat", "sigma": 2.0, "m": 1000}]},
            seeds=list(range(5))),
        "score_n_sweep": cfg(
            "score_n_sweep", {"kind": "gmm", "d": 2, "mu": 3.0, "tau2": 1.0, "alpha": 0.2},
            {"cases": [{"scheme": "oat", "sigma": 2.0, "m": 100, "score_mode": "analytic"}]
             + [{"scheme": "oat", "sigma": 2.0, "m": 100,
                 "score_mode": "plugin", "n_mc": n} for n in [500, 1000, 2000, 4000]]},
            sampler={"budget": 20_000, "n_walkers": 100},
            seeds=list(range(5))),
    }
