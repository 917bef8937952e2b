"""``sample`` — command-line front end.

    sample run <config.yaml | preset-name> [--out DIR] [--set key=value ...]
    sample analyze <quantity> [flags]
    sample presets list | show <name>

``analyze`` prints a JSON report per quantity; ``run`` executes a config (or
a named preset) and writes results.csv + manifest.json.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np
import yaml

from . import analysis, harness


def _parse_scalar(text: str):
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError:
        return text


def _apply_overrides(config: dict, pairs: list[str]) -> None:
    for pair in pairs:
        if "=" not in pair:
            raise SystemExit(f"--set expects key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        node = config
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = _parse_scalar(value)


def _cmd_run(args) -> int:
    stock = harness.presets()
    if args.config in stock:
        config = stock[args.config]
    else:
        with open(args.config) as fh:
            config = yaml.safe_load(fh)
    _apply_overrides(config, args.set or [])
    out = harness.run_experiment(config, out_dir=args.out)
    print(f"wrote {out}/results.csv")
    return 0


def _tau2_list(text: str) -> np.ndarray:
    return np.array([float(v) for v in text.split(",")])


def _cmd_analyze(args) -> int:
    from .targets import AnisotropicGaussian, GaussianMixtureTwo

    q = args.quantity
    if q == "kappa-single":
        model = AnisotropicGaussian(_tau2_list(args.tau2))
        report = {"quantity": q, "sigma": args.sigma,
                  "kappa": analysis.condition_number_smoothed(model, args.sigma)}
    elif q == "kappa-oat":
        model = AnisotropicGaussian(_tau2_list(args.tau2))
        report = {"quantity": q, "sigma": args.sigma, "t": args.t,
                  "kappa": analysis.condition_number_conditional(model, args.sigma, args.t)}
    elif q == "spectrum-aao":
        model = AnisotropicGaussian(_tau2_list(args.tau2))
        rep = analysis.joint_precision_spectrum(model, args.sigma, args.m,
                                                validate=args.validate)
        report = {"quantity": q, "sigma": args.sigma, "m": args.m,
                  "kappa": rep.kappa, "degenerate_count": rep.degenerate_count,
                  "eigenvalues": rep.eigenvalues.tolist(),
                  "validated": bool(args.validate)}
    elif q == "zeta":
        sigma2 = args.sigma2 if args.sigma2 is not None else args.sigma**2
        rep = analysis.conditional_hessian_bound(args.m, None, args.tau, args.R,
                                                 sigma2=sigma2)
        report = {"quantity": q, "m": args.m, "sigma2": sigma2, "tau": args.tau,
                  "R": args.R, "value": rep.value, "derivative": rep.derivative,
                  "certified_log_concave": rep.is_negative_definite_certified,
                  "boundary": rep.value == 0.0}
    elif q == "zeta-curve":
        sigma2 = args.sigma2 if args.sigma2 is not None else args.sigma**2
        ms = list(range(1, args.m_max + 1))
        vals = [analysis.conditional_hessian_bound(mm, None, args.tau, args.R,
                                                   sigma2=sigma2).value
                for mm in ms]
        report = {"quantity": q, "sigma2": sigma2, "tau": args.tau, "R": args.R,
                  "m": ms, "scaled_bound": [sigma2 * v for v in vals]}
    elif q == "hessian-landscape":
        model = GaussianMixtureTwo(np.full(args.d, args.mu), tau2=args.tau**2,
                                   alpha=args.alpha)
        reach = args.grid_max
        if reach is None:
            reach = float(np.linalg.norm(model.mu)) + 5 * (args.sigma + args.tau)
        grid = np.linspace(-reach, reach, args.n_grid)
        prof = analysis.conditional_hessian_profile(model, args.sigma, args.m, grid)
        bound = analysis.conditional_hessian_bound(
            args.m, args.sigma, args.tau, float(np.linalg.norm(model.mu)))
        report = {"quantity": q, "sigma": args.sigma, "m": args.m,
                  "alpha": args.alpha, "mu": args.mu, "tau": args.tau,
                  "grid": grid.tolist(), "hessian": prof.tolist(),
                  "bound": bound.value,
                  "certified_log_concave": bound.is_negative_definite_certified}
    elif q == "w2-bound":
        report = {"quantity": q, "L": args.L, "sigma": args.sigma, "m": args.m,
                  "d": args.d,
                  "bound": analysis.jump_mse_bound(args.L, args.sigma, args.m, args.d)}
    elif q == "growth-bound":
        y = np.zeros(args.d) if args.y is None else _tau2_list(args.y)
        x0 = np.zeros(args.d) if args.x0 is None else _tau2_list(args.x0)
        report = {"quantity": q, "L": args.L, "mu_growth": args.mu_growth,
                  "Delta": args.Delta, "sigma": args.sigma,
                  "bound": analysis.hessian_bound_from_growth(
                      args.L, args.mu_growth, args.Delta, x0, y, args.sigma)}
    elif q == "hessian-chain":
        model = GaussianMixtureTwo(np.full(args.d, args.mu), tau2=args.tau**2,
                                   alpha=args.alpha)
        chain = analysis.expected_conditional_hessians(
            model, args.sigma, args.m, n_mc=args.n_mc,
            rng=np.random.default_rng(args.seed))
        report = {"quantity": q, "sigma": args.sigma, "m": args.m,
                  "traces": chain.traces.tolist(),
                  "trace_diff_se": chain.trace_diff_se.tolist()}
    else:
        print(f"unknown quantity {q!r}", file=sys.stderr)
        return 2
    print(json.dumps(report))
    return 0


def _cmd_presets(args) -> int:
    stock = harness.presets()
    if args.action == "list":
        for name, cfg in stock.items():
            cells = len(harness.resolve_cells(cfg))
            print(f"{name:22s} {cells:3d} cells x {len(cfg['seeds'])} seeds")
        return 0
    if args.name not in stock:
        print(f"unknown preset {args.name!r}", file=sys.stderr)
        return 2
    print(yaml.safe_dump(stock[args.name], sort_keys=False), end="")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="sample", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config or preset")
    p_run.add_argument("config", help="path to a YAML config, or a preset name")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key (dotted path)")
    p_run.set_defaults(func=_cmd_run)

    p_an = sub.add_parser("analyze", help="closed-form quantities as JSON")
    p_an.add_argument("quantity",
                      help="kappa-single | kappa-oat | spectrum-aao | zeta | "
                           "zeta-curve | hessian-landscape | w2-bound | "
                           "growth-bound | hessian-chain")
    p_an.add_argument("--tau2", default="0.1,1", help="comma list of variances")
    p_an.add_argument("--sigma", type=float, default=1.0)
    p_an.add_argument("--sigma2", type=float, default=None)
    p_an.add_argument("--t", type=int, default=1)
    p_an.add_argument("--m", type=int, default=1)
    p_an.add_argument("--tau", type=float, default=1.0)
    p_an.add_argument("--R", type=float, default=3.0)
    p_an.add_argument("--L", type=float, default=1.0)
    p_an.add_argument("--d", type=int, default=1)
    p_an.add_argument("--mu", type=float, default=3.0)
    p_an.add_argument("--alpha", type=float, default=0.5)
    p_an.add_argument("--mu-growth", type=float, default=1.0)
    p_an.add_argument("--Delta", type=float, default=0.0)
    p_an.add_argument("--y", default=None)
    p_an.add_argument("--x0", default=None)
    p_an.add_argument("--n-mc", type=int, default=10_000)
    p_an.add_argument("--m-max", type=int, default=200)
    p_an.add_argument("--n-grid", type=int, default=401)
    p_an.add_argument("--grid-max", type=float, default=None)
    p_an.add_argument("--seed", type=int, default=0)
    p_an.add_argument("--validate", action="store_true")
    p_an.set_defaults(func=_cmd_analyze)

    p_pre = sub.add_parser("presets", help="list or show stock experiment configs")
    p_pre.add_argument("action", choices=["list", "show"])
    p_pre.add_argument("name", nargs="?", default=None)
    p_pre.set_defaults(func=_cmd_presets)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
