"""Command-line front end.

    muskat tw      [solve]          --config PATH --out DIR
    muskat evolve  [run]            --config PATH --out DIR
    muskat linear  [solve]          --config PATH --out DIR
    muskat dn      [apply|selftest] --config PATH --out DIR  (or dn --selftest)
    muskat norms   [compute]        --config PATH --out DIR

Exit status: 0 on success, 2 when a solver fails to converge (or a
self-test check fails), 1 on usage, configuration or I/O errors.
"""

import argparse
import json
import logging
import os
import sys

from . import io
from .config import ConfigError, load_config
from .errors import (
    BlowupDetected,
    ContractionFailure,
    DiffeoViolation,
    NoConvergence,
    ResidualTooLarge,
    VersionMismatch,
)

EXIT_OK, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2

log = logging.getLogger("muskat")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    parser = _Parser(prog="muskat", description="Spectral Muskat traveling-wave solvers")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    actions = {
        "tw": ("solve",),
        "evolve": ("run",),
        "linear": ("solve",),
        "dn": ("apply", "selftest"),
        "norms": ("compute",),
    }
    for name, choices in actions.items():
        p = sub.add_parser(name)
        p.add_argument("action", nargs="?", choices=choices, default=choices[0])
        p.add_argument("--config", help="run configuration (TOML)")
        p.add_argument("--out", help="output directory (overrides output.directory)")
        if name == "dn":
            p.add_argument("--selftest", action="store_true", help="run the oracle checks")
    return parser


def _prepare(args, need_config=True):
    cfg = None
    if args.config is not None:
        if not os.path.isfile(args.config):
            raise FileNotFoundError(f"config file not found: {args.config}")
        cfg = load_config(args.config)
    elif need_config:
        raise UsageError("--config PATH is required")
    out = args.out or (cfg.output["directory"] if cfg else "out")
    os.makedirs(out, exist_ok=True)
    formats = set(cfg.output["formats"]) if cfg else {"json", "csv"}
    return cfg, out, formats


def cmd_tw(args):
    from .traveling import solve_traveling_wave

    cfg, out, formats = _prepare(args)
    wave = cfg.wave_config()
    sol = solve_traveling_wave(wave)
    if "json" in formats:
        io.dump_json(io.wave_solution_to_dict(sol, wave), os.path.join(out, "tw_solution.json"))
    if "csv" in formats:
        rows = [(k + 1, a, b) for k, (a, b) in enumerate(sol.history)]
        io.write_csv(os.path.join(out, "tw_history.csv"), ["iteration", "eta_norm", "step_norm"], rows)
    print(f"traveling wave converged in {sol.iterations} iterations; "
          f"steady residual {sol.steady_residual:.3e}")
    return EXIT_OK


def cmd_evolve(args):
    from .evolution import EvolutionConfig, evolve
    from .traveling import solve_traveling_wave

    cfg, out, formats = _prepare(args)
    wave = cfg.wave_config()
    eta_star = solve_traveling_wave(wave).eta_star
    evo = cfg.evolution
    ecfg = EvolutionConfig(
        base=wave,
        eta_star=eta_star,
        f0=evo["f0"],
        dt=evo["dt"],
        t_final=evo["t_final"],
        integrator=evo["integrator"],
        nonlinear=evo["nonlinear"],
    )
    rep = evolve(ecfg)
    if "csv" in formats:
        rows = zip(rep.times, rep.hs_norms, rep.hs_half_l2_accum)
        io.write_csv(os.path.join(out, "evolve.csv"), ["t", "hs_norm", "hs_half_sq_accum"], rows)
    if "json" in formats:
        io.dump_json(io.decay_report_to_dict(rep), os.path.join(out, "decay_report.json"))
    print(f"evolved to t = {rep.times[-1]:g}; fitted rate {rep.fitted_rate:.6g} "
          f"(reference {rep.c0_reference:.6g})")
    return EXIT_OK


def cmd_linear(args):
    from .linear import solve_T3

    cfg, out, formats = _prepare(args)
    if cfg.linear["data"] is None:
        raise ConfigError("linear.data: a LinearData JSON file is required", "linear.data")
    data, gamma = io.linear_data_from_dict(io.load_json(cfg.linear["data"]))
    if gamma is None:
        gamma = cfg.solver["gamma"]
    sol = solve_T3(data, gamma, compat_tol=cfg.linear["compat_tol"])
    if "json" in formats:
        io.dump_json(io.linear_solution_to_dict(sol), os.path.join(out, "linear_solution.json"))
    if "csv" in formats:
        rows = sorted(sol.residuals.items())
        io.write_csv(os.path.join(out, "linear_residuals.csv"), ["residual", "value"], rows)
    print("linear solve done; max residual "
          f"{max(sol.residuals[k] for k in ('momentum', 'divergence', 'kinematic', 'dirichlet', 'bed')):.3e}")
    return EXIT_OK


def cmd_dn(args):
    if args.selftest or args.action == "selftest":
        from .selftest import run_selftest

        cfg, out, _ = _prepare(args, need_config=False)
        seed = cfg.solver["seed"] if cfg else 0
        report = run_selftest(seed)
        io.dump_json(report, os.path.join(out, "dn_selftest.json"))
        print(json.dumps({k: (v["passed"] if isinstance(v, dict) else v) for k, v in report.items()},
                         sort_keys=True))
        return EXIT_OK if report["passed"] else EXIT_SOLVER

    from .dn import dn_apply

    cfg, out, formats = _prepare(args)
    dn = cfg.dn
    g = dn_apply(dn["eta"], dn["f"], tol=cfg.solver["dn_tol"], max_iter=cfg.solver["dn_max_iter"],
                 dealiased=cfg.solver["dealias"])
    io.save_state(os.path.join(out, "dn_output.json"), g)
    print("wrote dn_output.json")
    return EXIT_OK


def cmd_norms(args):
    from .norms import dyadic_block_norms

    cfg, out, formats = _prepare(args)
    nc = cfg.norms
    blocks = dyadic_block_norms(nc["field"], nc["s"], nc["sharp"])
    rows, acc = [], 0.0
    for j, v in enumerate(blocks):
        acc += v * v
        rows.append((j, float(v), float(acc**0.5)))
    io.write_csv(os.path.join(out, "norms.csv"), ["j", "block_norm", "cumulative"], rows)
    print(f"wrote {len(rows)} dyadic blocks")
    return EXIT_OK


COMMANDS = {"tw": cmd_tw, "evolve": cmd_evolve, "linear": cmd_linear, "dn": cmd_dn, "norms": cmd_norms}


def run_command(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required: " + ", ".join(COMMANDS))
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.command](args)
    except (NoConvergence, ContractionFailure, BlowupDetected, DiffeoViolation,
            ResidualTooLarge) as exc:
        print(f"muskat: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ConfigError as exc:
        where = f" (line {exc.line}, column {exc.column})" if exc.line else ""
        print(f"muskat: configuration error{where}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, OSError, ValueError, VersionMismatch) as exc:
        print(f"muskat: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()
