"""Command-line entry point: ``kinetic-feedback <subcommand> ...``."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from .adjoint import AdjointCollapse, AdjointOverflow, run_adjoint_oneshot
from .config import ConfigError, SimConfig, parse_config
from .domain import ControlField, GridSpec
from .io import (FormatError, emit_quiver, plot_quiver, read_control, write_control,
                 write_histograms)
from .pipeline import simulate

log = logging.getLogger("kinetic_feedback")

EXIT_USAGE = 2
EXIT_RUNTIME = 1


def _load_config(args) -> SimConfig:
    cfg = parse_config(args.config) if args.config else SimConfig()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.workers is not None:
        changes["workers"] = args.workers
    return cfg.replace(**changes) if changes else cfg


def cmd_solve_adjoint(args) -> int:
    cfg = _load_config(args)
    t0 = time.perf_counter()
    run = run_adjoint_oneshot(cfg)
    write_control(args.out, run.control)
    if args.q_dir:
        write_histograms(args.q_dir, run.q_tilde, name="q_tilde")
    print(f"adjoint solved in {time.perf_counter() - t0:.2f} s; "
          f"{run.counts[0]} adjoint particles at t = 0; control written to {args.out}")
    return 0


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    control = None
    if args.control:
        control = read_control(args.control, cfg.grid())
        if control.n_t < cfg.n_t:
            raise FormatError(f"{args.control}: control has {control.n_t} steps, "
                              f"config needs {cfg.n_t}")
    sim = simulate(cfg, control)
    report = sim.report()
    if args.report:
        report.write(args.report)
    if args.hist_dir:
        write_histograms(args.hist_dir, sim.run.hist)
    print(f"J = {sim.cost:.6g}  mean residual at T = {report.residual_mean:.4g}  "
          f"particles left = {report.counts[-1]}")
    return 0


def cmd_average_control(args) -> int:
    control = read_control(args.inp)
    write_control(args.out, ControlField.constant(control.u_bar, control.n_t))
    print(f"time-averaged control written to {args.out}")
    return 0


def cmd_emit_plots(args) -> int:
    control = read_control(args.inp)
    cfg = _load_config(args)
    n_x, n_v = control.u.shape[1:]
    grid = GridSpec(n_x, n_v, cfg.p_max, cfg.v_max)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    steps = args.steps if args.steps is not None else sorted({0, control.n_t // 2, control.n_t})
    targets = [("ubar", control.u_bar)]
    for k in steps:
        targets.append((f"u_{k:04d}", control.at(k)))
    for name, values in targets:
        emit_quiver(out / f"quiver_{name}.csv", values, grid)
        if args.png:
            plot_quiver(out / f"quiver_{name}.png", values, grid, title=name)
    print(f"wrote {len(targets)} quiver tables to {out}")
    return 0


def cmd_evaluate_cost(args) -> int:
    cfg = _load_config(args)
    control = read_control(args.control, cfg.grid()) if args.control else None
    sim = simulate(cfg, control)
    print(repr(sim.cost))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kinetic-feedback",
                                description="Monte Carlo feedback control of a kinetic model")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, config=True):
        sp = sub.add_parser(name, help=help_text)
        if config:
            sp.add_argument("--config", help="flat key = value file (defaults if omitted)")
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp.add_argument("--workers", type=int, default=None, help="parallel particle workers")
        sp.set_defaults(func=func)
        return sp

    sp = add("solve-adjoint", cmd_solve_adjoint, "backward adjoint solve producing u")
    sp.add_argument("--out", required=True, help="control file to write (KCF1)")
    sp.add_argument("--q-dir", help="also dump smoothed adjoint histograms here")

    sp = add("simulate", cmd_simulate, "forward simulation under a control")
    sp.add_argument("--control", help="control file; omit for the uncontrolled model")
    sp.add_argument("--report", help="text report to write")
    sp.add_argument("--hist-dir", help="directory for per-step histograms")

    sp = add("average-control", cmd_average_control, "replace u by its time average",
             config=False)
    sp.add_argument("--in", dest="inp", required=True)
    sp.add_argument("--out", required=True)

    sp = add("emit-plots", cmd_emit_plots, "quiver tables (and PNGs) of a control")
    sp.add_argument("--in", dest="inp", required=True)
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--steps", type=int, nargs="*", help="time steps to export")
    sp.add_argument("--png", action="store_true", help="also render PNGs (matplotlib)")

    sp = add("evaluate-cost", cmd_evaluate_cost, "print the ensemble cost J")
    sp.add_argument("--control", help="control file; omit for the uncontrolled model")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "workers", None) is not None and args.workers < 1:
        parser.error("--workers must be >= 1")
    try:
        return args.func(args)
    except (ConfigError, FormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AdjointCollapse, AdjointOverflow, FloatingPointError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
