"""Command-line interface: solve, sweep, bench, and check subcommands.

Delimited outputs and their companion figures land in the --out directory;
log lines go to standard error with level prefixes.  Exit codes: 0 ok,
2 validation failure, 3 infeasible scenario, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import experiment, report
from .ao import SCHEMES, AOOptions, run_scheme
from .errors import (NotPSDError, NumericalFailure, ScenarioInfeasible,
                     ValidationError)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERICAL = 4

log = logging.getLogger("fdiscc")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdiscc",
        description="Full-duplex aerial-platform ISCC energy minimization")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("solve", "run the proposed scheme on one scenario"),
        ("sweep", "run the sweep block of a scenario file"),
        ("bench", "run all schemes on one scenario"),
        ("check", "validate a scenario file and exit"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--scenario", type=Path, default=None,
                       help="scenario YAML file (defaults apply when omitted)")
        p.add_argument("--out", type=Path, default=Path("."),
                       help="output directory for CSV and figures")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--epsilon", type=float, default=None)
        p.add_argument("--max-iter", type=int, default=None)
        p.add_argument("--quiet", action="store_true")
    return parser


def _load(args):
    if args.scenario is None:
        return experiment._parse_scenario(None), AOOptions(), None
    return experiment.load_scenario(args.scenario)


def _apply_flags(opts: AOOptions, args) -> AOOptions:
    if args.seed is not None:
        opts = replace(opts, seed=args.seed)
    if args.epsilon is not None:
        opts = replace(opts, epsilon=args.epsilon)
    if args.max_iter is not None:
        opts = replace(opts, max_iters=args.max_iter)
    return opts


def _cmd_solve(args) -> int:
    scenario, opts, _ = _load(args)
    opts = _apply_flags(opts, args)
    t0 = time.perf_counter()
    result = run_scheme(scenario, "proposed", opts)
    wall = time.perf_counter() - t0
    args.out.mkdir(parents=True, exist_ok=True)
    csv_path = args.out / "convergence.csv"
    fig_path = args.out / "convergence.png"
    experiment.emit_convergence(result, csv_path, scenario)
    report.plot_convergence(result, fig_path)
    log.info("wrote %s and %s", csv_path, fig_path)
    log.info("wall time %.3f s over %d iterations", wall, result.trace.iterations)
    e = result.energy
    print(f"status: {result.trace.status}")
    print(f"iterations: {result.trace.iterations}")
    print(f"total_energy_j: {e.total:.12g}")
    print(f"e_loc_j: {e.e_loc:.12g}")
    print(f"e_tran_j: {e.e_tran:.12g}")
    print(f"e_comp_alap_j: {e.e_comp_alap:.12g}")
    print(f"e_tran_alap_j: {e.e_tran_alap:.12g}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    scenario, opts, sweep = _load(args)
    opts = _apply_flags(opts, args)
    if sweep is None:
        log.error("scenario file has no sweep block")
        return EXIT_VALIDATION
    rows = experiment.run_sweep(scenario, opts, sweep["axis"], sweep["values"],
                                sweep["schemes"], sweep["seeds"])
    args.out.mkdir(parents=True, exist_ok=True)
    csv_path = args.out / f"sweep_{sweep['axis']}.csv"
    fig_path = args.out / f"sweep_{sweep['axis']}.png"
    experiment.write_csv(rows, csv_path)
    report.plot_sweep(rows, sweep["axis"], fig_path)
    log.info("wrote %s and %s (%d rows)", csv_path, fig_path, len(rows))
    return EXIT_OK


def _cmd_bench(args) -> int:
    scenario, opts, _ = _load(args)
    opts = _apply_flags(opts, args)
    rows = []
    for scheme in SCHEMES:
        t0 = time.perf_counter()
        result = run_scheme(scenario, scheme, opts)
        wall_ms = (time.perf_counter() - t0) * 1e3
        rows.append(experiment._row(0.0, scheme, opts.seed, result, wall_ms))
        log.info("%s: %.6g J in %d iterations", scheme,
                 result.energy.total, result.trace.iterations)
    args.out.mkdir(parents=True, exist_ok=True)
    csv_path = args.out / "bench.csv"
    fig_path = args.out / "bench.png"
    experiment.write_csv(rows, csv_path)
    report.plot_bench(rows, fig_path)
    log.info("wrote %s and %s", csv_path, fig_path)
    for r in rows:
        print(f"{r.scheme}: {r.total_energy_j:.12g} J")
    return EXIT_OK


def _cmd_check(args) -> int:
    if args.scenario is None:
        log.error("check requires --scenario")
        return EXIT_VALIDATION
    scenario, opts, sweep = experiment.load_scenario(args.scenario)
    print(f"ok: {scenario.n_users} users, sweep "
          f"{'present' if sweep else 'absent'}")
    return EXIT_OK


_COMMANDS = {"solve": _cmd_solve, "sweep": _cmd_sweep,
             "bench": _cmd_bench, "check": _cmd_check}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s: %(message)s",
                        level=logging.ERROR if args.quiet else logging.INFO)
    try:
        return _COMMANDS[args.command](args)
    except ValidationError as exc:         # includes ScenarioFileError
        log.error("validation: %s", exc)
        return EXIT_VALIDATION
    except ScenarioInfeasible as exc:
        log.error("infeasible: %s", exc)
        return EXIT_INFEASIBLE
    except (NumericalFailure, NotPSDError) as exc:
        log.error("numerical: %s", exc)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
