"""``ionx`` command line.

Exit codes: 0 success, 2 usage or configuration error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, RunConfig, parse_overrides, read_config_file
from .csvio import fmt
from .grid import Region
from .scenarios import SCENARIOS, UnknownScenarioError, run_scenario
from .solver import ConvergenceError, solve_equilibrium

EXIT_OK, EXIT_USAGE, EXIT_SOLVER = 0, 2, 3

log = logging.getLogger("ionx")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ionx", description="Membrane ion-transmitter simulator")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a named scenario and write CSV files")
    run.add_argument("--scenario", required=True, help=f"one of: {', '.join(SCENARIOS)}")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--config", help="key=value config file (a previous manifest works)")
    run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                     help="override a config entry; may be repeated")

    net = sub.add_parser("netlist", help="export the network model as a text netlist")
    net.add_argument("--mode", choices=("potentiostatic", "galvanostatic"), default="potentiostatic")
    net.add_argument("--out", required=True, help="netlist file")
    net.add_argument("--config")
    net.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")

    grid = sub.add_parser("grid", help="print the compartment grid")
    grid.add_argument("--dump", action="store_true", help="write the grid as CSV")
    grid.add_argument("--out", default="-", help="CSV file (default: stdout)")
    grid.add_argument("--config")
    grid.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    return p


def _layers(args) -> list[dict]:
    layers = []
    if args.config:
        layers.append(read_config_file(args.config))
    layers.append(parse_overrides(args.set))
    return layers


def _cmd_run(args) -> int:
    files = run_scenario(args.scenario, args.out, *_layers(args))
    for f in files:
        print(f)
    return EXIT_OK


def _cmd_netlist(args) -> int:
    from .netlist import export_netlist

    cfg = RunConfig.resolve(*_layers(args), {"mode": args.mode})
    s, g = cfg.system_and_grid()
    eq = solve_equilibrium(s, g, cfg.settings())
    with open(args.out, "w", newline="\n") as fh:
        fh.write(export_netlist(s, g, eq, cfg.mode()))
    print(args.out)
    return EXIT_OK


def _cmd_grid(args) -> int:
    cfg = RunConfig.resolve(*_layers(args))
    g = cfg.grid()
    if args.out == "-":
        names = {int(r): r.name for r in Region}
        print("k,xi,width,region")
        for k, (x, w, r) in enumerate(zip(g.centers, g.widths, g.region), 1):
            print(f"{k},{fmt(x)},{fmt(w)},{names[int(r)]}")
    else:
        g.to_csv(args.out)
    return EXIT_OK


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": _cmd_run, "netlist": _cmd_netlist, "grid": _cmd_grid}[args.command]
    try:
        return handler(args)
    except (UnknownScenarioError, ConfigError, OSError) as exc:
        print(f"ionx: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"ionx: solver failure: {exc} (residual {exc.residual_norm:.3g} at tau={exc.tau:.6g})",
              file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
