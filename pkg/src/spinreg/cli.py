"""``simulate <scenario-file> [--threads N] [--tolerance EPS]``

Exit codes: 0 success, 2 scenario parse error, 3 quadrature error estimate
over budget.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .plotting import emit_plot
from .scenario import ScenarioError, load_scenario
from .sweeps import ToleranceExceeded, run_scenario

log = logging.getLogger("spinreg")

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_TOLERANCE = 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="simulate",
        description="Run a register-dephasing sweep scenario and write CSV/SVG output.",
    )
    p.add_argument("scenario", help="scenario file (INI-style, see README)")
    p.add_argument("--threads", type=int, default=1, help="evaluate grid points concurrently")
    p.add_argument("--tolerance", type=float, default=1e-6,
                   help="max quadrature error estimate relative to max(1, |entries|)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_PARSE
    try:
        sc = load_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        table = run_scenario(sc, threads=args.threads, tolerance=args.tolerance)
    except ToleranceExceeded as exc:
        print(f"tolerance failure: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    log.info("%d rows, max quadrature error %.3g", len(table.rows), table.max_error)
    if sc.csv_path is None:
        sys.stdout.write(table.to_csv())
        return EXIT_OK
    table.write(sc.csv_path)
    log.info("wrote %s", sc.csv_path)
    if sc.plot_path is not None:
        emit_plot(sc.csv_path, sc.plot_path)
        log.info("wrote %s", sc.plot_path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
