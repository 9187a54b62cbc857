"""Command-line entry point: ``elastic-dr {validate,run,report}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import FixtureError, InfeasiblePopulation
from .scenario import FIXTURE_KINDS, load_scenario, regenerate_reports, run_scenario, validate_fixture

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2
DEFAULT_CONFIG = Path(__file__).parent / "data" / "scenario.json"

log = logging.getLogger("elastic_dr")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=DEFAULT_CONFIG,
                        help="scenario JSON (default: the bundled case study)")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    p = argparse.ArgumentParser(prog="elastic-dr", description="Price-elasticity demand response simulator.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", parents=[common], help="check a scenario and its fixtures")
    v.add_argument("--kind", choices=FIXTURE_KINDS, default="scenario",
                   help="treat --config as a single fixture of this kind")

    r = sub.add_parser("run", parents=[common], help="simulate the scenario and write CSVs")
    r.add_argument("--seed", type=int, help="override the master seed")
    r.add_argument("--models", help="comma-separated subset of pem,dpem,spem")
    r.add_argument("--out", type=Path, help="output directory")

    rep = sub.add_parser("report", parents=[common], help="rebuild report CSVs from stored outcomes")
    rep.add_argument("--out", type=Path, help="directory holding a previous run")
    return p


def _validate(args) -> int:
    try:
        diags = validate_fixture(args.config, args.kind)
    except OSError as exc:
        print(f"{args.config}: cannot read: {exc.strerror}", file=sys.stderr)
        return EXIT_INVALID
    for d in diags:
        print(d, file=sys.stderr)
    if not diags:
        print(f"{args.config}: ok")
    return EXIT_INVALID if diags else EXIT_OK


def _run(args) -> int:
    scenario = load_scenario(args.config)
    models = args.models.split(",") if args.models else None
    try:
        scenario = scenario.with_overrides(seed=args.seed, models=models, output_dir=args.out)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    diags = validate_fixture(args.config, "scenario")
    if diags:
        for d in diags:
            print(d, file=sys.stderr)
        return EXIT_INVALID
    manifest = run_scenario(scenario)
    print(json.dumps({"output_dir": str(scenario.output_dir), "wall_clock_s": round(manifest.wall_clock_s, 3),
                      "files": manifest.files}))
    return EXIT_OK


def _report(args) -> int:
    scenario = load_scenario(args.config)
    out = args.out or scenario.output_dir
    if not (Path(out) / "population.csv").exists():
        print(f"{out}: no stored run (population.csv missing)", file=sys.stderr)
        return EXIT_INVALID
    for p in regenerate_reports(scenario, out):
        print(p)
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return {"validate": _validate, "run": _run, "report": _report}[args.command](args)
    except (FixtureError, InfeasiblePopulation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID if exc.filename and not Path(exc.filename).exists() else EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001
        log.debug("runtime failure", exc_info=True)
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
