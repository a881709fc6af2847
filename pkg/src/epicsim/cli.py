"""Command-line front end.

    epicsim run      [--config F] [--out DIR] [--seed N] [--trials N] [--scheme S]
    epicsim sweep    {t-up,jitter} VALUES... | --range START STOP STEP
    epicsim validate [--config F]

Exit codes: 0 success, 1 usage or config error, 2 runtime error,
3 validation failure.
"""

from __future__ import annotations

import argparse
import logging
import shlex
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ScenarioConfig, load_config
from .engine import run_trials, sweep
from .records import (
    GRID_COLUMNS,
    SUMMARY_COLUMNS,
    SWEEP_COLUMNS,
    TICK_COLUMNS,
    grid_rows,
    manifest_text,
    render_grid,
    render_table,
    summary_rows,
    sweep_rows,
    tick_rows,
    to_csv,
    write_outputs,
)
from .stsi import Scheme
from .validation import run_checks

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_VALIDATION = 0, 1, 2, 3

SWEEP_PARAMS = {"t-up": "t_up", "jitter": "jitter_sigma"}

log = logging.getLogger("epicsim")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="flat key = value config file")
    common.add_argument("--seed", type=int, help="master seed (overrides the config)")
    common.add_argument("--trials", type=int, help="trials per scheme (overrides the config)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="epicsim", description="Swarm coverage under signaling silence.")
    p.add_argument("--version", action="version", version=f"epicsim {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", parents=[common], help="run trials and write ticks/summary CSVs")
    run.add_argument("--out", type=Path, default=Path("out"))
    run.add_argument("--scheme", choices=["epic", "traditional", "both"], default=None,
                     help="default: the config's scheme")
    run.add_argument("--workers", type=int, default=1)

    sw = sub.add_parser("sweep", parents=[common], help="sweep silence period or jitter for both schemes")
    sw.add_argument("parameter", choices=sorted(SWEEP_PARAMS))
    sw.add_argument("values", nargs="*", type=float)
    sw.add_argument("--range", nargs=3, type=float, metavar=("START", "STOP", "STEP"),
                    help="inclusive range instead of explicit values")
    sw.add_argument("--out", type=Path, default=Path("out"))
    sw.add_argument("--scheme", choices=["epic", "traditional", "both"], default="both")
    sw.add_argument("--workers", type=int, default=1)

    sub.add_parser("validate", parents=[common], help="run the built-in invariant suite")
    return p


def resolve_config(args) -> ScenarioConfig:
    """File values first, then flags on top."""
    try:
        config = load_config(args.config) if args.config else ScenarioConfig()
    except OSError as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc.strerror}") from None
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    scheme = getattr(args, "scheme", None)
    if scheme in ("epic", "traditional"):
        overrides["scheme"] = scheme
    return config.with_overrides(**overrides) if overrides else config


def _schemes(choice: str | None, config: ScenarioConfig) -> list[Scheme]:
    if choice == "both":
        return [Scheme.EPIC, Scheme.TRADITIONAL]
    return [Scheme(choice) if choice else config.scheme]


def sweep_values(parameter: str, values: list[float], rng: list[float] | None) -> list[float]:
    if values and rng:
        raise UsageError("give either explicit values or --range, not both")
    if rng:
        start, stop, step = rng
        if step <= 0 or stop < start:
            raise UsageError("--range needs STEP > 0 and STOP >= START")
        values = list(np.round(np.arange(start, stop + step / 2, step), 9))
    if not values:
        raise UsageError("sweep needs at least one value")
    if parameter == "t-up":
        if any(v < 1 or v != int(v) for v in values):
            raise UsageError("t-up values must be integers >= 1")
        return [int(v) for v in values]
    if any(v < 0 for v in values):
        raise UsageError("jitter values must be >= 0")
    return [float(v) for v in values]


def _command_line(argv) -> str:
    return "epicsim " + " ".join(shlex.quote(a) for a in argv)


def cmd_run(config: ScenarioConfig, out_dir: Path, schemes, workers: int = 1, argv=()) -> int:
    summaries = []
    for s in schemes:
        summaries.extend(run_trials(config, s, workers=workers))
    rows = summary_rows(summaries, config.master_seed)
    files = {
        "ticks.csv": to_csv(TICK_COLUMNS, tick_rows(summaries)),
        "summary.csv": to_csv(SUMMARY_COLUMNS, rows),
    }
    names = list(files) + ["manifest.txt"]
    files["manifest.txt"] = manifest_text(
        config, _command_line(argv), names, {"schemes": ",".join(s.value for s in schemes)}
    )
    write_outputs(out_dir, files)
    print(render_table(SUMMARY_COLUMNS, rows))
    print(f"\nwrote {', '.join(names)} to {out_dir}")
    return EXIT_OK


def cmd_sweep(config: ScenarioConfig, parameter: str, values, out_dir: Path, schemes,
              workers: int = 1, argv=()) -> int:
    rows = sweep(config, SWEEP_PARAMS[parameter], values, schemes, workers=workers)
    grid = grid_rows(rows)
    files = {
        "sweep.csv": to_csv(SWEEP_COLUMNS, sweep_rows(rows)),
        "sweep_summary.csv": to_csv(GRID_COLUMNS, grid),
    }
    names = list(files) + ["manifest.txt"]
    files["manifest.txt"] = manifest_text(
        config,
        _command_line(argv),
        names,
        {
            "sweep_parameter": parameter,
            "sweep_values": ",".join(str(v) for v in values),
            "schemes": ",".join(s.value for s in schemes),
        },
    )
    write_outputs(out_dir, files)
    print(render_grid(grid))
    print(f"\nwrote {', '.join(names)} to {out_dir}")
    return EXIT_OK


def cmd_validate(config: ScenarioConfig) -> int:
    results = run_checks(config)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(
            level=logging.DEBUG if args.verbose else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s",
        )
        config = resolve_config(args)
        if args.command == "validate":
            return cmd_validate(config)
        if args.workers < 1:
            raise UsageError("--workers must be >= 1")
        schemes = _schemes(args.scheme, config)
        if args.command == "run":
            return cmd_run(config, args.out, schemes, args.workers, argv)
        values = sweep_values(args.parameter, args.values, args.range)
        return cmd_sweep(config, args.parameter, values, args.out, schemes, args.workers, argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001
        log.debug("unhandled", exc_info=True)
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
