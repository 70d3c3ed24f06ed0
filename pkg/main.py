#!/usr/bin/env python3
"""
Delayed-feedback parametric amplifier - command-line entry point.

    python main.py spectrum --config input_config/fig2_squeezed.cfg
    python main.py figure fig10 --workers 4
    python main.py sweep --set eps=0:1:101 --set loss=0.05 --set quantity=floor_db
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

# Add src to Python path
sys.path.append(str(Path(__file__).parent / "src"))

from run_config import parse_config  # noqa: E402
from shared.config import load_config  # noqa: E402
from shared.errors import AnalysisError, ConfigError  # noqa: E402
from shared.utils import setup_logging  # noqa: E402

logger = logging.getLogger(__name__)

COMMANDS = ('spectrum', 'critical-point', 'stability-roots', 'steady-states',
            'evolve', 'hopf-locus', 'figure', 'sweep')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Squeezing and stability of a DPA with delayed coherent feedback")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub = subparsers.add_parser(name)
        if name == 'figure':
            sub.add_argument("figure_id", help="Figure id, e.g. fig2")
        sub.add_argument("--config", help="Run configuration file (key=value lines)")
        sub.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                         help="Override a configuration value (repeatable)")
        sub.add_argument("--output", help="Output CSV file or directory")
        sub.add_argument("--log-level", help="Logging level (default from config/solver.json)")
        sub.add_argument("--workers", type=int, help="Worker processes for sweeps and grids")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    solver_config = load_config()
    if args.workers is not None:
        solver_config.max_workers = args.workers
    setup_logging(None, args.log_level or solver_config.log_level)

    from src import AnalysisRunner

    try:
        text = ""
        if args.config:
            try:
                text = Path(args.config).read_text(encoding='utf-8')
            except OSError as e:
                raise ConfigError(f"cannot read {args.config}: {e}")
        overrides = list(args.set)
        if args.command == 'figure':
            overrides.append(f"figure={args.figure_id}")
        if args.output:
            overrides.append(f"output={args.output}")
        run_config = parse_config(text, overrides, command=args.command)

        runner = AnalysisRunner(solver_config)
        paths = runner.run(args.command, run_config)
        for path in paths:
            print(f"📤 {path}")
        return 0

    except ValidationError as e:
        logger.error(f"❌ Invalid parameters: {e}")
        return ConfigError.exit_code
    except AnalysisError as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
