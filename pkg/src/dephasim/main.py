#!/usr/bin/env python3
"""dephasim CLI - unified command-line interface."""

import argparse
import logging
import sys

from dephasim import __version__
from dephasim.cli import add_run_arguments
from dephasim.config import SCENARIO_KINDS

SCENARIO_HELP = {
    "influence": "Damping and induced energy shift for both current directions",
    "evolve": "Integrate the damped Bloch equations",
    "counts": "Exact transmission count distribution and window correlations",
    "simulate": "Seeded Monte Carlo of detector runs",
    "fringe": "Interference fringe phase shift and contrast",
    "sweep": "Run another scenario over a range of one parameter",
}


def create_parser():
    """Create an argument parser with subcommands."""
    parser = argparse.ArgumentParser(
        prog='dephasim',
        description='Dephasing of a double dot by a two-barrier point-contact detector'
    )

    parser.add_argument(
        '--version',
        action='version',
        version=f'dephasim {__version__}'
    )
    parser.add_argument('--verbose', '-v', action='store_true', help='Enable debug logging')

    subparsers = parser.add_subparsers(dest='command', help='Available commands')

    # Init command
    init_parser = subparsers.add_parser('init', help='Write a template scenario file')
    init_parser.add_argument('scenario', choices=SCENARIO_KINDS, help='Scenario kind')
    init_parser.add_argument('--path', help='Target directory (default: current directory)')

    # One subcommand per scenario kind
    for kind in SCENARIO_KINDS:
        scenario_parser = subparsers.add_parser(kind, help=SCENARIO_HELP[kind])
        add_run_arguments(scenario_parser)

    return parser


def main():
    """Main CLI entry point."""
    parser = create_parser()
    args = parser.parse_args()

    if not args.command:
        parser.print_help()
        sys.exit(1)

    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    if args.command == 'init':
        from dephasim.commands.init import main as init_main
        init_main(args.scenario, getattr(args, 'path', None))
    else:
        from dephasim.commands.run import main as run_main
        run_main(args.command, args.config, out=args.out, seed=args.seed, verbose=args.verbose)


if __name__ == '__main__':
    main()
