#!/usr/bin/env python3
"""Run one scenario from a config file and write its outputs."""

import logging
import sys
from pathlib import Path
from typing import Optional

from dephasim.cli import resolve_threads, setup_scenario
from dephasim.errors import ConfigError
from dephasim.scenarios import EXIT_CONFIG, EXIT_IO, EXIT_OK, run_scenario

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format="%(levelname)s: %(message)s"
)
logger = logging.getLogger(__name__)


def main(
    kind: str,
    config_path: str,
    out: Optional[str] = None,
    seed: Optional[int] = None,
    verbose: bool = False,
):
    """Main entry point for the scenario subcommands. Exits with the run status."""
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    try:
        workers = resolve_threads()
        config = setup_scenario(kind, config_path)
    except FileNotFoundError:
        print(f"[!] Config file not found: {config_path}")
        logger.error(f"Config file not found: {config_path}")
        sys.exit(EXIT_IO)
    except OSError as e:
        print(f"[!] Cannot read {config_path}: {e}")
        logger.error(f"Cannot read {config_path}: {e}")
        sys.exit(EXIT_IO)
    except ConfigError as e:
        print(f"[!] Config error: {e}")
        logger.error(str(e))
        sys.exit(EXIT_CONFIG)

    if workers:
        print(f"[~] Threads: {workers}")
    outcome = run_scenario(config, Path(out) if out else None, seed=seed, workers=workers)
    if outcome.status == EXIT_OK:
        print(f"\n[+] {kind} finished: {len(outcome.paths)} files written")
    sys.exit(outcome.status)
