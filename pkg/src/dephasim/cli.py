"""Common CLI utilities for dephasim commands."""

import argparse
import os
from pathlib import Path
from typing import Mapping, Optional

from dephasim.config import ScenarioConfig, load_config
from dephasim.counting import SEED_LIMIT
from dephasim.errors import ConfigError

THREADS_ENV = "DEPHASIM_THREADS"


def seed_arg(text: str) -> int:
    """argparse type for an unsigned 64-bit seed."""
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}")
    if not 0 <= value < SEED_LIMIT:
        raise argparse.ArgumentTypeError(f"seed must lie in [0, 2**64), got {value}")
    return value


def add_run_arguments(parser: argparse.ArgumentParser) -> None:
    """Arguments shared by every scenario subcommand."""
    parser.add_argument("--config", required=True, help="Scenario file (key = value format)")
    parser.add_argument("--out", help="Output directory (overrides output.dir)")
    parser.add_argument("--seed", type=seed_arg, help="Unsigned 64-bit seed (overrides seed)")


def resolve_threads(environ: Optional[Mapping[str, str]] = None) -> Optional[int]:
    """
    Read the Monte Carlo thread cap from DEPHASIM_THREADS.

    Returns:
        Positive thread count, or None for the implementation default (unset or 0)

    Raises:
        ConfigError: If the variable is not a non-negative integer
    """
    environ = os.environ if environ is None else environ
    raw = environ.get(THREADS_ENV, "").strip()
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"expected a non-negative integer, got {raw!r}", key=THREADS_ENV)
    if value < 0:
        raise ConfigError(f"expected a non-negative integer, got {raw!r}", key=THREADS_ENV)
    return value or None


def setup_scenario(kind: str, config_path: str) -> ScenarioConfig:
    """
    Load the scenario file for a subcommand and print what will run.

    Raises:
        FileNotFoundError: If the config file does not exist
        ConfigError: If the config is invalid or describes another scenario
    """
    config = load_config(Path(config_path), kind)
    print(f"[~] Scenario: {config.kind}")
    print(f"[~] Config: {config_path}")
    if config.kind == "sweep":
        print(f"[~] Sweep: {config.values['sweep.scenario']} over {config.sweep_axis()} "
              f"({config.values['sweep.points']} points)")
    return config
