#!/usr/bin/env python3
"""Write a template scenario file for one scenario kind."""

import logging
import sys
from pathlib import Path
from typing import Optional

from dephasim.config import init_config

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format="%(levelname)s: %(message)s"
)
logger = logging.getLogger(__name__)


def main(kind: str, target_path: Optional[str] = None):
    """Main entry point for dephasim init command."""
    try:
        target_dir = Path(target_path) if target_path else None
        config_path = init_config(kind, target_dir)
        print(f"\n[+] Template written to: {config_path}")
        print(f"\nNext steps:")
        print(f"1. Edit {config_path} to set your parameters")
        print(f"2. Run 'dephasim {kind} --config {config_path}'")

    except FileExistsError as e:
        print(f"[!] {e}")
        logger.error(str(e))
        sys.exit(1)
    except Exception as e:
        print(f"[!] Failed to write template: {e}")
        logger.exception("Template generation failed")
        sys.exit(1)
