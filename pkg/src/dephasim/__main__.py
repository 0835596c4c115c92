#!/usr/bin/env python3
"""dephasim CLI entry point for python -m dephasim."""

from dephasim.main import main

if __name__ == "__main__":
    main()
