"""dephasim CLI commands."""
