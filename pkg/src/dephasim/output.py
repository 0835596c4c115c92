"""Output files: CSV tables, raw bitstrings and the run manifest."""

import csv
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Sequence

from dephasim.counting import CountDistribution, RunSample

logger = logging.getLogger(__name__)

MANIFEST_FILE = "manifest.json"


@dataclass
class Table:
    """Named CSV table with a one-line header."""

    name: str
    header: List[str]
    rows: List[List[Any]] = field(default_factory=list)

    @property
    def file_name(self) -> str:
        return f"{self.name}.csv"


def format_value(value: Any) -> str:
    """
    Render a cell value.

    Floats use the shortest round-trip decimal (locale independent, '.' separator).
    """
    if hasattr(value, "item"):
        value = value.item()
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def distribution_table(name: str, dist: CountDistribution) -> Table:
    return Table(name, ["Q", "prob"], [[q, float(p)] for q, p in enumerate(dist.probs)])


def run_samples_table(name: str, samples: Sequence[RunSample]) -> Table:
    return Table(
        name,
        ["run_index", "initial_dot", "Q", "n"],
        [[s.run_index, s.initial_dot, s.transmissions, s.n] for s in samples],
    )


def save_table(out_dir: Path, table: Table) -> Path:
    """
    Write a table to <out_dir>/<name>.csv.

    Raises:
        OSError: If the file cannot be written
    """
    path = out_dir / table.file_name
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(table.header)
            for row in table.rows:
                writer.writerow([format_value(v) for v in row])
    except OSError as e:
        logger.error(f"Failed to write {path}: {e}")
        raise
    logger.debug(f"Saved {len(table.rows)} rows to {path}")
    return path


def bitstrings_text(samples: Sequence[RunSample]) -> str:
    """One run per line as a string of 0/1 outcomes."""
    return "".join(s.sequence.to_string() + "\n" for s in samples)


def save_text(out_dir: Path, name: str, content: str) -> Path:
    path = out_dir / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(content, encoding="utf-8")
    logger.debug(f"Saved {path}")
    return path


def config_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def save_manifest(
    out_dir: Path,
    scenario: str,
    config_text: str,
    seed: int,
    version: str,
    artifacts: List[str],
) -> Path:
    """Record what produced the outputs in <out_dir>/manifest.json."""
    data: Dict[str, Any] = {
        "scenario": scenario,
        "config_sha256": config_hash(config_text),
        "seed": seed,
        "version": version,
        "artifacts": sorted(artifacts),
    }
    path = out_dir / MANIFEST_FILE
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
