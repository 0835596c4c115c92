"""Unit tests for dephasim.output module."""

import json
import shutil
import tempfile
import unittest
from pathlib import Path

import numpy as np

from dephasim.counting import MixtureSpec, count_distribution, simulate_runs
from dephasim.output import (
    MANIFEST_FILE,
    Table,
    bitstrings_text,
    config_hash,
    distribution_table,
    format_value,
    run_samples_table,
    save_manifest,
    save_table,
)


class TestFormatValue(unittest.TestCase):
    """Tests for format_value."""

    def test_floats_round_trip(self):
        """Test floats use the shortest round-trip representation."""
        for value in (0.1, 1.0 / 3.0, 1e-300, 0.19371024449999998, -2.5):
            self.assertEqual(float(format_value(value)), value)
        self.assertEqual(format_value(0.1), "0.1")

    def test_numpy_scalars(self):
        """Test numpy scalars format like Python values."""
        self.assertEqual(format_value(np.float64(0.25)), "0.25")
        self.assertEqual(format_value(np.int64(7)), "7")

    def test_booleans_and_strings(self):
        """Test booleans are lowercase and strings pass through."""
        self.assertEqual(format_value(True), "true")
        self.assertEqual(format_value(np.bool_(False)), "false")
        self.assertEqual(format_value("forward"), "forward")


class TestSaveTable(unittest.TestCase):
    """Tests for table files."""

    def setUp(self):
        """Create temporary directory for testing."""
        self.temp_dir = Path(tempfile.mkdtemp())
        self.addCleanup(lambda: shutil.rmtree(self.temp_dir))

    def test_csv_layout(self):
        """Test one header line and one line per row."""
        table = Table("demo", ["a", "b"], [[1, 0.5], [2, True]])
        path = save_table(self.temp_dir / "out", table)
        self.assertEqual(path.name, "demo.csv")
        self.assertEqual(path.read_text(), "a,b\n1,0.5\n2,true\n")

    def test_distribution_table(self):
        """Test distributions serialize as Q, prob."""
        dist = count_distribution(MixtureSpec.from_rho(1.0, 0.5, 0.5), 2)
        table = distribution_table("distribution", dist)
        self.assertEqual(table.header, ["Q", "prob"])
        self.assertEqual(table.rows, [[0, 0.25], [1, 0.5], [2, 0.25]])

    def test_run_samples(self):
        """Test run tables and bitstrings agree."""
        samples = simulate_runs(MixtureSpec.from_rho(0.5, 0.9, 0.1), 8, 5, seed=3)
        table = run_samples_table("runs", samples)
        lines = bitstrings_text(samples).splitlines()
        self.assertEqual(len(lines), 5)
        for row, line in zip(table.rows, lines):
            self.assertEqual(row[2], line.count("1"))
            self.assertEqual(row[3], 8)

    def test_manifest(self):
        """Test the manifest records hash, seed and version deterministically."""
        first = save_manifest(self.temp_dir, "counts", "a = 1\n", 5, "0.1.0", ["b.csv", "a.csv"])
        content = first.read_text()
        data = json.loads(content)
        self.assertEqual(first.name, MANIFEST_FILE)
        self.assertEqual(data["config_sha256"], config_hash("a = 1\n"))
        self.assertEqual(data["seed"], 5)
        self.assertEqual(data["artifacts"], ["a.csv", "b.csv"])
        second = save_manifest(self.temp_dir, "counts", "a = 1\n", 5, "0.1.0", ["a.csv", "b.csv"])
        self.assertEqual(second.read_text(), content)


if __name__ == '__main__':
    unittest.main()
