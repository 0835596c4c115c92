"""Scenario runners: turn a validated config into output tables."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional

import numpy as np

from dephasim import __version__
from dephasim.bloch import classify_regime, evolve, zeno_timescale
from dephasim.config import ScenarioConfig, window_sizes
from dephasim.counting import (
    count_distribution,
    empirical_distribution,
    empirical_window_correlation,
    peak_weights,
    poisson_approx,
    simulate_runs,
    total_variation,
    window_correlation_matrix,
)
from dephasim.errors import ConfigError, InvalidInputError, InvalidParameterError
from dephasim.influence import (
    direction_asymmetry,
    fringe_prediction,
    influence,
    transmitted_current,
)
from dephasim.output import (
    Table,
    bitstrings_text,
    distribution_table,
    run_samples_table,
    save_manifest,
    save_table,
    save_text,
)
from dephasim.smatrix import Direction, transmission_probability

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_IO = 4


@dataclass
class ScenarioResult:
    """Tables plus raw text artifacts produced by one scenario."""

    tables: List[Table] = field(default_factory=list)
    texts: Dict[str, str] = field(default_factory=dict)


class RunOutcome(NamedTuple):
    status: int
    paths: List[Path]


class InfluenceScenario:
    """Damping, induced energy and direction asymmetry for both current directions."""

    @staticmethod
    def run(config: ScenarioConfig, workers: Optional[int] = None) -> ScenarioResult:
        table = Table(
            "influence",
            [
                "direction", "flux", "lambda_re", "lambda_im", "damping", "induced_vz",
                "delta_d", "delta_vz", "transmission_l", "transmission_r",
                "current_l", "current_r",
            ],
        )
        for direction in (Direction.FORWARD, Direction.BACKWARD):
            setup = config.detector_setup(direction)
            result = influence(setup)
            asym = direction_asymmetry(setup)
            table.rows.append([
                direction.value,
                setup.flux,
                result.lam.real,
                result.lam.imag,
                result.damping,
                result.induced_vz,
                asym.delta_d,
                asym.delta_vz,
                transmission_probability(setup.barrier_l),
                transmission_probability(setup.barrier_r),
                transmitted_current(setup.barrier_l, setup.flux),
                transmitted_current(setup.barrier_r, setup.flux),
            ])
        return ScenarioResult(tables=[table])


class FringeScenario:
    """Fringe phase shift and contrast for the configured dwell time."""

    @staticmethod
    def run(config: ScenarioConfig, workers: Optional[int] = None) -> ScenarioResult:
        setup = config.detector_setup()
        dwell_time = config.require("fringe.dwell_time")
        prediction = fringe_prediction(setup, dwell_time)
        table = Table(
            "fringe",
            ["v_d", "flux", "direction", "dwell_time", "phase_shift", "contrast_factor"],
            [[
                config.get("detector.v_d", ""),
                setup.flux,
                setup.direction.value,
                dwell_time,
                prediction.phase_shift,
                prediction.contrast_factor,
            ]],
        )
        return ScenarioResult(tables=[table])


class EvolveScenario:
    """Bloch-vector trajectory and, with a detector configured, the regime report."""

    @staticmethod
    def run(config: ScenarioConfig, workers: Optional[int] = None) -> ScenarioResult:
        params = config.evolution_params()
        trajectory = evolve(
            config.initial_state(),
            params,
            config.require("evolution.t_end"),
            step=config.get("evolution.step"),
            sample_every=config.get("evolution.sample_every", 1),
        )
        norms = trajectory.norms
        rows = [
            [t, p[0], p[1], p[2], norm]
            for t, p, norm in zip(trajectory.times, trajectory.points, norms)
        ]
        tables = [Table("trajectory", ["t", "P_x", "P_y", "P_z", "|P|"], rows)]

        if config.has_barriers() and (config.has("detector.flux") or config.has("detector.v_d")):
            report = classify_regime(params.v_tr, params.d, config.flux())
            zeno = zeno_timescale(report.v_tr, report.d) if not report.degenerate else ""
            tables.append(Table(
                "regime",
                [
                    "v_tr", "d", "flux", "damping_ratio", "strong_damping",
                    "frozen_dot_ratio", "frozen_dot_valid", "weakened_ratio",
                    "weakened_valid", "counting_valid", "zeno_timescale",
                ],
                [[
                    report.v_tr, report.d, report.flux,
                    _blank(report.damping_ratio), report.strong_damping,
                    _blank(report.frozen_dot_ratio), report.frozen_dot_valid,
                    _blank(report.weakened_ratio), _blank(report.weakened_valid),
                    report.counting_valid, zeno,
                ]],
            ))
        return ScenarioResult(tables=tables)


class CountsScenario:
    """Exact count distribution, its Poisson approximation and window correlations."""

    @staticmethod
    def run(config: ScenarioConfig, workers: Optional[int] = None) -> ScenarioResult:
        mixture = config.mixture()
        n = config.require("counts.n")
        n1, n2 = window_sizes(config)

        exact = count_distribution(mixture, n)
        approx = poisson_approx(mixture, n)
        correlation = window_correlation_matrix(mixture, n1, n2)
        peaks = peak_weights(exact)

        tables = [
            distribution_table("distribution", exact),
            distribution_table("poisson", approx.distribution),
            _correlation_table("correlation", correlation),
            Table(
                "summary",
                [
                    "n", "rho_ll", "p_l", "p_r", "mean", "poisson_folded_mass",
                    "poisson_valid", "peak_below", "peak_above", "n1", "n2",
                ],
                [[
                    n, mixture.rho_ll, mixture.p_l, mixture.p_r, exact.mean, approx.folded_mass,
                    approx.valid, peaks.below, peaks.above, n1, n2,
                ]],
            ),
        ]
        return ScenarioResult(tables=tables)


class SimulateScenario:
    """Monte Carlo runs compared against the exact mixture statistics."""

    @staticmethod
    def run(config: ScenarioConfig, workers: Optional[int] = None) -> ScenarioResult:
        mixture = config.mixture()
        n = config.require("simulate.n")
        n_runs = config.require("simulate.runs")
        n1, n2 = window_sizes(config)

        samples = simulate_runs(mixture, n, n_runs, config.seed, workers=workers)
        empirical = empirical_distribution(samples)
        exact = count_distribution(mixture, n)
        estimate = empirical_window_correlation(samples, n1, n2)
        exact_corr = window_correlation_matrix(mixture, n1, n2)
        peaks = peak_weights(empirical)

        comparison = Table(
            "empirical",
            ["Q", "empirical_prob", "exact_prob"],
            [[q, float(e), float(x)] for q, (e, x) in enumerate(zip(empirical.probs, exact.probs))],
        )
        correlation = Table("window_correlation", ["q1", "q2", "estimate", "stderr", "exact"])
        for q1 in range(n1 + 1):
            for q2 in range(n2 + 1):
                correlation.rows.append([
                    q1, q2,
                    float(estimate.estimate[q1, q2]),
                    float(estimate.stderr[q1, q2]),
                    float(exact_corr[q1, q2]),
                ])
        summary = Table(
            "summary",
            ["n", "runs", "seed", "rho_ll", "peak_below", "peak_above", "tv_distance"],
            [[
                n, n_runs, config.seed, mixture.rho_ll, peaks.below, peaks.above,
                total_variation(empirical, exact),
            ]],
        )
        return ScenarioResult(
            tables=[run_samples_table("runs", samples), comparison, correlation, summary],
            texts={"runs.txt": bitstrings_text(samples)},
        )


class SweepScenario:
    """Run another scenario at evenly spaced values of one parameter."""

    @staticmethod
    def run(config: ScenarioConfig, workers: Optional[int] = None) -> ScenarioResult:
        axis = config.sweep_axis()
        merged: Dict[str, Table] = {}
        texts: Dict[str, str] = {}
        points = config.expand()
        logger.info(f"Sweeping {axis} over {len(points)} points")
        for index, point in enumerate(points):
            value = point.values[axis]
            result = SCENARIOS[point.kind].run(point, workers)
            for table in result.tables:
                target = merged.setdefault(table.name, Table(table.name, [axis] + table.header))
                target.rows.extend([value] + row for row in table.rows)
            for name, content in result.texts.items():
                stem, _, suffix = name.rpartition(".")
                texts[f"{stem}_{index:04d}.{suffix}"] = content
        return ScenarioResult(tables=list(merged.values()), texts=texts)


SCENARIOS = {
    "influence": InfluenceScenario,
    "evolve": EvolveScenario,
    "counts": CountsScenario,
    "simulate": SimulateScenario,
    "fringe": FringeScenario,
    "sweep": SweepScenario,
}


def _blank(value: Any):
    return "" if value is None else value


def _correlation_table(name: str, matrix: np.ndarray) -> Table:
    table = Table(name, ["q1", "q2", "correlation"])
    for q1 in range(matrix.shape[0]):
        for q2 in range(matrix.shape[1]):
            table.rows.append([q1, q2, float(matrix[q1, q2])])
    return table


def run_scenario(
    config: ScenarioConfig,
    out_dir: Optional[Path] = None,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> RunOutcome:
    """
    Run a scenario and write its tables and manifest.

    Args:
        config: Validated scenario configuration
        out_dir: Output directory (overrides output.dir)
        seed: Seed (overrides the config's seed)
        workers: Monte Carlo thread cap

    Returns:
        RunOutcome with exit status 0 (success), 2 (config), 3 (numeric) or 4 (I/O)
        and the files written
    """
    if seed is not None:
        config = config.with_values(seed=seed)
    out_dir = Path(out_dir) if out_dir is not None else config.output_dir

    try:
        result = SCENARIOS[config.kind].run(config, workers)
    except ConfigError as e:
        print(f"[!] Config error: {e}")
        logger.error(str(e))
        return RunOutcome(EXIT_CONFIG, [])
    except (InvalidParameterError, InvalidInputError, ArithmeticError, ValueError) as e:
        print(f"[!] {config.kind} scenario failed: {e}")
        logger.exception(f"{config.kind} scenario failed")
        return RunOutcome(EXIT_RUNTIME, [])

    paths: List[Path] = []
    try:
        for table in result.tables:
            paths.append(save_table(out_dir, table))
        for name, content in sorted(result.texts.items()):
            paths.append(save_text(out_dir, name, content))
        paths.append(save_manifest(
            out_dir,
            scenario=config.kind,
            config_text=config.text,
            seed=config.seed,
            version=__version__,
            artifacts=[p.name for p in paths],
        ))
    except OSError as e:
        print(f"[!] Failed to write outputs to {out_dir}: {e}")
        logger.error(f"Failed to write outputs to {out_dir}: {e}")
        return RunOutcome(EXIT_IO, paths)

    for path in paths:
        print(f"[+] Wrote {path}")
    return RunOutcome(EXIT_OK, paths)
