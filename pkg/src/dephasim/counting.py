"""Statistics of the detector current in the frozen-dot regime.

While the dot does not jump (many probes per tunneling time), a run is a mixture of two
Bernoulli processes: with probability rho_LL every probe is transmitted with p_L, with
probability rho_RR with p_R. Transmission counts are therefore binomial mixtures, and
successive windows of the same run are correlated through the shared dot position.
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Optional, Sequence

import numpy as np
from scipy import stats

from dephasim.errors import InvalidInputError, InvalidParameterError
from dephasim.influence import DetectorSetup
from dephasim.smatrix import transmission_probability

logger = logging.getLogger(__name__)

NORMALIZATION_TOL = 1e-10
MIXTURE_TOL = 1e-12
EXACT_BINOMIAL_MAX_N = 30
# Poisson limit: "N large and p small"
POISSON_MIN_N = 20
POISSON_MAX_P = 0.1
SEED_LIMIT = 2 ** 64
RUN_CHUNK = 1024


def _check_probability(name: str, value: float) -> None:
    if not math.isfinite(value) or not 0.0 <= value <= 1.0:
        raise InvalidParameterError(name, value, "must lie in [0, 1]")


def _check_count(name: str, value: int, minimum: int = 1) -> None:
    if isinstance(value, bool) or int(value) != value or value < minimum:
        raise InvalidParameterError(name, value, f"must be an integer >= {minimum}")


@dataclass(frozen=True)
class MixtureSpec:
    """Dot occupation probabilities and per-dot transmission probabilities."""

    rho_ll: float
    rho_rr: float
    p_l: float
    p_r: float

    def __post_init__(self):
        for name in ("rho_ll", "rho_rr", "p_l", "p_r"):
            _check_probability(name, getattr(self, name))
        if abs(self.rho_ll + self.rho_rr - 1.0) > MIXTURE_TOL:
            raise InvalidParameterError(
                "rho_rr", self.rho_rr, f"rho_ll + rho_rr must equal 1 (rho_ll={self.rho_ll})"
            )

    @classmethod
    def from_rho(cls, rho_ll: float, p_l: float, p_r: float) -> "MixtureSpec":
        return cls(rho_ll=rho_ll, rho_rr=1.0 - rho_ll, p_l=p_l, p_r=p_r)

    @classmethod
    def from_setup(cls, rho_ll: float, setup: DetectorSetup) -> "MixtureSpec":
        """Mixture whose transmission probabilities come from the detector barriers."""
        return cls.from_rho(
            rho_ll,
            transmission_probability(setup.barrier_l),
            transmission_probability(setup.barrier_r),
        )

    def components(self) -> Iterable[tuple]:
        """(weight, p) pairs of the two Bernoulli processes."""
        return ((self.rho_ll, self.p_l), (self.rho_rr, self.p_r))


@dataclass(frozen=True, eq=False)
class OutcomeSequence:
    """Ordered probe outcomes: 1 = transmission, 0 = reflection."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.uint8).reshape(-1)
        if bits.size < 1:
            raise InvalidInputError("an outcome sequence needs at least one probe")
        if np.any(bits > 1):
            raise InvalidInputError("outcomes must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_string(cls, text: str) -> "OutcomeSequence":
        return cls(np.array([int(ch) for ch in text.strip()], dtype=np.uint8))

    def __len__(self) -> int:
        return int(self.bits.size)

    @property
    def transmissions(self) -> int:
        return int(self.bits.sum())

    def to_string(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)


@dataclass(frozen=True, eq=False)
class CountDistribution:
    """Probabilities of Q = 0..n transmissions in n probes."""

    n: int
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.shape != (self.n + 1,):
            raise InvalidInputError(f"expected {self.n + 1} probabilities, got {probs.shape}")
        if np.any(probs < 0):
            raise InvalidInputError("probabilities must be non-negative")
        if abs(probs.sum() - 1.0) > NORMALIZATION_TOL:
            raise InvalidInputError(f"probabilities sum to {probs.sum()!r}, not 1")
        object.__setattr__(self, "probs", probs)

    def __getitem__(self, q: int) -> float:
        return float(self.probs[q])

    @property
    def mean(self) -> float:
        return float(np.dot(np.arange(self.n + 1), self.probs))


@dataclass(frozen=True)
class PoissonApproximation:
    distribution: CountDistribution
    folded_mass: float
    valid: bool


@dataclass(frozen=True, eq=False)
class RunSample:
    """One simulated run: the dot it started on and its probe outcomes."""

    seed: int
    run_index: int
    initial_dot: str
    sequence: OutcomeSequence

    @property
    def n(self) -> int:
        return len(self.sequence)

    @property
    def transmissions(self) -> int:
        return self.sequence.transmissions


@dataclass(frozen=True, eq=False)
class WindowCorrelationEstimate:
    """Estimated Prob(Q1,Q2) - Prob(Q1)Prob(Q2) with a per-cell standard error."""

    n1: int
    n2: int
    n_runs: int
    joint: np.ndarray
    estimate: np.ndarray
    stderr: np.ndarray


class PeakWeights(NamedTuple):
    below: float
    above: float
    threshold: float


def binomial_pmf(n: int, p: float) -> np.ndarray:
    """
    Binomial probabilities of Q = 0..n successes.

    Small n is evaluated by direct products so results can be compared against
    sequence enumeration; larger n goes through scipy's log-space evaluation.
    """
    _check_count("n", n, minimum=0)
    _check_probability("p", p)
    if n <= EXACT_BINOMIAL_MAX_N:
        q = 1.0 - p
        return np.array([math.comb(n, k) * p ** k * q ** (n - k) for k in range(n + 1)])
    return stats.binom.pmf(np.arange(n + 1), n, p)


def sequence_probability(seq: OutcomeSequence, mixture: MixtureSpec) -> float:
    """Probability of an exact sequence of transmissions and reflections."""
    q_count = seq.transmissions
    r_count = len(seq) - q_count
    total = 0.0
    for weight, p in mixture.components():
        total += weight * p ** q_count * (1.0 - p) ** r_count
    return total


def count_distribution(mixture: MixtureSpec, n: int) -> CountDistribution:
    """Prob(Q, n) = rho_LL Binom(Q; n, p_L) + rho_RR Binom(Q; n, p_R)."""
    _check_count("n", n)
    probs = mixture.rho_ll * binomial_pmf(n, mixture.p_l) + mixture.rho_rr * binomial_pmf(n, mixture.p_r)
    return CountDistribution(n=n, probs=probs)


def _poisson_component(n: int, p: float) -> tuple:
    mean = p * n
    probs = np.zeros(n + 1)
    if mean == 0:
        probs[0] = 1.0
        return probs, 0.0
    probs[:n] = stats.poisson.pmf(np.arange(n), mean)
    # Q >= n all lands in the last bin
    probs[n] = stats.poisson.sf(n - 1, mean)
    return probs, float(stats.poisson.sf(n, mean))


def poisson_approx(mixture: MixtureSpec, n: int) -> PoissonApproximation:
    """
    Replace each binomial component by a Poisson law with mean p*n.

    Mass beyond Q = n is folded into the Q = n bin; the folded amount is reported. The
    approximation is flagged valid for n >= 20 with every weighted p <= 0.1.
    """
    _check_count("n", n)
    probs = np.zeros(n + 1)
    folded = 0.0
    valid = n >= POISSON_MIN_N
    for weight, p in mixture.components():
        if weight == 0:
            continue
        component, tail = _poisson_component(n, p)
        probs += weight * component
        folded += weight * tail
        valid = valid and p <= POISSON_MAX_P
    if not valid:
        logger.warning(f"Poisson approximation outside its range (n={n}, p_L={mixture.p_l}, p_R={mixture.p_r})")
    logger.debug(f"Poisson tail folded into Q={n}: {folded}")
    return PoissonApproximation(
        distribution=CountDistribution(n=n, probs=probs),
        folded_mass=folded,
        valid=valid,
    )


def two_window_distribution(mixture: MixtureSpec, n1: int, n2: int) -> np.ndarray:
    """Joint Prob(Q1, Q2) for n1 probes followed by n2 probes of the same run."""
    _check_count("n1", n1)
    _check_count("n2", n2)
    joint = np.zeros((n1 + 1, n2 + 1))
    for weight, p in mixture.components():
        joint += weight * np.outer(binomial_pmf(n1, p), binomial_pmf(n2, p))
    return joint


def window_correlation_matrix(mixture: MixtureSpec, n1: int, n2: int) -> np.ndarray:
    """Prob(Q1,Q2) - Prob(Q1)Prob(Q2) for every (Q1, Q2) cell."""
    _check_count("n1", n1)
    _check_count("n2", n2)
    diff1 = binomial_pmf(n1, mixture.p_l) - binomial_pmf(n1, mixture.p_r)
    diff2 = binomial_pmf(n2, mixture.p_l) - binomial_pmf(n2, mixture.p_r)
    return mixture.rho_ll * (1.0 - mixture.rho_ll) * np.outer(diff1, diff2)


def window_correlation(mixture: MixtureSpec, n1: int, n2: int, q1: int, q2: int) -> float:
    """
    Correlation between Q1 transmissions in a first window of n1 probes and Q2 in
    the following n2 probes.

    Vanishes when only one dot is occupied or when p_L = p_R.
    """
    if not 0 <= q1 <= n1:
        raise InvalidParameterError("q1", q1, f"must lie in [0, {n1}]")
    if not 0 <= q2 <= n2:
        raise InvalidParameterError("q2", q2, f"must lie in [0, {n2}]")
    return float(window_correlation_matrix(mixture, n1, n2)[q1, q2])


def _run_generator(seed: int, run_index: int) -> np.random.Generator:
    # counter-based stream keyed by (seed, run index)
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=(run_index,))
    return np.random.Generator(np.random.Philox(sequence))


def simulate_run(mixture: MixtureSpec, n: int, seed: int, run_index: int) -> RunSample:
    """Simulate a single run; depends only on (seed, run_index)."""
    rng = _run_generator(seed, run_index)
    on_left = rng.random() < mixture.rho_ll
    p = mixture.p_l if on_left else mixture.p_r
    bits = (rng.random(n) < p).astype(np.uint8)
    return RunSample(
        seed=seed,
        run_index=run_index,
        initial_dot="L" if on_left else "R",
        sequence=OutcomeSequence(bits),
    )


def _simulate_chunk(mixture: MixtureSpec, n: int, seed: int, indices: range) -> List[RunSample]:
    return [simulate_run(mixture, n, seed, i) for i in indices]


def simulate_runs(
    mixture: MixtureSpec,
    n: int,
    n_runs: int,
    seed: int,
    workers: Optional[int] = None,
) -> List[RunSample]:
    """
    Simulate n_runs independent runs of n probes each.

    Every run draws its initial dot and outcomes from its own stream derived from
    (seed, run index), so the output is identical for any worker count.

    Args:
        mixture: Mixture to sample from
        n: Probes per run
        n_runs: Number of runs
        seed: Unsigned 64-bit master seed
        workers: Thread count; None or 0 uses the executor default, 1 runs serially
    """
    _check_count("n", n)
    _check_count("n_runs", n_runs)
    if isinstance(seed, bool) or int(seed) != seed or not 0 <= seed < SEED_LIMIT:
        raise InvalidParameterError("seed", seed, "must be an unsigned 64-bit integer")
    seed = int(seed)

    chunks = [range(start, min(start + RUN_CHUNK, n_runs)) for start in range(0, n_runs, RUN_CHUNK)]
    if workers == 1 or len(chunks) == 1:
        results = [_simulate_chunk(mixture, n, seed, chunk) for chunk in chunks]
    else:
        max_workers = workers or min(32, os.cpu_count() or 1)
        logger.debug(f"simulating {n_runs} runs on {max_workers} threads")
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            results = list(executor.map(lambda c: _simulate_chunk(mixture, n, seed, c), chunks))
    return [sample for chunk in results for sample in chunk]


def _check_samples(samples: Sequence[RunSample]) -> int:
    if not samples:
        raise InvalidInputError("no run samples given")
    lengths = {sample.n for sample in samples}
    if len(lengths) != 1:
        raise InvalidInputError(f"runs have unequal lengths: {sorted(lengths)}")
    return lengths.pop()


def empirical_distribution(samples: Sequence[RunSample]) -> CountDistribution:
    """Normalized histogram of per-run transmission counts."""
    n = _check_samples(samples)
    counts = np.bincount([sample.transmissions for sample in samples], minlength=n + 1)
    return CountDistribution(n=n, probs=counts / len(samples))


def _proportion_stderr(p: np.ndarray, n_runs: int) -> np.ndarray:
    # floored at the resolution of a single count
    return np.sqrt(np.maximum(p * (1.0 - p), 1.0 / n_runs) / n_runs)


def correlation_stderr(joint: np.ndarray, n_runs: int) -> np.ndarray:
    """
    First-order standard error of the estimator f(Q1,Q2) - f(Q1) f(Q2) built from
    n_runs runs whose joint window distribution is `joint`.

    Uses the sum of the standard errors of the three terms, an upper bound on the
    combined first-order error.
    """
    m1 = joint.sum(axis=1)
    m2 = joint.sum(axis=0)
    se_joint = _proportion_stderr(joint, n_runs)
    se_m1 = _proportion_stderr(m1, n_runs)
    se_m2 = _proportion_stderr(m2, n_runs)
    return se_joint + np.outer(se_m1, m2) + np.outer(m1, se_m2)


def empirical_window_correlation(
    samples: Sequence[RunSample], n1: int, n2: int
) -> WindowCorrelationEstimate:
    """
    Estimate Prob(Q1,Q2) - Prob(Q1)Prob(Q2) from the first n1 and following n2
    probes of every run.

    Raises:
        InvalidInputError: If a run is shorter than n1 + n2
    """
    _check_count("n1", n1)
    _check_count("n2", n2)
    if not samples:
        raise InvalidInputError("no run samples given")
    short = [s.run_index for s in samples if s.n < n1 + n2]
    if short:
        raise InvalidInputError(f"{len(short)} runs are shorter than n1 + n2 = {n1 + n2}")

    bits = np.stack([s.sequence.bits[: n1 + n2] for s in samples]).astype(np.int64)
    q1 = bits[:, :n1].sum(axis=1)
    q2 = bits[:, n1:].sum(axis=1)
    joint = np.zeros((n1 + 1, n2 + 1))
    np.add.at(joint, (q1, q2), 1.0)
    joint /= len(samples)
    estimate = joint - np.outer(joint.sum(axis=1), joint.sum(axis=0))
    return WindowCorrelationEstimate(
        n1=n1,
        n2=n2,
        n_runs=len(samples),
        joint=joint,
        estimate=estimate,
        stderr=correlation_stderr(joint, len(samples)),
    )


def total_variation(a: CountDistribution, b: CountDistribution) -> float:
    """Total-variation distance between two distributions over the same n."""
    if a.n != b.n:
        raise InvalidInputError(f"distributions cover different n: {a.n} vs {b.n}")
    return float(0.5 * np.abs(a.probs - b.probs).sum())


def peak_weights(dist: CountDistribution, threshold: Optional[float] = None) -> PeakWeights:
    """
    Split a two-peaked count distribution at threshold (default n/2).

    With p_L > p_R the mass above the threshold estimates rho_LL.
    """
    if threshold is None:
        threshold = dist.n / 2.0
    q = np.arange(dist.n + 1)
    above = float(dist.probs[q > threshold].sum())
    return PeakWeights(below=float(dist.probs[q <= threshold].sum()), above=above, threshold=threshold)
