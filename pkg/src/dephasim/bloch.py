"""Polarization-vector dynamics of the measured two-state system.

The density matrix rho = (I + P.sigma)/2 evolves as

    dP/dt = V x P - D P_tr,      P_tr = (P_x, P_y, 0)

V_x and V_y are the tunneling energies, V_z the level asymmetry (including any
measurement-induced part) and D the damping rate from the detector. The measuring
process conserves P_z and only shrinks the transverse components.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np

from dephasim.errors import InvalidParameterError
from dephasim.influence import InfluenceResult

logger = logging.getLogger(__name__)

NORM_TOL = 1e-9
STEP_SCALE = 0.01
RATE_FLOOR = 1e-12
# ratio at which "much greater than" is considered satisfied
MUCH_GREATER = 10.0
STRONG_DAMPING_RATIO = 1.0

ArrayLike = Union[Sequence[float], np.ndarray]


def _as_vector(name: str, values: ArrayLike) -> np.ndarray:
    vector = np.array(values, dtype=float).reshape(-1)
    if vector.shape != (3,):
        raise InvalidParameterError(name, values, "must have exactly three components")
    if not np.all(np.isfinite(vector)):
        raise InvalidParameterError(name, values, "components must be finite")
    return vector


@dataclass(frozen=True, eq=False)
class PolarizationState:
    """Bloch vector (P_x, P_y, P_z) of the two-state system."""

    p: np.ndarray

    def __post_init__(self):
        vector = _as_vector("p", self.p)
        if np.linalg.norm(vector) > 1.0 + NORM_TOL:
            raise InvalidParameterError("p", self.p, "|P| must not exceed 1")
        object.__setattr__(self, "p", vector)

    @classmethod
    def pointer(cls, dot: str = "L") -> "PolarizationState":
        """Pure state localized on one dot: P_z = +1 for L, -1 for R."""
        return cls(np.array([0.0, 0.0, 1.0 if dot.upper() == "L" else -1.0]))

    @property
    def transverse(self) -> np.ndarray:
        return np.array([self.p[0], self.p[1], 0.0])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.p))

    @property
    def prob_left(self) -> float:
        return 0.5 * (1.0 + self.p[2])

    def density_matrix(self) -> np.ndarray:
        px, py, pz = self.p
        return 0.5 * np.array([[1 + pz, px - 1j * py], [px + 1j * py, 1 - pz]], dtype=complex)


@dataclass(frozen=True, eq=False)
class EvolutionParams:
    """Real energies V = (V_x, V_y, V_z) and damping rate D."""

    v: np.ndarray
    d: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "v", _as_vector("v", self.v))
        if not math.isfinite(self.d) or self.d < 0:
            raise InvalidParameterError("d", self.d, "must be finite and >= 0")

    @property
    def v_tr(self) -> float:
        """Tunneling magnitude |(V_x, V_y)|."""
        return float(math.hypot(self.v[0], self.v[1]))

    def generator(self) -> np.ndarray:
        """Matrix A with dP/dt = A P."""
        vx, vy, vz = self.v
        return np.array(
            [
                [-self.d, -vz, vy],
                [vz, -self.d, -vx],
                [-vy, vx, 0.0],
            ]
        )

    def max_step(self) -> float:
        """Largest step the integrator accepts for these parameters."""
        rate = max(float(np.linalg.norm(self.v)), self.d, RATE_FLOOR)
        return STEP_SCALE / rate


@dataclass
class Trajectory:
    """Sampled solution of the Bloch equation."""

    times: np.ndarray
    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        if len(self.times) != len(self.points):
            raise ValueError("times and points must have equal lengths")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def states(self) -> List[PolarizationState]:
        return [PolarizationState(p) for p in self.points]

    @property
    def final(self) -> PolarizationState:
        return PolarizationState(self.points[-1])

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.points, axis=1)


@dataclass(frozen=True)
class RegimeReport:
    """Classification of the damping regime and of the frozen-dot condition."""

    v_tr: float
    d: float
    flux: float
    degenerate: bool
    damping_ratio: Optional[float] = None
    strong_damping: bool = False
    frozen_dot_ratio: Optional[float] = None
    frozen_dot_valid: bool = False
    weakened_ratio: Optional[float] = None
    # only assessed under strong damping
    weakened_valid: Optional[bool] = None

    @property
    def counting_valid(self) -> bool:
        """Whether frozen-dot counting statistics apply for these rates."""
        if self.degenerate:
            return True
        return self.frozen_dot_valid or bool(self.strong_damping and self.weakened_valid)

    @property
    def relaxation_time(self) -> float:
        """Time scale of dot jumps: 1/V_tr for weak damping, D/V_tr^2 for strong."""
        if self.degenerate:
            return math.inf
        if self.strong_damping:
            return zeno_timescale(self.v_tr, self.d)
        return 1.0 / self.v_tr


def derivative(p: PolarizationState, params: EvolutionParams) -> np.ndarray:
    """Right-hand side V x P - D P_tr."""
    return np.cross(params.v, p.p) - params.d * p.transverse


def effective_params(intrinsic: EvolutionParams, infl: InfluenceResult) -> EvolutionParams:
    """Add the detector's induced V_z and damping to the intrinsic parameters."""
    v = intrinsic.v.copy()
    v[2] += infl.induced_vz
    return EvolutionParams(v=v, d=intrinsic.d + infl.damping)


def rk4_step(p: PolarizationState, params: EvolutionParams, h: float) -> np.ndarray:
    """One classical fourth-order Runge-Kutta step of size h."""
    def f(vector: np.ndarray) -> np.ndarray:
        return np.cross(params.v, vector) - params.d * np.array([vector[0], vector[1], 0.0])

    y = p.p
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_propagator(params: EvolutionParams, h: float) -> np.ndarray:
    """
    Matrix applying one RK4 step of size h.

    The equation is linear with constant coefficients, so a classical RK4 step is
    exactly multiplication by the degree-4 Taylor polynomial of exp(hA).
    """
    a = h * params.generator()
    a2 = a @ a
    a3 = a2 @ a
    a4 = a3 @ a
    return np.eye(3) + a + a2 / 2.0 + a3 / 6.0 + a4 / 24.0


def evolve(
    p0: PolarizationState,
    params: EvolutionParams,
    t_end: float,
    step: Optional[float] = None,
    sample_every: int = 1,
) -> Trajectory:
    """
    Integrate the Bloch equation from t=0 to t_end with fixed RK4 steps.

    The interval is divided into ceil(t_end/step) equal steps, so the last sample lies
    exactly at t_end.

    Args:
        p0: Initial polarization
        params: Energies and damping
        t_end: Final time (>= 0)
        step: Requested step; defaults to params.max_step()
        sample_every: Record every n-th step (the final state is always recorded)

    Returns:
        Trajectory with the recorded samples

    Raises:
        InvalidParameterError: If t_end is negative or step exceeds the stability cap
    """
    if not math.isfinite(t_end) or t_end < 0:
        raise InvalidParameterError("t_end", t_end, "must be finite and >= 0")
    if sample_every < 1:
        raise InvalidParameterError("sample_every", sample_every, "must be >= 1")

    cap = params.max_step()
    if step is None:
        step = cap
    if not step > 0:
        raise InvalidParameterError("step", step, "must be > 0")
    if step > cap * (1.0 + 1e-12):
        raise InvalidParameterError("step", step, f"exceeds the stability cap {cap!r}")

    n_steps = int(math.ceil(t_end / step)) if t_end > 0 else 0
    h = t_end / n_steps if n_steps else 0.0
    logger.debug(f"evolve: {n_steps} steps of {h} up to t={t_end}")

    propagator = rk4_propagator(params, h)
    recorded = [0] + [i for i in range(sample_every, n_steps + 1, sample_every)]
    if recorded[-1] != n_steps:
        recorded.append(n_steps)

    points = np.empty((len(recorded), 3))
    points[0] = p0.p
    p = p0.p.copy()
    slot = 1
    for i in range(1, n_steps + 1):
        p = propagator @ p
        if slot < len(recorded) and recorded[slot] == i:
            points[slot] = p
            slot += 1

    times = np.array(recorded, dtype=float) * h
    if n_steps:
        times[-1] = t_end
    return Trajectory(times=times, points=points)


def zeno_timescale(v_tr: float, d: float) -> float:
    """
    Characteristic time D/V_tr^2 of the strongly damped (watched-pot) evolution.

    Raises:
        InvalidParameterError: If v_tr is not positive
    """
    if not v_tr > 0:
        raise InvalidParameterError("v_tr", v_tr, "must be > 0; without tunneling nothing relaxes")
    return d / v_tr ** 2


def zeno_pz(v_tr: float, d: float, t: ArrayLike) -> np.ndarray:
    """Strong-damping asymptote P_z(t) = exp(-t V_tr^2 / D) for a dot started on L."""
    return np.exp(-np.asarray(t, dtype=float) / zeno_timescale(v_tr, d))


def damped_oscillation_pz(v_tr: float, d: float, t: ArrayLike) -> np.ndarray:
    """
    Exact P_z(t) for V = (v_tr, 0, 0), damping d and P(0) = (0, 0, 1).

    P_z obeys P_z'' + d P_z' + v_tr^2 P_z = 0 with P_z(0) = 1, P_z'(0) = 0.
    """
    t = np.asarray(t, dtype=float)
    half = 0.5 * d
    disc = v_tr ** 2 - half ** 2
    if abs(disc) <= 1e-14 * max(v_tr ** 2, 1.0):
        return np.exp(-half * t) * (1.0 + half * t)
    if disc > 0:
        omega = math.sqrt(disc)
        return np.exp(-half * t) * (np.cos(omega * t) + (half / omega) * np.sin(omega * t))
    kappa = math.sqrt(-disc)
    fast, slow = -half - kappa, -half + kappa
    return (fast * np.exp(slow * t) - slow * np.exp(fast * t)) / (fast - slow)


def classify_regime(v_tr: float, d: float, flux: float) -> RegimeReport:
    """
    Classify weak / strong damping and check the frozen-dot conditions.

    Strong damping means d/v_tr > 1. The frozen-dot condition flux/v_tr >> 1 and, in
    the strong regime, the weakened (flux/v_tr)^2 >> 1 are taken as satisfied at a
    ratio of 10 or more.
    """
    for name, value in (("v_tr", v_tr), ("d", d), ("flux", flux)):
        if not math.isfinite(value) or value < 0:
            raise InvalidParameterError(name, value, "must be finite and >= 0")

    if v_tr == 0:
        logger.debug("v_tr = 0: no internal dynamics")
        return RegimeReport(v_tr=v_tr, d=d, flux=flux, degenerate=True)

    damping_ratio = d / v_tr
    strong = damping_ratio > STRONG_DAMPING_RATIO
    frozen_ratio = flux / v_tr
    weakened_ratio = frozen_ratio ** 2
    report = RegimeReport(
        v_tr=v_tr,
        d=d,
        flux=flux,
        degenerate=False,
        damping_ratio=damping_ratio,
        strong_damping=strong,
        frozen_dot_ratio=frozen_ratio,
        frozen_dot_valid=frozen_ratio >= MUCH_GREATER,
        weakened_ratio=weakened_ratio,
        weakened_valid=weakened_ratio >= MUCH_GREATER if strong else None,
    )
    if not report.counting_valid:
        logger.warning(
            f"frozen-dot condition violated: flux/V_tr = {frozen_ratio:.3g} < {MUCH_GREATER:g}"
        )
    return report
