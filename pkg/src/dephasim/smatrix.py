"""Two-channel scattering matrices of the detector barriers.

Rows and columns are indexed by wave vector: index 0 is +k (``Direction.FORWARD``),
index 1 is -k (``Direction.BACKWARD``). Column j holds the outgoing amplitudes for a
wave incoming with direction j, so ``S[0, 0]`` is the forward transmission amplitude
and ``S[1, 0]`` the reflection amplitude for a wave incoming with +k.
"""

import math
import numbers
from dataclasses import dataclass
from enum import Enum

import numpy as np

from dephasim.errors import InvalidParameterError

UNITARITY_TOL = 1e-12


class Direction(Enum):
    """Direction of the detector current."""

    FORWARD = "forward"
    BACKWARD = "backward"

    @property
    def index(self) -> int:
        """Diagonal index of the scattering matrix for this incoming direction."""
        return 0 if self is Direction.FORWARD else 1

    @property
    def eta_sign(self) -> int:
        """Sign multiplying the eta difference in the closed forms for this direction."""
        return -1 if self is Direction.FORWARD else 1

    def reversed(self) -> "Direction":
        return Direction.BACKWARD if self is Direction.FORWARD else Direction.FORWARD

    @classmethod
    def parse(cls, value: str) -> "Direction":
        """
        Parse a direction name.

        Accepts ``forward``/``backward`` as well as ``+k``/``-k``.

        Raises:
            InvalidParameterError: If the name is not recognised
        """
        text = str(value).strip().lower()
        aliases = {"+k": "forward", "k": "forward", "-k": "backward"}
        text = aliases.get(text, text)
        try:
            return cls(text)
        except ValueError:
            raise InvalidParameterError("direction", value, "expected 'forward' or 'backward'")


def _check_half_open(name: str, value: float) -> None:
    if not -math.pi < value <= math.pi:
        raise InvalidParameterError(name, value, "must lie in (-pi, pi]")


@dataclass(frozen=True)
class BarrierParams:
    """Three angles defining one barrier's scattering matrix."""

    theta: float
    phi: float = 0.0
    eta: float = 0.0

    def __post_init__(self):
        for name in ("theta", "phi", "eta"):
            value = getattr(self, name)
            if not isinstance(value, numbers.Real) or isinstance(value, bool):
                raise InvalidParameterError(name, value, "must be a real number")
            if not math.isfinite(value):
                raise InvalidParameterError(name, value, "must be finite")
        if not 0.0 <= self.theta <= math.pi / 2:
            raise InvalidParameterError("theta", self.theta, "must lie in [0, pi/2]")
        _check_half_open("phi", self.phi)
        _check_half_open("eta", self.eta)


def build_smatrix(params: BarrierParams) -> np.ndarray:
    """
    Build the time-reversal symmetric scattering matrix of a barrier.

    S = e^{i phi} [[cos theta, i e^{-i eta} sin theta],
                   [i e^{i eta} sin theta, cos theta]]

    Args:
        params: Barrier angles

    Returns:
        2x2 complex matrix
    """
    c = math.cos(params.theta)
    s = math.sin(params.theta)
    matrix = np.array(
        [
            [c, 1j * np.exp(-1j * params.eta) * s],
            [1j * np.exp(1j * params.eta) * s, c],
        ],
        dtype=complex,
    )
    return np.exp(1j * params.phi) * matrix


def transmission_probability(params: BarrierParams) -> float:
    """Single-probe transmission probability cos^2(theta), the same for both directions."""
    return math.cos(params.theta) ** 2


def is_unitary(m: np.ndarray, tol: float = UNITARITY_TOL) -> bool:
    """Return True if the max-norm of m m^dagger - I is within tol."""
    m = np.asarray(m, dtype=complex)
    deviation = m @ m.conj().T - np.eye(m.shape[0])
    return bool(np.max(np.abs(deviation)) <= tol)


def is_time_reversal_symmetric(m: np.ndarray, tol: float = UNITARITY_TOL) -> bool:
    """Return True if the two transmission amplitudes agree within tol."""
    m = np.asarray(m, dtype=complex)
    return bool(abs(m[0, 0] - m[1, 1]) <= tol)


def is_parity_symmetric(params: BarrierParams, tol: float = UNITARITY_TOL) -> bool:
    """Return True for an even barrier, i.e. |eta| within tol."""
    return abs(params.eta) <= tol
