"""Influence of the point-contact detector on the measured two-state system.

The detector electrons probe the barrier at rate ``flux``. Their effect on the dot is
the complex energy

    Lambda = i * flux * <i| 1 - S_L S_R^dagger |i>

whose imaginary part is the damping rate D and whose real part is the
measurement-induced shift of V_z. Natural units (hbar = e = 1) are used throughout,
so flux, D and energies all carry dimension 1/time.
"""

import cmath
import logging
import math
from dataclasses import dataclass, replace
from typing import NamedTuple

from dephasim.errors import InvalidParameterError
from dephasim.smatrix import BarrierParams, Direction, build_smatrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DetectorSetup:
    """Barrier pair seen by the detector for the two dot positions, plus probing flux."""

    barrier_l: BarrierParams
    barrier_r: BarrierParams
    flux: float
    direction: Direction = Direction.FORWARD

    def __post_init__(self):
        if not math.isfinite(self.flux):
            raise InvalidParameterError("flux", self.flux, "must be finite")
        if self.flux < 0:
            raise InvalidParameterError(
                "flux", self.flux, "must be >= 0; the current direction is set by 'direction'"
            )

    @property
    def delta_theta(self) -> float:
        return self.barrier_l.theta - self.barrier_r.theta

    @property
    def delta_phi(self) -> float:
        return self.barrier_l.phi - self.barrier_r.phi

    @property
    def delta_eta(self) -> float:
        return self.barrier_l.eta - self.barrier_r.eta

    def with_direction(self, direction: Direction) -> "DetectorSetup":
        return replace(self, direction=direction)

    def swapped(self) -> "DetectorSetup":
        """Return the setup with the two barriers exchanged."""
        return replace(self, barrier_l=self.barrier_r, barrier_r=self.barrier_l)


@dataclass(frozen=True)
class InfluenceResult:
    """Complex influence energy and its decomposition."""

    lam: complex
    damping: float
    induced_vz: float

    @classmethod
    def from_lambda(cls, lam: complex) -> "InfluenceResult":
        # Im(lam) is >= 0 analytically; clip rounding noise around an exact zero
        return cls(lam=complex(lam), damping=max(lam.imag, 0.0), induced_vz=lam.real)

    @classmethod
    def zero(cls) -> "InfluenceResult":
        return cls(lam=0j, damping=0.0, induced_vz=0.0)


class DirectionAsymmetry(NamedTuple):
    delta_d: float
    delta_vz: float


class FringePrediction(NamedTuple):
    phase_shift: float
    contrast_factor: float


def landauer_flux(v_d: float, e: float = 1.0, hbar: float = 1.0) -> float:
    """
    Probing rate of a single-channel point contact biased at v_d.

    flux = e * v_d / (pi * hbar)

    Raises:
        InvalidParameterError: On negative voltage or non-positive constants
    """
    if not math.isfinite(v_d) or v_d < 0:
        raise InvalidParameterError("v_d", v_d, "must be finite and >= 0")
    if not e > 0:
        raise InvalidParameterError("e", e, "must be > 0")
    if not hbar > 0:
        raise InvalidParameterError("hbar", hbar, "must be > 0")
    return e * v_d / (math.pi * hbar)


def lambda_oracle(setup: DetectorSetup) -> complex:
    """
    Influence energy computed directly from the two scattering matrices.

    Forms M = S_L S_R^dagger and takes the diagonal element selected by the
    current direction.
    """
    s_l = build_smatrix(setup.barrier_l)
    s_r = build_smatrix(setup.barrier_r)
    m = s_l @ s_r.conj().T
    d = setup.direction.index
    return complex(1j * setup.flux * (1.0 - m[d, d]))


def _overlap(setup: DetectorSetup) -> complex:
    """Closed form of the diagonal of S_L S_R^dagger for the setup's direction."""
    s = setup.direction.eta_sign
    bracket = math.cos(setup.delta_theta) + (
        math.sin(setup.barrier_l.theta)
        * math.sin(setup.barrier_r.theta)
        * (cmath.exp(1j * s * setup.delta_eta) - 1.0)
    )
    return cmath.exp(1j * setup.delta_phi) * bracket


def damping_closed_form(setup: DetectorSetup) -> float:
    """Damping rate D = flux * Re{1 - e^{i dphi}[cos dtheta + sin th_L sin th_R (e^{i s deta} - 1)]}."""
    value = setup.flux * (1.0 - _overlap(setup).real)
    return max(value, 0.0)


def induced_energy_shift(setup: DetectorSetup) -> float:
    """Measurement-induced V_z = flux * Im{e^{i dphi}[cos dtheta + sin th_L sin th_R (e^{i s deta} - 1)]}."""
    return setup.flux * _overlap(setup).imag


def damping_symmetric(delta_phi: float, delta_theta: float, flux: float) -> float:
    """Damping for even barriers: flux * (1 - cos dphi cos dtheta)."""
    _check_flux(flux)
    return flux * (1.0 - math.cos(delta_phi) * math.cos(delta_theta))


def damping_small_angle(delta_phi: float, delta_theta: float, flux: float) -> float:
    """Leading-order damping for small angle differences: flux/2 * (dphi^2 + dtheta^2)."""
    _check_flux(flux)
    return 0.5 * flux * (delta_phi ** 2 + delta_theta ** 2)


def induced_energy_shift_symmetric(delta_phi: float, delta_theta: float, flux: float) -> float:
    """Induced V_z for even barriers: flux * sin dphi * cos dtheta."""
    _check_flux(flux)
    return flux * math.sin(delta_phi) * math.cos(delta_theta)


def influence(setup: DetectorSetup) -> InfluenceResult:
    """Influence energy of the setup together with its damping / energy split."""
    result = InfluenceResult.from_lambda(lambda_oracle(setup))
    logger.debug(
        f"flux={setup.flux} direction={setup.direction.value}: "
        f"D={result.damping} Vz_ind={result.induced_vz}"
    )
    return result


def direction_asymmetry(setup: DetectorSetup) -> DirectionAsymmetry:
    """
    Difference in damping and induced energy between the two current directions.

    Returns the values for Backward minus Forward:
        delta_d  = 2 flux sin dphi sin th_L sin th_R sin deta
        delta_vz = 2 flux cos dphi sin th_L sin th_R sin deta
    Both vanish for equal eta and are odd in deta.
    """
    common = (
        2.0
        * setup.flux
        * math.sin(setup.barrier_l.theta)
        * math.sin(setup.barrier_r.theta)
        * math.sin(setup.delta_eta)
    )
    return DirectionAsymmetry(
        delta_d=common * math.sin(setup.delta_phi),
        delta_vz=common * math.cos(setup.delta_phi),
    )


def fringe_prediction(setup: DetectorSetup, dwell_time: float) -> FringePrediction:
    """
    Interference fringe shift and contrast loss for a measured electron dwelling
    dwell_time in the detector's range.

    contrast_factor lies in (0, 1] up to float underflow: it is exactly 0.0 once
    damping * dwell_time exceeds about 745.

    Raises:
        InvalidParameterError: If dwell_time is negative or not finite
    """
    if not math.isfinite(dwell_time) or dwell_time < 0:
        raise InvalidParameterError("dwell_time", dwell_time, "must be finite and >= 0")
    phase_shift = induced_energy_shift(setup) * dwell_time
    contrast = math.exp(-damping_closed_form(setup) * dwell_time)
    return FringePrediction(phase_shift=phase_shift, contrast_factor=contrast)


def transmitted_current(barrier: BarrierParams, flux: float) -> float:
    """Mean transmitted particle current flux * cos^2(theta) through one barrier."""
    _check_flux(flux)
    return flux * math.cos(barrier.theta) ** 2


def _check_flux(flux: float) -> None:
    if not math.isfinite(flux) or flux < 0:
        raise InvalidParameterError("flux", flux, "must be finite and >= 0")
