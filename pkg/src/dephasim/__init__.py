"""
dephasim - measurement-induced dephasing of a double quantum dot

Scattering-matrix influence functional of a two-barrier point-contact detector,
Bloch-vector dynamics with the resulting damping, and transmission counting statistics.
"""

__version__ = "0.1.0"
__author__ = "Pavel Ravvich"
__license__ = "MIT"

from dephasim.influence import DetectorSetup, influence
from dephasim.smatrix import BarrierParams, Direction

__all__ = ["BarrierParams", "DetectorSetup", "Direction", "influence", "__version__"]
