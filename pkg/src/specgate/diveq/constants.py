"""Dimension-dependent constants.

``C(d)`` is the sharp Sobolev constant for ``||u||_{2d/(d-2)} <= C ||grad u||_2``;
``c_d`` is the capacity constant in the isocapacity comparison; ``G_d`` is the
capacity-energy constant used in the Molchanov quotient.  ``G_d`` involves a
surface measure of the unit sphere, which is the default reading; the value
obtained with the unit-ball volume instead is reported alongside.
"""

from __future__ import annotations

import math
from typing import NamedTuple

from ..errors import DLessThan3


class DimensionConstants(NamedTuple):
    C: float
    c: float
    G: float
    G_volume_reading: float


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def unit_sphere_area(d: int) -> float:
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)


def _check(d: int):
    if not isinstance(d, int) or d < 3:
        raise DLessThan3(f"d must be an integer >= 3, got {d}")


def sobolev_constant(d: int) -> float:
    _check(d)
    return math.sqrt(1 / (math.pi * d * (d - 2))) * (math.gamma(d) / math.gamma(d / 2)) ** (1 / d)


def capacity_constant(d: int) -> float:
    _check(d)
    return (d * (d - 2) * unit_ball_volume(d) ** (2 / d)) ** (-d / (d - 2))


def molchanov_constant(d: int, omega: str = "surface") -> float:
    _check(d)
    w = unit_sphere_area(d) if omega == "surface" else unit_ball_volume(d)
    q = 2 ** (d - 2)
    return (d - 2) * w * q / (q - 1)


def constants(d: int) -> DimensionConstants:
    return DimensionConstants(sobolev_constant(d), capacity_constant(d), molchanov_constant(d),
                              molchanov_constant(d, "volume"))


def fourier_threshold(d: int) -> float:
    """Largest admissible ``l_{d'}`` norm of the gradient coefficients on a unit cell."""
    return 1.0 / (d * 2 ** (d + 1) * sobolev_constant(d))
