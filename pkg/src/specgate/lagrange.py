"""Closed-form lower bound for the set-minimisation problem from first moments.

On a probability space, the infimum of ``integral_E W`` over sets with
``mu(E) >= t`` is bounded below by ``t*E - sqrt(t*(1-t)) * Dev``.  The bound
comes from the saddle point of a concave dual function of two multipliers,
which is exposed as ``dual_value`` for checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptySpace, NonPositiveLambda, NotProbability, TOutOfHalfOpen
from .measure_core import DiscreteMeasureSpace

PROBABILITY_TOL = 1e-9


@dataclass(frozen=True)
class MomentStats:
    expectation: float
    second_moment: float
    deviation: float


@dataclass(frozen=True)
class LagrangeBound:
    bound: float
    lambda_star: float | None
    nu_star: float | None


def moments(space: DiscreteMeasureSpace) -> MomentStats:
    """Mean, second moment and standard deviation under the given weights.

    The deviation is computed from centred values after rescaling by the
    largest magnitude, so it stays finite even when ``E(W^2)`` overflows.
    """
    if len(space) == 0:
        raise EmptySpace("no atoms")
    v, w = space.values, space.weights
    mass = space.total_mass
    scale = float(np.max(np.abs(v)))
    if scale == 0:
        return MomentStats(0.0, 0.0, 0.0)
    u = v / scale
    mean_u = math.fsum(u * w) / mass
    var_u = math.fsum(w * (u - mean_u) ** 2) / mass
    second_u = math.fsum(w * u * u) / mass
    with np.errstate(over="ignore"):
        second = second_u * scale * scale
    return MomentStats(mean_u * scale, float(second), math.sqrt(max(var_u, 0.0)) * scale)


def _check_probability(space: DiscreteMeasureSpace):
    if abs(space.total_mass - 1.0) > PROBABILITY_TOL:
        raise NotProbability(f"total mass {space.total_mass} is not 1")


def lagrange_bound(space: DiscreteMeasureSpace, t: float) -> LagrangeBound:
    _check_probability(space)
    if not (0.5 < t < 1):
        raise TOutOfHalfOpen(f"t={t} outside (1/2, 1)")
    return bound_from_moments(moments(space), t)


def bound_from_moments(stats: MomentStats, t: float) -> LagrangeBound:
    sigma = 2 * t - 1
    root = math.sqrt(1 - sigma * sigma)
    e, dev = stats.expectation, stats.deviation
    if dev == 0:
        return LagrangeBound(t * e, None, None)
    bound = 0.5 * (1 + sigma) * e - 0.5 * root * dev
    lam = dev / (2 * root)
    nu = e + 2 * lam * sigma
    return LagrangeBound(bound, lam, nu)


def dual_value(stats: MomentStats, sigma: float, lam: float, nu: float) -> float:
    """Dual function ``m(lambda, nu)``; its maximum equals twice the bound."""
    if not lam > 0:
        raise NonPositiveLambda(f"lambda must be positive, got {lam}")
    e, dev = stats.expectation, stats.deviation
    return e - (nu - e) ** 2 / (4 * lam) - dev * dev / (4 * lam) - lam + nu * sigma
