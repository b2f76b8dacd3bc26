"""Minimising an integral over sets of prescribed measure.

``solve_fractional`` evaluates the closed form
``J(t) = integral of W over {W < W_*(t)} + (t - kappa) * W_*(t)``,
which is the optimum of the LP relaxation in which one atom may be taken
fractionally.  ``solve_binary_bruteforce`` enumerates subsets and is meant
as a reference on small instances.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import BadTheta, NegativeValues, TooManyAtoms, TOutOfRange
from .measure_core import DiscreteMeasureSpace, build_profile, lower_level_set, upper_quantile

MAX_BRUTEFORCE_ATOMS = 24
# subsets whose float mass is this close to t (relative) are re-summed exactly
_BOUNDARY_RTOL = 1e-9


class Mode(enum.Enum):
    FRACTIONAL = "fractional"
    BINARY = "binary"


@dataclass(frozen=True)
class FractionalSet:
    """Witness set: atoms taken in full plus at most one partial atom."""

    full_atoms: tuple[int, ...]
    partial_atom: int | None
    partial_fraction: float
    mass: float


@dataclass(frozen=True)
class OptResult:
    value: float
    witness: FractionalSet
    mode: Mode


def _check_t(space: DiscreteMeasureSpace, t: float):
    if not (0 < t < space.total_mass):
        raise TOutOfRange(f"t={t} outside (0, {space.total_mass})")


def solve_fractional(space: DiscreteMeasureSpace, t: float) -> OptResult:
    """Fractional optimum of ``sum v_i w_i x_i`` subject to ``sum w_i x_i = t``.

    Equal values are filled in ascending atom index order.
    """
    _check_t(space, t)
    level = lower_level_set(space, t)
    thr = level.threshold
    value = math.fsum(space.values[level.indices] * space.weights[level.indices]) + (t - level.kappa) * thr

    remaining = t - level.kappa
    full = list(level.indices.tolist())
    partial, frac = None, 0.0
    for i in np.flatnonzero(space.values == thr).tolist():
        if remaining <= 0:
            break
        w = float(space.weights[i])
        if w <= remaining:
            full.append(i)
            remaining -= w
        else:
            partial, frac = i, remaining / w
            remaining = 0.0
    witness = FractionalSet(tuple(sorted(full)), partial, frac, t)
    return OptResult(value, witness, Mode.FRACTIONAL)


def solve_binary_bruteforce(space: DiscreteMeasureSpace, t: float) -> OptResult:
    """Exhaustive minimum of ``sum_{i in E} v_i w_i`` over subsets with mass >= t."""
    n = len(space)
    if n > MAX_BRUTEFORCE_ATOMS:
        raise TooManyAtoms(f"{n} atoms exceeds the limit of {MAX_BRUTEFORCE_ATOMS}")
    _check_t(space, t)
    vals, wts = space.values, space.weights
    best_val, best_mask = math.inf, None
    chunk = 1 << min(n, 16)
    bit_idx = np.arange(n)
    for start in range(0, 1 << n, chunk):
        masks = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        bits = ((masks[:, None] >> bit_idx) & 1).astype(float)
        mass = bits @ wts
        integ = bits @ (vals * wts)
        near = np.abs(mass - t) <= _BOUNDARY_RTOL * max(t, 1.0)
        feasible = mass >= t
        # float sums near the constraint are decided by a correctly rounded sum
        for k in np.flatnonzero(near):
            sel = bits[k].astype(bool)
            feasible[k] = math.fsum(wts[sel]) >= t
        if not feasible.any():
            continue
        cand = np.flatnonzero(feasible)
        for k in cand[integ[cand] <= integ[cand].min() + 1e-9 * (1 + abs(integ[cand].min()))]:
            sel = bits[k].astype(bool)
            exact = math.fsum(vals[sel] * wts[sel])
            if exact < best_val or (exact == best_val and _lex_less(int(masks[k]), best_mask, n)):
                best_val, best_mask = exact, int(masks[k])
    members = tuple(i for i in range(n) if best_mask >> i & 1)
    mass = math.fsum(wts[list(members)])
    return OptResult(best_val, FractionalSet(members, None, 0.0, mass), Mode.BINARY)


def _lex_less(a: int, b: int | None, n: int) -> bool:
    if b is None:
        return True
    ia = [i for i in range(n) if a >> i & 1]
    ib = [i for i in range(n) if b >> i & 1]
    return ia < ib


class SandwichBounds(NamedTuple):
    """Two-sided control of ``J`` by the decreasing rearrangement.

    ``lower <= j_lower`` where ``j_lower = J(M - t/theta)`` and
    ``j_upper <= upper`` where ``j_upper = J(M - t)``.
    """

    lower: float
    upper: float
    j_lower: float
    j_upper: float

    @property
    def holds(self) -> bool:
        return self.lower <= self.j_lower and self.j_upper <= self.upper


def sandwich_bounds(space: DiscreteMeasureSpace, t: float, theta: float) -> SandwichBounds:
    if not theta > 1:
        raise BadTheta(f"theta must exceed 1, got {theta}")
    if len(space) and np.any(space.values < 0):
        raise NegativeValues("sandwich bounds need nonnegative values")
    _check_t(space, t)
    mass = space.total_mass
    q = upper_quantile(build_profile(space), t)
    wstar = max(q, 0.0)
    lower = (theta - 1) / theta * t * wstar
    upper = (mass - t) * wstar
    j_lower = solve_fractional(space, mass - t / theta).value
    j_upper = solve_fractional(space, mass - t).value
    return SandwichBounds(lower, upper, j_lower, j_upper)

