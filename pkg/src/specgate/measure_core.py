"""Finite atomic measure spaces, distribution functions and rearrangements.

A measure space here is a finite list of atoms ``(value, weight)`` with
strictly positive weights.  Distribution functions and rearrangements are
computed from a sorted profile of distinct values, so every query is a
binary search.  Threshold comparisons are exact: no epsilon is ever added.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .errors import EmptySpace, NonPositiveT, ShapeMismatch, TOutOfRange, ValidationError


class Direction(enum.Enum):
    NON_INCREASING = "non-increasing"
    NON_DECREASING = "non-decreasing"


@dataclass(frozen=True, eq=False)
class DiscreteMeasureSpace:
    """Atoms ``values[i]`` carrying mass ``weights[i] > 0``."""

    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float).ravel()
        weights = np.array(self.weights, dtype=float).ravel()
        if values.shape != weights.shape:
            raise ShapeMismatch(f"{values.size} values but {weights.size} weights")
        if not np.all(np.isfinite(values)):
            raise ValidationError("atom values must be finite")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
            raise ValidationError("atom weights must be finite and strictly positive")
        values.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "_mass", math.fsum(weights))

    @classmethod
    def from_atoms(cls, atoms: Iterable[tuple[float, float]]) -> DiscreteMeasureSpace:
        pairs = [(float(v), float(w)) for v, w in atoms]
        if not pairs:
            return cls(np.empty(0), np.empty(0))
        vals, wts = zip(*pairs)
        return cls(np.asarray(vals), np.asarray(wts))

    @property
    def total_mass(self) -> float:
        return self._mass

    def __len__(self) -> int:
        return self.values.size

    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.values.tolist(), self.weights.tolist()))

    def subset(self, indices) -> DiscreteMeasureSpace:
        idx = np.asarray(indices, dtype=int)
        return DiscreteMeasureSpace(self.values[idx], self.weights[idx])

    def normalized(self) -> DiscreteMeasureSpace:
        if len(self) == 0:
            raise EmptySpace("cannot normalise an empty space")
        return DiscreteMeasureSpace(self.values, self.weights / self._mass)


@dataclass(frozen=True, eq=False)
class RearrangementProfile:
    """Distinct atom values in ascending order with their cumulative masses.

    ``below_or_equal[k]`` is the mass of ``{W <= values[k]}`` and
    ``above_or_equal[k]`` the mass of ``{W >= values[k]}``.  Both are kept so
    that tail masses do not suffer cancellation from ``total - cumsum``.
    """

    values: np.ndarray
    masses: np.ndarray
    below_or_equal: np.ndarray
    above_or_equal: np.ndarray
    total_mass: float

    @property
    def ascending(self) -> list[tuple[float, float]]:
        return list(zip(self.values.tolist(), self.below_or_equal.tolist()))


def build_profile(space: DiscreteMeasureSpace, direction: Direction = Direction.NON_INCREASING) -> RearrangementProfile:
    """Sort the atoms of ``space`` into a profile.

    The profile serves both directions; ``direction`` is accepted for
    symmetry with the query functions and does not change the result.
    """
    if len(space) == 0:
        raise EmptySpace("measure space has no atoms")
    uniq, inverse = np.unique(space.values, return_inverse=True)
    masses = np.bincount(inverse.ravel(), weights=space.weights, minlength=uniq.size)
    below = np.cumsum(masses)
    above = np.cumsum(masses[::-1])[::-1]
    total = space.total_mass
    below[-1] = total
    above[0] = total
    for arr in (uniq, masses, below, above):
        arr.flags.writeable = False
    return RearrangementProfile(uniq, masses, below, above, total)


def _as_profile(obj) -> RearrangementProfile:
    if isinstance(obj, RearrangementProfile):
        return obj
    return build_profile(obj)


def distribution(profile, s: float, direction: Direction) -> float:
    """Mass of ``{W >= s}`` (non-increasing) or ``{W <= s}`` (non-decreasing)."""
    prof = _as_profile(profile)
    if direction is Direction.NON_INCREASING:
        idx = int(np.searchsorted(prof.values, s, side="left"))
        return 0.0 if idx == prof.values.size else float(prof.above_or_equal[idx])
    idx = int(np.searchsorted(prof.values, s, side="right")) - 1
    return 0.0 if idx < 0 else float(prof.below_or_equal[idx])


def upper_quantile(profile, t: float) -> float | None:
    """Largest atom value ``v`` with ``mass{W >= v} >= t``; ``None`` if ``t`` exceeds the mass."""
    prof = _as_profile(profile)
    count = int(np.searchsorted(-prof.above_or_equal, -t, side="right"))
    return None if count == 0 else float(prof.values[count - 1])


def lower_quantile(profile, t: float) -> float | None:
    """Smallest atom value ``v`` with ``mass{W <= v} >= t``; ``None`` if ``t`` exceeds the mass."""
    prof = _as_profile(profile)
    idx = int(np.searchsorted(prof.below_or_equal, t, side="left"))
    return None if idx == prof.values.size else float(prof.values[idx])


def rearrangement_value(profile, t: float, direction: Direction) -> float:
    """Decreasing (``W^*``) or increasing (``W_*``) rearrangement at ``t``.

    The supremum runs over ``s > 0`` only, so an empty defining set gives 0
    and non-positive quantiles are clamped to 0.  For the increasing
    rearrangement with ``t`` above the total mass the defining set is
    unbounded and the result is ``inf``.
    """
    if not t > 0:
        raise NonPositiveT(f"t must be positive, got {t}")
    prof = _as_profile(profile)
    if direction is Direction.NON_INCREASING:
        q = upper_quantile(prof, t)
        if q is None:
            return 0.0
    else:
        q = lower_quantile(prof, t)
        if q is None:
            return math.inf
    return q if q > 0 else 0.0


class LevelSet(NamedTuple):
    indices: np.ndarray
    kappa: float
    threshold: float


def lower_level_set(space: DiscreteMeasureSpace, t: float) -> LevelSet:
    """Atoms strictly below the increasing-rearrangement threshold at ``t``.

    The threshold is the unclamped quantile, so that negative atom values
    are handled correctly; for nonnegative data it coincides with ``W_*(t)``.
    """
    if not (0 < t < space.total_mass):
        raise TOutOfRange(f"t={t} outside (0, {space.total_mass})")
    prof = build_profile(space)
    thr = lower_quantile(prof, t)
    idx = np.flatnonzero(space.values < thr)
    kappa = math.fsum(space.weights[idx])
    return LevelSet(idx, kappa, thr)


def grid_to_measure(g, mask=None, normalized: bool = False) -> DiscreteMeasureSpace:
    """One atom per (unmasked) grid cell, weighted by the cell volume.

    With ``normalized=True`` the weights are rescaled to sum to one, which
    realises the averaged measure on the window.
    """
    vals = np.asarray(g.values, dtype=float)
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != vals.shape:
            raise ShapeMismatch(f"mask shape {mask.shape} != grid shape {vals.shape}")
        vals = vals[mask]
    vals = vals.ravel()
    if vals.size == 0:
        raise EmptySpace("no unmasked cells")
    w = 1.0 / vals.size if normalized else g.cell_volume
    return DiscreteMeasureSpace(vals, np.full(vals.size, w))
