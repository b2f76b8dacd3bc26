import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specgate.errors import NonPositiveT, ShapeMismatch, TOutOfRange, ValidationError
from specgate.grid import GridFunction
from specgate.measure_core import (Direction, DiscreteMeasureSpace, build_profile, distribution, grid_to_measure,
                                   lower_level_set, lower_quantile, rearrangement_value, upper_quantile)

NI, ND = Direction.NON_INCREASING, Direction.NON_DECREASING

atom_lists = st.lists(
    st.tuples(st.integers(-6, 6).map(float), st.floats(0.01, 3.0)),
    min_size=1, max_size=12,
)


def two_step():
    return DiscreteMeasureSpace.from_atoms([(5, 0.3), (1, 0.7)])


def test_profile_sorts_atoms():
    prof = build_profile(two_step())
    assert prof.ascending == [(1.0, 0.7), (5.0, 1.0)]
    assert prof.total_mass == 1.0


def test_duplicate_values_merge():
    prof = build_profile(DiscreteMeasureSpace.from_atoms([(2, 0.5), (2, 0.5)]))
    assert prof.ascending == [(2.0, 1.0)]


def test_profile_of_many_random_atoms():
    rng = np.random.default_rng(3)
    space = DiscreteMeasureSpace(rng.normal(size=1000), rng.uniform(0.1, 1, 1000))
    prof = build_profile(space)
    assert np.all(np.diff(prof.below_or_equal) > 0)
    assert np.all(np.diff(prof.values) > 0)
    assert prof.below_or_equal[-1] == pytest.approx(math.fsum(space.weights.tolist()), rel=1e-15)


def test_distribution_examples():
    prof = build_profile(two_step())
    assert distribution(prof, 3, NI) == pytest.approx(0.3)
    assert distribution(prof, 1, NI) == 1.0
    assert distribution(prof, 1, ND) == pytest.approx(0.7)
    assert distribution(prof, 0.5, ND) == 0.0
    assert distribution(prof, 6, NI) == 0.0


def test_decreasing_rearrangement_steps():
    prof = build_profile(two_step())
    assert rearrangement_value(prof, 0.3, NI) == 5
    assert rearrangement_value(prof, 0.31, NI) == 1
    assert rearrangement_value(prof, 1.0, NI) == 1
    assert rearrangement_value(prof, 1.5, NI) == 0.0


def test_increasing_rearrangement_steps():
    prof = build_profile(two_step())
    assert rearrangement_value(prof, 0.7, ND) == 1
    assert rearrangement_value(prof, 0.71, ND) == 5
    assert rearrangement_value(prof, 1.2, ND) == math.inf


@pytest.mark.parametrize("t", [0.01, 0.5, 2.0])
@pytest.mark.parametrize("direction", [NI, ND])
def test_constant_rearrangement(t, direction):
    space = DiscreteMeasureSpace.from_atoms([(2.5, 1.0), (2.5, 1.0)])
    assert rearrangement_value(space, t, direction) == 2.5


def test_negative_values_clamp_to_zero():
    space = DiscreteMeasureSpace.from_atoms([(-3, 1.0), (-1, 1.0)])
    assert rearrangement_value(space, 1.0, NI) == 0.0
    assert upper_quantile(space, 1.0) == -1.0


def test_rearrangement_rejects_nonpositive_t():
    with pytest.raises(NonPositiveT):
        rearrangement_value(two_step(), 0.0, NI)


def test_lower_level_set_examples():
    space = DiscreteMeasureSpace.from_atoms([(1, 1), (2, 1), (3, 1)])
    ls = lower_level_set(space, 1.5)
    assert ls.threshold == 2 and ls.indices.tolist() == [0] and ls.kappa == 1
    const = DiscreteMeasureSpace.from_atoms([(4, 1), (4, 2)])
    ls = lower_level_set(const, 1.2)
    assert ls.indices.size == 0 and ls.kappa == 0 and ls.threshold == 4
    jump = DiscreteMeasureSpace.from_atoms([(1, 1), (2, 1)])
    ls = lower_level_set(jump, math.nextafter(1.0, 2))
    assert ls.threshold == 2 and ls.kappa == 1


def test_lower_level_set_range():
    with pytest.raises(TOutOfRange):
        lower_level_set(two_step(), 1.0)


def test_invalid_atoms():
    with pytest.raises(ValidationError):
        DiscreteMeasureSpace.from_atoms([(1, 0.0)])
    with pytest.raises(ValidationError):
        DiscreteMeasureSpace.from_atoms([(math.nan, 1.0)])
    with pytest.raises(ShapeMismatch):
        DiscreteMeasureSpace([1, 2], [1])


def test_space_is_immutable():
    space = two_step()
    with pytest.raises(ValueError):
        space.values[0] = 3


def test_grid_to_measure():
    g = GridFunction.sample(lambda p: p[:, 0], (0, 0), 1.0, 2)
    sp = grid_to_measure(g)
    assert len(sp) == 4 and np.allclose(sp.weights, 0.25)
    mask = np.array([[True, True], [False, False]])
    assert len(grid_to_measure(g, mask)) == 2
    assert grid_to_measure(g, mask, normalized=True).total_mass == pytest.approx(1.0)
    with pytest.raises(ShapeMismatch):
        grid_to_measure(g, np.ones((3, 3), bool))


@settings(max_examples=150, deadline=None)
@given(atom_lists, st.integers(-7, 7).map(float))
def test_distributions_overlap_on_level(atoms, s):
    space = DiscreteMeasureSpace.from_atoms(atoms)
    prof = build_profile(space)
    at_s = math.fsum(w for v, w in atoms if v == s)
    total = distribution(prof, s, NI) + distribution(prof, s, ND) - space.total_mass
    assert total == pytest.approx(at_s, abs=1e-12)


@settings(max_examples=150, deadline=None)
@given(atom_lists, st.floats(0.001, 1.0))
def test_rearrangements_are_monotone(atoms, frac):
    space = DiscreteMeasureSpace.from_atoms(atoms)
    t1 = frac * space.total_mass
    t2 = min(t1 * 1.5, space.total_mass)
    assert rearrangement_value(space, t2, NI) <= rearrangement_value(space, t1, NI)
    assert rearrangement_value(space, t1, ND) <= rearrangement_value(space, t2, ND)


@settings(max_examples=150, deadline=None)
@given(atom_lists, st.floats(0.001, 0.999))
def test_quantile_definition(atoms, frac):
    space = DiscreteMeasureSpace.from_atoms(atoms)
    t = frac * space.total_mass
    q = upper_quantile(space, t)
    assert math.fsum(w for v, w in atoms if v >= q) >= t * (1 - 1e-12)
    assert all(math.fsum(w for v, w in atoms if v >= u) < t for u, _ in atoms if u > q)
    lq = lower_quantile(space, t)
    assert math.fsum(w for v, w in atoms if v <= lq) >= t * (1 - 1e-12)
