import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from specgate.errors import BadParameter, DomainX, EmptyXi, UnknownKind, WrongKind
from specgate.potentials import (DenseSystemSpec, GrowthLaw, PotentialSpec, cantor_adjacent, cantor_level,
                                 dyadic_level, evaluate, evaluate_many, exact_distribution, f_delta,
                                 madic_cells_in_system, oscillation_period, shape_integral, support_fraction,
                                 theta, theta_measure, thinned_cantor)


def test_cantor_gaps():
    assert cantor_adjacent(1) == [(Fraction(1, 3), Fraction(2, 3))]
    assert cantor_adjacent(2) == [(Fraction(1, 9), Fraction(2, 9)), (Fraction(7, 9), Fraction(8, 9))]
    for n in range(1, 9):
        gaps = cantor_adjacent(n)
        assert sum(b - a for a, b in gaps) == Fraction(2 ** (n - 1), 3 ** n)


def test_cantor_level_matches_gaps():
    for n in range(1, 6):
        for a, b in cantor_adjacent(n):
            assert cantor_level(float((a + b) / 2)) == n
    assert cantor_level(0.0) == 0 and cantor_level(1.0) == 0


def test_dyadic_level():
    assert dyadic_level(np.array([1.0, 0.75, 0.5, 0.3, 0.25, 0.0])).tolist() == [1, 1, 2, 2, 3, 0]


def test_theta_measure_examples():
    assert theta_measure(1, 0.25, 0, 1) == pytest.approx(0.25)
    assert theta_measure(3, 0.5, 0, 1) == pytest.approx(0.5)
    assert theta_measure(7, Fraction(1, 3), Fraction(0), Fraction(1)) == Fraction(1, 3)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 50), st.floats(0.01, 0.99), st.floats(-3, 3), st.floats(0.0, 4))
def test_theta_measure_envelope(S, beta, a, length):
    b = a + length
    m = theta_measure(S, beta, a, b)
    assert beta * (b - a) - 2 * beta / S - 1e-12 <= m <= beta * (b - a) + 2 * beta / S + 1e-12


def test_theta_measure_against_quadrature():
    xs = np.linspace(0.2, 1.7, 1_500_001)
    frac = np.mean(theta(5 * xs, 0.3)) * 1.5
    assert theta_measure(5, 0.3, 0.2, 1.7) == pytest.approx(frac, abs=1e-5)


def test_f_delta_examples():
    for delta in (0.1, 1.0, 3.0):
        assert f_delta(delta, 1.0) == 1.0
        assert f_delta(delta, delta / (1 + delta)) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(DomainX):
        f_delta(1.0, 1.5)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 5), st.floats(0, 1), st.floats(0, 1))
def test_f_delta_holder(delta, x, frac):
    h = frac * (1 - x)
    assert abs(f_delta(delta, x + h) - f_delta(delta, x)) <= (1 + math.sqrt(2 * delta)) * math.sqrt(h) + 1e-12


def test_valpha_off_gaps_is_zero():
    v = PotentialSpec("VAlpha", {"d": 3, "alpha": 1.5})
    assert evaluate(v, [5.0 + 1 / 3 - 1e-3, 0.5, 0.5]) == 0.0
    assert evaluate(v, [5.0, 0.5, 0.5]) == 0.0


def test_valpha_value_on_positive_set():
    v = PotentialSpec("VAlpha", {"d": 3, "alpha": 1.5, "N": "1 + L"})
    x = 4 + 1 / 3 + 1e-9
    assert evaluate(v, [x, 0.2, 0.2]) == pytest.approx(5.0)


def test_exp_square_and_constant():
    assert evaluate(PotentialSpec("ExpSquare", {"d": 2}), [0.0, 0.0]) == 1.0
    assert evaluate(PotentialSpec("Constant", {"d": 2, "c": 3}), [7.0, 1.0]) == 3.0


def test_custom_expression_and_callable():
    e = PotentialSpec("Custom", {"d": 2, "expr": "x1**2 + x2**2"})
    assert evaluate(e, [1.0, 2.0]) == 5.0
    f = PotentialSpec("Custom", {"d": 2, "func": lambda p: p[:, 0] * 2})
    assert evaluate(f, [1.5, 0.0]) == 3.0
    assert "func" not in f.to_json()["params"]


def test_molchanov_membership():
    n_law, m, r = 2.0, 3, 0.3
    pot = PotentialSpec("MolchanovLattice", {"d": 3, "N": n_law, "m": m, "r": r})
    rng = np.random.default_rng(5)
    pts = rng.uniform(0, 1, size=(4000, 3))
    centres = (np.floor(pts * m) + 0.5) / m
    inside = np.linalg.norm(pts - centres, axis=1) <= r / (2 * m)
    assert np.array_equal(evaluate_many(pot, pts), np.where(inside, n_law, 0.0))


def test_support_fraction_examples():
    pot = PotentialSpec("MolchanovLattice", {"d": 3, "r": 0.2, "m": 2})
    assert support_fraction(pot, (1, 0, 0)) == pytest.approx(0.008 * math.pi / 6, rel=1e-14)
    small = PotentialSpec("MolchanovLattice", {"d": 3, "r": "1/(10 + L)**2"})
    assert support_fraction(small, (50, 0, 0)) < 1e-10
    with pytest.raises(WrongKind):
        support_fraction(PotentialSpec("ExpSquare"), (0, 0, 0))


def test_shape_integrals():
    ball = PotentialSpec("MolchanovLattice", {"d": 3})
    assert shape_integral(ball) == pytest.approx(math.pi / 6)
    poly = PotentialSpec("MolchanovLattice", {"d": 3, "shape": "radial_poly", "power": 2})
    radial, _ = integrate.quad(lambda s: 4 * math.pi * s * s * (1 - 4 * s * s) ** 2, 0, 0.5)
    assert shape_integral(poly) == pytest.approx(radial, rel=1e-10)


def test_oscillation_period():
    v = PotentialSpec("VAlpha", {"d": 3, "alpha": 1.5})
    assert oscillation_period(v, (2, 0, 0)) == pytest.approx(3.0 ** -3)
    assert oscillation_period(PotentialSpec("ExpSquare"), (0, 0, 0)) is None


def test_validation_errors():
    with pytest.raises(UnknownKind):
        PotentialSpec("Nope")
    with pytest.raises(BadParameter):
        PotentialSpec("VAlpha", {"d": 3, "alpha": 6.0})
    with pytest.raises(BadParameter):
        GrowthLaw("L + y", 3)
    with pytest.raises(DomainX):
        evaluate(PotentialSpec("VAlpha", {"d": 3}), [30.5, 0, 0])


def test_json_round_trip():
    spec = PotentialSpec("CosineProduct", {"d": 3, "N": "1", "m": 200})
    again = PotentialSpec.from_json(spec.to_json())
    pts = np.random.default_rng(0).uniform(-3, 3, (50, 3))
    assert np.array_equal(evaluate_many(spec, pts), evaluate_many(again, pts))


def test_exact_distribution_against_sampling():
    v = PotentialSpec("VAlpha", {"d": 1, "alpha": 0.8, "N": "1 + L"})
    ed = exact_distribution(v, [2.0], [3.0])
    positive = sum(w for val, w in ed.space.atoms() if val > 0)
    xs = 2 + (np.arange(2_000_000) + 0.5) / 2_000_000
    sampled = np.mean(evaluate_many(v, xs[:, None]) > 0)
    assert abs(positive - sampled) <= ed.truncation + 1e-5
    assert ed.space.total_mass == pytest.approx(1.0)
    steep = exact_distribution(PotentialSpec("VAlpha", {"d": 1, "alpha": 1.9}), [2.0], [3.0])
    assert steep.truncation < 1e-6


def test_exact_distribution_unavailable():
    assert exact_distribution(PotentialSpec("ExpSquare"), [0, 0, 0], [1, 1, 1]) is None


def test_dense_system_boxes():
    sysm = DenseSystemSpec()
    assert sysm.boxes(1) == [((Fraction(1, 3),), (Fraction(2, 3),))]
    assert thinned_cantor().boxes(2) == []
    prod = DenseSystemSpec("ProductWithCube", 2)
    assert prod.boxes(1) == [((Fraction(1, 3), 0), (Fraction(2, 3), 1))]


def test_madic_cells():
    cells = madic_cells_in_system(DenseSystemSpec(), 2, 3)
    assert cells == [(1,), (3,), (4,), (5,), (7,)]
    with pytest.raises(EmptyXi):
        madic_cells_in_system(DenseSystemSpec("Custom", 1, custom_levels=((),)), 1, 3)
