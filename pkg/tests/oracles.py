"""Independent reference computations used by the tests."""

import itertools
import math

import numpy as np
from scipy.optimize import linprog


def fractional_lp(values, weights, t):
    """Fractional optimum by linear programming over x in [0, 1]^n."""
    v, w = np.asarray(values, float), np.asarray(weights, float)
    res = linprog(v * w, A_eq=[w], b_eq=[t], bounds=[(0, 1)] * v.size, method="highs")
    assert res.status == 0
    return res.fun


def sort_then_fill(values, weights, t):
    order = sorted(range(len(values)), key=lambda i: values[i])
    left, total = t, 0.0
    for i in order:
        take = min(weights[i], left)
        total += take * values[i]
        left -= take
        if left <= 0:
            break
    return total


def binary_enumeration(values, weights, t):
    best = math.inf
    n = len(values)
    for k in range(n + 1):
        for sub in itertools.combinations(range(n), k):
            if math.fsum(weights[i] for i in sub) >= t:
                best = min(best, math.fsum(values[i] * weights[i] for i in sub))
    return best


def two_pass_moments(values, weights):
    mass = math.fsum(weights)
    mean = math.fsum(v * w for v, w in zip(values, weights)) / mass
    var = math.fsum(w * (v - mean) ** 2 for v, w in zip(values, weights)) / mass
    return mean, math.sqrt(var)
