"""Divergence equation ``div Gamma = W`` and the quadratic-form estimates built on it."""

from .constants import (DimensionConstants, capacity_constant, constants, fourier_threshold, molchanov_constant,
                        sobolev_constant, unit_ball_volume, unit_sphere_area)
from .estimates import (BumpFunction, QuadraticFormResult, Route, quadratic_form_check, sigma_interval, trig_refine,
                        weak_form_sides)
from .gates import (FourierGateResult, HBarEstimate, ball_fourier_transform, bessel_sqrt_bound, fourier_gate,
                    h_bar_estimate, lattice_gate)
from .solvers import (DivergenceMethod, PeriodicSolution, SpectralCoeffs, antiderivative_solution, divergence,
                      gradient_coefficients, periodic_potential_solution)

__all__ = [
    "DimensionConstants", "capacity_constant", "constants", "fourier_threshold", "molchanov_constant",
    "sobolev_constant", "unit_ball_volume", "unit_sphere_area",
    "BumpFunction", "Route", "QuadraticFormResult", "quadratic_form_check", "sigma_interval", "trig_refine",
    "weak_form_sides",
    "FourierGateResult", "HBarEstimate", "ball_fourier_transform", "bessel_sqrt_bound", "fourier_gate",
    "h_bar_estimate", "lattice_gate",
    "DivergenceMethod", "PeriodicSolution", "SpectralCoeffs", "antiderivative_solution", "divergence",
    "gradient_coefficients", "periodic_potential_solution",
]
