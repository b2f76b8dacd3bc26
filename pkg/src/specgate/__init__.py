"""Rearrangement bounds, divergence-equation gates and window scans for
discreteness of Schroedinger spectra."""

from . import diveq, eiglab, lagrange, measure_core, potentials, report, setopt, windows
from .errors import NumericalError, SpecGateError, ValidationError
from .grid import GridFunction, Topology, VectorFieldGrid, read_sgf, write_sgf
from .lagrange import bound_from_moments, dual_value, lagrange_bound, moments
from .measure_core import (Direction, DiscreteMeasureSpace, build_profile, distribution, lower_level_set,
                           rearrangement_value)
from .potentials import DenseSystemSpec, PotentialSpec
from .report import ScanReport, read_report, write_report
from .setopt import sandwich_bounds, solve_binary_bruteforce, solve_fractional
from .windows import CubeWindow, GammaSchedule, madic_scan, ray_scan, verify_logm_theta_density, window_statistics

__version__ = "0.1.0"

__all__ = [
    "diveq", "eiglab", "lagrange", "measure_core", "potentials", "report", "setopt", "windows",
    "NumericalError", "SpecGateError", "ValidationError",
    "GridFunction", "Topology", "VectorFieldGrid", "read_sgf", "write_sgf",
    "bound_from_moments", "dual_value", "lagrange_bound", "moments",
    "Direction", "DiscreteMeasureSpace", "build_profile", "distribution", "lower_level_set", "rearrangement_value",
    "DenseSystemSpec", "PotentialSpec", "ScanReport", "read_report", "write_report",
    "sandwich_bounds", "solve_binary_bruteforce", "solve_fractional",
    "CubeWindow", "GammaSchedule", "madic_scan", "ray_scan", "verify_logm_theta_density", "window_statistics",
]
