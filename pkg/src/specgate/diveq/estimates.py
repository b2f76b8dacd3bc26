"""Quadratic-form estimates ``|integral W |u|^2| <= rhs * ||grad u||_2^2``.

Two routes are compared on the same data:

* Hoelder with the Sobolev inequality: ``rhs = C(d)**2 ||W||_{d/2}``;
* a divergence representation ``W = div Gamma``: ``rhs = 2 C(d) ||Gamma||_d``.

The second can be much smaller for rapidly oscillating ``W``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..errors import BoundaryViolation, ShapeMismatch, WrongTopology
from ..grid import GridFunction, Topology, VectorFieldGrid
from .constants import sobolev_constant
from .solvers import antiderivative_solution, periodic_potential_solution

BOUNDARY_TOL = 1e-8
# relative quadrature allowance on the left-hand side
QUADRATURE_RTOL = 1e-6


class Route(enum.Enum):
    HOLDER = "holder"
    DIVERGENCE = "divergence"


@dataclass(frozen=True)
class BumpFunction:
    """Smooth bump ``a * exp(1 - 1/(1 - |x-c|^2/rho^2))`` supported in the ball ``B_rho(c)``."""

    center: tuple[float, ...]
    radius: float
    amplitude: float = 1.0

    def _parts(self, pts):
        c = np.asarray(self.center, dtype=float)
        z = (pts - c) / self.radius
        s = np.sum(z * z, axis=1)
        inside = s < 1
        val = np.zeros(pts.shape[0])
        si = s[inside]
        val[inside] = self.amplitude * np.exp(1 - 1 / (1 - si))
        return z, s, inside, val

    def value(self, pts) -> np.ndarray:
        return self._parts(np.asarray(pts, dtype=float))[3]

    def gradient(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        z, s, inside, val = self._parts(pts)
        grad = np.zeros_like(pts)
        si = s[inside]
        # d/dx exp(1 - 1/(1-s)) = -exp(...) * 2 z / (rho (1-s)^2)
        factor = -val[inside] * 2 / (self.radius * (1 - si) ** 2)
        grad[inside] = factor[:, None] * z[inside]
        return grad


class QuadraticFormResult(NamedTuple):
    lhs: float
    rhs: float
    ok: bool
    gradient_energy: float


def _boundary_layer(g: GridFunction) -> np.ndarray:
    mask = np.zeros(g.dims, dtype=bool)
    for j in range(g.d):
        idx = [slice(None)] * g.d
        idx[j] = 0
        mask[tuple(idx)] = True
        idx[j] = -1
        mask[tuple(idx)] = True
    return mask


def quadratic_form_check(w: GridFunction, u_family, which: Route | str = Route.DIVERGENCE,
                         gamma: VectorFieldGrid | None = None) -> list[QuadraticFormResult]:
    """Evaluate both sides of the estimate for each test function.

    Test functions provide ``value(points)`` and ``gradient(points)`` and
    must vanish on the outer layer of grid cells.  ``gamma`` defaults to the
    antiderivative solution on a cube and the spectral solution on a torus.
    """
    which = Route(which)
    d = w.d
    C = sobolev_constant(d)
    pts = w.points()
    dv = w.cell_volume
    if which is Route.HOLDER:
        factor = C * C * w.lp_norm(d / 2)
    else:
        if gamma is None:
            gamma = (antiderivative_solution(w) if w.topology is Topology.CUBE
                     else periodic_potential_solution(w).gamma)
        elif not gamma.grid.same_geometry(w):
            raise ShapeMismatch("gamma must live on the grid of W")
        factor = 2 * C * gamma.lp_norm(d)
    edge = _boundary_layer(w).ravel()
    wv = w.values.ravel()
    out = []
    for u in u_family:
        uv = np.asarray(u.value(pts), dtype=float)
        if np.max(np.abs(uv[edge]), initial=0.0) > BOUNDARY_TOL:
            raise BoundaryViolation("test function does not vanish near the boundary")
        grad = np.asarray(u.gradient(pts), dtype=float)
        energy = float(np.sum(grad * grad)) * dv
        lhs = abs(float(np.sum(wv * uv * uv)) * dv)
        slack = QUADRATURE_RTOL * float(np.sum(np.abs(wv) * uv * uv)) * dv
        rhs = factor * energy
        out.append(QuadraticFormResult(lhs, rhs, lhs <= rhs + slack, energy))
    return out


def trig_refine(g: GridFunction, factor: int) -> GridFunction:
    """Resample a periodic grid function on a grid ``factor`` times finer per axis.

    Zero-padding of the discrete Fourier coefficients; the interpolation is
    exact for trigonometric polynomials without a Nyquist component (that
    component is dropped).
    """
    if g.topology is not Topology.TORUS:
        raise WrongTopology("spectral refinement needs a periodic grid")
    if factor == 1:
        return g
    coeffs = np.fft.fftshift(np.fft.fftn(g.values))
    pad = []
    for axis, n in enumerate(g.dims):
        if n % 2 == 0:
            idx = [slice(None)] * g.d
            idx[axis] = 0
            coeffs[tuple(idx)] = 0
        big = n * factor
        before = big // 2 - n // 2
        pad.append((before, big - n - before))
    coeffs = np.pad(coeffs, pad)
    values = np.fft.ifftn(np.fft.ifftshift(coeffs)).real * factor ** g.d
    spacing = tuple(h / factor for h in g.spacing)
    return GridFunction(tuple(n * factor for n in g.dims), g.origin, spacing, values, Topology.TORUS)


def weak_form_sides(w: GridFunction, gamma: VectorFieldGrid, phi, oversample: int = 1) -> tuple[float, float]:
    """``(integral W phi, -integral <Gamma, grad phi>)`` by midpoint quadrature.

    On a torus ``oversample > 1`` first refines ``W`` and ``Gamma`` spectrally,
    which sharpens the quadrature without changing the fields.
    """
    if not gamma.grid.same_geometry(w):
        raise ShapeMismatch("gamma must live on the grid of W")
    if oversample > 1:
        w = trig_refine(w, oversample)
        gamma = VectorFieldGrid(tuple(trig_refine(c, oversample) for c in gamma.components))
    pts = w.points()
    dv = w.cell_volume
    left = float(np.sum(w.values.ravel() * phi.value(pts))) * dv
    grad = phi.gradient(pts)
    field = gamma.as_array().reshape(w.d, -1).T
    right = -float(np.sum(field * grad)) * dv
    return left, right


def sigma_interval(d_bar: float, d: int) -> tuple[float, float] | None:
    """Admissible perturbation parameters ``[2 C(d) d_bar, 1)``, or None when empty."""
    lo = 2 * sobolev_constant(d) * d_bar
    return (lo, 1.0) if lo < 1 else None
