"""Solutions of ``div Gamma = W`` on a cube and on the torus.

On a cube, ``Gamma = (U, 0, ..., 0)`` with ``U`` the antiderivative of ``W``
along the first axis starting from the lower face.  On the torus with
``W`` of zero mean, ``Gamma`` is the gradient of the periodic solution of
``Delta phi = W``, with Fourier coefficients
``G(k) = W^(k) k / (2 pi i |k|^2)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ..errors import NonZeroMean, WrongTopology
from ..grid import GridFunction, Topology, VectorFieldGrid

MEAN_TOL = 1e-9


class DivergenceMethod(enum.Enum):
    SPECTRAL = "spectral"
    FORWARD_DIFFERENCE = "forward-difference"


def antiderivative_solution(w: GridFunction, face: float | None = None) -> VectorFieldGrid:
    """``Gamma_1(x) = integral of W along axis 1 from the face x_1 = face``; other components vanish.

    Samples are cell centres, so the first step from the face is half a cell.
    The cumulative trapezoid rule on the centres plus that half step equals
    the exact antiderivative of the piecewise-constant interpolant, which
    keeps ``||Gamma_1||_p <= r p**(-1/p) ||W||_p`` exact on the grid.
    """
    if w.topology is not Topology.CUBE:
        raise WrongTopology("the antiderivative solution lives on a cube")
    h = w.spacing[0]
    x0 = w.axes()[0][0]
    face = w.origin[0] if face is None else face
    vals = w.values
    first = vals[:1] * (x0 - face)
    steps = 0.5 * h * (vals[1:] + vals[:-1])
    gamma1 = np.concatenate([first, first + np.cumsum(steps, axis=0)], axis=0)
    comps = [w.with_values(gamma1)] + [w.with_values(np.zeros_like(vals)) for _ in range(w.d - 1)]
    return VectorFieldGrid(tuple(comps))


def _wavenumbers(g: GridFunction):
    """Integer frequencies per axis, the physical wavevectors and a Nyquist mask."""
    side = g.extent[0]
    ks = [np.fft.fftfreq(n, 1.0 / n) for n in g.dims]
    mesh = np.meshgrid(*ks, indexing="ij")
    nyq = np.zeros(g.dims, dtype=bool)
    for n, km in zip(g.dims, mesh):
        if n % 2 == 0:
            nyq |= km == -n // 2
    kappa = np.stack(mesh) / side
    return np.stack(mesh), kappa, nyq


@dataclass(frozen=True, eq=False)
class SpectralCoeffs:
    """Fourier data of ``W`` on the torus and the gradient coefficients ``G``.

    ``k`` holds integer frequencies with shape ``(d, *dims)``; ``G`` has the
    same shape (complex).  Nyquist frequencies are set to zero.
    """

    k: np.ndarray
    w_hat: np.ndarray
    G: np.ndarray
    side: float

    @property
    def band(self) -> int:
        return int(np.max(np.abs(self.k)))

    def magnitude(self) -> np.ndarray:
        return np.sqrt(np.sum(np.abs(self.G) ** 2, axis=0))

    def lq_norm(self, q: float, min_band: int = 0) -> float:
        mag = self.magnitude()
        if min_band:
            mag = mag[np.max(np.abs(self.k), axis=0) > min_band]
        if math.isinf(q):
            return float(mag.max()) if mag.size else 0.0
        return float(np.sum(mag ** q) ** (1 / q))


def gradient_coefficients(w: GridFunction, check_mean: bool = True) -> SpectralCoeffs:
    if w.topology is not Topology.TORUS:
        raise WrongTopology("spectral coefficients need a torus grid")
    scale = float(np.max(np.abs(w.values), initial=0.0))
    if check_mean and abs(w.mean()) > MEAN_TOL * scale:
        raise NonZeroMean(f"mean of W is {w.mean():.3e}; the periodic problem needs zero mean")
    k, kappa, nyq = _wavenumbers(w)
    w_hat = np.fft.fftn(w.values) / w.values.size
    w_hat[nyq] = 0
    k2 = np.sum(kappa ** 2, axis=0)
    k2[(0,) * w.d] = 1.0
    G = w_hat[None] * kappa / (2j * math.pi * k2[None])
    G[(slice(None),) + (0,) * w.d] = 0
    return SpectralCoeffs(k, w_hat, G, w.extent[0])


@dataclass(frozen=True, eq=False)
class PeriodicSolution:
    gamma: VectorFieldGrid
    coeffs: SpectralCoeffs
    lq_norms: dict
    tail_norms: dict


def periodic_potential_solution(w: GridFunction, ps=None) -> PeriodicSolution:
    """Spectral solution on the torus.

    ``lq_norms[p]`` is the ``l_q`` norm of the gradient coefficients with
    ``q = p/(p-1)`` (default ``p = d``); ``tail_norms[p]`` restricts it to the
    outer half of the resolved band, as an indicator of truncation.
    """
    coeffs = gradient_coefficients(w)
    size = w.values.size
    comps = tuple(w.with_values(np.real(np.fft.ifftn(G * size))) for G in coeffs.G)
    ps = (w.d,) if ps is None else tuple(ps)
    norms, tails = {}, {}
    for p in ps:
        q = math.inf if p == 1 else p / (p - 1)
        norms[p] = coeffs.lq_norm(q)
        tails[p] = coeffs.lq_norm(q, min_band=max(coeffs.band // 2, 1))
    return PeriodicSolution(VectorFieldGrid(comps), coeffs, norms, tails)


def divergence(vf: VectorFieldGrid, method: DivergenceMethod = DivergenceMethod.FORWARD_DIFFERENCE) -> GridFunction:
    g = vf.grid
    method = DivergenceMethod(method)
    if method is DivergenceMethod.SPECTRAL:
        if g.topology is not Topology.TORUS:
            raise WrongTopology("spectral divergence needs a torus grid")
        _, kappa, nyq = _wavenumbers(g)
        acc = np.zeros(g.dims, dtype=complex)
        for j, comp in enumerate(vf.components):
            acc += 2j * math.pi * kappa[j] * np.fft.fftn(comp.values)
        acc[nyq] = 0
        return g.with_values(np.real(np.fft.ifftn(acc)))
    out = np.zeros(g.dims)
    for j, comp in enumerate(vf.components):
        v = comp.values
        h = g.spacing[j]
        if g.topology is Topology.TORUS:
            out += (np.roll(v, -1, axis=j) - v) / h
            continue
        diff = np.diff(v, axis=j) / h
        # the last layer has no forward neighbour: repeat the backward difference
        last = np.take(diff, [-1], axis=j)
        out += np.concatenate([diff, last], axis=j)
    return g.with_values(out)
