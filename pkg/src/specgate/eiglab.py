"""Finite-difference Schroedinger operators ``-k Delta + V`` on cube windows.

Unknowns sit at cell centres.  Dirichlet closure uses a reflected ghost value
(``u_ghost = -u``), natural Neumann closure drops the outer flux.  Both
operators share the same potential samples, and the Dirichlet matrix is the
Neumann matrix plus a nonnegative diagonal, so the Dirichlet ground state
energy is never below the Neumann one.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from .diveq.constants import molchanov_constant, unit_ball_volume
from .errors import BadParameter, DegenerateVolume, DLessThan3, NoConvergence, ResolutionTooLow
from .potentials import PotentialSpec, evaluate_many
from .report import ReportRow, ScanReport
from .windows import CubeWindow

MIN_RESOLUTION = 8


class BoundaryCondition(enum.Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    matrix: sps.csr_matrix
    potential: np.ndarray
    dims: tuple[int, ...]
    h: float
    bc: BoundaryCondition
    kinetic: float

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


class EigResult(NamedTuple):
    eigenvalue: float
    eigenvector: np.ndarray
    residual: float
    iterations: int
    method: str


def second_difference(n: int, h: float, bc: BoundaryCondition) -> sps.csr_matrix:
    main = np.full(n, 2.0)
    edge = 3.0 if bc is BoundaryCondition.DIRICHLET else 1.0
    main[0] = main[-1] = edge
    if n == 1:
        main[0] = 4.0 if bc is BoundaryCondition.DIRICHLET else 0.0
    off = -np.ones(n - 1)
    return sps.diags([off, main, off], [-1, 0, 1], format="csr") / (h * h)


def assemble(pot: PotentialSpec, win: CubeWindow, bc: BoundaryCondition | str = BoundaryCondition.DIRICHLET,
             kinetic: float = 1.0) -> DiscreteOperator:
    bc = BoundaryCondition(bc)
    if win.resolution < MIN_RESOLUTION:
        raise ResolutionTooLow(f"resolution must be at least {MIN_RESOLUTION}")
    if not kinetic > 0:
        raise BadParameter("kinetic coefficient must be positive")
    n, d = win.resolution, win.d
    h = win.side / n
    t1 = second_difference(n, h, bc)
    eye = sps.identity(n, format="csr")
    lap = sps.csr_matrix((n ** d, n ** d))
    for axis in range(d):
        term = None
        for j in range(d):
            f = t1 if j == axis else eye
            term = f if term is None else sps.kron(term, f, format="csr")
        lap = lap + term
    vals = evaluate_many(pot, win.grid().points())
    if not np.all(np.isfinite(vals)):
        raise BadParameter("potential is not finite on the window")
    mat = (kinetic * lap + sps.diags(vals)).tocsr()
    return DiscreteOperator(mat, vals.reshape((n,) * d), (n,) * d, h, bc, kinetic)


def smallest_eigenvalue(op: DiscreteOperator, tol: float = 1e-8, max_iter: int = 2000) -> EigResult:
    """Lowest eigenvalue by shifted inverse iteration from the all-ones vector.

    The shift sits below the Gershgorin bound, so the iteration converges to
    the ground state.  If the residual ``||A u - lambda u||`` does not drop
    below ``tol`` in ``max_iter`` steps, shift-invert Lanczos is tried before
    giving up.
    """
    A = op.matrix
    diag = A.diagonal()
    offsum = np.asarray(abs(A).sum(axis=1)).ravel() - np.abs(diag)
    shift = float(np.min(diag - offsum)) - 1.0
    solve = spla.factorized((A - shift * sps.identity(A.shape[0], format="csc")).tocsc())
    u = np.ones(A.shape[0]) / math.sqrt(A.shape[0])
    lam, res = math.nan, math.inf
    for it in range(1, max_iter + 1):
        v = solve(u)
        u = v / np.linalg.norm(v)
        Au = A @ u
        lam = float(u @ Au)
        res = float(np.linalg.norm(Au - lam * u))
        if res <= tol:
            return EigResult(lam, u, res, it, "inverse-iteration")
    try:
        vals, vecs = spla.eigsh(A.tocsc(), k=1, sigma=shift, which="LM", v0=np.ones(A.shape[0]), tol=0)
    except (spla.ArpackNoConvergence, spla.ArpackError) as exc:
        raise NoConvergence(f"no convergence: residual {res:.3e} after {max_iter} steps") from exc
    u = vecs[:, 0] / np.linalg.norm(vecs[:, 0])
    lam = float(vals[0])
    res = float(np.linalg.norm(A @ u - lam * u))
    if res > tol:
        raise NoConvergence(f"no convergence: residual {res:.3e}")
    return EigResult(lam, u, res, max_iter, "lanczos")


def localization_scan(pot: PotentialSpec, r: float, direction, steps: int,
                      bc: BoundaryCondition | str = BoundaryCondition.DIRICHLET, resolution: int = 32,
                      kinetic: float = 1.0, tol: float = 1e-8) -> ScanReport:
    """Ground-state energies on ``Q_r(k * direction)`` for ``k = 0, ..., steps - 1``."""
    bc = BoundaryCondition(bc)
    direction = tuple(direction)
    rows = []
    for k in range(steps):
        loc = tuple(k * c for c in direction)
        op = assemble(pot, CubeWindow(loc, r, resolution), bc, kinetic)
        res = smallest_eigenvalue(op, tol)
        rows.append(ReportRow(loc, {"eigenvalue": res.eigenvalue, "residual": res.residual,
                                    "iterations": res.iterations}))
    report = ScanReport(rows, {"command": "eig", "potential": pot.to_json(), "r": r, "bc": bc.value,
                               "resolution": resolution, "kinetic": kinetic})
    ev = report.column("eigenvalue")
    tail = ev[len(ev) // 2:]
    report.meta["increasing_last_half"] = len(tail) >= 2 and all(b > a for a, b in zip(tail, tail[1:]))
    return report


class MolchanovQuotient(NamedTuple):
    energy: float
    volume_lb: float
    quotient_ub: float
    small_capacity: bool


def molchanov_quotient(N: float, m: int, r: float, d: int) -> MolchanovQuotient:
    """Upper bound for the Neumann ground state on a cell of a lattice potential.

    The capacity energy ``G_d m^2 r^(d-2)`` of the ``m**d`` holes divided by
    a lower bound for the measure left outside balls of radius ``2r/m``.
    ``N`` does not enter the bound.
    """
    if d < 3:
        raise DLessThan3("molchanov_quotient needs d >= 3")
    if not (0 < r < 0.5) or m < 1:
        raise BadParameter("need 0 < r < 1/2 and m >= 1")
    energy = molchanov_constant(d) * m * m * r ** (d - 2)
    volume_lb = 1 - m ** d * unit_ball_volume(d) * (2 * r / m) ** d
    if volume_lb <= 0:
        raise DegenerateVolume(f"volume lower bound {volume_lb} is not positive")
    return MolchanovQuotient(energy, volume_lb, energy / volume_lb, energy < 1)
