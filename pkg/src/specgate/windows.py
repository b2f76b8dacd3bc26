"""Per-window statistics of a potential and scans over families of windows.

For a cube window ``Q_r(y)`` with volume ``r**d`` and ``gamma = gamma(r)``:

* ``vstar``: the decreasing rearrangement ``V^*(gamma * r**d)`` on the
  unnormalised measure,
* ``lagrange_stat``: ``E - sqrt(gamma) * Dev`` on the averaged measure,
* ``gmd_ratio``: ``mes{V >= delta * mean V} / r**d``,
* ``r_v`` / ``y_v``: the masked variants on ``Q_r(y)`` intersected with a
  subdomain given as a boolean cell mask.

Piecewise-constant zoo potentials are integrated exactly (``quadrature``
``"exact"``); everything else is sampled at cell centres (``"grid"``).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (BadGamma, BadParameter, BadTheta, EvaluationDomain, MaskMissing, NegativeSamples,
                     ResolutionTooLow, ShapeMismatch)
from .grid import GridFunction
from .lagrange import moments
from .measure_core import (DiscreteMeasureSpace, Direction, build_profile, distribution, grid_to_measure,
                           rearrangement_value)
from .potentials import (DenseSystemSpec, PotentialSpec, evaluate_many, exact_distribution,
                         madic_cells_in_system, oscillation_period)
from .report import PLUS_INF, ReportRow, ScanReport, Unbounded
from .setopt import solve_fractional

THREADS_ENV = "SPECGATE_THREADS"


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True, eq=False)
class CubeWindow:
    corner: tuple[float, ...]
    side: float
    resolution: int = 32
    omega_mask: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "corner", tuple(float(c) for c in self.corner))
        if not self.side > 0:
            raise BadParameter("window side must be positive")
        if self.resolution < 1:
            raise ResolutionTooLow("resolution must be at least 1")
        if self.omega_mask is not None:
            mask = np.asarray(self.omega_mask, dtype=bool)
            if mask.shape != (self.resolution,) * self.d:
                raise ShapeMismatch(f"mask shape {mask.shape} != {(self.resolution,) * self.d}")
            object.__setattr__(self, "omega_mask", mask)

    @property
    def d(self) -> int:
        return len(self.corner)

    @property
    def volume(self) -> float:
        return self.side ** self.d

    @property
    def upper(self) -> tuple[float, ...]:
        return tuple(c + self.side for c in self.corner)

    def grid(self, values=None) -> GridFunction:
        n = self.resolution
        h = self.side / n
        vals = np.zeros((n,) * self.d) if values is None else values
        return GridFunction((n,) * self.d, self.corner, (h,) * self.d, vals)


@dataclass(frozen=True)
class GammaSchedule:
    """``gamma(r) = K * r**alpha``.

    ``alpha = 0`` gives a constant schedule; ``admissible(d)`` checks the
    range ``0 < alpha < 2d/(d-2)`` required by the localization criteria.
    """

    K: float = 1.0
    alpha: float = 3.0

    def __post_init__(self):
        if not self.K > 0 or self.alpha < 0:
            raise BadGamma("gamma schedule needs K > 0 and alpha >= 0")

    def __call__(self, r: float) -> float:
        return self.K * r ** self.alpha

    def admissible(self, d: int) -> bool:
        ceiling = math.inf if d <= 2 else 2 * d / (d - 2)
        return 0 < self.alpha < ceiling

    @classmethod
    def default(cls, d: int) -> GammaSchedule:
        return cls(1.0, d / (d - 2) if d > 2 else 1.0)


@dataclass(frozen=True)
class WindowStats:
    vstar_at_delta: float | None
    lagrange_stat: float
    gmd_ratio: float | None
    r_v: float | Unbounded | None = None
    y_v: float | Unbounded | None = None

    def as_row(self) -> dict:
        out = {"vstar": self.vstar_at_delta, "lagrange_stat": self.lagrange_stat, "gmd_ratio": self.gmd_ratio,
               "r_v": self.r_v, "y_v": self.y_v}
        return {k: v for k, v in out.items() if v is not None}


class WindowSample(NamedTuple):
    space: DiscreteMeasureSpace
    method: str
    aliased: bool
    truncation: float


def sample_window(pot: PotentialSpec, win: CubeWindow, quadrature: str = "auto", mask=None) -> WindowSample:
    """Atoms of ``V`` restricted to the window (unnormalised measure)."""
    if win.d != pot.d:
        raise ShapeMismatch(f"window dimension {win.d} != potential dimension {pot.d}")
    if quadrature not in ("auto", "exact", "grid"):
        raise BadParameter("quadrature must be 'auto', 'exact' or 'grid'")
    if quadrature != "grid" and mask is None:
        exact = exact_distribution(pot, win.corner, win.upper)
        if exact is not None:
            return WindowSample(exact.space, "exact", False, exact.truncation)
        if quadrature == "exact":
            raise BadParameter(f"no exact quadrature for kind {pot.kind}")
    g = win.grid()
    vals = evaluate_many(pot, g.points()).reshape(g.dims)
    if not np.all(np.isfinite(vals)):
        raise EvaluationDomain("potential is not finite on the window")
    space = grid_to_measure(g.with_values(vals), mask=mask)
    return WindowSample(space, "grid", _aliased(pot, win), 0.0)


def _aliased(pot: PotentialSpec, win: CubeWindow) -> bool:
    cells = {tuple(int(math.floor(c)) for c in win.corner), tuple(int(math.floor(c - 1e-12)) for c in win.upper)}
    h = win.side / win.resolution
    periods = [oscillation_period(pot, l) for l in cells]
    return any(p is not None and h >= p for p in periods)


def _gamma_at(sched: GammaSchedule, r: float) -> float:
    gamma = sched(r)
    if not (0 < gamma < 1):
        raise BadGamma(f"gamma(r)={gamma} must lie in (0, 1)")
    return gamma


def statistics_from_space(space: DiscreteMeasureSpace, volume: float, gamma: float, gmd_delta: float = 0.5,
                          need_nonnegative: bool = True) -> WindowStats:
    stats = moments(space)
    lagr = stats.expectation - math.sqrt(gamma) * stats.deviation
    if np.any(space.values < 0):
        if need_nonnegative:
            raise NegativeSamples("vstar and gmd_ratio need a nonnegative potential")
        return WindowStats(None, lagr, None)
    prof = build_profile(space)
    vstar = rearrangement_value(prof, gamma * volume, Direction.NON_INCREASING)
    gmd = distribution(prof, gmd_delta * stats.expectation, Direction.NON_INCREASING) / volume
    return WindowStats(vstar, lagr, gmd)


def window_statistics(pot: PotentialSpec, win: CubeWindow, sched: GammaSchedule, gmd_delta: float = 0.5,
                      quadrature: str = "auto", need_nonnegative: bool = True) -> WindowStats:
    gamma = _gamma_at(sched, win.side)
    ws = sample_window(pot, win, quadrature)
    base = statistics_from_space(ws.space, ws.space.total_mass, gamma, gmd_delta, need_nonnegative)
    if win.omega_mask is None:
        return base
    om = omega_statistics(pot, win, gamma)
    return WindowStats(base.vstar_at_delta, base.lagrange_stat, base.gmd_ratio, om.r_v, om.y_v)


class OmegaStats(NamedTuple):
    r_v: float | Unbounded
    y_v: float | Unbounded
    mask_ratio: float


def omega_statistics(pot: PotentialSpec, win: CubeWindow, gamma: float) -> OmegaStats:
    """Masked statistics on ``Q_r(y)`` intersected with the mask.

    ``r_v`` is the fractional infimum of the integral over masked sets of
    measure ``(1 - gamma) r**d`` and ``y_v`` the corresponding moment bound;
    both are ``PLUS_INF`` when the mask is too small.
    """
    if win.omega_mask is None:
        raise MaskMissing("window has no omega mask")
    if not (0 < gamma < 1):
        raise BadGamma(f"gamma={gamma} must lie in (0, 1)")
    mask = win.omega_mask
    total = mask.size
    count = int(mask.sum())
    g = win.grid()
    vals = evaluate_many(pot, g.points()).reshape(g.dims)
    if not np.all(np.isfinite(vals)):
        raise EvaluationDomain("potential is not finite on the window")
    ratio = count / total
    full_mass = total * g.cell_volume

    if count == 0 or count < (1 - gamma) * total:
        r_v: float | Unbounded = PLUS_INF
    else:
        masked = grid_to_measure(g.with_values(vals), mask=mask)
        t = (1 - gamma) * full_mass
        if count == (1 - gamma) * total or t >= masked.total_mass:
            r_v = math.fsum(masked.values * masked.weights)
        else:
            r_v = solve_fractional(masked, t).value

    if count == 0 or count < (1 - gamma / 2) * total:
        y_v: float | Unbounded = PLUS_INF
    else:
        stats = moments(grid_to_measure(g.with_values(vals), mask=mask, normalized=True))
        gbar = max(1 - (1 - gamma / 2) / ratio, 0.0)
        y_v = stats.expectation - math.sqrt(2 * gbar) * stats.deviation
    return OmegaStats(r_v, y_v, ratio)


def _trend(values, strict: bool = True) -> bool:
    vals = [float(v) for v in values if v is not None and v is not PLUS_INF]
    tail = vals[len(vals) // 2:]
    if len(tail) < 2:
        return False
    pairs = zip(tail, tail[1:])
    return all(b > a for a, b in pairs) if strict else all(b >= a for a, b in pairs)


def ray_scan(pot: PotentialSpec, direction, steps: int, r: float, sched: GammaSchedule, resolution: int = 32,
             gmd_delta: float = 0.5, quadrature: str = "auto", start: int = 0) -> ScanReport:
    """Statistics of the windows ``Q_r(k * direction)`` for ``k = start, ..., start + steps - 1``."""
    direction = tuple(direction)
    if len(direction) != pot.d:
        raise ShapeMismatch("direction must have the potential's dimension")
    if steps < 1:
        raise BadParameter("steps must be >= 1")
    gamma = _gamma_at(sched, r)

    def one(k):
        loc = tuple(k * c for c in direction)
        win = CubeWindow(loc, r, resolution)
        ws = sample_window(pot, win, quadrature)
        st = statistics_from_space(ws.space, ws.space.total_mass, gamma, gmd_delta)
        return ReportRow(loc, st.as_row()), ws

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        results = list(pool.map(one, range(start, start + steps)))
    rows = [row for row, _ in results]
    samples = [ws for _, ws in results]
    report = ScanReport(rows, {
        "command": "scan",
        "potential": pot.to_json(),
        "direction": list(direction),
        "r": r,
        "gamma_K": sched.K,
        "gamma_alpha": sched.alpha,
        "gamma": gamma,
        "gamma_admissible": sched.admissible(pot.d),
        "gmd_delta": gmd_delta,
        "resolution": resolution,
        "quadrature": sorted({ws.method for ws in samples}),
        "aliased": any(ws.aliased for ws in samples),
        "truncation": max(ws.truncation for ws in samples),
    })
    report.meta["lagrange_increasing_last_half"] = _trend(report.column("lagrange_stat"))
    report.meta["vstar_nondecreasing_last_half"] = _trend(report.column("vstar"), strict=False)
    return report


class MadicResult(NamedTuple):
    min_vstar: float
    argmin: tuple[int, ...]
    cells: int
    psi: float


def madic_scan(pot: PotentialSpec, l, n: int, m: int, system: DenseSystemSpec, sched: GammaSchedule,
               resolution: int | None = None) -> MadicResult:
    """Minimum of ``V^*(psi(n))`` over m-adic cells of side ``m**-n`` inside ``D_1 u ... u D_n`` (shifted by l).

    ``psi(n) = gamma(m**-n) * m**(-n d)``.  Exact quadrature is used when the
    potential supports it and ``resolution`` is None; otherwise ``Q_1(l)`` is
    sampled at ``resolution`` points per axis, which must be divisible by
    ``m**n``.
    """
    d = pot.d
    if system.dimension != d:
        raise ShapeMismatch(f"system dimension {system.dimension} != potential dimension {d}")
    if n < 1 or m < 2:
        raise BadParameter("need n >= 1 and m >= 2")
    l = tuple(int(v) for v in l)
    side = float(m) ** -n
    psi = sched(side) * side ** d
    cells = madic_cells_in_system(system, n, m)
    best, arg = math.inf, None

    if resolution is None and exact_distribution(pot, l, tuple(v + 1 for v in l)) is not None:
        for cell in cells:
            lo = tuple(li + ci * side for li, ci in zip(l, cell))
            hi = tuple(a + side for a in lo)
            space = exact_distribution(pot, lo, hi).space
            v = rearrangement_value(build_profile(space), psi, Direction.NON_INCREASING)
            if v < best:
                best, arg = v, cell
        return MadicResult(best, arg, len(cells), psi)

    if resolution is None or resolution % (m ** n):
        raise ResolutionTooLow(f"resolution must be divisible by {m}**{n} = {m ** n}")
    win = CubeWindow(l, 1.0, resolution)
    g = win.grid()
    vals = evaluate_many(pot, g.points()).reshape(g.dims)
    if not np.all(np.isfinite(vals)):
        raise EvaluationDomain("potential is not finite on Q_1(l)")
    if np.any(vals < 0):
        raise NegativeSamples("madic scan needs a nonnegative potential")
    b = resolution // m ** n
    cellvol = g.cell_volume
    for cell in cells:
        block = vals[tuple(slice(c * b, (c + 1) * b) for c in cell)].ravel()
        space = DiscreteMeasureSpace(block, np.full(block.size, cellvol))
        v = rearrangement_value(build_profile(space), psi, Direction.NON_INCREASING)
        if v < best:
            best, arg = v, cell
    return MadicResult(best, arg, len(cells), psi)


class DensityResult(NamedTuple):
    passed: bool
    failures: list
    trials: int


def _max_level(m: int, theta: float, r: float) -> int:
    j = 0
    while m ** (j + 1) * theta * r <= 1:
        j += 1
    return j


def verify_logm_theta_density(system: DenseSystemSpec, m: int, theta: float, trials: int = 200,
                              rng_seed: int = 0, r_min: float = 1e-4) -> DensityResult:
    """Randomised check that the system is ``(log_m, theta)``-dense in the unit cube.

    Every sampled cube ``Q_r(z)`` inside the unit cube with
    ``r < min(1, 1/(theta m**2))`` must contain a cube of side ``theta r``
    inside ``Q_r(z)`` and some box of ``D_j`` with ``j <= floor(log_m(1/(theta r)))``.
    Failures are returned as ``(z, r)`` pairs.
    """
    if not (0 < theta < 1):
        raise BadTheta(f"theta must lie in (0, 1), got {theta}")
    if m < 2:
        raise BadParameter("m must be >= 2")
    d = system.dimension
    rng = np.random.default_rng(rng_seed)
    r_max = min(1.0, 1.0 / (theta * m * m))
    failures = []
    for _ in range(trials):
        r = math.exp(rng.uniform(math.log(r_min), math.log(r_max)))
        r = min(r, math.nextafter(r_max, 0))
        z = rng.uniform(0.0, 1.0 - r, size=d)
        if not _has_inner_cube(system, z, r, theta, _max_level(m, theta, r)):
            failures.append((tuple(z.tolist()), r))
    return DensityResult(not failures, failures, trials)


def _has_inner_cube(system, z, r, theta, jmax) -> bool:
    hi = z + r
    need = theta * r
    for j in range(1, jmax + 1):
        for blo, bhi in system.boxes(j, lo=z.tolist(), hi=hi.tolist()):
            if all(min(float(bh), h) - max(float(bl), a) >= need for bl, bh, a, h in zip(blo, bhi, z, hi)):
                return True
    return False
