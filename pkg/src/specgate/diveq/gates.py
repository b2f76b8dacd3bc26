"""Sufficient conditions for the divergence route on unit cells.

``fourier_gate`` tests a sampled cell potential: the ``l_{d'}`` norm of the
gradient coefficients of its zero-mean part must stay below
``1/(d 2**(d+1) C(d))``.

``lattice_gate`` handles lattice potentials ``N(l) V_r(m x)`` built from the
indicator of the ball of radius 1/2.  Their coefficients factor through
``H_r(k) = S^(r k) / (2 pi |k|)``, so the test reduces to ``N/m`` against
``1/(d 2**(d+1) C(d) Hbar)`` with ``Hbar = sup_r r**d ||H_r||_{l_d'}``.
``Hbar`` is computed on a finite band with a rigorous tail majorant, which
is only implemented for d = 3 and 4.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import NamedTuple

import numpy as np
import scipy.special as sp

from ..errors import BadParameter, UncertifiedDimension
from ..grid import GridFunction
from ..report import ReportRow, ScanReport
from .constants import fourier_threshold, molchanov_constant, sobolev_constant, unit_ball_volume
from .solvers import gradient_coefficients

CERTIFIED_DIMENSIONS = (3, 4)
# lattice radii live in (0, 1/2); the gate adds the radii actually used
DEFAULT_R_GRID = tuple(np.round(np.linspace(0.05, 0.45, 9), 10))
BALL_RADIUS = 0.5


class FourierGateResult(NamedTuple):
    lhs: float
    threshold: float
    passed: bool
    tail: float
    d_bar_bound: float
    sigma_lower: float


def fourier_gate(v_cell: GridFunction, d: int | None = None) -> FourierGateResult:
    """Gate for one unit cell sampled as a periodic grid (cube samples are reinterpreted)."""
    d = v_cell.d if d is None else d
    g = v_cell.as_torus()
    if abs(g.extent[0] - 1.0) > 1e-12:
        raise BadParameter("the cell must be a unit cube")
    w = g.with_values(g.values - g.mean())
    coeffs = gradient_coefficients(w, check_mean=False)
    q = d / (d - 1)
    lhs = coeffs.lq_norm(q)
    tail = coeffs.lq_norm(q, min_band=max(coeffs.band // 2, 1))
    thr = fourier_threshold(d)
    d_bar = 2 ** d * d * lhs
    sigma_lower = 2 * sobolev_constant(d) * d_bar
    return FourierGateResult(lhs, thr, lhs < thr, tail, d_bar, sigma_lower)


def ball_fourier_transform(omega, d: int, radius: float = BALL_RADIUS):
    """Fourier transform ``integral_{|x|<=R} exp(-2 pi i x.w) dx`` as a function of ``|w|``."""
    w = np.asarray(omega, dtype=float)
    out = np.empty_like(w)
    small = w < 1e-8
    out[small] = unit_ball_volume(d) * radius ** d
    ws = w[~small]
    out[~small] = radius ** (d / 2) * sp.jv(d / 2, 2 * math.pi * radius * ws) / ws ** (d / 2)
    return out if out.ndim else float(out)


@lru_cache(maxsize=None)
def bessel_sqrt_bound(nu: float) -> float:
    """A majorant of ``sup_x sqrt(x) |J_nu(x)|``.

    The maximum is taken on a dense grid up to ``x = 2000`` and padded by the
    asymptotic correction ``(1 + |4 nu^2 - 1| / (8 x))`` at the edge of the
    grid (the oscillation envelope decreases to ``sqrt(2/pi)`` beyond it).
    """
    x = np.linspace(1e-6, 2000.0, 2_000_001)
    peak = float(np.max(np.sqrt(x) * np.abs(sp.jv(nu, x))))
    edge = math.sqrt(2 / math.pi) * (1 + abs(4 * nu * nu - 1) / (8 * 2000.0))
    return max(peak, edge) * (1 + 1e-6)


def _shell_counts(d: int, K: int) -> np.ndarray:
    """``counts[n]`` = number of k in ``[-K, K]**d`` with ``|k|^2 = n``."""
    one = np.zeros(K * K + 1)
    for j in range(-K, K + 1):
        one[j * j] += 1
    acc = np.array([1.0])
    for _ in range(d):
        acc = np.convolve(acc, one)
    return acc


def _tail_lattice_sum(d: int, K: int, s: float, cutoff: int = 20000) -> float:
    """Upper bound for ``sum_{|k|_inf > K} |k|^-s`` using ``|k| >= |k|_inf``."""
    n = np.arange(K + 1, cutoff + 1, dtype=float)
    shells = (2 * n + 1) ** d - (2 * n - 1) ** d
    head = float(np.sum(shells * n ** -s))
    # shells <= 2 d 3**(d-1) n**(d-1) and the remaining sum is below the integral from cutoff
    rest = 2 * d * 3 ** (d - 1) * cutoff ** (d - s) / (s - d)
    return head + rest


class HBarEstimate(NamedTuple):
    value: float
    tail_bound: float
    argmax_r: float
    K_band: int
    per_r: tuple


def h_bar_estimate(d: int, K_band: int = 32, r_grid=DEFAULT_R_GRID) -> HBarEstimate:
    """``max_r r**d ||H_r||_{l_d'}`` over ``0 < |k|_inf <= K_band`` with a tail majorant.

    ``tail_bound`` bounds how much the band-limited value can grow when the
    band is enlarged (by subadditivity of ``t -> t**(1/d')``).
    """
    if d not in CERTIFIED_DIMENSIONS:
        raise UncertifiedDimension(f"tail bound certified only for d in {CERTIFIED_DIMENSIONS}")
    if K_band < 8:
        raise BadParameter("K_band must be at least 8")
    dp = d / (d - 1)
    counts = _shell_counts(d, K_band)
    nsq = np.nonzero(counts)[0]
    nsq = nsq[nsq > 0]
    mult = counts[nsq]
    kabs = np.sqrt(nsq)
    R = BALL_RADIUS
    B = R ** (d / 2) * bessel_sqrt_bound(d / 2) / (math.sqrt(2 * math.pi * R) * 2 * math.pi)
    s = (d + 3) * dp / 2
    T = _tail_lattice_sum(d, K_band, s)
    per_r = []
    for r in r_grid:
        terms = np.abs(ball_fourier_transform(r * kabs, d)) / (2 * math.pi * kabs)
        val = r ** d * float(np.sum(mult * terms ** dp)) ** (1 / dp)
        tail = B * r ** ((d - 1) / 2) * T ** (1 / dp)
        per_r.append((float(r), val, tail))
    best = max(per_r, key=lambda t: t[1])
    return HBarEstimate(best[1], max(t[2] for t in per_r), best[0], K_band, tuple(per_r))


def lattice_gate(N_of_l, m_of_l, r_of_l, l_range, d: int, K_band: int = 32, r_grid=DEFAULT_R_GRID) -> ScanReport:
    """Gate rows for the lattice points in ``l_range``.

    ``N_of_l``, ``m_of_l`` and ``r_of_l`` map a lattice point (tuple) to the
    amplitude, integer frequency and bump radius.  ``Hbar`` is maximised over
    ``r_grid`` together with every radius that occurs.
    """
    l_range = [tuple(l) for l in l_range]
    radii = {float(r_of_l(l)) for l in l_range}
    hb = h_bar_estimate(d, K_band, tuple(sorted(set(map(float, r_grid)) | radii)))
    C = sobolev_constant(d)
    G = molchanov_constant(d)
    threshold = 1.0 / (d * 2 ** (d + 1) * C * hb.value)
    rows = []
    for l in l_range:
        N = float(N_of_l(l))
        m = int(round(float(m_of_l(l))))
        r = float(r_of_l(l))
        if m < 1 or not (0 < r < 0.5):
            raise BadParameter(f"need m >= 1 and 0 < r < 1/2 at l={l}")
        ratio = N / m
        product = N * r ** d
        d_bar = 2 ** d * d * ratio * hb.value
        sigma_lower = 2 * C * d_bar
        energy = G * m * m * r ** (d - 2)
        rows.append(ReportRow(l, {
            "ratio": ratio,
            "product": product,
            "ratio_ok": ratio < threshold,
            "sigma_lower": sigma_lower,
            "sigma_interval_nonempty": sigma_lower < 1,
            "small_capacity": bool(energy < 1 and r < 0.5),
            "molchanov_lower": 2 ** (d / 2 + 1) * math.sqrt(G) * product,
        }))
    report = ScanReport(rows, {
        "command": "gate-lattice",
        "d": d,
        "K_band": K_band,
        "h_bar": hb.value,
        "h_bar_tail_bound": hb.tail_bound,
        "h_bar_argmax_r": hb.argmax_r,
        "ratio_threshold": threshold,
    })
    prods = report.column("product")
    half = prods[len(prods) // 2:]
    report.meta["product_increasing_last_half"] = len(half) >= 2 and all(b > a for a, b in zip(half, half[1:]))
    report.meta["ratio_ok_all"] = all(report.column("ratio_ok"))
    return report
