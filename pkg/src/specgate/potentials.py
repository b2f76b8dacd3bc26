"""A zoo of oscillating potentials and the dense box systems they live on.

Potentials are described by a ``PotentialSpec`` (``kind`` plus JSON-style
``params``) and evaluated pointwise from exact lattice/interval membership.
Piecewise-constant kinds built from the Cantor gaps also expose their exact
level-set measures on any box through ``exact_distribution``.

Growth laws such as ``N(l)`` are sympy expressions in ``L = |l|_inf`` (and
optionally ``d``), e.g. ``"1 + log(1 + L)"``, or plain numbers.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np
import scipy.special as sp
import sympy

from .errors import BadParameter, DomainX, EmptyXi, UnknownKind, WrongKind
from .measure_core import DiscreteMeasureSpace

KINDS = ("VAlpha", "VPsi", "PsiLagr", "CosineProduct", "ExpSquare", "MolchanovLattice", "Constant", "Custom")
DEFAULT_GROWTH = "1 + log(1 + L)"
# Cantor membership is resolved to this many ternary levels; deeper gaps are measure < (2/3)**30
CANTOR_DEPTH = 30
# exponent cap keeps 3**p * x resolvable in double precision
MAX_TERNARY_EXPONENT = 25
EXACT_DEPTH = 20
_L, _D = sympy.symbols("L d")


def _sympify(expr):
    try:
        return sympy.sympify(expr, locals={"L": _L, "d": _D})
    except (sympy.SympifyError, TypeError, SyntaxError) as exc:
        raise BadParameter(f"cannot parse expression {expr!r}: {exc}") from exc


class GrowthLaw:
    """A function of the lattice point through ``L = |l|_inf``."""

    def __init__(self, source, d: int):
        self.source = source
        expr = _sympify(source).subs(_D, d)
        extra = expr.free_symbols - {_L}
        if extra:
            raise BadParameter(f"growth law {source!r} uses unknown symbols {sorted(map(str, extra))}")
        self._fn = sympy.lambdify(_L, expr, "numpy")

    def __call__(self, linf):
        linf = np.asarray(linf, dtype=float)
        return np.broadcast_to(np.asarray(self._fn(linf), dtype=float), linf.shape).astype(float)

    def __repr__(self):
        return f"GrowthLaw({self.source!r})"


# ---------------------------------------------------------------------------
# one-dimensional building blocks


def theta(x, beta: float):
    """1-periodic indicator equal to 1 on ``(0, beta]`` and 0 on ``(beta, 1]``."""
    x = np.asarray(x, dtype=float)
    f = x - np.floor(x)
    return ((f > 0) & (f <= beta)).astype(float)


def _theta_cdf(u, beta):
    fl = np.floor(u)
    return fl * beta + np.minimum(u - fl, beta)


def theta_measure(S, beta, a, b):
    """Lebesgue measure of ``{x in [a, b] : theta_beta(S x) > 0}``.

    Works with floats, numpy arrays or ``Fraction`` endpoints; with rational
    ``S, a, b`` and rational ``beta`` the result is exact.
    """
    if isinstance(a, Fraction) or isinstance(b, Fraction) or isinstance(beta, Fraction):
        def cdf(u):
            fl = math.floor(u)
            return fl * beta + min(u - fl, beta)
        return (cdf(S * b) - cdf(S * a)) / S
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = (_theta_cdf(S * b, beta) - _theta_cdf(S * a, beta)) / S
    return float(out) if out.ndim == 0 else out


def f_delta(delta: float, x):
    """``x - sqrt(delta) * sqrt(x - x**2)`` on ``[0, 1]``."""
    if not delta > 0:
        raise BadParameter(f"delta must be positive, got {delta}")
    arr = np.asarray(x, dtype=float)
    if np.any((arr < 0) | (arr > 1)):
        raise DomainX("x must lie in [0, 1]")
    out = arr - math.sqrt(delta) * np.sqrt(np.maximum(arr - arr * arr, 0.0))
    return float(out) if out.ndim == 0 else out


def cantor_adjacent(n: int) -> list[tuple[Fraction, Fraction]]:
    """The ``2**(n-1)`` closed middle-third gaps of length ``3**-n``."""
    if n < 1:
        raise BadParameter("level must be >= 1")
    return _cantor_gaps_exact(n, Fraction(0), Fraction(1))


def _cantor_gaps_exact(n: int, lo, hi) -> list[tuple[Fraction, Fraction]]:
    lefts = [Fraction(0)]
    for k in range(1, n):
        step = Fraction(1, 3 ** k)
        lefts = [x for left in lefts for x in (left, left + 2 * step) if x <= hi and x + step >= lo]
    g = Fraction(1, 3 ** n)
    return [(left + g, left + 2 * g) for left in lefts if left + 2 * g >= lo and left + g <= hi]


def _cantor_gap_arrays(a: float, b: float, depth: int):
    """Yield ``(n, starts, ends)`` for level-n gaps meeting ``[a, b]``; also the final remaining lefts."""
    lefts = np.zeros(1)
    for n in range(1, depth + 1):
        g = 3.0 ** -n
        starts = lefts + g
        ends = lefts + 2 * g
        keep = (ends >= a) & (starts <= b)
        yield n, starts[keep], ends[keep]
        kids = np.concatenate([lefts, lefts + 2 * g])
        lefts = kids[(kids <= b) & (kids + g >= a)]
        if lefts.size == 0:
            return
    yield None, lefts, None


def cantor_level(x):
    """Level ``n`` of the Cantor gap containing ``x`` in ``[0, 1]``, or 0 off the gaps."""
    t = np.array(x, dtype=float, copy=True)
    level = np.zeros(t.shape, dtype=int)
    active = (t >= 0) & (t <= 1)
    for n in range(1, CANTOR_DEPTH + 1):
        gap = active & (t >= 1 / 3) & (t <= 2 / 3)
        level[gap] = n
        active &= ~gap
        if not active.any():
            break
        t = np.where(t < 1 / 3, 3 * t, 3 * t - 2)
    return level


def dyadic_level(x):
    """Index ``n`` with ``x`` in ``(2**-n, 2**(1-n)]``, or 0 for ``x <= 0``."""
    x = np.asarray(x, dtype=float)
    mant, expo = np.frexp(x)
    level = np.where(mant == 0.5, 2 - expo, 1 - expo)
    return np.where(x > 0, level, 0).astype(int)


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


# ---------------------------------------------------------------------------
# potential descriptions


def _alpha_ceiling(d: int) -> float:
    return math.inf if d <= 2 else 2 * d / (d - 2)


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UnknownKind(f"unknown potential kind {self.kind!r}; expected one of {KINDS}")
        params = dict(self.params)
        object.__setattr__(self, "params", params)
        d = params.get("d", 3)
        if not isinstance(d, int) or d < 1:
            raise BadParameter("d must be a positive integer")
        object.__setattr__(self, "_compiled", _compile(self.kind, params, d))

    @property
    def d(self) -> int:
        return self.params.get("d", 3)

    @classmethod
    def from_json(cls, obj: dict) -> PotentialSpec:
        if not isinstance(obj, dict) or "kind" not in obj:
            raise BadParameter("potential JSON needs a 'kind' field")
        return cls(obj["kind"], dict(obj.get("params", {})))

    def to_json(self) -> dict:
        params = {k: v for k, v in self.params.items() if not callable(v)}
        return {"kind": self.kind, "params": params}

    def __call__(self, points):
        return evaluate_many(self, points)


def _compile(kind: str, p: dict, d: int) -> dict:
    c: dict = {}
    if kind in ("VAlpha", "VPsi", "PsiLagr"):
        alpha = float(p.get("alpha", d / (d - 2) if d > 2 else 1.0))
        if not (0 < alpha < _alpha_ceiling(d)):
            raise BadParameter(f"alpha={alpha} outside (0, {_alpha_ceiling(d)})")
        c["alpha"] = alpha
        c["N"] = GrowthLaw(p.get("N", DEFAULT_GROWTH), d)
        c["p_offset"] = int(p.get("p_offset", 1))
        if c["p_offset"] < 1:
            raise BadParameter("p_offset must be >= 1")
    if kind == "VPsi":
        if d < 3:
            raise BadParameter("VPsi needs d >= 3")
        if not alpha > math.log(2, 3):
            raise BadParameter("VPsi needs alpha > log_3 2")
        c["psi_K"] = float(p.get("psi_K", 1.0))
        c["psi_exp"] = float(p.get("psi_exp", 2 * d / (d - 2)))
        if not (0 < c["psi_K"] <= 1) or c["psi_exp"] < 2 * d / (d - 2):
            raise BadParameter("psi must be K r**e with K in (0, 1] and e >= 2d/(d-2)")
    if kind == "CosineProduct":
        c["N"] = GrowthLaw(p.get("N", DEFAULT_GROWTH), d)
        c["m"] = GrowthLaw(p.get("m", "2**(L + 1)"), d)
    if kind == "MolchanovLattice":
        c["N"] = GrowthLaw(p.get("N", DEFAULT_GROWTH), d)
        c["m"] = GrowthLaw(p.get("m", 1), d)
        c["r"] = GrowthLaw(p.get("r", 0.25), d)
        c["shape"] = p.get("shape", "ball")
        c["power"] = int(p.get("power", 2))
        if c["shape"] not in ("ball", "radial_poly"):
            raise BadParameter("shape must be 'ball' or 'radial_poly'")
    if kind == "Constant":
        c["c"] = float(p.get("c", 1.0))
    if kind == "Custom":
        if "func" in p:
            if not callable(p["func"]):
                raise BadParameter("'func' must be callable")
            c["fn"] = p["func"]
        elif "expr" in p:
            syms = sympy.symbols(" ".join(f"x{i + 1}" for i in range(d)))
            syms = syms if isinstance(syms, tuple) else (syms,)
            expr = sympy.sympify(p["expr"], locals={str(s): s for s in syms})
            if expr.free_symbols - set(syms):
                raise BadParameter(f"expression uses symbols other than x1..x{d}")
            fn = sympy.lambdify(syms, expr, "numpy")
            c["fn"] = lambda pts, fn=fn: np.broadcast_to(fn(*pts.T), pts.shape[:1]).astype(float)
        else:
            raise BadParameter("Custom potentials need 'expr' or 'func'")
    return c


def _lattice(pts):
    cells = np.floor(pts)
    return cells, np.max(np.abs(cells), axis=1)


def _ternary_exponent(c, linf):
    p = linf + c["p_offset"]
    if np.any(p > MAX_TERNARY_EXPONENT):
        raise DomainX(f"|l|_inf too large: oscillation scale 3**-{int(np.max(p))} is below double precision")
    return p


def evaluate_many(spec: PotentialSpec, points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != spec.d:
        raise DomainX(f"points must have shape (n, {spec.d})")
    if not np.all(np.isfinite(pts)):
        raise DomainX("points must be finite")
    c = spec._compiled
    kind = spec.kind
    if kind == "Constant":
        return np.full(pts.shape[0], c["c"])
    if kind == "ExpSquare":
        with np.errstate(over="ignore"):
            return np.exp(np.sum(pts * pts, axis=1))
    if kind == "Custom":
        return np.asarray(c["fn"](pts), dtype=float).reshape(pts.shape[0])
    cells, linf = _lattice(pts)
    n_l = c["N"](linf)
    if kind == "CosineProduct":
        m = c["m"](linf)
        return n_l * np.prod(1 - np.cos(m[:, None] * pts), axis=1)
    if kind == "MolchanovLattice":
        m = np.rint(c["m"](linf))
        r = c["r"](linf)
        if np.any(m < 1):
            raise BadParameter("m(l) must be a positive integer")
        if np.any((r <= 0) | (r >= 0.5)):
            raise BadParameter("r(l) must lie in (0, 1/2)")
        y = m[:, None] * pts
        z = y - np.floor(y) - 0.5
        rho = np.sqrt(np.sum(z * z, axis=1)) / r
        if c["shape"] == "ball":
            s = (rho <= 0.5).astype(float)
        else:
            s = np.where(rho < 0.5, (1 - 4 * rho * rho), 0.0) ** c["power"]
        return n_l * s
    x1 = pts[:, 0] - cells[:, 0]
    if kind == "PsiLagr":
        p = linf + c["p_offset"]
        level = dyadic_level(x1)
        beta = 2.0 ** (-c["alpha"] * level)
        return np.where(level > 0, n_l * theta(p * x1, beta), 0.0)
    p = _ternary_exponent(c, linf)
    level = cantor_level(x1)
    if kind == "VAlpha":
        beta = 3.0 ** (-c["alpha"] * level)
        amp = n_l
    else:
        beta = c["psi_K"] * 3.0 ** (-(level + 1) * c["psi_exp"])
        amp = n_l * 3.0 ** (-c["alpha"] * level) / beta
    return np.where(level > 0, amp * theta(3.0 ** p * x1, beta), 0.0)


def evaluate(spec: PotentialSpec, x) -> float:
    return float(evaluate_many(spec, np.asarray(x, dtype=float)[None, :])[0])


def support_fraction(spec: PotentialSpec, l) -> float:
    """Fraction of ``Q_1(l)`` covered by the support of a lattice potential."""
    if spec.kind != "MolchanovLattice":
        raise WrongKind("support_fraction applies to MolchanovLattice only")
    d = spec.d
    r = float(spec._compiled["r"](max(abs(int(v)) for v in l)))
    return r ** d * unit_ball_volume(d) / 2 ** d


def shape_integral(spec: PotentialSpec) -> float:
    """Integral of the bump ``S`` over ``R^d``."""
    if spec.kind != "MolchanovLattice":
        raise WrongKind("shape_integral applies to MolchanovLattice only")
    d = spec.d
    c = spec._compiled
    vol = unit_ball_volume(d) / 2 ** d
    if c["shape"] == "ball":
        return vol
    area = 2 * math.pi ** (d / 2) / math.gamma(d / 2)
    return area / 2 ** (d + 1) * float(sp.beta(d / 2, c["power"] + 1))


def oscillation_period(spec: PotentialSpec, l) -> float | None:
    """Smallest feature length of the potential on ``Q_1(l)`` (None if smooth)."""
    c = spec._compiled
    linf = max(abs(int(v)) for v in l)
    if spec.kind in ("VAlpha", "VPsi"):
        return 3.0 ** -(linf + c["p_offset"])
    if spec.kind == "PsiLagr":
        return 1.0 / (linf + c["p_offset"])
    if spec.kind == "CosineProduct":
        return 2 * math.pi / float(c["m"](linf))
    if spec.kind == "MolchanovLattice":
        return float(c["r"](linf)) / max(1.0, float(np.rint(c["m"](linf))))
    return None


class ExactDistribution(NamedTuple):
    space: DiscreteMeasureSpace
    truncation: float


def exact_distribution(spec: PotentialSpec, lo, hi) -> ExactDistribution | None:
    """Exact atoms ``(value, measure)`` of the potential restricted to a box.

    Available for piecewise-constant kinds (Constant, VAlpha, VPsi, PsiLagr);
    returns ``None`` otherwise.  Gaps deeper than a fixed level are dropped
    and the dropped positive measure is bounded by ``truncation``.
    """
    if spec.kind not in ("Constant", "VAlpha", "VPsi", "PsiLagr"):
        return None
    lo = [float(v) for v in lo]
    hi = [float(v) for v in hi]
    if len(lo) != spec.d or len(hi) != spec.d or any(not b > a for a, b in zip(lo, hi)):
        raise DomainX("box corners must be ordered and match the dimension")
    c = spec._compiled
    if spec.kind == "Constant":
        vol = math.prod(b - a for a, b in zip(lo, hi))
        return ExactDistribution(DiscreteMeasureSpace([c["c"]], [vol]), 0.0)
    ranges = [range(math.floor(a), math.ceil(b)) for a, b in zip(lo, hi)]
    values: list[float] = []
    weights: list[float] = []
    trunc = 0.0
    for cell in itertools.product(*ranges):
        lens = [min(b, k + 1) - max(a, k) for a, b, k in zip(lo, hi, cell)]
        if any(ln <= 0 for ln in lens):
            continue
        a1 = max(lo[0], cell[0]) - cell[0]
        b1 = min(hi[0], cell[0] + 1) - cell[0]
        transverse = math.prod(lens[1:])
        linf = max(abs(k) for k in cell)
        atoms, t = _profile_1d(spec.kind, c, linf, a1, b1)
        trunc += t * transverse
        for v, meas in atoms:
            if meas * transverse > 0:
                values.append(v)
                weights.append(meas * transverse)
    return ExactDistribution(DiscreteMeasureSpace(values, weights), trunc)


def _profile_1d(kind, c, linf, a, b):
    n_amp = float(c["N"](linf))
    span = b - a
    if kind == "PsiLagr":
        S = linf + c["p_offset"]
        pos_by_value: list[tuple[float, float]] = []
        pos = 0.0
        n_hi = min(int(dyadic_level(np.array(a))) or 60, 60) if a > 0 else 60
        for n in range(max(int(dyadic_level(np.array(b))), 1), n_hi + 1):
            s0, s1 = max(a, 2.0 ** -n), min(b, 2.0 ** (1 - n))
            if s1 > s0:
                pos += theta_measure(S, 2.0 ** (-c["alpha"] * n), s0, s1)
        pos_by_value.append((n_amp, pos))
        return pos_by_value + [(0.0, max(span - pos, 0.0))], 2.0 ** -60
    p = linf + c["p_offset"]
    if p > MAX_TERNARY_EXPONENT:
        raise DomainX(f"|l|_inf too large for ternary oscillation 3**-{p}")
    S = 3.0 ** p
    atoms = []
    total_pos = 0.0
    remaining = None
    last_level = 0
    for n, starts, ends in _cantor_gap_arrays(a, b, EXACT_DEPTH):
        if n is None:
            remaining = starts
            break
        last_level = n
        if starts.size == 0:
            continue
        beta = _level_beta(kind, c, n)
        meas = float(np.sum(theta_measure(S, beta, np.maximum(starts, a), np.minimum(ends, b))))
        if meas > 0:
            atoms.append((_level_value(kind, c, n, n_amp), meas))
            total_pos += meas
    trunc = 0.0
    if remaining is not None and remaining.size:
        count = remaining.size
        for n in range(last_level + 1, last_level + 400):
            gaps = count * 2.0 ** (n - last_level - 1)
            term = gaps * _level_beta(kind, c, n) * (3.0 ** -n + 2.0 / S)
            trunc += min(term, gaps * 3.0 ** -n)
            if term < 1e-300:
                break
    atoms.append((0.0, max(span - total_pos, 0.0)))
    return atoms, trunc


def _level_beta(kind, c, n):
    if kind == "VAlpha":
        return 3.0 ** (-c["alpha"] * n)
    return c["psi_K"] * 3.0 ** (-(n + 1) * c["psi_exp"])


def _level_value(kind, c, n, n_amp):
    if kind == "VAlpha":
        return n_amp
    return n_amp * 3.0 ** (-c["alpha"] * n) / _level_beta(kind, c, n)


# ---------------------------------------------------------------------------
# dense box systems


@dataclass(frozen=True)
class DenseSystemSpec:
    """Boxes ``D_n`` inside the unit cube.

    ``CantorAdjacent`` (dimension 1) uses the middle-third gaps of level n;
    ``ProductWithCube`` multiplies them by ``[0, 1]**(dimension-1)``;
    ``Custom`` lists the boxes of each level explicitly (level 1 first).
    ``parity`` keeps only odd or only even levels, which thins the system.
    """

    generator: str = "CantorAdjacent"
    dimension: int = 1
    custom_levels: tuple = ()
    parity: str | None = None

    def __post_init__(self):
        if self.generator not in ("CantorAdjacent", "ProductWithCube", "Custom"):
            raise UnknownKind(f"unknown dense-system generator {self.generator!r}")
        if self.generator == "CantorAdjacent" and self.dimension != 1:
            raise BadParameter("CantorAdjacent is one-dimensional; use ProductWithCube")
        if self.parity not in (None, "odd", "even"):
            raise BadParameter("parity must be None, 'odd' or 'even'")

    def boxes(self, j: int, lo=None, hi=None) -> list[tuple[tuple, tuple]]:
        """Boxes of level ``j`` meeting the query box ``[lo, hi]`` (all if omitted)."""
        if j < 1:
            return []
        if (self.parity == "odd" and j % 2 == 0) or (self.parity == "even" and j % 2 == 1):
            return []
        d = self.dimension
        lo = [Fraction(0)] * d if lo is None else list(lo)
        hi = [Fraction(1)] * d if hi is None else list(hi)
        if self.generator == "Custom":
            if j > len(self.custom_levels):
                return []
            out = []
            for blo, bhi in self.custom_levels[j - 1]:
                if all(bl <= qh and bh >= ql for bl, bh, ql, qh in zip(blo, bhi, lo, hi)):
                    out.append((tuple(blo), tuple(bhi)))
            return out
        if any(h < 0 or l > 1 for l, h in zip(lo[1:], hi[1:])):
            return []
        rest_lo = (Fraction(0),) * (d - 1)
        rest_hi = (Fraction(1),) * (d - 1)
        return [((a,) + rest_lo, (b,) + rest_hi) for a, b in _cantor_gaps_exact(j, lo[0], hi[0])]


def thinned_cantor(dimension: int = 1) -> DenseSystemSpec:
    """Cantor gaps of odd levels only."""
    gen = "CantorAdjacent" if dimension == 1 else "ProductWithCube"
    return DenseSystemSpec(gen, dimension, parity="odd")


def madic_cells_in_system(system: DenseSystemSpec, n: int, m: int) -> list[tuple[int, ...]]:
    """Index tuples of the m-adic cells of side ``m**-n`` contained in some ``D_j``, ``j <= n``."""
    scale = m ** n
    found = set()
    for j in range(1, n + 1):
        for blo, bhi in system.boxes(j):
            ranges = []
            for a, b in zip(blo, bhi):
                k0 = math.ceil(Fraction(a) * scale)
                k1 = math.floor(Fraction(b) * scale)
                ranges.append(range(max(k0, 0), min(k1, scale)))
            found.update(itertools.product(*ranges))
    if not found:
        raise EmptyXi(f"no cell of side {m}**-{n} lies inside the system up to level {n}")
    return sorted(found)


__all__ = [
    "GrowthLaw", "PotentialSpec", "DenseSystemSpec", "ExactDistribution",
    "cantor_adjacent", "cantor_level", "dyadic_level", "theta", "theta_measure", "f_delta",
    "evaluate", "evaluate_many", "support_fraction", "shape_integral", "oscillation_period",
    "exact_distribution", "thinned_cantor", "madic_cells_in_system", "unit_ball_volume",
]
