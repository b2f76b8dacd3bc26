"""Sampled scalar and vector fields on boxes, plus the SGF1 file format.

Cube grids sample at cell centres ``origin + (i + 1/2) * h``; torus grids
sample at ``origin + i * h`` so that the FFT grid starts at the origin.
In both cases every sample represents a cell of volume ``prod(spacing)``.

SGF1 layout: one JSON header line
``{"magic": "SGF1", "d", "dims", "origin", "spacing", "topology", "fields"}``
followed by little-endian float64 samples in row-major order, one block per
component.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IoFailure, ShapeMismatch, ValidationError, WrongTopology


class Topology(enum.Enum):
    CUBE = "cube"
    TORUS = "torus"


@dataclass(frozen=True, eq=False)
class GridFunction:
    dims: tuple[int, ...]
    origin: tuple[float, ...]
    spacing: tuple[float, ...]
    values: np.ndarray
    topology: Topology = Topology.CUBE

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        origin = tuple(float(o) for o in self.origin)
        spacing = tuple(float(h) for h in self.spacing)
        if not (len(dims) == len(origin) == len(spacing)) or not dims:
            raise ShapeMismatch("dims, origin and spacing must have the same positive length")
        if any(n < 1 for n in dims) or any(not h > 0 for h in spacing):
            raise ValidationError("dims must be positive and spacing strictly positive")
        vals = np.asarray(self.values, dtype=float)
        if vals.size != math.prod(dims):
            raise ShapeMismatch(f"{vals.size} samples for dims {dims}")
        vals = vals.reshape(dims)
        topology = Topology(self.topology)
        if topology is Topology.TORUS and len(set(spacing)) != 1:
            raise WrongTopology("torus grids need equal spacing on every axis")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "topology", topology)

    @classmethod
    def sample(cls, func, corner, side: float, resolution: int, topology=Topology.CUBE) -> GridFunction:
        """Sample ``func`` (taking an ``(n, d)`` array of points) on a cube of the given side."""
        d = len(corner)
        h = side / resolution
        g = cls((resolution,) * d, tuple(corner), (h,) * d, np.zeros((resolution,) * d), topology)
        vals = np.asarray(func(g.points()), dtype=float)
        return g.with_values(vals.reshape(g.dims))

    @property
    def d(self) -> int:
        return len(self.dims)

    @property
    def cell_volume(self) -> float:
        return math.prod(self.spacing)

    @property
    def extent(self) -> tuple[float, ...]:
        return tuple(n * h for n, h in zip(self.dims, self.spacing))

    def axes(self) -> list[np.ndarray]:
        shift = 0.5 if self.topology is Topology.CUBE else 0.0
        return [o + (np.arange(n) + shift) * h for n, o, h in zip(self.dims, self.origin, self.spacing)]

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*self.axes(), indexing="ij")

    def points(self) -> np.ndarray:
        return np.stack([m.ravel() for m in self.mesh()], axis=1)

    def with_values(self, values) -> GridFunction:
        return GridFunction(self.dims, self.origin, self.spacing, values, self.topology)

    def as_torus(self) -> GridFunction:
        """Reinterpret cell-centred cube samples as a periodic grid at the same points."""
        if self.topology is Topology.TORUS:
            return self
        origin = tuple(o + h / 2 for o, h in zip(self.origin, self.spacing))
        return GridFunction(self.dims, origin, self.spacing, self.values, Topology.TORUS)

    def integral(self) -> float:
        return float(np.sum(self.values)) * self.cell_volume

    def mean(self) -> float:
        return float(np.mean(self.values))

    def lp_norm(self, p: float) -> float:
        return _lp(np.abs(self.values), p, self.cell_volume)

    def same_geometry(self, other: GridFunction) -> bool:
        return (self.dims == other.dims and self.origin == other.origin
                and self.spacing == other.spacing and self.topology is other.topology)


def _lp(absvals: np.ndarray, p: float, cell: float) -> float:
    if math.isinf(p):
        return float(absvals.max()) if absvals.size else 0.0
    top = float(absvals.max()) if absvals.size else 0.0
    if top == 0:
        return 0.0
    return top * float(np.sum((absvals / top) ** p) * cell) ** (1.0 / p)


@dataclass(frozen=True, eq=False)
class VectorFieldGrid:
    components: tuple[GridFunction, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise ShapeMismatch("a vector field needs at least one component")
        first = comps[0]
        if any(not first.same_geometry(c) for c in comps[1:]):
            raise ShapeMismatch("components must share one grid")
        if len(comps) != first.d:
            raise ShapeMismatch(f"{len(comps)} components on a {first.d}-dimensional grid")
        object.__setattr__(self, "components", comps)

    @property
    def grid(self) -> GridFunction:
        return self.components[0]

    @property
    def d(self) -> int:
        return len(self.components)

    def as_array(self) -> np.ndarray:
        return np.stack([c.values for c in self.components])

    def magnitude(self) -> np.ndarray:
        return np.sqrt(np.sum(self.as_array() ** 2, axis=0))

    def lp_norm(self, p: float) -> float:
        return _lp(self.magnitude(), p, self.grid.cell_volume)


def write_sgf(path, field) -> None:
    grid = field.grid if isinstance(field, VectorFieldGrid) else field
    comps = field.components if isinstance(field, VectorFieldGrid) else (field,)
    header = {
        "magic": "SGF1",
        "d": grid.d,
        "dims": list(grid.dims),
        "origin": list(grid.origin),
        "spacing": list(grid.spacing),
        "topology": grid.topology.value,
        "fields": len(comps),
    }
    try:
        with open(path, "wb") as fh:
            fh.write(json.dumps(header).encode() + b"\n")
            for c in comps:
                fh.write(np.ascontiguousarray(c.values, dtype="<f8").tobytes())
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def read_sgf(path):
    """Read an SGF1 file; returns a ``GridFunction`` or a ``VectorFieldGrid``."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    nl = raw.find(b"\n")
    if nl < 0:
        raise IoFailure("missing SGF1 header line")
    try:
        header = json.loads(raw[:nl])
    except json.JSONDecodeError as exc:
        raise IoFailure(f"bad SGF1 header: {exc}") from exc
    if header.get("magic") != "SGF1":
        raise IoFailure("not an SGF1 file")
    dims = tuple(header["dims"])
    if len(dims) != header["d"]:
        raise IoFailure("header d does not match dims")
    fields = int(header["fields"])
    if fields not in (1, header["d"]):
        raise IoFailure("fields must be 1 or d")
    data = np.frombuffer(raw[nl + 1:], dtype="<f8")
    n = math.prod(dims)
    if data.size != n * fields:
        raise IoFailure(f"expected {n * fields} samples, found {data.size}")
    topo = Topology(header["topology"])
    comps = [
        GridFunction(dims, header["origin"], header["spacing"], data[k * n:(k + 1) * n].astype(float), topo)
        for k in range(fields)
    ]
    if fields == 1:
        return comps[0]
    return VectorFieldGrid(tuple(comps))
