"""Discrete sizing space: three widths and a length on a 5 nm grid plus two vt classes.

A design is stored as six integer indices.  The real-valued encoding used by
the model-based optimizers maps each geometric index to ``[0, 1]`` and each
vt class index ``{0, 1, 2}`` to ``{0, 0.5, 1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ..circuit_model import VT_CLASSES, CellGeometry, SramArrayConfig

GRID = 5e-9
GEOM_FIELDS = ("w_pd", "w_pu", "w_pg", "l")
FIELDS = GEOM_FIELDS + ("vt_class_nmos", "vt_class_pmos")


@dataclass(frozen=True, order=True)
class DesignPoint:
    """Grid-aligned cell sizing.  Lengths in meters."""

    w_pd: float
    w_pu: float
    w_pg: float
    l: float
    vt_class_nmos: str = "vtg"
    vt_class_pmos: str = "vtg"

    def key(self) -> tuple:
        # nanometre integers; immune to float formatting
        return tuple(int(round(getattr(self, f) / 1e-9)) for f in GEOM_FIELDS) + (
            self.vt_class_nmos, self.vt_class_pmos)

    def to_dict(self) -> dict:
        return {f: getattr(self, f) for f in FIELDS}

    def apply(self, config: SramArrayConfig) -> SramArrayConfig:
        return config.with_cell(replace(config.cell, **self.to_dict()))


class DesignSpace:
    """All grid points within ``[lo, hi]`` times the nominal geometry."""

    def __init__(self, nominal: CellGeometry = CellGeometry(), lo: float = 0.5, hi: float = 1.5,
                 grid: float = GRID):
        self.nominal = nominal
        self.grid = grid
        self.levels: list[np.ndarray] = []
        for f in GEOM_FIELDS:
            v = getattr(nominal, f)
            a = math.ceil(lo * v / grid - 1e-9)
            b = math.floor(hi * v / grid + 1e-9)
            if b < a:
                raise ValueError(f"{f}: no grid point in range")
            self.levels.append(np.arange(a, b + 1) * grid)
        self.sizes = np.array([len(x) for x in self.levels] + [len(VT_CLASSES)] * 2)
        self.dim = 6

    @property
    def n_points(self) -> int:
        return int(np.prod(self.sizes))

    # index <-> point -------------------------------------------------------
    def point(self, idx) -> DesignPoint:
        idx = [int(i) for i in idx]
        geo = [float(self.levels[j][idx[j]]) for j in range(4)]
        return DesignPoint(*geo, VT_CLASSES[idx[4]], VT_CLASSES[idx[5]])

    def index(self, p: DesignPoint) -> np.ndarray:
        out = []
        for j, f in enumerate(GEOM_FIELDS):
            k = int(round((getattr(p, f) - self.levels[j][0]) / self.grid))
            if not (0 <= k < len(self.levels[j])) or abs(self.levels[j][k] - getattr(p, f)) > 1e-12:
                raise ValueError(f"{f}={getattr(p, f)!r} is off the design grid")
            out.append(k)
        out += [VT_CLASSES.index(p.vt_class_nmos), VT_CLASSES.index(p.vt_class_pmos)]
        return np.array(out, dtype=int)

    def contains(self, p: DesignPoint) -> bool:
        try:
            self.index(p)
        except ValueError:
            return False
        return True

    def nominal_index(self) -> np.ndarray:
        """Grid point closest to the nominal geometry."""
        idx = [int(np.argmin(np.abs(self.levels[j] - getattr(self.nominal, f))))
               for j, f in enumerate(GEOM_FIELDS)]
        idx += [VT_CLASSES.index(self.nominal.vt_class_nmos), VT_CLASSES.index(self.nominal.vt_class_pmos)]
        return np.array(idx, dtype=int)

    # continuous encoding ---------------------------------------------------
    def encode(self, idx) -> np.ndarray:
        idx = np.atleast_2d(np.asarray(idx, dtype=float))
        return idx / (self.sizes - 1)

    def snap(self, u) -> np.ndarray:
        """Nearest grid indices for points of the unit cube."""
        u = np.clip(np.atleast_2d(np.asarray(u, dtype=float)), 0.0, 1.0)
        return np.rint(u * (self.sizes - 1)).astype(int)

    def random_indices(self, gen: np.random.Generator, n: int) -> np.ndarray:
        return np.column_stack([gen.integers(0, s, n) for s in self.sizes])

    def neighbors(self, idx) -> np.ndarray:
        """All points one grid step (or one vt class) away."""
        idx = np.asarray(idx, dtype=int)
        out = []
        for j in range(self.dim):
            if j < 4:
                moves = (idx[j] - 1, idx[j] + 1)
            else:
                moves = tuple(c for c in range(len(VT_CLASSES)) if c != idx[j])
            for v in moves:
                if 0 <= v < self.sizes[j]:
                    n = idx.copy()
                    n[j] = v
                    out.append(n)
        return np.array(out, dtype=int)
