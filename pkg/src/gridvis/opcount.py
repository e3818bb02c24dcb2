"""Pure-Python transport sweep with arithmetic-operation accounting.

:func:`reference_transport` mirrors the compiled radial kernel statement for
statement. Run on plain floats it is a slow reference implementation; run on
:class:`Counted` values it tallies every floating-point add, subtract,
multiply and divide that touches visibility or occupancy data. Index
bookkeeping (loop counters, neighbour addressing) is integer work and is
not counted.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from ._kernels import QUADRANTS
from .grid import OccupancyGrid
from .visibility import VisParams


class Counted:
    """A float that reports each arithmetic operation to a shared Counter."""

    __slots__ = ("v", "tally")

    def __init__(self, v: float, tally: Counter):
        self.v = float(v)
        self.tally = tally

    def _wrap(self, v, op):
        self.tally[op] += 1
        return Counted(v, self.tally)

    @staticmethod
    def _val(o):
        return o.v if isinstance(o, Counted) else o

    def __add__(self, o):
        return self._wrap(self.v + self._val(o), "add")

    __radd__ = __add__

    def __sub__(self, o):
        return self._wrap(self.v - self._val(o), "sub")

    def __rsub__(self, o):
        return self._wrap(self._val(o) - self.v, "sub")

    def __mul__(self, o):
        return self._wrap(self.v * self._val(o), "mul")

    __rmul__ = __mul__

    def __truediv__(self, o):
        return self._wrap(self.v / self._val(o), "div")

    def __rtruediv__(self, o):
        return self._wrap(self._val(o) / self.v, "div")

    def __lt__(self, o):
        return self.v < self._val(o)

    def __gt__(self, o):
        return self.v > self._val(o)

    def __eq__(self, o):
        return self.v == self._val(o)

    __hash__ = None

    def __float__(self):
        return self.v


def _blend(a, diag, c):
    v = (1.0 - c) * a + c * diag
    lo, hi = (a, diag) if a < diag else (diag, a)
    if v < lo:
        return lo
    if v > hi:
        return hi
    return v


def reference_transport(occ, lx: int, ly: int, light, alpha, ryx, rxy, on_cell=None):
    """Radial sweep over nested lists ``occ[y][x]``; returns ``out[y][x]``.

    ``on_cell`` (if given) is called after each finalised cell.
    """
    ny, nx = len(occ), len(occ[0])
    out = [[None] * nx for _ in range(ny)]
    for sx, sy, skip_i0, skip_j0 in QUADRANTS:
        mx = nx - lx if sx > 0 else lx + 1
        my = ny - ly if sy > 0 else ly + 1
        for j in range(my):
            if skip_j0 and j == 0:
                continue
            py = ly + sy * j
            row, prev = out[py], out[py - sy] if j else None
            for i in range(mx):
                if skip_i0 and i == 0:
                    continue
                px = lx + sx * i
                if i == 0 and j == 0:
                    v = light
                elif i == 0:
                    v = prev[px]
                elif j == 0:
                    v = row[px - sx]
                else:
                    num = j * ryx
                    den = float(i)
                    diag = prev[px - sx]
                    if num < den:
                        c = num / den
                        v = _blend(row[px - sx], diag, c)
                    elif num == den:
                        v = diag
                    else:
                        c = (den * rxy) / j
                        if c > 1.0:
                            c = 1.0
                        v = _blend(prev[px], diag, c)
                row[px] = v * (1.0 - occ[py][px]) * alpha
                if on_cell is not None:
                    on_cell()
    return out


@dataclass(frozen=True)
class OpCount:
    cells: int
    totals: dict
    max_per_cell: int
    mean_per_cell: float
    values: np.ndarray

    @property
    def total(self) -> int:
        return sum(self.totals.values())


def count_operations(grid: OccupancyGrid, source, params: VisParams | None = None) -> OpCount:
    """Run the instrumented sweep and report per-cell operation counts."""
    params = params or VisParams()
    s = grid.require_inside(source, "source")
    tally: Counter = Counter()
    occ = [[Counted(v, tally) for v in row] for row in grid.cells.tolist()]
    per_cell = []
    last = [0]

    def on_cell():
        now = sum(tally.values())
        per_cell.append(now - last[0])
        last[0] = now

    out = reference_transport(
        occ, s.x, s.y,
        Counted(params.light_strength, tally), Counted(params.alpha, tally),
        Counted(params.dy / params.dx, tally), Counted(params.dx / params.dy, tally),
        on_cell,
    )
    values = np.array([[float(v) for v in row] for row in out])
    return OpCount(
        cells=len(per_cell),
        totals=dict(tally),
        max_per_cell=max(per_cell),
        mean_per_cell=sum(per_cell) / len(per_cell),
        values=values,
    )
