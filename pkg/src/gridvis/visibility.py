"""Visibility fields by upwind transport over an occupancy grid.

A source emits ``light_strength``; the value is carried outward along the
ray field with a first-order upwind step and multiplied, cell by cell, by
the transparency ``1 - occupancy`` and the decay factor ``alpha``. One pass
over the grid, four quadrant sweeps, constant work per cell.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .grid import GridPoint, OccupancyGrid, to_pgm_bytes
from .oracle import BinaryMask

FIELD_MAGIC = b"GVFLD64\x00"

_NO_TABLE = np.zeros((1, 1))


class FlowSignWarning(UserWarning):
    """A tabulated flow points back toward the source somewhere."""


@dataclass(frozen=True)
class VisParams:
    light_strength: float = 1.0
    alpha: float = 1.0
    dx: float = 1.0
    dy: float = 1.0
    threshold: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.light_strength <= 1.0:
            raise ValueError(f"light_strength must lie in [0, 1], got {self.light_strength}")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not (self.dx > 0 and self.dy > 0 and np.isfinite(self.dx) and np.isfinite(self.dy)):
            raise ValueError("dx and dy must be positive and finite")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError(f"threshold must lie in (0, 1), got {self.threshold}")


@dataclass(frozen=True, eq=False)
class VisibilityField:
    """Per-cell visibility values ``values[y, x]``.

    ``source`` and ``params`` are ``None`` for aggregates built by
    :func:`intersect` / :func:`union`.
    """

    values: np.ndarray
    source: GridPoint | None = None
    params: VisParams | None = None

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def __getitem__(self, point) -> float:
        x, y = point
        return float(self.values[y, x])

    def to_flat_bytes(self) -> bytes:
        payload = np.ascontiguousarray(self.values, dtype="<f8").tobytes()
        return FIELD_MAGIC + struct.pack("<II", self.width, self.height) + payload

    @classmethod
    def from_flat_bytes(cls, data: bytes) -> VisibilityField:
        if data[:8] != FIELD_MAGIC:
            raise ValueError("not a flat binary visibility field")
        nx, ny = struct.unpack("<II", data[8:16])
        values = np.frombuffer(data[16:], dtype="<f8")
        if values.size != nx * ny:
            raise ValueError(f"field payload has {values.size} values, expected {nx * ny}")
        return cls(values.reshape(ny, nx).astype(np.float64))

    def to_pgm_bytes(self) -> bytes:
        return to_pgm_bytes(np.rint(np.clip(self.values, 0.0, 1.0) * 255.0))

    def save(self, path) -> None:
        """Write PGM (``.pgm`` suffix) or the flat little-endian float64 format."""
        path = Path(path)
        path.write_bytes(self.to_pgm_bytes() if path.suffix.lower() == ".pgm" else self.to_flat_bytes())

    @classmethod
    def load(cls, path) -> VisibilityField:
        return cls.from_flat_bytes(Path(path).read_bytes())


def _field(values: np.ndarray, source=None, params=None) -> VisibilityField:
    values.setflags(write=False)
    return VisibilityField(values, source, params)


@dataclass(frozen=True, eq=False)
class FlowFieldSpec:
    """Direction field driving the transport.

    ``radial``: straight rays from the source. ``scaled-radial``: the slope of
    the x-swept update is ``y / (k * x)`` in source-relative offsets, which
    bends rays into curves. ``tabulated``: arbitrary per-cell components
    ``a`` (x) and ``b`` (y), indexed ``[y, x]``.
    """

    kind: str = "radial"
    k: float = 1.0
    a: np.ndarray | None = field(default=None, repr=False)
    b: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind == "radial":
            return
        if self.kind == "scaled-radial":
            if not (self.k > 0 and np.isfinite(self.k)):
                raise ValueError(f"scaled-radial k must be positive, got {self.k}")
            return
        if self.kind != "tabulated":
            raise ValueError(f"unknown flow kind {self.kind!r}")
        if self.a is None or self.b is None:
            raise ValueError("tabulated flow needs both a and b components")
        a = np.array(self.a, dtype=np.float64)
        b = np.array(self.b, dtype=np.float64)
        if a.shape != b.shape or a.ndim != 2:
            raise ValueError("tabulated components must be 2D arrays of equal shape")
        bad = ~(np.isfinite(a) & np.isfinite(b)) | ((a == 0) & (b == 0))
        if bad.any():
            y, x = np.argwhere(bad)[0]
            raise ValueError(
                f"flow component at cell ({x}, {y}) is zero or non-finite; no CFL-stable update exists there"
            )
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def radial(cls) -> FlowFieldSpec:
        return cls("radial")

    @classmethod
    def scaled_radial(cls, k: float) -> FlowFieldSpec:
        return cls("scaled-radial", k=float(k))

    @classmethod
    def tabulated(cls, a, b) -> FlowFieldSpec:
        return cls("tabulated", a=a, b=b)

    @classmethod
    def parse(cls, text: str) -> FlowFieldSpec:
        """``"radial"`` or ``"scaled:K"``."""
        if text == "radial":
            return cls.radial()
        if text.startswith("scaled:"):
            return cls.scaled_radial(float(text.split(":", 1)[1]))
        raise ValueError(f"unknown flow {text!r}; expected 'radial' or 'scaled:K'")

    @classmethod
    def radial_table(cls, width: int, height: int, source) -> FlowFieldSpec:
        """Tabulated unit ray directions around ``source`` (source cell points +x)."""
        lx, ly = source
        yy, xx = np.mgrid[0:height, 0:width]
        ox = (xx - lx).astype(np.float64)
        oy = (yy - ly).astype(np.float64)
        r = np.hypot(ox, oy)
        r[r == 0] = 1.0
        a, b = ox / r, oy / r
        a[ly, lx] = 1.0
        return cls.tabulated(a, b)


def _check_source(grid: OccupancyGrid, source) -> GridPoint:
    return grid.require_inside(source, "source")


def _run(grid, source, params, mode, k=1.0, tab_a=_NO_TABLE, tab_b=_NO_TABLE) -> VisibilityField:
    values = _kernels.transport(
        grid.cells, source.x, source.y,
        float(params.light_strength), float(params.alpha),
        params.dy / params.dx, params.dx / params.dy,
        mode, float(k), tab_a, tab_b,
    )
    return _field(values, source, params)


def compute_visibility(grid: OccupancyGrid, source, params: VisParams | None = None) -> VisibilityField:
    """Visibility of every cell from ``source`` along straight rays."""
    params = params or VisParams()
    source = _check_source(grid, source)
    return _run(grid, source, params, _kernels.RADIAL)


def _flag_signs(flow: FlowFieldSpec, source: GridPoint) -> None:
    ny, nx = flow.a.shape
    yy, xx = np.mgrid[0:ny, 0:nx]
    ox = xx - source.x
    oy = yy - source.y
    wrong = ((ox * flow.a) < 0) | ((oy * flow.b) < 0)
    if wrong.any():
        y, x = np.argwhere(wrong)[0]
        warnings.warn(
            f"{int(wrong.sum())} cells have flow components pointing toward the source "
            f"(first at ({x}, {y})); their magnitudes are used",
            FlowSignWarning,
            stacklevel=3,
        )


def compute_visibility_curvilinear(grid: OccupancyGrid, source, flow: FlowFieldSpec,
                                   params: VisParams | None = None) -> VisibilityField:
    """Visibility along the curves traced by ``flow``.

    Per cell the sweep axis is the one whose Courant number is <= 1, so the
    step stays CFL-stable wherever the flow is defined.
    """
    params = params or VisParams()
    source = _check_source(grid, source)
    if flow.kind == "radial":
        return _run(grid, source, params, _kernels.RADIAL)
    if flow.kind == "scaled-radial":
        return _run(grid, source, params, _kernels.SCALED, k=flow.k)
    if flow.a.shape != grid.shape:
        raise ValueError(f"flow table shape {flow.a.shape} does not match grid shape {grid.shape}")
    _flag_signs(flow, source)
    return _run(grid, source, params, _kernels.TABULATED,
                tab_a=np.abs(flow.a), tab_b=np.abs(flow.b))


def binarize(field: VisibilityField, threshold: float | None = None) -> BinaryMask:
    """Cells with value >= ``threshold`` (defaults to the field's own params)."""
    if threshold is None:
        threshold = field.params.threshold if field.params is not None else 0.5
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    return BinaryMask(field.values >= threshold)


def _stack(fields) -> list[np.ndarray]:
    fields = list(fields)
    if not fields:
        raise ValueError("need at least one field")
    shape = fields[0].shape
    for f in fields[1:]:
        if f.shape != shape:
            raise ValueError(f"field shape {f.shape} does not match {shape}")
    return [f.values for f in fields]


def intersect(fields) -> VisibilityField:
    """Per-cell minimum: what every source sees."""
    arrays = _stack(fields)
    return _field(np.minimum.reduce(arrays) if len(arrays) > 1 else arrays[0].copy())


def union(fields) -> VisibilityField:
    """Per-cell maximum: what at least one source sees."""
    arrays = _stack(fields)
    return _field(np.maximum.reduce(arrays) if len(arrays) > 1 else arrays[0].copy())


def accumulate(acc: np.ndarray, field: VisibilityField) -> np.ndarray:
    """Fold ``field`` into the writable array ``acc`` in place (running union)."""
    if acc.shape != field.shape:
        raise ValueError(f"field shape {field.shape} does not match accumulator {acc.shape}")
    np.maximum(acc, field.values, out=acc)
    return acc


def constant_field(shape: tuple[int, int], value: float) -> VisibilityField:
    return _field(np.full(shape, float(value)))
