"""Ray-casting line-of-sight oracle.

This is the brute-force baseline: every query walks the grid cells pierced
by the segment joining two cell centres (supercover traversal) and stops at
the first blocking cell. It shares no code with the transport engine.

Endpoint convention: the start cell never blocks; the end cell blocks iff it
is occupied unless ``block_target=False``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .grid import GridPoint, OccupancyGrid, to_pgm_bytes

DEFAULT_BLOCK_THRESHOLD = 0.5

MASK_MAGIC = b"GVMASK8\x00"


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Boolean per-cell visibility, indexed ``[y, x]``."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=bool, copy=True)
        if values.ndim != 2:
            raise ValueError("mask must be 2D")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def __getitem__(self, point) -> bool:
        x, y = point
        return bool(self.values[y, x])

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return bool(np.array_equal(self.values, other.values))

    def count(self) -> int:
        return int(self.values.sum())

    def to_pgm_bytes(self) -> bytes:
        return to_pgm_bytes(self.values.astype(np.uint8) * 255)

    def to_flat_bytes(self) -> bytes:
        return MASK_MAGIC + struct.pack("<II", self.width, self.height) + self.values.astype(np.uint8).tobytes()

    @classmethod
    def from_flat_bytes(cls, data: bytes) -> BinaryMask:
        if data[:8] != MASK_MAGIC:
            raise ValueError("not a flat binary mask")
        nx, ny = struct.unpack("<II", data[8:16])
        payload = np.frombuffer(data[16:], dtype=np.uint8)
        if payload.size != nx * ny:
            raise ValueError(f"mask payload has {payload.size} bytes, expected {nx * ny}")
        return cls(payload.reshape(ny, nx) != 0)

    def save(self, path) -> None:
        path = Path(path)
        path.write_bytes(self.to_pgm_bytes() if path.suffix.lower() == ".pgm" else self.to_flat_bytes())


def _check_threshold(block_threshold: float) -> None:
    if not 0.0 < block_threshold <= 1.0:
        raise ValueError(f"block_threshold must lie in (0, 1], got {block_threshold}")


def line_of_sight(grid: OccupancyGrid, a, b, block_threshold: float = DEFAULT_BLOCK_THRESHOLD,
                  block_target: bool = True) -> bool:
    """True iff no cell with occupancy >= ``block_threshold`` lies on the segment a-b.

    Cells touched only at a lattice corner count as pierced.
    """
    _check_threshold(block_threshold)
    a = grid.require_inside(a, "a")
    b = grid.require_inside(b, "b")
    return bool(_kernels.segment_clear(grid.cells, a.x, a.y, b.x, b.y, float(block_threshold), block_target))


def raycast_map(grid: OccupancyGrid, source, block_threshold: float = DEFAULT_BLOCK_THRESHOLD) -> BinaryMask:
    """Cast one ray from ``source`` to every cell of the grid."""
    _check_threshold(block_threshold)
    s = grid.require_inside(source, "source")
    return BinaryMask(_kernels.raycast_all(grid.cells, s.x, s.y, float(block_threshold)))


def shadow_boundary(mask: BinaryMask) -> np.ndarray:
    """Cells whose value differs from at least one of their 8 neighbours."""
    v = mask.values
    ny, nx = v.shape
    padded = np.pad(v, 1, mode="edge")
    flip = np.zeros_like(v)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dx or dy:
                flip |= padded[1 + dy:1 + dy + ny, 1 + dx:1 + dx + nx] != v
    return flip


def dilate(mask: np.ndarray, radius: int = 1) -> np.ndarray:
    """Chebyshev dilation of a boolean array."""
    ny, nx = mask.shape
    padded = np.pad(mask, radius, mode="constant")
    out = np.zeros_like(mask)
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            out |= padded[radius + dy:radius + dy + ny, radius + dx:radius + dx + nx]
    return out


@dataclass(frozen=True)
class Agreement:
    """Comparison of an engine mask against the oracle mask on free cells."""

    free_cells: int
    disagreements: int
    off_boundary: int

    @property
    def fraction(self) -> float:
        return self.disagreements / self.free_cells if self.free_cells else 0.0


def compare_masks(candidate: BinaryMask, oracle: BinaryMask, grid: OccupancyGrid,
                  free_threshold: float = DEFAULT_BLOCK_THRESHOLD, radius: int = 1) -> Agreement:
    """Count free-cell disagreements and those farther than ``radius`` from an oracle flip."""
    free = grid.free_mask(free_threshold)
    diff = (candidate.values != oracle.values) & free
    near = dilate(shadow_boundary(oracle), radius)
    return Agreement(int(free.sum()), int(diff.sum()), int((diff & ~near).sum()))


__all__ = [
    "Agreement",
    "BinaryMask",
    "DEFAULT_BLOCK_THRESHOLD",
    "GridPoint",
    "compare_masks",
    "dilate",
    "line_of_sight",
    "raycast_map",
    "shadow_boundary",
]
