"""Occupancy grids: representation, PGM / plain-text I/O and procedural maps.

Conventions: ``cells[y, x]`` holds the occupancy probability of the cell in
column ``x`` and row ``y`` (1 = blocked). ``x`` grows to the right, ``y`` grows
downward and the origin is the top-left corner, as in image files.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

FREE_CHAR = "."
WALL_CHAR = "#"

MAP_KINDS = ("empty", "random-rects", "random-disks", "from-text-maze")


class GridParseError(ValueError):
    """Raised when a map file cannot be parsed."""


class DensityWarning(UserWarning):
    """A random map stopped short of its requested obstacle density."""


class GridPoint(NamedTuple):
    x: int
    y: int

    @classmethod
    def parse(cls, text: str) -> GridPoint:
        """Parse ``"X,Y"``."""
        parts = text.replace(" ", "").split(",")
        if len(parts) != 2:
            raise ValueError(f"expected 'X,Y', got {text!r}")
        return cls(int(parts[0]), int(parts[1]))


@dataclass(frozen=True, eq=False)
class OccupancyGrid:
    """Immutable rectangular grid of occupancy probabilities in [0, 1]."""

    cells: np.ndarray

    def __post_init__(self):
        cells = np.array(self.cells, dtype=np.float64, copy=True)
        if cells.ndim != 2 or cells.size == 0:
            raise ValueError(f"occupancy grid must be a non-empty 2D array, got shape {cells.shape}")
        if not np.all(np.isfinite(cells)):
            raise ValueError("occupancy values must be finite")
        if cells.min() < 0.0 or cells.max() > 1.0:
            raise ValueError("occupancy values must lie in [0, 1]")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @classmethod
    def empty(cls, width: int, height: int) -> OccupancyGrid:
        return cls(np.zeros((height, width)))

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells.shape

    def __getitem__(self, point) -> float:
        x, y = point
        return float(self.cells[y, x])

    def __eq__(self, other) -> bool:
        if not isinstance(other, OccupancyGrid):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.cells, other.cells))

    def contains(self, point) -> bool:
        x, y = point
        return 0 <= x < self.width and 0 <= y < self.height

    def require_inside(self, point, name: str = "point") -> GridPoint:
        """Return ``point`` as a GridPoint or raise ValueError if it is off-grid."""
        p = GridPoint(int(point[0]), int(point[1]))
        if not self.contains(p):
            raise ValueError(f"{name} {tuple(p)} lies outside the {self.width}x{self.height} grid")
        return p

    def occupied_fraction(self, threshold: float = 0.5) -> float:
        return float(np.mean(self.cells >= threshold))

    def free_mask(self, threshold: float = 0.5) -> np.ndarray:
        return self.cells < threshold


def complement(grid: OccupancyGrid) -> OccupancyGrid:
    """Per-cell transparency ``1 - occupancy``."""
    return OccupancyGrid(1.0 - grid.cells)


# ---------------------------------------------------------------------------
# File I/O
# ---------------------------------------------------------------------------

_PGM_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*([^\s#]+)")


def _pgm_header(data: bytes) -> tuple[bytes, int, int, int, int]:
    tokens = []
    pos = 0
    while len(tokens) < 4:
        m = _PGM_TOKEN.match(data, pos)
        if m is None:
            raise GridParseError(f"truncated PGM header at offset {pos}")
        tokens.append(m.group(1))
        pos = m.end()
    magic = tokens[0]
    if magic not in (b"P2", b"P5"):
        raise GridParseError(f"unsupported PGM magic {magic!r} at offset 0")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise GridParseError(f"non-integer PGM header field near offset {pos}") from exc
    if width <= 0 or height <= 0:
        raise GridParseError(f"PGM dimensions must be positive, got {width}x{height}")
    if not 0 < maxval < 65536:
        raise GridParseError(f"PGM maxval {maxval} out of range")
    return magic, width, height, maxval, pos


def parse_pgm(data: bytes) -> OccupancyGrid:
    """Decode P2 or P5 bytes; pixel ``p`` becomes occupancy ``1 - p / maxval``."""
    magic, width, height, maxval, pos = _pgm_header(data)
    n = width * height
    if magic == b"P5":
        pos += 1  # single whitespace byte after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
        payload = data[pos:pos + n * dtype.itemsize]
        if len(payload) < n * dtype.itemsize:
            raise GridParseError(
                f"P5 payload too short: expected {n * dtype.itemsize} bytes at offset {pos}, got {len(payload)}"
            )
        pixels = np.frombuffer(payload, dtype=dtype).astype(np.int64)
    else:
        body = re.sub(rb"#[^\n]*", b"", data[pos:]).split()
        if len(body) != n:
            raise GridParseError(f"P2 body has {len(body)} values, expected {n}")
        try:
            pixels = np.array([int(t) for t in body], dtype=np.int64)
        except ValueError as exc:
            raise GridParseError(f"non-integer P2 pixel value after offset {pos}") from exc
    if pixels.min() < 0 or pixels.max() > maxval:
        bad = int(np.flatnonzero((pixels < 0) | (pixels > maxval))[0])
        raise GridParseError(f"pixel {bad} (row {bad // width}) exceeds maxval {maxval}")
    occ = 1.0 - pixels.reshape(height, width) / maxval
    return OccupancyGrid(np.clip(occ, 0.0, 1.0))


def parse_text(text: str) -> OccupancyGrid:
    """Decode a plain-text map: ``.`` free, ``#`` wall, digit ``d`` -> ``d / 9``."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.rstrip("\r")
        if not line:
            continue
        row = []
        for col, ch in enumerate(line):
            if ch == FREE_CHAR:
                row.append(0.0)
            elif ch == WALL_CHAR:
                row.append(1.0)
            elif "0" <= ch <= "9":
                row.append(int(ch) / 9.0)
            else:
                raise GridParseError(f"line {lineno}, column {col + 1}: unexpected character {ch!r}")
        if rows and len(row) != len(rows[0]):
            raise GridParseError(
                f"line {lineno}: row length {len(row)} differs from first row length {len(rows[0])}"
            )
        rows.append(row)
    if not rows:
        raise GridParseError("line 1: empty map")
    return OccupancyGrid(np.array(rows))


def load_occupancy(path, format: str | None = None) -> OccupancyGrid:
    """Load a map from ``path``; format is ``"pgm"`` or ``"text"`` (inferred from suffix)."""
    path = Path(path)
    if format is None:
        format = "pgm" if path.suffix.lower() == ".pgm" else "text"
    if format == "pgm":
        return parse_pgm(path.read_bytes())
    if format in ("text", "plain-text", "txt"):
        return parse_text(path.read_text())
    raise ValueError(f"unknown map format {format!r}")


def to_pgm_bytes(values: np.ndarray) -> bytes:
    """Encode an array of 0..255 integers as binary P5."""
    pixels = np.asarray(values, dtype=np.uint8)
    height, width = pixels.shape
    return b"P5\n%d %d\n255\n" % (width, height) + pixels.tobytes()


def save_pgm(grid: OccupancyGrid, path) -> None:
    """Write ``grid`` as P5 with maxval 255 (free = white)."""
    pixels = np.rint((1.0 - grid.cells) * 255.0)
    Path(path).write_bytes(to_pgm_bytes(pixels))


def to_text(grid: OccupancyGrid) -> str:
    lines = []
    for row in grid.cells:
        chars = []
        for v in row:
            if v == 0.0:
                chars.append(FREE_CHAR)
            elif v == 1.0:
                chars.append(WALL_CHAR)
            else:
                chars.append(str(int(round(v * 9))))
        lines.append("".join(chars))
    return "\n".join(lines) + "\n"


def save_text(grid: OccupancyGrid, path) -> None:
    Path(path).write_text(to_text(grid))


# ---------------------------------------------------------------------------
# Procedural maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MapSpec:
    kind: str = "empty"
    seed: int = 0
    density: float = 0.2
    dimensions: tuple[int, int] = (100, 100)
    max_attempts: int = field(default=20000, compare=False)

    def __post_init__(self):
        if self.kind not in MAP_KINDS:
            raise ValueError(f"unknown map kind {self.kind!r}; expected one of {MAP_KINDS}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if not 0.0 <= self.density <= 1.0:
            raise ValueError("density must lie in [0, 1]")
        nx, ny = self.dimensions
        if nx <= 0 or ny <= 0:
            raise ValueError("dimensions must be positive")


def generate_map(spec: MapSpec) -> OccupancyGrid:
    """Build the map described by ``spec``; a pure function of the spec.

    Random kinds drop shapes that keep a one-cell margin from the border until
    the occupied fraction reaches ``spec.density`` or ``spec.max_attempts`` is
    exhausted; the latter emits a :class:`DensityWarning`.
    """
    nx, ny = spec.dimensions
    if spec.kind == "empty":
        return OccupancyGrid.empty(nx, ny)
    if spec.kind == "from-text-maze":
        return maze_map(nx, ny, seed=spec.seed)

    rng = np.random.default_rng(spec.seed)
    occ = np.zeros((ny, nx), dtype=bool)
    target = spec.density * nx * ny
    filled = 0
    yy, xx = np.mgrid[0:ny, 0:nx]
    max_side = max(3, min(nx, ny) // 8)
    for _ in range(spec.max_attempts):
        if filled >= target:
            break
        if spec.kind == "random-rects":
            w = int(rng.integers(2, max_side + 1))
            h = int(rng.integers(2, max_side + 1))
            if w > nx - 2 or h > ny - 2:
                continue
            x0 = int(rng.integers(1, nx - 1 - w + 1))
            y0 = int(rng.integers(1, ny - 1 - h + 1))
            occ[y0:y0 + h, x0:x0 + w] = True
        else:
            r = int(rng.integers(1, max(2, max_side // 2) + 1))
            if 2 * r + 1 > min(nx, ny) - 2:
                continue
            cx = int(rng.integers(1 + r, nx - 1 - r))
            cy = int(rng.integers(1 + r, ny - 1 - r))
            occ |= (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r
        filled = int(occ.sum())
    if filled < target and spec.density > 0:
        warnings.warn(
            f"{spec.kind} map reached density {filled / (nx * ny):.3f} < requested {spec.density}",
            DensityWarning,
            stacklevel=2,
        )
    return OccupancyGrid(occ.astype(np.float64))


def maze_map(width: int, height: int, seed: int = 0, pitch: int = 16, wall: int = 2) -> OccupancyGrid:
    """Perfect maze (randomised depth-first carving) with ``wall``-thick walls.

    Every free cell is connected to every other; columns/rows left over when
    the size is not a multiple of ``pitch`` are walled off.
    """
    mx = (width - wall) // pitch
    my = (height - wall) // pitch
    if mx < 1 or my < 1:
        raise ValueError(f"maze of {width}x{height} is too small for pitch {pitch}")
    rng = np.random.default_rng(seed)
    occ = np.ones((height, width))
    room = pitch - wall

    def carve(cx: int, cy: int, w: int = room, h: int = room, ox: int = 0, oy: int = 0):
        x0 = wall + cx * pitch + ox
        y0 = wall + cy * pitch + oy
        occ[y0:y0 + h, x0:x0 + w] = 0.0

    visited = np.zeros((my, mx), dtype=bool)
    stack = [(0, 0)]
    visited[0, 0] = True
    carve(0, 0)
    while stack:
        cx, cy = stack[-1]
        options = [
            (dx, dy) for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1))
            if 0 <= cx + dx < mx and 0 <= cy + dy < my and not visited[cy + dy, cx + dx]
        ]
        if not options:
            stack.pop()
            continue
        dx, dy = options[int(rng.integers(len(options)))]
        nx_, ny_ = cx + dx, cy + dy
        visited[ny_, nx_] = True
        carve(nx_, ny_)
        # knock down the wall between the two rooms
        carve(min(cx, nx_), min(cy, ny_), w=room + wall * abs(dx) if dx else room,
              h=room + wall * abs(dy) if dy else room)
        stack.append((nx_, ny_))
    return OccupancyGrid(occ)


def maze_cell_center(index: int, pitch: int = 16, wall: int = 2) -> int:
    """Grid coordinate of the centre of maze room ``index`` along one axis."""
    return wall + index * pitch + (pitch - wall) // 2


def two_room_map(size: int = 1000, wall: int | None = None, door: int | None = None) -> OccupancyGrid:
    """Two rooms split by a vertical wall with one door, plus a few boxes."""
    wall = wall or max(2, size // 100)
    door = door or max(4, size // 10)
    occ = np.zeros((size, size))
    mid = size // 2
    occ[:, mid - wall // 2: mid - wall // 2 + wall] = 1.0
    # door in the upper part of the wall
    d0 = size // 5
    occ[d0:d0 + door, mid - wall // 2: mid - wall // 2 + wall] = 0.0
    s = size // 10
    occ[int(0.55 * size):int(0.55 * size) + s, int(0.15 * size):int(0.15 * size) + s] = 1.0
    occ[int(0.25 * size):int(0.25 * size) + s // 2, int(0.3 * size):int(0.3 * size) + s] = 1.0
    occ[int(0.6 * size):int(0.6 * size) + s, int(0.65 * size):int(0.65 * size) + s // 2] = 1.0
    return OccupancyGrid(occ)


def disk_map(size: int = 200, center: tuple[int, int] | None = None, radius: int | None = None) -> OccupancyGrid:
    """Empty square grid with one solid disk."""
    cx, cy = center if center is not None else (int(size * 0.65), int(size * 0.4))
    radius = radius or max(2, size // 12)
    yy, xx = np.mgrid[0:size, 0:size]
    occ = ((xx - cx) ** 2 + (yy - cy) ** 2 <= radius * radius).astype(np.float64)
    return OccupancyGrid(occ)


def wall_gap_map(size: int = 64, wall_x: int | None = None, gap: tuple[int, int] | None = None) -> OccupancyGrid:
    """Vertical one-cell wall at ``wall_x`` with an open gap of rows ``[g0, g1)``."""
    wall_x = wall_x if wall_x is not None else size // 2
    g0, g1 = gap if gap is not None else (size * 3 // 8, size * 5 // 8)
    occ = np.zeros((size, size))
    occ[:, wall_x] = 1.0
    occ[g0:g1, wall_x] = 0.0
    return OccupancyGrid(occ)


def supersample(grid: OccupancyGrid, factor: int) -> OccupancyGrid:
    """Split every cell into ``factor x factor`` cells carrying the same occupancy."""
    if factor < 1:
        raise ValueError("factor must be >= 1")
    return OccupancyGrid(np.kron(grid.cells, np.ones((factor, factor))))


def nearest_free(grid: OccupancyGrid, point, threshold: float = 0.5) -> GridPoint:
    """Free cell closest (Euclidean, ties by row then column) to ``point``."""
    free = np.argwhere(grid.cells < threshold)
    if free.size == 0:
        raise ValueError("grid has no free cell")
    x, y = point
    d2 = (free[:, 1] - x) ** 2 + (free[:, 0] - y) ** 2
    yy, xx = free[int(np.argmin(d2))]
    return GridPoint(int(xx), int(yy))


BUNDLED_MAZES = ("maze_a", "maze_b")


def bundled_maze_path(name: str) -> Path:
    """Path of a 322x322 maze shipped with the package (``maze_a`` or ``maze_b``).

    Both have room 0 of the top row and room 19 of the bottom row at the
    centre column, i.e. start (169, 9) and goal (169, 313) are free.
    """
    if name not in BUNDLED_MAZES:
        raise ValueError(f"unknown bundled maze {name!r}; expected one of {BUNDLED_MAZES}")
    return Path(__file__).with_name("data") / f"{name}.txt"


def load_bundled_maze(name: str) -> OccupancyGrid:
    return load_occupancy(bundled_maze_path(name), "text")
