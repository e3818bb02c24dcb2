"""Any-angle planning and exploration guided by cumulative visibility.

Each iteration drops a waypoint, computes its visibility field and folds it
into the running union. Cells that first become visible are parented to the
waypoint that revealed them and queued once, keyed by

    H = |p - parent| + |p - target| + kappa * union(p)

so the next waypoint is a close, *barely* visible cell. Parent links double
as the path tree.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .grid import GridPoint, OccupancyGrid
from .oracle import dilate
from .visibility import VisibilityField, VisParams, compute_visibility

TARGET_SEEKING = "target-seeking"
EXPLORATION = "exploration"

REACHED = "reached"
EXPLORED = "explored"
EXHAUSTED = "exhausted"

FREE_LIMIT = 0.5


class UnreachableError(LookupError):
    """The requested cell has not been seen by any waypoint."""


@dataclass(frozen=True)
class PlannerParams:
    threshold: float = 0.5
    max_iterations: int = 10000
    kappa: float | None = None  # None -> width + height of the grid
    mode: str = TARGET_SEEKING

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ValueError(f"threshold must lie in (0, 1), got {self.threshold}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.kappa is not None and self.kappa < 0:
            raise ValueError("kappa must be non-negative")
        if self.mode not in (TARGET_SEEKING, EXPLORATION):
            raise ValueError(f"unknown planner mode {self.mode!r}")

    def kappa_for(self, grid: OccupancyGrid) -> float:
        return float(grid.width + grid.height) if self.kappa is None else float(self.kappa)


@dataclass
class PlannerState:
    start: GridPoint
    union: np.ndarray
    parent_x: np.ndarray
    parent_y: np.ndarray
    seen: np.ndarray
    waypoints: list = field(default_factory=list)
    frontier: list = field(default_factory=list)
    iteration: int = 0

    @classmethod
    def initial(cls, shape, start: GridPoint) -> PlannerState:
        return cls(
            start=start,
            union=np.zeros(shape),
            parent_x=np.full(shape, -1, dtype=np.int64),
            parent_y=np.full(shape, -1, dtype=np.int64),
            seen=np.zeros(shape, dtype=bool),
        )

    def parent(self, point) -> GridPoint | None:
        x, y = point
        px = int(self.parent_x[y, x])
        return None if px < 0 else GridPoint(px, int(self.parent_y[y, x]))


@dataclass
class PlanResult:
    status: str
    path: list | None
    waypoints: list
    iterations: int
    union: VisibilityField
    coverage: float
    state: PlannerState = field(repr=False)

    def to_text(self) -> str:
        """Status line, ``path N`` + one ``x y`` per point, ``waypoints M`` + points."""
        lines = [f"status {self.status}", f"iterations {self.iterations}", f"coverage {self.coverage:.6f}"]
        path = self.path or []
        lines.append(f"path {len(path)}")
        lines += [f"{p.x} {p.y}" for p in path]
        lines.append(f"waypoints {len(self.waypoints)}")
        lines += [f"{p.x} {p.y}" for p in self.waypoints]
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())


def parse_plan_text(text: str) -> tuple[str, list, list]:
    """Inverse of :meth:`PlanResult.to_text`: (status, path, waypoints)."""
    lines = iter(text.splitlines())
    status = next(lines).split()[1]
    out = {}
    for line in lines:
        key, value = line.split()
        if key in ("path", "waypoints"):
            out[key] = [GridPoint(*map(int, next(lines).split())) for _ in range(int(value))]
    return status, out.get("path", []), out.get("waypoints", [])


def heuristic_value(candidate, parent, target, union_value: float, kappa: float) -> float:
    """Distance to parent plus distance to target plus scaled visibility."""
    d_parent = math.hypot(candidate[0] - parent[0], candidate[1] - parent[1])
    d_target = 0.0 if target is None else math.hypot(candidate[0] - target[0], candidate[1] - target[1])
    return d_parent + d_target + kappa * union_value


def extract_path(state: PlannerState, target) -> list:
    """Follow parent links from ``target`` back to the start; start comes first."""
    node = GridPoint(int(target[0]), int(target[1]))
    path = [node]
    while node != state.start:
        node = state.parent(node)
        if node is None:
            raise UnreachableError(f"cell {tuple(target)} has not been seen by any waypoint")
        if node in path:
            raise RuntimeError(f"parent cycle through {tuple(node)}")
        path.append(node)
    path.reverse()
    return path


def _frontier_cells(seen: np.ndarray, free: np.ndarray) -> np.ndarray:
    """Seen free cells with at least one unseen free 8-neighbour."""
    return seen & free & dilate(free & ~seen, 1)


def plan(grid: OccupancyGrid, start, target=None, vis_params: VisParams | None = None,
         params: PlannerParams | None = None, on_step=None) -> PlanResult:
    """Place waypoints until the target is seen or the free space is covered.

    ``on_step(state)`` is called after every iteration.
    """
    params = params or PlannerParams()
    vis_params = vis_params or VisParams()
    start = grid.require_inside(start, "start")
    if grid[start] >= FREE_LIMIT:
        raise ValueError(f"start {tuple(start)} lies inside an obstacle")
    seeking = params.mode == TARGET_SEEKING
    if seeking:
        if target is None:
            raise ValueError("target-seeking mode needs a target")
        target = grid.require_inside(target, "target")
    else:
        target = None

    thr = params.threshold
    kappa = params.kappa_for(grid)
    free = grid.free_mask(FREE_LIMIT)
    state = PlannerState.initial(grid.shape, start)
    waypoint_set = set()

    def finish(status):
        path = extract_path(state, target) if status == REACHED else None
        seen_free = (state.union >= thr) & free
        coverage = float(seen_free.sum() / max(1, free.sum()))
        union = state.union.copy()
        union.setflags(write=False)
        return PlanResult(status, path, list(state.waypoints), state.iteration,
                          VisibilityField(union), coverage, state)

    if seeking and target == start:
        return finish(REACHED)

    w = start
    while True:
        state.waypoints.append(w)
        waypoint_set.add(w)
        field_w = compute_visibility(grid, w, vis_params).values
        fresh = (field_w >= thr) & ~state.seen
        if w == start:
            fresh[start.y, start.x] = False
            state.seen[start.y, start.x] = True
        ys, xs = np.nonzero(fresh)
        state.parent_x[ys, xs] = w.x
        state.parent_y[ys, xs] = w.y
        np.maximum(state.union, field_w, out=state.union)
        state.seen |= fresh
        h = np.hypot(xs - w.x, ys - w.y)
        if target is not None:
            h = h + np.hypot(xs - target.x, ys - target.y)
        h = h + kappa * state.union[ys, xs]
        for key in zip(h.tolist(), ys.tolist(), xs.tolist()):
            heapq.heappush(state.frontier, key)
        state.iteration += 1
        if on_step is not None:
            on_step(state)

        if seeking and state.union[target.y, target.x] >= thr:
            return finish(REACHED)
        if state.iteration >= params.max_iterations:
            return finish(EXHAUSTED)

        candidates = _frontier_cells(state.seen, free)
        w = None
        while state.frontier:
            _, y, x = heapq.heappop(state.frontier)
            p = GridPoint(x, y)
            if p in waypoint_set or not candidates[y, x]:
                continue
            w = p
            break
        if w is None:
            return finish(EXHAUSTED if seeking else EXPLORED)
