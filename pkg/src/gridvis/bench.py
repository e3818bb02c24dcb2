"""Timing sweeps: transport engine vs per-cell ray casting."""

from __future__ import annotations

import csv
import logging
import platform
import statistics
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numba
import numpy as np

from .grid import MapSpec, generate_map
from .oracle import raycast_map
from .visibility import VisParams, compute_visibility

log = logging.getLogger(__name__)

METHODS = ("engine", "raycast")
CSV_COLUMNS = ("method", "n_side", "n_cells", "reps", "median_s", "mean_s", "stddev_s",
               "threads", "map_kind", "seed")

DESK_SIZES = (50, 85, 145, 250, 425, 725, 1200, 2000)
FULL_SIZES = (50, 80, 125, 200, 320, 500, 800, 1250, 2000, 3200, 5000)


@dataclass(frozen=True)
class BenchConfig:
    sizes: tuple = DESK_SIZES
    repetitions: int = 20
    map_kind: str = "empty"
    seed: int = 0
    density: float = 0.2
    methods: tuple = METHODS
    max_cells: int = 25_000_000

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes or list(sizes) != sorted(sizes) or sizes[0] <= 0:
            raise ValueError("sizes must be positive and sorted ascending")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}")
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "methods", tuple(self.methods))


@dataclass(frozen=True)
class BenchRecord:
    method: str
    n_side: int
    n_cells: int
    reps: int
    median_s: float
    mean_s: float
    stddev_s: float
    threads: int
    map_kind: str
    seed: int
    samples: tuple = field(default=(), repr=False, compare=False)
    skipped: bool = False


def log_sizes(lo: int, hi: int, count: int) -> tuple:
    """``count`` logarithmically spaced integer sizes from ``lo`` to ``hi``."""
    return tuple(sorted({int(round(s)) for s in np.geomspace(lo, hi, count)}))


def _runner(method: str, grid, source):
    if method == "engine":
        params = VisParams()
        return lambda: compute_visibility(grid, source, params)
    return lambda: raycast_map(grid, source)


def time_method(method: str, grid, source, repetitions: int) -> list:
    """Wall-clock seconds of ``repetitions`` runs after one discarded warm-up."""
    run = _runner(method, grid, source)
    run()
    samples = []
    for _ in range(repetitions):
        t0 = time.perf_counter()
        run()
        samples.append(time.perf_counter() - t0)
    return samples


def run_sweep(config: BenchConfig) -> list:
    """One record per (method, size); both methods see the same seeded map."""
    threads = numba.get_num_threads()
    records = []
    for n in config.sizes:
        if n * n > config.max_cells:
            log.warning("skipping n=%d: %d cells exceeds cap %d", n, n * n, config.max_cells)
            for method in config.methods:
                records.append(BenchRecord(method, n, n * n, 0, float("nan"), float("nan"), float("nan"),
                                           threads, config.map_kind, config.seed, skipped=True))
            continue
        grid = generate_map(MapSpec(config.map_kind, config.seed, config.density, (n, n)))
        source = (n // 2, n // 2)
        for method in config.methods:
            samples = time_method(method, grid, source, config.repetitions)
            records.append(BenchRecord(
                method, n, n * n, config.repetitions,
                statistics.median(samples), statistics.fmean(samples),
                statistics.stdev(samples) if len(samples) > 1 else 0.0,
                threads, config.map_kind, config.seed, tuple(samples),
            ))
            log.info("%s n=%d median %.3g s", method, n, records[-1].median_s)
    return records


def loglog_slope(records, method: str) -> float:
    """Least-squares slope of log(median time) against log(cell count)."""
    pts = [(r.n_cells, r.median_s) for r in records if r.method == method and not r.skipped]
    if len(pts) < 3:
        raise ValueError(f"need at least 3 records for {method!r}, got {len(pts)}")
    n, t = np.array(pts, dtype=np.float64).T
    slope, _ = np.polyfit(np.log(n), np.log(t), 1)
    return float(slope)


def speedups(records) -> dict:
    """Median raycast time over median engine time, per grid side."""
    eng = {r.n_side: r.median_s for r in records if r.method == "engine" and not r.skipped}
    ray = {r.n_side: r.median_s for r in records if r.method == "raycast" and not r.skipped}
    return {n: ray[n] / eng[n] for n in sorted(eng.keys() & ray.keys())}


def write_csv(records, path) -> None:
    """Append records; a new file starts with ``#`` metadata lines and the header row."""
    path = Path(path)
    fresh = not path.exists() or path.stat().st_size == 0
    with path.open("a", newline="") as fh:
        if fresh:
            fh.write(f"# host {platform.machine()} python {platform.python_version()} numba {numba.__version__}\n")
            fh.write("# engine timing includes the occupancy complement, which is fused into the sweep\n")
            fh.write("# raycast: supercover rays, source cell never blocks, target blocks iff occupied, "
                     "corner touches block, block_threshold 0.5\n")
        writer = csv.writer(fh)
        if fresh:
            writer.writerow(CSV_COLUMNS)
        for r in records:
            row = asdict(r)
            writer.writerow([row[c] for c in CSV_COLUMNS])


def read_csv(path) -> list:
    with Path(path).open() as fh:
        rows = csv.DictReader(line for line in fh if not line.startswith("#"))
        return [
            BenchRecord(r["method"], int(r["n_side"]), int(r["n_cells"]), int(r["reps"]),
                        float(r["median_s"]), float(r["mean_s"]), float(r["stddev_s"]),
                        int(r["threads"]), r["map_kind"], int(r["seed"]),
                        skipped=r["median_s"] == "nan")
            for r in rows
        ]
