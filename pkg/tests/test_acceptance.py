"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines inline
(they are also printed when capture is on, via ``capsys.disabled``).
"""

import csv
import io
import logging
import time

import numpy as np
import pytest

from gridvis.bench import BenchConfig, loglog_slope, run_sweep
from gridvis.cli import main
from gridvis.grid import (
    BUNDLED_MAZES,
    MapSpec,
    OccupancyGrid,
    disk_map,
    generate_map,
    load_bundled_maze,
    maze_cell_center,
    nearest_free,
    supersample,
    two_room_map,
    wall_gap_map,
)
from gridvis.opcount import count_operations
from gridvis.oracle import compare_masks, line_of_sight, raycast_map
from gridvis.planner import EXPLORATION, REACHED, PlannerParams, plan
from gridvis.visibility import (
    FlowFieldSpec,
    VisParams,
    binarize,
    compute_visibility,
    compute_visibility_curvilinear,
)

log = logging.getLogger("acceptance")

# engine visibility of a path pair above this is outside the dispersion band
BAND_TOP = 0.9


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {number}: {'PASS' if ok else 'FAIL'} | {detail}")
        return ok
    return emit


def _warm():
    g = OccupancyGrid.empty(8, 8)
    compute_visibility(g, (3, 3))
    raycast_map(g, (3, 3))


def test_criterion_1_oracle_agreement(report):
    _warm()
    t0 = time.perf_counter()
    worst_frac, off_maps, off_cells = 0.0, [], 0
    for seed in range(20):
        g = generate_map(MapSpec("random-rects", seed, 0.2, (100, 100)))
        src = nearest_free(g, (50, 50))
        a = compare_masks(binarize(compute_visibility(g, src), 0.5), raycast_map(g, src), g)
        worst_frac = max(worst_frac, a.fraction)
        if a.off_boundary:
            off_maps.append(seed)
            off_cells += a.off_boundary
    elapsed = time.perf_counter() - t0
    frac_ok = worst_frac < 0.03
    near_ok = not off_maps
    ok = frac_ok and near_ok and elapsed < 5.0
    report(1, ok, f"worst disagreement {worst_frac:.4f} (< 0.03: {frac_ok}); "
                  f"off-boundary cells {off_cells} on maps {off_maps} (need 0); {elapsed:.2f} s")
    assert frac_ok and elapsed < 5.0
    assert near_ok, f"{off_cells} disagreeing cells lie farther than 1 cell from an oracle flip"


def test_criterion_2_convergence(report):
    t0 = time.perf_counter()
    base = wall_gap_map(40, wall_x=22, gap=(14, 19))
    fracs = []
    for f in (1, 2, 4):
        g = supersample(base, f)
        src = (8 * f + f // 2, 20 * f + f // 2)
        fracs.append(compare_masks(binarize(compute_visibility(g, src)), raycast_map(g, src), g).fraction)
    elapsed = time.perf_counter() - t0
    ok = fracs[0] >= fracs[1] >= fracs[2] and elapsed < 30.0
    report(2, ok, f"disagreement x1/x2/x4 = {', '.join(f'{v:.4f}' for v in fracs)}; {elapsed:.2f} s")
    assert ok


def test_criterion_3_linear_scaling(report):
    t0 = time.perf_counter()
    recs = run_sweep(BenchConfig(sizes=(50, 100, 200, 400, 800, 1600, 2000), repetitions=5, methods=("engine",)))
    slope = loglog_slope(recs, "engine")
    elapsed = time.perf_counter() - t0
    ok = 0.85 <= slope <= 1.15 and elapsed < 120.0
    report(3, ok, f"engine log-log slope {slope:.3f} (need [0.85, 1.15]); {elapsed:.1f} s")
    assert ok


def test_criterion_4_speedup(report):
    t0 = time.perf_counter()
    eng, ray = run_sweep(BenchConfig(sizes=(1000,), repetitions=3))
    speedup = ray.median_s / eng.median_s
    elapsed = time.perf_counter() - t0
    ok = speedup >= 10.0 and elapsed < 120.0
    report(4, ok, f"median engine {eng.median_s * 1e3:.2f} ms, raycast {ray.median_s * 1e3:.1f} ms, "
                  f"speedup {speedup:.1f}x (need >= 10); {elapsed:.1f} s")
    assert ok


def test_criterion_5_arithmetic_budget(report):
    g = generate_map(MapSpec("random-rects", 5, 0.2, (500, 500)))
    ops = count_operations(g, nearest_free(g, (250, 250)))
    ok = ops.max_per_cell <= 10 and ops.cells == 250000
    report(5, ok, f"max {ops.max_per_cell} ops/cell, mean {ops.mean_per_cell:.2f}, totals {ops.totals}")
    assert ok


def test_criterion_6_property_suites(report):
    rng = np.random.default_rng(2024)
    max_viol = mono_viol = 0
    for _ in range(1000):
        nx, ny = (int(v) for v in rng.integers(1, 65, 2))
        cells = rng.uniform(0.0, 1.0, (ny, nx))
        src = (int(rng.integers(nx)), int(rng.integers(ny)))
        light = float(rng.uniform(0.0, 1.0))
        alpha = float(rng.uniform(1e-3, 1.0))
        params = VisParams(light_strength=light, alpha=alpha)
        u = compute_visibility(OccupancyGrid(cells), src, params).values
        if not (np.all(np.isfinite(u)) and u.min() >= 0.0 and u.max() <= light):
            max_viol += 1
        lower = cells * rng.uniform(0.0, 1.0, cells.shape)
        u_lower = compute_visibility(OccupancyGrid(lower), src, params).values
        if not np.all(u_lower >= u):
            mono_viol += 1
    ok = max_viol == 0 and mono_viol == 0
    report(6, ok, f"1000 grids: {max_viol} maximum-principle and {mono_viol} monotonicity violations")
    assert ok


def _pair_audit(grid, path, threshold):
    clear = exempt = defects = 0
    for a, b in zip(path, path[1:]):
        if line_of_sight(grid, a, b):
            clear += 1
            continue
        u = compute_visibility(grid, a)[b]
        if threshold <= u < BAND_TOP:
            exempt += 1
            log.info("dispersion-band exemption %s -> %s (engine visibility %.3f)", tuple(a), tuple(b), u)
        else:
            defects += 1
            log.warning("LOS defect %s -> %s (engine visibility %.3f)", tuple(a), tuple(b), u)
    return clear, exempt, defects


def test_criterion_7_planner_soundness(report):
    _warm()
    c = maze_cell_center
    scenes = [("two-room", two_room_map(1000), (250, 500), (750, 500), 0.5)]
    scenes += [(n, load_bundled_maze(n), (c(10), c(0)), (c(10), c(19)), 0.2) for n in BUNDLED_MAZES]
    reached, pairs, exempt_total, defects_total, worst_time = True, 0, 0, 0, 0.0
    coverage = {}
    lines = []
    for name, g, start, goal, thr in scenes:
        t0 = time.perf_counter()
        r = plan(g, start, goal, VisParams(threshold=thr), PlannerParams(threshold=thr))
        dt = time.perf_counter() - t0
        worst_time = max(worst_time, dt)
        reached &= r.status == REACHED
        if r.path:
            clear, exempt, defects = _pair_audit(g, r.path, thr)
            pairs += clear + exempt + defects
            exempt_total += exempt
            defects_total += defects
            lines.append(f"{name}: {r.status}, {r.iterations} it, {dt:.2f} s, pairs clear/exempt/defect "
                         f"{clear}/{exempt}/{defects}")
        if name in BUNDLED_MAZES:
            t0 = time.perf_counter()
            e = plan(g, start, None, VisParams(threshold=thr), PlannerParams(threshold=thr, mode=EXPLORATION))
            worst_time = max(worst_time, time.perf_counter() - t0)
            coverage[name] = e.coverage
    exempt_frac = exempt_total / max(1, pairs)
    cov_ok = all(v >= 0.99 for v in coverage.values())
    ok = reached and defects_total == 0 and exempt_frac < 0.05 and cov_ok and worst_time < 5.0
    report(7, ok, f"reached {reached}; LOS defects {defects_total}; band exemptions {exempt_total}/{pairs} = "
                  f"{exempt_frac:.1%} (need < 5%); exploration coverage "
                  f"{', '.join(f'{k} {v:.4f}' for k, v in coverage.items())}; slowest solve {worst_time:.2f} s; "
                  + " | ".join(lines))
    assert reached and cov_ok and worst_time < 5.0
    assert defects_total == 0
    assert exempt_frac < 0.05, f"dispersion-band exemptions on {exempt_frac:.1%} of path pairs"


def test_criterion_8_curvilinear(report):
    g = disk_map(200)
    src = (20, 80)
    radial = compute_visibility(g, src)
    curved = compute_visibility_curvilinear(g, src, FlowFieldSpec.scaled_radial(2.5))
    sym_diff = int((binarize(radial).values ^ binarize(curved).values).sum())
    empty = compute_visibility_curvilinear(OccupancyGrid.empty(200, 200), src, FlowFieldSpec.scaled_radial(2.5))
    all_ones = bool(np.all(empty.values == 1.0))
    bit_exact = np.array_equal(compute_visibility_curvilinear(g, src, FlowFieldSpec.radial()).values, radial.values)
    ok = sym_diff > 0 and all_ones and bit_exact
    report(8, ok, f"shadow symmetric difference {sym_diff} cells; empty grid all ones {all_ones}; "
                  f"radial bit-exact {bit_exact}")
    assert ok


def _artifacts(out):
    files = {}
    for p in sorted(out.rglob("*")):
        if not p.is_file():
            continue
        data = p.read_bytes()
        if p.name == "bench.csv":
            # timing columns vary between runs; keep the workload description
            rows = csv.DictReader(io.StringIO("".join(
                line for line in data.decode().splitlines(keepends=True) if not line.startswith("#"))))
            data = repr([(r["method"], r["n_side"], r["n_cells"], r["reps"], r["threads"], r["map_kind"],
                          r["seed"]) for r in rows]).encode()
        files[str(p.relative_to(out))] = data
    return files


def test_criterion_9_determinism(report, tmp_path):
    commands = [
        ["visibility", "--gen", "random-rects", "--size", "120", "--seed", "7", "--source", "60,60"],
        ["curvilinear", "--gen", "random-disks", "--size", "120", "--seed", "7", "--source", "60,60",
         "--flow", "scaled:2.5"],
        ["raycast", "--gen", "random-rects", "--size", "120", "--seed", "7", "--source", "60,60"],
        ["plan", "--gen", "from-text-maze", "--size", "322", "--seed", "1", "--start", "169,9",
         "--target", "169,313", "--threshold", "0.2", "--dump-steps"],
        ["explore", "--gen", "from-text-maze", "--size", "130", "--seed", "5", "--start", "9,9"],
        ["bench", "--gen", "random-rects", "--seed", "3", "--sizes", "40,80,160", "--reps", "2"],
    ]
    differing = []
    for cmd in commands:
        runs = []
        for k in range(2):
            out = tmp_path / f"{cmd[0]}_{k}"
            assert main(cmd + ["--out", str(out)]) == 0
            runs.append(_artifacts(out))
        if not runs[0] or runs[0] != runs[1]:
            differing.append(cmd[0])
    ok = not differing
    report(9, ok, f"{len(commands)} subcommands run twice; differing artifacts: {differing or 'none'}")
    assert ok
