"""``gridvis`` command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.
"""

from __future__ import annotations

import logging
import sys

import numba

from . import bench
from .config import ConfigError, RunConfig, parse_config
from .grid import GridParseError
from .oracle import raycast_map
from .planner import plan
from .render import OVERLAY, render_field
from .visibility import binarize, compute_visibility, compute_visibility_curvilinear

log = logging.getLogger("gridvis")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _report(name, value) -> None:
    print(f"{name} {value}")


def _field_outputs(cfg: RunConfig, grid, field, stem: str) -> None:
    out = cfg.out_dir
    field.save(out / f"{stem}.bin")
    field.save(out / f"{stem}.pgm")
    mask = binarize(field, cfg.vis.threshold)
    mask.save(out / "mask.pgm")
    render_field(field, out / "overlay.ppm", OVERLAY, grid=grid, threshold=cfg.vis.threshold,
                 source=cfg.source)
    _report("visible_cells", mask.count())


def _cmd_visibility(cfg, grid) -> None:
    _field_outputs(cfg, grid, compute_visibility(grid, cfg.source, cfg.vis), "field")


def _cmd_curvilinear(cfg, grid) -> None:
    field = compute_visibility_curvilinear(grid, cfg.source, cfg.flow, cfg.vis)
    _field_outputs(cfg, grid, field, "field")


def _cmd_raycast(cfg, grid) -> None:
    mask = raycast_map(grid, cfg.source)
    mask.save(cfg.out_dir / "raycast.pgm")
    (cfg.out_dir / "raycast.bin").write_bytes(mask.to_flat_bytes())
    render_field(mask, cfg.out_dir / "overlay.ppm", OVERLAY, grid=grid, source=cfg.source)
    _report("visible_cells", mask.count())


def _cmd_plan(cfg, grid) -> None:
    on_step = None
    if cfg.dump_steps:
        steps = cfg.out_dir / "steps"
        steps.mkdir(exist_ok=True)

        def on_step(state):
            render_field(state.union, steps / f"step_{state.iteration:05d}.ppm", OVERLAY,
                         grid=grid, threshold=cfg.planner.threshold, start=cfg.start,
                         target=cfg.target, waypoints=state.waypoints)

    result = plan(grid, cfg.start, cfg.target, cfg.vis, cfg.planner, on_step=on_step)
    result.save(cfg.out_dir / "plan.txt")
    result.union.save(cfg.out_dir / "union.bin")
    result.union.save(cfg.out_dir / "union.pgm")
    render_field(result.union, cfg.out_dir / "overlay.ppm", OVERLAY, grid=grid,
                 threshold=cfg.planner.threshold, start=cfg.start, target=cfg.target,
                 waypoints=result.waypoints, path=result.path or ())
    _report("status", result.status)
    _report("iterations", result.iterations)
    _report("coverage", f"{result.coverage:.6f}")
    if result.path is not None:
        _report("path_points", len(result.path))


def _cmd_bench(cfg, grid) -> None:
    spec = cfg.map_spec
    config = bench.BenchConfig(sizes=cfg.sizes, repetitions=cfg.reps, map_kind=spec.kind,
                               seed=spec.seed, density=spec.density, methods=cfg.methods)
    records = bench.run_sweep(config)
    bench.write_csv(records, cfg.out_dir / "bench.csv")
    for method in config.methods:
        try:
            _report(f"slope_{method}", f"{bench.loglog_slope(records, method):.4f}")
        except ValueError as exc:
            log.warning("%s", exc)
    for n, s in bench.speedups(records).items():
        _report(f"speedup_{n}", f"{s:.2f}")


COMMANDS = {
    "visibility": _cmd_visibility,
    "curvilinear": _cmd_curvilinear,
    "raycast": _cmd_raycast,
    "plan": _cmd_plan,
    "explore": _cmd_plan,
    "bench": _cmd_bench,
}


def run(cfg: RunConfig) -> None:
    if cfg.threads is not None:
        numba.set_num_threads(min(cfg.threads, numba.config.NUMBA_NUM_THREADS))
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    grid = None
    if cfg.command != "bench":
        grid = cfg.load_grid()
        cfg.check_points(grid)
        if cfg.planner.kappa is None:
            log.info("kappa defaults to %g", cfg.kappa(grid))
    COMMANDS[cfg.command](cfg, grid)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = parse_config(argv)
        run(cfg)
    except ConfigError as exc:
        print(f"gridvis: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GridParseError, OSError, ValueError, RuntimeError, LookupError) as exc:
        print(f"gridvis: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
