"""Run configuration: ``key = value`` files merged with command-line flags.

Precedence is built-in defaults < config file < flags.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass, field
from pathlib import Path

from .bench import DESK_SIZES, FULL_SIZES, METHODS
from .grid import MAP_KINDS, GridPoint, MapSpec, OccupancyGrid, generate_map, load_occupancy
from .planner import EXPLORATION, TARGET_SEEKING, PlannerParams
from .visibility import FlowFieldSpec, VisParams

COMMANDS = ("visibility", "curvilinear", "plan", "explore", "bench", "raycast")


class ConfigError(ValueError):
    """Bad key, value or combination of settings (exit code 1)."""


def _point(text: str) -> GridPoint:
    return GridPoint.parse(text)


def _size(text: str) -> tuple[int, int]:
    parts = text.lower().replace(",", "x").split("x")
    if len(parts) == 1:
        n = int(parts[0])
        return n, n
    if len(parts) != 2:
        raise ValueError(text)
    return int(parts[0]), int(parts[1])


def _int_list(text: str) -> tuple:
    return tuple(int(t) for t in text.split(",") if t.strip())


def _str_list(text: str) -> tuple:
    return tuple(t.strip() for t in text.split(",") if t.strip())


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(text)


def _choice(options):
    def parse(text: str) -> str:
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text
    return parse


KEYS = {
    "command": _choice(COMMANDS),
    "map": str,
    "gen": _choice(MAP_KINDS),
    "seed": int,
    "density": float,
    "size": _size,
    "source": _point,
    "start": _point,
    "target": _point,
    "threshold": float,
    "alpha": float,
    "light": float,
    "dx": float,
    "dy": float,
    "kappa": float,
    "mode": _choice((TARGET_SEEKING, EXPLORATION)),
    "max_iterations": int,
    "flow": str,
    "out": str,
    "threads": int,
    "sizes": _int_list,
    "reps": int,
    "methods": _str_list,
    "full": _bool,
    "dump_steps": _bool,
}


@dataclass
class RunConfig:
    command: str
    map_path: Path | None = None
    map_spec: MapSpec | None = None
    source: GridPoint | None = None
    start: GridPoint | None = None
    target: GridPoint | None = None
    vis: VisParams = field(default_factory=VisParams)
    planner: PlannerParams = field(default_factory=PlannerParams)
    flow: FlowFieldSpec = field(default_factory=FlowFieldSpec.radial)
    out_dir: Path = Path("out")
    threads: int | None = None
    sizes: tuple = DESK_SIZES
    reps: int = 20
    methods: tuple = METHODS
    dump_steps: bool = False

    def load_grid(self) -> OccupancyGrid:
        if self.map_path is not None:
            return load_occupancy(self.map_path)
        return generate_map(self.map_spec)

    def kappa(self, grid: OccupancyGrid) -> float:
        return self.planner.kappa_for(grid)

    def check_points(self, grid: OccupancyGrid) -> None:
        for name in ("source", "start", "target"):
            p = getattr(self, name)
            if p is not None and not grid.contains(p):
                raise ConfigError(f"{name} {tuple(p)} lies outside the {grid.width}x{grid.height} map")


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines into ``{key: (value, line number)}``."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}, line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in KEYS:
            raise ConfigError(f"{path}, line {lineno}: unknown key '{key}'")
        raw[key] = (value, f"{path}, line {lineno}")
    return raw


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gridvis", description="Grid visibility by upwind transport, ray-casting "
                                            "baseline and visibility-heuristic planning.")
    p.add_argument("command", nargs="?", choices=COMMANDS)
    p.add_argument("--config", help="key = value file; flags override its entries")
    p.add_argument("--map", help="PGM or plain-text map file")
    p.add_argument("--gen", help=f"generate a map: {', '.join(MAP_KINDS)}")
    p.add_argument("--seed")
    p.add_argument("--density")
    p.add_argument("--size", help="generated map size, N or WxH")
    p.add_argument("--source", metavar="X,Y")
    p.add_argument("--start", metavar="X,Y")
    p.add_argument("--target", metavar="X,Y")
    p.add_argument("--threshold")
    p.add_argument("--alpha")
    p.add_argument("--light")
    p.add_argument("--dx")
    p.add_argument("--dy")
    p.add_argument("--kappa")
    p.add_argument("--mode", help=f"{TARGET_SEEKING} or {EXPLORATION}")
    p.add_argument("--max-iterations", dest="max_iterations")
    p.add_argument("--flow", help="radial or scaled:K")
    p.add_argument("--out", help="output directory")
    p.add_argument("--threads")
    p.add_argument("--sizes", help="bench grid sides, comma separated")
    p.add_argument("--reps")
    p.add_argument("--methods", help="bench methods, comma separated")
    p.add_argument("--full", action="store_const", const="true", help="bench up to 5000x5000")
    p.add_argument("--dump-steps", dest="dump_steps", action="store_const", const="true",
                   help="write one overlay per planner iteration")
    return p


def parse_config(argv=None) -> RunConfig:
    """Merge defaults, an optional ``--config`` file and flags into a validated RunConfig."""
    args = build_parser().parse_args(argv)
    raw = read_config_file(args.config) if args.config else {}
    for key in KEYS:
        value = getattr(args, key, None)
        if value is not None:
            raw[key] = (value, f"flag --{key.replace('_', '-')}")

    values = {}
    for key, (text, where) in raw.items():
        try:
            values[key] = KEYS[key](text)
        except (ValueError, TypeError) as exc:
            detail = f" ({exc})" if str(exc) and str(exc) != str(text) else ""
            raise ConfigError(f"{where}: cannot parse {key} = {text!r}{detail}") from exc

    def where(key):
        return raw[key][1] if key in raw else "defaults"

    command = values.get("command")
    if command is None:
        raise ConfigError("missing command (one of " + ", ".join(COMMANDS) + ")")

    try:
        vis = VisParams(
            light_strength=values.get("light", 1.0),
            alpha=values.get("alpha", 1.0),
            dx=values.get("dx", 1.0),
            dy=values.get("dy", 1.0),
            threshold=values.get("threshold", 0.5),
        )
    except ValueError as exc:
        raise ConfigError(f"visibility parameters: {exc}") from exc

    mode = EXPLORATION if command == "explore" else values.get("mode", TARGET_SEEKING)
    try:
        planner = PlannerParams(
            threshold=values.get("threshold", 0.5),
            max_iterations=values.get("max_iterations", 10000),
            kappa=values.get("kappa"),
            mode=mode,
        )
    except ValueError as exc:
        raise ConfigError(f"planner parameters: {exc}") from exc

    try:
        flow = FlowFieldSpec.parse(values.get("flow", "radial"))
    except ValueError as exc:
        raise ConfigError(f"{where('flow')}: {exc}") from exc

    has_map = "map" in values
    has_gen = "gen" in values
    map_spec = None
    if command == "bench":
        if has_map:
            raise ConfigError(f"{where('map')}: bench generates its own maps; use gen instead of map")
    elif has_map == has_gen:
        raise ConfigError("exactly one of 'map' and 'gen' must be given")
    if has_gen or command == "bench":
        try:
            map_spec = MapSpec(
                kind=values.get("gen", "empty"),
                seed=values.get("seed", 0),
                density=values.get("density", 0.2),
                dimensions=values.get("size", (100, 100)),
            )
        except ValueError as exc:
            raise ConfigError(f"map generation: {exc}") from exc

    required = {
        "visibility": ("source",),
        "curvilinear": ("source",),
        "raycast": ("source",),
        "plan": ("start", "target") if mode == TARGET_SEEKING else ("start",),
        "explore": ("start",),
        "bench": (),
    }[command]
    for key in required:
        if key not in values:
            raise ConfigError(f"command '{command}' requires '{key}'")

    sizes = values.get("sizes", FULL_SIZES if values.get("full") else DESK_SIZES)
    methods = values.get("methods", METHODS)
    if list(sizes) != sorted(sizes) or not sizes or min(sizes) <= 0:
        raise ConfigError(f"{where('sizes')}: sizes must be positive and ascending")
    if set(methods) - set(METHODS):
        raise ConfigError(f"{where('methods')}: methods must be drawn from {', '.join(METHODS)}")
    reps = values.get("reps", 20)
    if reps < 1:
        raise ConfigError(f"{where('reps')}: reps must be >= 1")
    threads = values.get("threads")
    if threads is not None and threads < 1:
        raise ConfigError(f"{where('threads')}: threads must be >= 1")

    return RunConfig(
        command=command,
        map_path=Path(values["map"]) if has_map else None,
        map_spec=map_spec,
        source=values.get("source"),
        start=values.get("start"),
        target=values.get("target") if mode == TARGET_SEEKING else None,
        vis=vis,
        planner=planner,
        flow=flow,
        out_dir=Path(values.get("out", "out")),
        threads=threads,
        sizes=tuple(sizes),
        reps=reps,
        methods=tuple(methods),
        dump_steps=values.get("dump_steps", False),
    )
