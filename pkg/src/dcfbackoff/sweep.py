"""Experiment grids, replicated sweeps and CSV/JSON output."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .backoff import BackoffParams, ContractViolation, StrategyKind
from .phy import PhyParams
from .sim import SimConfig, TrafficModel, arrival_rate_for_load, run

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

CSV_HEADER = (
    "strategy", "n", "cw_min", "cw_max", "m", "offered_load", "arrival_rate_pps",
    "throughput_mean", "throughput_ci95", "delay_mean_us", "delay_ci95_us",
    "collision_rate", "seed_base", "replications",
)

PRESET_LOAD_GRID = tuple(round(0.05 * k, 2) for k in range(1, 25))  # 0.05 .. 1.2

DEFAULT_BASE = SimConfig(n_stations=50, sim_time_us=100_000_000, warmup_us=5_000_000)


class ConfigError(ValueError):
    pass


class SweepError(RuntimeError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    strategies: tuple[StrategyKind, ...] = (StrategyKind.BEB,)
    n_values: tuple[int, ...] = (50,)
    cw_min_values: tuple[int, ...] = (8,)
    offered_load_grid: tuple[float, ...] = (0.5,)
    replications: int = 5
    seed_base: int = 0
    base: SimConfig = DEFAULT_BASE
    # None means half of cw_max
    cw_threshold: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "strategies", tuple(StrategyKind.parse(s) for s in self.strategies))
        for name in ("strategies", "n_values", "cw_min_values", "offered_load_grid"):
            if not getattr(self, name):
                raise ContractViolation(f"{name} must not be empty")
        if self.replications < 1:
            raise ContractViolation(f"replications must be >= 1, got {self.replications}")
        if any(not x >= 0 for x in self.offered_load_grid):
            raise ContractViolation(f"offered loads must be >= 0: {self.offered_load_grid}")
        for cw_min in self.cw_min_values:
            self.backoff_for(cw_min)

    def backoff_for(self, cw_min: int) -> BackoffParams:
        b = self.base.backoff
        threshold = b.cw_max // 2 if self.cw_threshold is None else self.cw_threshold
        return BackoffParams(cw_min, b.cw_max, b.max_stage_m, threshold)

    def grid(self):
        """Grid points ``(strategy, n, cw_min, load)`` in output order."""
        for kind in self.strategies:
            for n in self.n_values:
                for cw_min in self.cw_min_values:
                    for load in self.offered_load_grid:
                        yield kind, n, cw_min, load

    def config_for(self, kind, n, cw_min, load, rep) -> SimConfig:
        rate = arrival_rate_for_load(load, n, self.base.phy)
        return replace(
            self.base,
            n_stations=n,
            strategy=kind,
            backoff=self.backoff_for(cw_min),
            traffic=replace(self.base.traffic, arrival_rate_pps=rate),
            seed=replication_seed(self.seed_base, n, cw_min, load, rep),
        )


def replication_seed(seed_base: int, n: int, cw_min: int, load: float, rep: int) -> int:
    """Seed for one replication.

    The strategy is deliberately left out of the key so that every strategy
    at a grid point sees the same arrival stream (common random numbers).
    """
    key = f"{n}|{cw_min}|{load!r}|{rep}".encode()
    return seed_base + int.from_bytes(hashlib.blake2b(key, digest_size=4).digest(), "little")


@dataclass(frozen=True)
class ResultRow:
    strategy: str
    n: int
    cw_min: int
    cw_max: int
    m: int
    offered_load: float
    arrival_rate_pps: float
    throughput_mean: float
    throughput_ci95: float
    delay_mean_us: float
    delay_ci95_us: float
    collision_rate: float
    seed_base: int
    replications: int


def mean_ci95(values) -> tuple[float, float]:
    """Mean and normal-approximation 95% half-width 1.96 * s / sqrt(r)."""
    x = np.asarray([v for v in values if not math.isnan(v)], dtype=float)
    if x.size == 0:
        return math.nan, math.nan
    if x.size == 1:
        return float(x[0]), 0.0
    return float(x.mean()), float(1.96 * x.std(ddof=1) / math.sqrt(x.size))


def _run_indexed(task):
    idx, config = task
    try:
        return idx, run(config), None
    except Exception as exc:  # surfaced with its grid point by run_sweep
        return idx, None, repr(exc)


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[ResultRow]:
    points = list(spec.grid())
    tasks = []
    for p, point in enumerate(points):
        for rep in range(spec.replications):
            tasks.append(((p, rep), spec.config_for(*point, rep)))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_indexed, tasks, chunksize=1))
    else:
        results = map(_run_indexed, tasks)

    per_point: list[list] = [[] for _ in points]
    for (p, rep), metrics, err in results:
        if err is not None:
            kind, n, cw_min, load = points[p]
            raise SweepError(
                f"run failed at strategy={kind.value} n={n} cw_min={cw_min} "
                f"offered_load={load} replication={rep}: {err}"
            )
        per_point[p].append(metrics)

    rows = []
    for (kind, n, cw_min, load), runs in zip(points, per_point):
        thr, thr_ci = mean_ci95(m.normalized_throughput for m in runs)
        dly, dly_ci = mean_ci95(m.avg_tx_delay_us for m in runs)
        backoff = spec.backoff_for(cw_min)
        rows.append(ResultRow(
            strategy=kind.value,
            n=n,
            cw_min=cw_min,
            cw_max=backoff.cw_max,
            m=backoff.max_stage_m,
            offered_load=load,
            arrival_rate_pps=arrival_rate_for_load(load, n, spec.base.phy),
            throughput_mean=thr,
            throughput_ci95=thr_ci,
            delay_mean_us=dly,
            delay_ci95_us=dly_ci,
            collision_rate=float(np.mean([m.collision_rate for m in runs])),
            seed_base=spec.seed_base,
            replications=spec.replications,
        ))
    return rows


# ---------------------------------------------------------------- presets

PRESETS: dict[str, tuple[str, dict]] = {
    "fig2": ("throughput vs load, BEB/ELBA/DCBTA, n=50, CW_min=8, m=6", {
        "strategies": ["BEB", "ELBA", "DCBTA"], "n_values": [50], "cw_min_values": [8],
        "max_stage_m": 6, "offered_load_grid": list(PRESET_LOAD_GRID),
    }),
    "fig3": ("throughput vs load, CW_min in {8, 16, 32}, n=50, m=6", {
        "strategies": ["BEB", "ELBA", "DCBTA"], "n_values": [50], "cw_min_values": [8, 16, 32],
        "max_stage_m": 6, "offered_load_grid": list(PRESET_LOAD_GRID),
    }),
    "fig4": ("delay vs load, n=100, CW_min=32, m=6", {
        "strategies": ["BEB", "ELBA", "DCBTA"], "n_values": [100], "cw_min_values": [32],
        "max_stage_m": 6, "offered_load_grid": list(PRESET_LOAD_GRID),
    }),
    "fig5": ("delay vs load, n=100, CW_min=64, m=6", {
        "strategies": ["BEB", "ELBA", "DCBTA"], "n_values": [100], "cw_min_values": [64],
        "max_stage_m": 6, "offered_load_grid": list(PRESET_LOAD_GRID),
    }),
    "fig6": ("delay vs load, n=100, CW_min=128, m=6", {
        "strategies": ["BEB", "ELBA", "DCBTA"], "n_values": [100], "cw_min_values": [128],
        "max_stage_m": 6, "offered_load_grid": list(PRESET_LOAD_GRID),
    }),
}

_LIST_KEYS = {"strategies": str, "n_values": int, "cw_min_values": int, "offered_load_grid": float}
_INT_KEYS = {"replications", "seed_base", "cw_max", "max_stage_m", "cw_threshold", "queue_capacity"}
_FLOAT_KEYS = {"sim_time_s", "warmup_s"}
_PHY_KEYS = {f.name for f in fields(PhyParams)}
KNOWN_KEYS = {"preset"} | set(_LIST_KEYS) | _INT_KEYS | _FLOAT_KEYS | _PHY_KEYS


def _check_type(key, value, typ):
    accepted = (int, float) if typ is float else typ
    if isinstance(value, bool) or not isinstance(value, accepted):
        raise ConfigError(f"field {key!r}: expected {typ.__name__}, got {value!r}")
    return typ(value)


def spec_from_mapping(doc: dict) -> SweepSpec:
    """Build a SweepSpec from a flat mapping; unknown keys are errors."""
    unknown = sorted(set(doc) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown field(s): {', '.join(unknown)}")
    values: dict = {}
    if "preset" in doc:
        name = doc["preset"]
        if name not in PRESETS:
            raise ConfigError(f"field 'preset': unknown preset {name!r} (have {', '.join(PRESETS)})")
        values.update(PRESETS[name][1])
    values.update({k: v for k, v in doc.items() if k != "preset"})

    clean: dict = {}
    for key, value in values.items():
        if key in _LIST_KEYS:
            if not isinstance(value, list):
                value = [value]
            clean[key] = tuple(_check_type(key, v, _LIST_KEYS[key]) for v in value)
        elif key in _INT_KEYS or key in _PHY_KEYS:
            clean[key] = _check_type(key, value, int)
        else:
            clean[key] = _check_type(key, value, float)

    try:
        defaults = BackoffParams()
        backoff = BackoffParams(
            cw_min=min(clean.get("cw_min_values", (defaults.cw_min,))),
            cw_max=clean.get("cw_max", defaults.cw_max),
            max_stage_m=clean.get("max_stage_m", defaults.max_stage_m),
            cw_threshold=clean.get("cw_threshold", clean.get("cw_max", defaults.cw_max) // 2),
        )
        phy = PhyParams(**{k: clean[k] for k in _PHY_KEYS if k in clean})
        traffic = TrafficModel(queue_capacity=clean.get("queue_capacity", 1))
        base = replace(
            DEFAULT_BASE,
            backoff=backoff,
            phy=phy,
            traffic=traffic,
            sim_time_us=int(round(clean.get("sim_time_s", DEFAULT_BASE.sim_time_us / 1e6) * 1e6)),
            warmup_us=int(round(clean.get("warmup_s", DEFAULT_BASE.warmup_us / 1e6) * 1e6)),
        )
        spec_kwargs = {k: clean[k] for k in ("strategies", "n_values", "cw_min_values",
                                             "offered_load_grid", "replications", "seed_base",
                                             "cw_threshold") if k in clean}
        return SweepSpec(base=base, **spec_kwargs)
    except (ContractViolation, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def preset(name: str) -> SweepSpec:
    return spec_from_mapping({"preset": name})


def load_config(path, preset_name: str | None = None) -> SweepSpec:
    """Read a flat TOML document into a validated SweepSpec.

    ``preset_name`` (or a ``preset`` key in the file) seeds the values; keys
    in the file override it.  An empty file gives a single BEB point at
    n=50 and offered load 0.5 with five replications.
    """
    path = Path(path)
    try:
        doc = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if preset_name is not None:
        doc.setdefault("preset", preset_name)
    try:
        return spec_from_mapping(doc)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------- output

def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value)
    return format(value, ".6g")


def _json_value(value):
    if isinstance(value, float):
        return float(format(value, ".6g"))
    return value


def render(rows, fmt: str = "csv") -> str:
    rows = list(rows)
    if not rows:
        raise ValueError("nothing to emit")
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow([_fmt(getattr(row, k)) for k in CSV_HEADER])
        return buf.getvalue()
    if fmt == "json":
        records = [{k: _json_value(getattr(row, k)) for k in CSV_HEADER} for row in rows]
        return json.dumps(records, indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r} (expected csv or json)")


def emit(rows, fmt: str = "csv", destination="-") -> None:
    """Write rows as CSV or JSON to a path, an open text stream or ``"-"`` (stdout)."""
    text = render(rows, fmt)
    if destination == "-" or destination is None:
        sys.stdout.write(text)
    elif hasattr(destination, "write"):
        destination.write(text)
    else:
        path = Path(destination)
        try:
            path.write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
