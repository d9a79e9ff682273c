"""Experiment orchestration: configs, replicate sweeps, files on disk."""

from __future__ import annotations

import configparser
import csv
import io
import json
import logging
import os
import shutil
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping, Optional

import numpy as np

from .analytics import (
    DegreeHistogram,
    aggregate_degree_frequencies,
    ci95,
    degree_histogram,
    last_k_mean,
    pair_by_parameter,
    sign_test,
)
from .engine import FounderSpec, SimParams, run_simulation
from .errors import InvalidConfig, InvalidParams, IoFailure
from .network import Strategy
from .rng import derive_seed

log = logging.getLogger(__name__)

SERIES_HEADER = "generation,node_count,edge_count,cooperator_fraction,nodes_deleted"
LAST_K = 20


@dataclass(frozen=True)
class ExperimentConfig:
    params: SimParams = field(default_factory=SimParams)
    b_grid: tuple[float, ...] = ()
    x_grid: tuple[float, ...] = ()
    replicates: int = 25
    output_dir: Path = Path("coopflux-out")
    master_seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        if self.replicates < 1:
            raise InvalidConfig("replicates must be >= 1")
        if self.jobs < 1:
            raise InvalidConfig("jobs must be >= 1")
        if not 0 <= self.master_seed < 2**63:
            raise InvalidConfig("master_seed must be a non-negative integer")

    def grid(self) -> list[tuple[float, float]]:
        """``(b, X)`` points, b-major; an empty grid falls back to the base params."""
        bs = self.b_grid or (self.params.b,)
        xs = self.x_grid or (self.params.truncation_percent,)
        return [(b, x) for b in bs for x in xs]

    def seed_for(self, grid_index: int, replicate: int) -> int:
        return derive_seed(self.master_seed, grid_index, replicate)


# -- configuration --------------------------------------------------------

_PARAM_KEYS = {
    "b": float,
    "epsilon": float,
    "m": int,
    "nodes_per_generation": int,
    "n_max": int,
    "truncation_percent": float,
    "model": str,
    "deletion_mode": str,
    "generations": int,
    "seed": int,
    "prune_components": "bool",
    "attach_to_newcomers": "bool",
}
_FOUNDER_KEYS = {
    "founder": str,
    "founder_n": int,
    "founder_mean_degree": float,
    "founder_coop_probability": float,
}
_EXPERIMENT_KEYS = {
    "b_grid": "floats",
    "x_grid": "floats",
    "replicates": int,
    "output_dir": Path,
    "master_seed": int,
    "jobs": int,
}
CONFIG_KEYS = {**_PARAM_KEYS, **_FOUNDER_KEYS, **_EXPERIMENT_KEYS}


def _coerce(key: str, raw: Any) -> Any:
    kind = CONFIG_KEYS[key]
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    try:
        if kind == "bool":
            lowered = text.lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind == "floats":
            return tuple(float(v) for v in text.replace(",", " ").split())
        if kind is int:
            return int(text, 0)
        return kind(text)
    except ValueError:
        raise InvalidConfig(f"bad value for {key}: {raw!r}") from None


def read_config_file(path: os.PathLike | str) -> dict[str, Any]:
    """Flat ``key = value`` file; an optional ``[section]`` header is ignored."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidConfig(f"cannot read config {path}: {exc}") from None
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string("[__flat__]\n" + text)
    except configparser.Error as exc:
        raise InvalidConfig(f"cannot parse config {path}: {exc}") from None
    values: dict[str, Any] = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            if key not in CONFIG_KEYS:
                raise InvalidConfig(f"unknown config key {key!r}")
            values[key] = _coerce(key, raw)
    return values


def _parse_founder(values: Mapping[str, Any]) -> FounderSpec:
    kind = str(values.get("founder", "k3-c")).lower()
    if kind in ("k3-c", "c", "cooperate", "cooperators"):
        return FounderSpec.k3(Strategy.COOPERATE)
    if kind in ("k3-d", "d", "defect", "defectors"):
        return FounderSpec.k3(Strategy.DEFECT)
    if kind == "random":
        return FounderSpec.random_graph(
            int(values.get("founder_n", values.get("n_max", 1000))),
            float(values.get("founder_mean_degree", 4.0)),
            float(values.get("founder_coop_probability", 0.5)),
        )
    raise InvalidConfig(f"unknown founder {kind!r} (use k3-c, k3-d or random)")


def build_config(*layers: Mapping[str, Any]) -> ExperimentConfig:
    """Merge key/value layers, later layers winning; ``None`` values are skipped."""
    merged: dict[str, Any] = {}
    for layer in layers:
        for key, value in layer.items():
            if value is None:
                continue
            if key not in CONFIG_KEYS:
                raise InvalidConfig(f"unknown config key {key!r}")
            merged[key] = _coerce(key, value)
    try:
        params = SimParams(
            **{k: merged[k] for k in _PARAM_KEYS if k in merged},
            founder=_parse_founder(merged),
        )
        return ExperimentConfig(
            params=params,
            **{k: merged[k] for k in _EXPERIMENT_KEYS if k in merged},
        )
    except (InvalidParams, ValueError, TypeError) as exc:
        raise InvalidConfig(str(exc)) from None


# -- running --------------------------------------------------------------


@dataclass
class ReplicateOutcome:
    replicate: int
    seed: int
    series_csv: str
    last_mean: float
    final_cooperation: float
    final_nodes: int
    final_edges: int
    final_degrees: DegreeHistogram
    initial_degrees: DegreeHistogram


def series_csv(records) -> str:
    out = io.StringIO()
    out.write(SERIES_HEADER + "\n")
    for r in records:
        out.write(f"{r.generation},{r.node_count},{r.edge_count},{r.cooperator_fraction:.6f},{r.nodes_deleted}\n")
    return out.getvalue()


def _run_replicate(job: tuple[SimParams, int]) -> ReplicateOutcome:
    params, replicate = job
    result = run_simulation(params)
    coop = result.cooperation()
    return ReplicateOutcome(
        replicate=replicate,
        seed=params.seed,
        series_csv=series_csv(result.records),
        last_mean=last_k_mean(coop, min(LAST_K, len(coop))),
        final_cooperation=float(coop[-1]),
        final_nodes=len(result.network),
        final_edges=result.network.edge_count,
        final_degrees=degree_histogram(result.network),
        initial_degrees=degree_histogram(result.initial_network),
    )


def _map(jobs: list, workers: int) -> list:
    # results come back in submission order whatever the completion order
    if workers == 1 or len(jobs) <= 1:
        return [_run_replicate(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_replicate, jobs))


def point_dirname(b: float, x: float) -> str:
    return f"b{b:g}_x{x:g}"


def _summary(params: SimParams, outcomes: list[ReplicateOutcome]) -> dict:
    means = [o.last_mean for o in outcomes]
    return {
        "b": params.b,
        "truncation_percent": params.truncation_percent,
        "model": params.model.value,
        "deletion_mode": params.deletion_mode.value,
        "founder": params.founder.label(),
        "generations": params.generations,
        "n_max": params.n_max,
        "last_k": LAST_K,
        "replicates": [
            {
                "replicate": o.replicate,
                "seed": o.seed,
                "last_mean": o.last_mean,
                "final_cooperation": o.final_cooperation,
                "final_nodes": o.final_nodes,
                "final_edges": o.final_edges,
                "final_max_degree": o.final_degrees.max_degree,
                "final_mean_degree": o.final_degrees.mean_degree,
                "initial_max_degree": o.initial_degrees.max_degree,
            }
            for o in outcomes
        ],
        "mean": float(np.mean(means)),
        "ci95": list(ci95(means)) if len(means) >= 2 else None,
    }


def _histogram_csv(hist: DegreeHistogram) -> str:
    return "degree,count\n" + "".join(f"{k},{c}\n" for k, c in sorted(hist.counts.items()))


def _aggregate_csv(hists: list[DegreeHistogram]) -> str:
    rows = aggregate_degree_frequencies(hists)
    lines = ["degree,mean_frequency,ci_low,ci_high"]
    lines += [f"{r['degree']},{r['mean_frequency']!r},{r['ci_low']!r},{r['ci_high']!r}" for r in rows]
    return "\n".join(lines) + "\n"


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _write_json(path: Path, obj: Any) -> None:
    _write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


@dataclass
class PointResult:
    b: float
    truncation_percent: float
    summary: dict
    outcomes: list[ReplicateOutcome]

    @property
    def last_means(self) -> list[float]:
        return [o.last_mean for o in self.outcomes]


def sweep(config: ExperimentConfig, params: Optional[SimParams] = None) -> list[PointResult]:
    """Run every grid point and replicate in memory; nothing touches disk."""
    base = params or config.params
    grid = config.grid()
    jobs = []
    for g, (b, x) in enumerate(grid):
        for r in range(config.replicates):
            jobs.append((replace(base, b=b, truncation_percent=x, seed=config.seed_for(g, r)), r))
    outcomes = _map(jobs, config.jobs)
    points = []
    for g, (b, x) in enumerate(grid):
        chunk = outcomes[g * config.replicates : (g + 1) * config.replicates]
        point_params = replace(base, b=b, truncation_percent=x)
        points.append(PointResult(b, x, _summary(point_params, chunk), chunk))
        log.info("b=%g X=%g mean cooperation %.4f", b, x, points[-1].summary["mean"])
    return points


def write_points(root: Path, points: list[PointResult]) -> None:
    for point in points:
        where = root / point_dirname(point.b, point.truncation_percent)
        for o in point.outcomes:
            _write(where / f"series_r{o.replicate:03d}.csv", o.series_csv)
            _write(where / f"degrees_r{o.replicate:03d}.csv", _histogram_csv(o.final_degrees))
        _write(where / "degrees_final.csv", _aggregate_csv([o.final_degrees for o in point.outcomes]))
        _write(where / "degrees_initial.csv", _aggregate_csv([o.initial_degrees for o in point.outcomes]))
        _write_json(where / "summary.json", point.summary)


class _Staging:
    """Write into a sibling temp dir, then move the finished tree into place."""

    def __init__(self, output_dir: Path):
        self.output_dir = Path(output_dir)

    def __enter__(self) -> Path:
        parent = self.output_dir.resolve().parent
        try:
            parent.mkdir(parents=True, exist_ok=True)
            self.tmp = Path(tempfile.mkdtemp(prefix=f".{self.output_dir.name}-", dir=parent))
        except OSError as exc:
            raise IoFailure(f"cannot write under {parent}: {exc}") from None
        return self.tmp

    def __exit__(self, exc_type, exc, tb):
        try:
            if exc_type is None:
                self._publish()
        finally:
            shutil.rmtree(self.tmp, ignore_errors=True)
        return False

    def _publish(self) -> None:
        try:
            if not self.output_dir.exists():
                os.rename(self.tmp, self.output_dir)
                return
            if not self.output_dir.is_dir():
                raise IoFailure(f"{self.output_dir} exists and is not a directory")
            for entry in sorted(self.tmp.iterdir()):
                target = self.output_dir / entry.name
                if target.is_dir():
                    shutil.rmtree(target)
                elif target.exists():
                    target.unlink()
                os.rename(entry, target)
        except OSError as exc:
            raise IoFailure(f"cannot publish results to {self.output_dir}: {exc}") from None


def run_experiment(config: ExperimentConfig) -> list[PointResult]:
    """Sweep ``b_grid x x_grid`` and write series, histograms and summaries."""
    points = sweep(config)
    with _Staging(config.output_dir) as tmp:
        write_points(tmp, points)
        _write_json(tmp / "config.json", config_record(config))
    return points


def compare_founders(config: ExperimentConfig) -> list[dict]:
    """Run C- and D-founded arms with shared seeds and sign-test them per X value.

    Replicate ``r`` at ``b`` in one arm is paired with replicate ``r`` at ``b``
    in the other.
    """
    arms = {}
    for strategy in (Strategy.COOPERATE, Strategy.DEFECT):
        arms[strategy] = sweep(config, replace(config.params, founder=FounderSpec.k3(strategy)))
    comparisons = [
        founder_signtest(x, arms[Strategy.COOPERATE], arms[Strategy.DEFECT])
        for x in config.x_grid or (config.params.truncation_percent,)
    ]
    with _Staging(config.output_dir) as tmp:
        write_points(tmp / "C", arms[Strategy.COOPERATE])
        write_points(tmp / "D", arms[Strategy.DEFECT])
        _write_json(tmp / "signtest.json", {"comparisons": comparisons})
        _write_json(tmp / "config.json", config_record(config))
    return comparisons


def founder_signtest(x: float, points_c: list[PointResult], points_d: list[PointResult]) -> dict:
    """Sign test of C- against D-founded last-k means at truncation ``x``.

    With every pair tied there is nothing to test: ``p_value`` is None and
    ``no_information`` is set.
    """
    pairs = [
        [(p.b, mean) for p in points if p.truncation_percent == x for mean in p.last_means]
        for points in (points_c, points_d)
    ]
    n, k = pair_by_parameter(*pairs)
    entry: dict[str, Any] = {"truncation_percent": x, "n": n, "k": k}
    if n == 0:
        entry.update(p_value=None, no_information=True)
    else:
        entry.update(p_value=sign_test(n, k).p_value, no_information=False)
    return entry


def config_record(config: ExperimentConfig) -> dict:
    p = config.params
    record = {f.name: getattr(p, f.name) for f in fields(p) if f.name != "founder"}
    record["model"] = p.model.value
    record["deletion_mode"] = p.deletion_mode.value
    record["founder"] = p.founder.label()
    record.update(
        b_grid=list(config.b_grid),
        x_grid=list(config.x_grid),
        replicates=config.replicates,
        master_seed=config.master_seed,
    )
    return record


# -- re-analysis of stored output ----------------------------------------


def read_series(path: Path) -> dict[str, np.ndarray]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or ",".join(reader.fieldnames) != SERIES_HEADER:
            raise InvalidConfig(f"{path} is not a series file")
        rows = list(reader)
    return {name: np.array([float(r[name]) for r in rows]) for name in SERIES_HEADER.split(",")}


def analyze(output_dir: os.PathLike | str, last_k: int = LAST_K) -> dict:
    """Recompute per-point cooperation summaries from stored series files."""
    root = Path(output_dir)
    if not root.is_dir():
        raise IoFailure(f"{root} is not a directory")
    points = []
    for series_dir in sorted({p.parent for p in root.rglob("series_r*.csv")}):
        means = []
        for path in sorted(series_dir.glob("series_r*.csv")):
            coop = read_series(path)["cooperator_fraction"]
            means.append(last_k_mean(coop, min(last_k, len(coop))))
        points.append(
            {
                "point": series_dir.relative_to(root).as_posix(),
                "last_means": means,
                "mean": float(np.mean(means)),
                "ci95": list(ci95(means)) if len(means) >= 2 else None,
            }
        )
    return {"last_k": last_k, "points": points}
