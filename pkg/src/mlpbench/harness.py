"""Experiment protocol: seeded repeated runs, aggregation and table output."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

from .data import DATASET_NAMES, Dataset, load_named, split
from .metrics import MEASURES, UNDEFINED, MetricsReport, evaluate
from .training import TrainConfig, train

__all__ = [
    "AggregateCell",
    "ExperimentConfig",
    "ResultsTable",
    "aggregate",
    "build_tables",
    "derive_run_seed",
    "load_results",
    "parse_tables",
    "render_table",
    "render_tables",
    "run_experiment",
    "run_once",
    "strip_timing",
    "strip_timing_csv",
]

log = logging.getLogger(__name__)

FORMATS = ("text", "csv", "json")


@dataclass(frozen=True)
class ExperimentConfig:
    datasets: tuple[str, ...] = DATASET_NAMES
    hidden_sizes: tuple[int, ...] = (60, 80, 100)
    runs: int = 10
    ratio: float = 0.7
    epochs: int = 500
    master_seed: int = 0
    beta: float = 1.0
    eta: float = 0.3
    mu: float = 0.1
    c: float = 1.0
    data_dir: str = "data/uci"
    output_dir: str = "results"
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "datasets", tuple(self.datasets))
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        if not self.hidden_sizes:
            raise ValueError("hidden_sizes must not be empty")
        if not 0 < self.ratio < 1:
            raise ValueError("ratio must lie in (0, 1)")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    def train_config(self, n_hidden: int, seed: int) -> TrainConfig:
        return TrainConfig(eta=self.eta, mu=self.mu, c=self.c, beta=self.beta,
                           n_hidden=n_hidden, epochs=self.epochs, seed=seed)

    def echo(self) -> dict:
        """Settings that determine results; paths and worker count are left out."""
        d = asdict(self)
        for key in ("data_dir", "output_dir", "workers"):
            d.pop(key)
        d["datasets"] = list(self.datasets)
        d["hidden_sizes"] = list(self.hidden_sizes)
        return d


def derive_run_seed(master_seed: int, dataset_name: str, n_hidden: int, run_index: int) -> int:
    """64-bit seed for one run.

    The seed is the first 8 bytes (little endian) of the BLAKE2b digest of
    ``"{master_seed}|{dataset_name}|{n_hidden}|{run_index}"``, so it depends
    on nothing but these four values.
    """
    if run_index < 0:
        raise ValueError("run_index must be non-negative")
    key = f"{master_seed}|{dataset_name}|{n_hidden}|{run_index}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


def run_once(dataset: Dataset, n_hidden: int, run_seed: int,
             config: ExperimentConfig) -> MetricsReport:
    """Split, train and evaluate once; split and weights both come from ``run_seed``."""
    rng = np.random.default_rng(run_seed)
    parts = split(dataset, config.ratio, rng)
    outcome = train(dataset, parts.train_indices, config.train_config(n_hidden, run_seed), rng)
    test = parts.test_indices
    return evaluate(outcome.net, dataset.features[test], dataset.labels[test],
                    outcome.mse_train, outcome.train_time_s, config.beta, config.c)


class AggregateCell(NamedTuple):
    mean: float
    std: float


Cell = Optional[AggregateCell]


def aggregate(reports: Sequence[MetricsReport]) -> dict[str, Cell]:
    """Mean and sample std per measure; undefined if any run is undefined."""
    if not reports:
        raise ValueError("nothing to aggregate")
    cells: dict[str, Cell] = {}
    for name, _ in MEASURES:
        values = [getattr(r, name) for r in reports]
        if any(v is None for v in values):
            cells[name] = None
            continue
        arr = np.array(values, dtype=np.float64)
        std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
        cells[name] = AggregateCell(float(arr.mean()), std)
    return cells


@dataclass
class ResultsTable:
    n_hidden: int
    datasets: list[str]
    display_names: list[str]
    # cells[measure][dataset]
    cells: dict[str, dict[str, Cell]] = field(default_factory=dict)
    runs: dict[str, int] = field(default_factory=dict)

    def column(self, dataset: str) -> dict[str, Cell]:
        return {m: self.cells[m][dataset] for m, _ in MEASURES}


# -- running ---------------------------------------------------------------------

def _run_task(task):
    dataset, n_hidden, run_index, config = task
    seed = derive_run_seed(config.master_seed, dataset.name, n_hidden, run_index)
    return seed, run_once(dataset, n_hidden, seed, config)


def result_path(output_dir: str | Path, dataset: str, n_hidden: int) -> Path:
    return Path(output_dir) / f"{dataset}_h{n_hidden}.json"


def run_experiment(config: ExperimentConfig, datasets: dict[str, Dataset] | None = None) -> list[Path]:
    """Run every (dataset, n_hidden, run) task and write one JSON file per cell.

    ``datasets`` may supply already-loaded data keyed by name; anything
    missing is loaded from ``config.data_dir``.
    """
    loaded = dict(datasets or {})
    for name in config.datasets:
        if name not in loaded:
            loaded[name] = load_named(name, config.data_dir)

    keys = [(name, h, r) for name in config.datasets for h in config.hidden_sizes
            for r in range(config.runs)]
    tasks = [(loaded[name], h, r, config) for name, h, r in keys]
    if config.workers == 1:
        outputs = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            outputs = list(pool.map(_run_task, tasks, chunksize=1))
    by_key = dict(zip(keys, outputs))

    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name in config.datasets:
        for h in config.hidden_sizes:
            runs = []
            for r in range(config.runs):
                seed, report = by_key[(name, h, r)]
                runs.append({"run_index": r, "seed": seed, "report": report.to_dict()})
            doc = {
                "dataset": name,
                "display_name": loaded[name].display_name or name,
                "n_hidden": h,
                "config": config.echo(),
                "runs": runs,
            }
            path = result_path(out_dir, name, h)
            path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
            log.info("wrote %s", path)
            paths.append(path)
    return paths


def load_results(source: str | Path | Iterable[str | Path]) -> list[dict]:
    """Read per-cell result files from a directory or an explicit list of files."""
    if isinstance(source, (str, Path)):
        source = Path(source)
        files = sorted(source.glob("*.json")) if source.is_dir() else [source]
    else:
        files = [Path(p) for p in source]
    docs = [json.loads(p.read_text(encoding="utf-8")) for p in files]
    if not docs:
        raise FileNotFoundError(f"no result files found in {source}")
    return docs


def _dataset_order(name: str):
    return (DATASET_NAMES.index(name), name) if name in DATASET_NAMES else (len(DATASET_NAMES), name)


def build_tables(docs: Iterable[dict]) -> list[ResultsTable]:
    """Aggregate result documents into one table per hidden-layer size."""
    grouped: dict[int, dict[str, dict]] = {}
    for doc in docs:
        grouped.setdefault(doc["n_hidden"], {})[doc["dataset"]] = doc
    tables = []
    for h in sorted(grouped):
        names = sorted(grouped[h], key=_dataset_order)
        table = ResultsTable(
            n_hidden=h,
            datasets=names,
            display_names=[grouped[h][n].get("display_name", n) for n in names],
            cells={m: {} for m, _ in MEASURES},
        )
        for name in names:
            runs = sorted(grouped[h][name]["runs"], key=lambda r: r["run_index"])
            column = aggregate([MetricsReport.from_dict(r["report"]) for r in runs])
            for m, _ in MEASURES:
                table.cells[m][name] = column[m]
            table.runs[name] = len(runs)
        tables.append(table)
    return tables


# -- rendering --------------------------------------------------------------------

def _cell_text(cell: Cell) -> str:
    return UNDEFINED if cell is None else f"{cell.mean:.4f}±{cell.std:.4f}"


def _render_text(table: ResultsTable) -> str:
    header = ["Measures", *table.display_names]
    rows = [[label, *(_cell_text(table.cells[m][d]) for d in table.datasets)]
            for m, label in MEASURES]
    widths = [max(len(r[i]) for r in [header, *rows]) for i in range(len(header))]
    fmt = lambda r: "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()  # noqa: E731
    lines = [f"n_hidden = {table.n_hidden}", fmt(header), fmt(["-" * w for w in widths])]
    lines += [fmt(r) for r in rows]
    return "\n".join(lines) + "\n"


CSV_HEADER = ["n_hidden", "measure", "dataset", "mean", "std"]


def _csv_rows(table: ResultsTable):
    for m, label in MEASURES:
        for d in table.datasets:
            cell = table.cells[m][d]
            if cell is None:
                yield [table.n_hidden, label, d, UNDEFINED, UNDEFINED]
            else:
                yield [table.n_hidden, label, d, repr(cell.mean), repr(cell.std)]


def _table_json(table: ResultsTable) -> dict:
    return {
        "n_hidden": table.n_hidden,
        "datasets": table.datasets,
        "display_names": table.display_names,
        "runs": table.runs,
        "cells": {
            m: {d: UNDEFINED if c is None else {"mean": c.mean, "std": c.std}
                for d, c in table.cells[m].items()}
            for m, _ in MEASURES
        },
    }


def render_tables(tables: Sequence[ResultsTable], fmt: str = "text") -> str:
    if fmt == "text":
        return "\n".join(_render_text(t) for t in tables)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for t in tables:
            writer.writerows(_csv_rows(t))
        return buf.getvalue()
    if fmt == "json":
        return json.dumps([_table_json(t) for t in tables], indent=2, ensure_ascii=False) + "\n"
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def render_table(table: ResultsTable, fmt: str = "text") -> str:
    return render_tables([table], fmt)


def parse_tables(text: str) -> list[ResultsTable]:
    """Inverse of ``render_tables(..., "json")``."""
    tables = []
    for d in json.loads(text):
        cells = {
            m: {ds: None if c == UNDEFINED else AggregateCell(c["mean"], c["std"])
                for ds, c in d["cells"][m].items()}
            for m, _ in MEASURES
        }
        tables.append(ResultsTable(d["n_hidden"], list(d["datasets"]), list(d["display_names"]),
                                   cells, dict(d.get("runs", {}))))
    return tables


def strip_timing(obj):
    """Drop wall-clock fields (``time_train_s`` keys and Time_train rows) for comparisons."""
    if isinstance(obj, dict):
        return {k: strip_timing(v) for k, v in obj.items() if k != "time_train_s"}
    if isinstance(obj, list):
        return [strip_timing(v) for v in obj]
    return obj


def strip_timing_csv(text: str) -> str:
    return "".join(line for line in text.splitlines(keepends=True)
                   if ",Time_train," not in line)

