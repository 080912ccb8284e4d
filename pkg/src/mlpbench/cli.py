"""Command line interface.

    mlpbench run --dataset iris --hidden 60,80,100 --runs 10 --out results/
    mlpbench report --in results/ --format text
    mlpbench datasets verify --data-dir data/uci

Any ``run`` flag can also come from ``--config FILE``, a ``key = value`` file
whose keys are the flag names (``hidden = 60,80``); explicit flags win.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .data import DATASET_NAMES, verify_shapes
from .harness import FORMATS, ExperimentConfig, build_tables, load_results, render_tables, run_experiment

RUN_DEFAULTS = {
    "dataset": "all",
    "hidden": "60,80,100",
    "runs": "10",
    "epochs": "500",
    "seed": "0",
    "ratio": "0.7",
    "data-dir": "data/uci",
    "out": "results",
    "workers": "1",
    "beta": "1.0",
}


def read_config_file(path: str | Path) -> dict[str, str]:
    values = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SystemExit(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("_", "-")
        if key not in RUN_DEFAULTS:
            raise SystemExit(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def _dataset_list(value: str) -> tuple[str, ...]:
    if value == "all":
        return DATASET_NAMES
    names = tuple(v.strip() for v in value.split(",") if v.strip())
    unknown = [n for n in names if n not in DATASET_NAMES]
    if unknown:
        raise SystemExit(f"unknown dataset(s) {unknown}; choose from {', '.join(DATASET_NAMES)}")
    return names


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    settings = dict(RUN_DEFAULTS)
    if args.config:
        settings.update(read_config_file(args.config))
    for key in RUN_DEFAULTS:
        value = getattr(args, key.replace("-", "_"))
        if value is not None:
            settings[key] = value
    return ExperimentConfig(
        datasets=_dataset_list(settings["dataset"]),
        hidden_sizes=tuple(int(h) for h in settings["hidden"].split(",")),
        runs=int(settings["runs"]),
        epochs=int(settings["epochs"]),
        master_seed=int(settings["seed"]),
        ratio=float(settings["ratio"]),
        beta=float(settings["beta"]),
        data_dir=settings["data-dir"],
        output_dir=settings["out"],
        workers=int(settings["workers"]),
    )


def cmd_run(args) -> int:
    config = config_from_args(args)
    paths = run_experiment(config)
    tables = build_tables(load_results(paths))
    sys.stdout.write(render_tables(tables, "text"))
    print(f"\nwrote {len(paths)} result file(s) to {config.output_dir}", file=sys.stderr)
    return 0


def cmd_report(args) -> int:
    text = render_tables(build_tables(load_results(args.input)), args.format)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_verify(args) -> int:
    failed = 0
    print(f"{'dataset':<15}{'expected (n, d, m)':<22}found")
    for name, expected, found in verify_shapes(args.data_dir):
        if isinstance(found, Exception):
            status, shown = "ERROR", f"{type(found).__name__}: {found}"
        else:
            status, shown = ("ok" if found == expected else "MISMATCH"), str(found)
        failed += status != "ok"
        print(f"{name:<15}{str(expected):<22}{shown}  [{status}]")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mlpbench", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="train and evaluate; writes one JSON file per cell")
    run.add_argument("--config", help="key = value file supplying defaults for these flags")
    run.add_argument("--dataset", help="dataset name, comma-separated list, or 'all'")
    run.add_argument("--hidden", help="comma-separated hidden layer sizes (default 60,80,100)")
    run.add_argument("--runs", help="independent runs per cell (default 10)")
    run.add_argument("--epochs", help="training epochs (default 500)")
    run.add_argument("--seed", help="master seed (default 0)")
    run.add_argument("--ratio", help="training fraction (default 0.7)")
    run.add_argument("--beta", help="F-score beta (default 1)")
    run.add_argument("--data-dir", help="directory holding the raw UCI files")
    run.add_argument("--out", help="output directory for result files")
    run.add_argument("--workers", help="parallel worker processes (default 1)")
    run.set_defaults(func=cmd_run)

    report = sub.add_parser("report", help="aggregate result files into tables")
    report.add_argument("--in", dest="input", required=True,
                        help="result directory or a single result file")
    report.add_argument("--format", choices=FORMATS, default="text")
    report.add_argument("--output", help="write to this file instead of stdout")
    report.set_defaults(func=cmd_report)

    datasets = sub.add_parser("datasets", help="dataset utilities")
    dsub = datasets.add_subparsers(dest="action", required=True)
    verify = dsub.add_parser("verify", help="check (n, d, m) of every shipped recipe")
    verify.add_argument("--data-dir", default="data/uci")
    verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
