"""Full hidden-size sweep over every dataset whose raw file is present.

    python3 scripts/run_sweep.py [--runs 10] [--epochs 500] [--workers 1] [--out results/sweep]

Writes the per-cell JSON files plus ``tables/tables.{txt,csv,json}``; the
subdirectory keeps ``mlpbench report --in OUT`` working on the cell files.
Datasets with a missing raw file are skipped with a warning instead of
aborting the sweep.
"""

import argparse
import sys
from pathlib import Path

from mlpbench.data import DATASET_NAMES, get_recipe
from mlpbench.harness import ExperimentConfig, build_tables, load_results, render_tables, run_experiment


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--data-dir", default="data/uci")
    parser.add_argument("--out", default="results/sweep")
    parser.add_argument("--hidden", default="60,80,100")
    parser.add_argument("--runs", type=int, default=10)
    parser.add_argument("--epochs", type=int, default=500)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args(argv)

    present = []
    for name in DATASET_NAMES:
        if (Path(args.data_dir) / get_recipe(name).file).exists():
            present.append(name)
        else:
            print(f"skipping {name}: raw file not found in {args.data_dir}", file=sys.stderr)
    if not present:
        print("no datasets available; run scripts/fetch_uci.py first", file=sys.stderr)
        return 1

    config = ExperimentConfig(
        datasets=tuple(present),
        hidden_sizes=tuple(int(h) for h in args.hidden.split(",")),
        runs=args.runs,
        epochs=args.epochs,
        master_seed=args.seed,
        data_dir=args.data_dir,
        output_dir=args.out,
        workers=args.workers,
    )
    paths = run_experiment(config)
    tables = build_tables(load_results(paths))
    out = Path(args.out) / "tables"
    out.mkdir(exist_ok=True)
    for fmt, suffix in (("text", "txt"), ("csv", "csv"), ("json", "json")):
        (out / f"tables.{suffix}").write_text(render_tables(tables, fmt), encoding="utf-8")
    sys.stdout.write(render_tables(tables, "text"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
