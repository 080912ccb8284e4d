"""Download the raw UCI files the dataset recipes expect.

    python3 scripts/fetch_uci.py [--data-dir data/uci] [--only ilpd,iris] [--force]

Files already present are left alone unless ``--force`` is given. After
downloading, run ``mlpbench datasets verify`` to check the shapes.
"""

import argparse
import sys
import urllib.parse
import urllib.request
from pathlib import Path

BASE = "https://archive.ics.uci.edu/ml/machine-learning-databases/"

SOURCES = {
    "abalone": "abalone/abalone.data",
    "breast_cancer": "breast-cancer-wisconsin/breast-cancer-wisconsin.data",
    "ecoli": "ecoli/ecoli.data",
    "glass": "glass/glass.data",
    "ilpd": "00225/Indian Liver Patient Dataset (ILPD).csv",
    "iris": "iris/iris.data",
    "wine": "wine/wine.data",
}


def fetch(name: str, data_dir: Path, force: bool = False, timeout: float = 60.0) -> Path:
    rel = SOURCES[name]
    target = data_dir / Path(rel).name
    if target.exists() and not force:
        print(f"{name:<15}already present: {target}")
        return target
    url = BASE + urllib.parse.quote(rel)
    with urllib.request.urlopen(url, timeout=timeout) as resp:
        payload = resp.read()
    data_dir.mkdir(parents=True, exist_ok=True)
    target.write_bytes(payload)
    print(f"{name:<15}{len(payload):>9} bytes -> {target}")
    return target


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--data-dir", default="data/uci")
    parser.add_argument("--only", help="comma-separated dataset names")
    parser.add_argument("--force", action="store_true", help="re-download existing files")
    args = parser.parse_args(argv)

    names = list(SOURCES) if not args.only else [n.strip() for n in args.only.split(",")]
    unknown = [n for n in names if n not in SOURCES]
    if unknown:
        parser.error(f"unknown dataset(s): {unknown}")

    failed = 0
    for name in names:
        try:
            fetch(name, Path(args.data_dir), args.force)
        except OSError as exc:
            failed += 1
            print(f"{name:<15}FAILED: {exc}", file=sys.stderr)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
