"""Dataset ingestion: UCI-style text files, per-dataset recipes, scaling, splits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import BinaryIO, Iterable

import numpy as np

__all__ = [
    "DATASET_NAMES",
    "DataError",
    "Dataset",
    "DatasetSpec",
    "SplitPair",
    "get_recipe",
    "load_dataset",
    "load_named",
    "normalize_columns",
    "parse_recipe",
    "split",
    "verify_shapes",
]

# Column order used for every results table.
DATASET_NAMES = ("abalone", "breast_cancer", "ecoli", "glass", "ilpd", "iris", "wine")

_DELIMITERS = ("comma", "whitespace")
_POLICIES = ("impute-column-mean",)


class DataError(ValueError):
    """Raised for malformed raw files or recipes."""


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    target_column: int
    delimiter: str = "comma"
    drop_columns: tuple[int, ...] = ()
    categorical_columns: tuple[int, ...] = ()
    missing_token: str = "?"
    missing_policy: str = "impute-column-mean"
    display_name: str = ""
    file: str = ""
    # Shape the loaded file is expected to have; None means unchecked.
    expect_n: int | None = None
    expect_d: int | None = None
    expect_m: int | None = None

    def __post_init__(self):
        if self.delimiter not in _DELIMITERS:
            raise DataError(f"{self.name}: unknown delimiter {self.delimiter!r}")
        if self.missing_policy not in _POLICIES:
            raise DataError(f"{self.name}: unknown missing policy {self.missing_policy!r}")
        if self.target_column in self.drop_columns:
            raise DataError(f"{self.name}: target column {self.target_column} is also dropped")
        if self.target_column in self.categorical_columns:
            raise DataError(f"{self.name}: target column cannot be a categorical feature")
        if not self.display_name:
            object.__setattr__(self, "display_name", self.name)


@dataclass(frozen=True, eq=False)
class Dataset:
    name: str
    features: np.ndarray  # (n, d), values in [0, 1]
    labels: np.ndarray  # (n,), ints in [0, m)
    class_names: tuple[str, ...]
    display_name: str = ""

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def m(self) -> int:
        return len(self.class_names)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.name == other.name
            and self.class_names == other.class_names
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
        )


@dataclass(frozen=True)
class SplitPair:
    train_indices: np.ndarray
    test_indices: np.ndarray


# -- recipes -----------------------------------------------------------------

def _int_list(value: str) -> tuple[int, ...]:
    value = value.strip()
    if not value:
        return ()
    return tuple(int(v) for v in value.replace(" ", "").split(","))


def parse_recipe(text: str) -> DatasetSpec:
    """Parse a ``key = value`` recipe. Blank lines and ``#`` comments are ignored."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise DataError(f"recipe line {lineno}: expected 'key = value', got {line!r}")
        key, value = stripped.split("=", 1)
        raw[key.strip()] = value.strip()

    for key in ("name", "target_column"):
        if key not in raw:
            raise DataError(f"recipe is missing required key {key!r}")

    kwargs = dict(
        name=raw["name"],
        target_column=int(raw["target_column"]),
        drop_columns=_int_list(raw.get("drop_columns", "")),
        categorical_columns=_int_list(raw.get("categorical_columns", "")),
        missing_token=raw.get("missing_token", "?"),
        display_name=raw.get("display_name", ""),
        file=raw.get("file", ""),
    )
    for key in ("delimiter", "missing_policy"):
        if key in raw:
            kwargs[key] = raw[key]
    for key in ("expect_n", "expect_d", "expect_m"):
        if raw.get(key):
            kwargs[key] = int(raw[key])
    unknown = set(raw) - set(kwargs) - {"delimiter", "missing_policy"}
    if unknown:
        raise DataError(f"recipe has unknown keys: {sorted(unknown)}")
    return DatasetSpec(**kwargs)


def get_recipe(name: str) -> DatasetSpec:
    """Load one of the recipes shipped with the package."""
    path = resources.files("mlpbench") / "recipes" / f"{name}.recipe"
    if not path.is_file():
        raise DataError(f"no recipe named {name!r}; known: {', '.join(DATASET_NAMES)}")
    return parse_recipe(path.read_text(encoding="utf-8"))


# -- loading -----------------------------------------------------------------

def _tokenize(text: str, delimiter: str) -> list[tuple[int, list[str]]]:
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        if delimiter == "comma":
            cells = [c.strip() for c in line.split(",")]
        else:
            cells = line.split()
        rows.append((lineno, cells))
    return rows


def load_dataset(spec: DatasetSpec, raw_file: BinaryIO | bytes | str) -> Dataset:
    """Parse a raw file according to ``spec`` and return a normalized Dataset.

    Categorical feature columns are coded by sorted category order, missing
    cells get the column mean of the non-missing raw values, features are
    min-max scaled over the whole file, and class labels are numbered in
    order of first appearance.
    """
    if isinstance(raw_file, (bytes, bytearray)):
        text = raw_file.decode("utf-8")
    elif isinstance(raw_file, str):
        text = raw_file
    else:
        text = raw_file.read().decode("utf-8")

    rows = _tokenize(text, spec.delimiter)
    if not rows:
        raise DataError(f"{spec.name}: empty file")

    arity = len(rows[0][1])
    for lineno, cells in rows:
        if len(cells) != arity:
            raise DataError(
                f"{spec.name}: row {lineno} has {len(cells)} columns, expected {arity}"
            )
    bad = [c for c in (spec.target_column, *spec.drop_columns, *spec.categorical_columns)
           if not 0 <= c < arity]
    if bad:
        raise DataError(f"{spec.name}: column indices {bad} out of range for {arity} columns")

    dropped = set(spec.drop_columns) | {spec.target_column}
    feature_cols = [j for j in range(arity) if j not in dropped]
    categorical = set(spec.categorical_columns)
    missing = spec.missing_token

    class_index: dict[str, int] = {}
    labels = np.empty(len(rows), dtype=np.int64)
    for i, (lineno, cells) in enumerate(rows):
        value = cells[spec.target_column]
        if value == missing:
            raise DataError(f"{spec.name}: row {lineno} has a missing class label")
        labels[i] = class_index.setdefault(value, len(class_index))

    raw = np.empty((len(rows), len(feature_cols)), dtype=np.float64)
    is_missing = np.zeros_like(raw, dtype=bool)
    for k, j in enumerate(feature_cols):
        column = [cells[j] for _, cells in rows]
        if j in categorical:
            codes = {c: code for code, c in enumerate(sorted(set(column) - {missing}))}
            for i, value in enumerate(column):
                if value == missing:
                    is_missing[i, k] = True
                else:
                    raw[i, k] = codes[value]
            continue
        for i, value in enumerate(column):
            if value == missing:
                is_missing[i, k] = True
                continue
            try:
                raw[i, k] = float(value)
            except ValueError:
                raise DataError(
                    f"{spec.name}: row {rows[i][0]}, column {j}: "
                    f"cannot parse {value!r} as a number"
                ) from None
            if not math.isfinite(raw[i, k]):
                raise DataError(f"{spec.name}: row {rows[i][0]}, column {j}: non-finite value")

    for k in np.flatnonzero(is_missing.any(axis=0)):
        present = ~is_missing[:, k]
        if not present.any():
            raise DataError(f"{spec.name}: column {feature_cols[k]} has no values")
        raw[~present, k] = raw[present, k].mean()

    features = normalize_columns(raw)
    features.flags.writeable = False
    labels.flags.writeable = False
    return Dataset(
        name=spec.name,
        features=features,
        labels=labels,
        class_names=tuple(class_index),
        display_name=spec.display_name,
    )


def load_named(name: str, data_dir: str | Path) -> Dataset:
    """Load a shipped recipe's dataset from ``data_dir``."""
    spec = get_recipe(name)
    path = Path(data_dir) / spec.file
    if not path.is_file():
        raise FileNotFoundError(
            f"raw file for {name!r} not found at {path}; "
            "see scripts/fetch_uci.py for the download sources"
        )
    with open(path, "rb") as fh:
        return load_dataset(spec, fh)


def normalize_columns(raw: np.ndarray) -> np.ndarray:
    """Min-max scale every column to [0, 1]; constant columns become 0.5."""
    raw = np.asarray(raw, dtype=np.float64)
    if raw.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {raw.shape}")
    if not np.isfinite(raw).all():
        raise ValueError("matrix contains non-finite entries")
    if raw.shape[0] == 0:
        raise ValueError("matrix has no rows")
    lo = raw.min(axis=0)
    hi = raw.max(axis=0)
    span = hi - lo
    constant = span == 0
    out = (raw - lo) / np.where(constant, 1.0, span)
    out[:, constant] = 0.5
    return out


def split(dataset: Dataset | int, ratio: float, rng: np.random.Generator) -> SplitPair:
    """Random train/test partition; the first ``floor(ratio * n)`` shuffled indices train."""
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must lie in (0, 1), got {ratio}")
    n = dataset if isinstance(dataset, int) else dataset.n
    if n < 2:
        raise ValueError("need at least two instances to split")
    order = rng.permutation(n)
    n_train = math.floor(ratio * n)
    return SplitPair(train_indices=order[:n_train], test_indices=order[n_train:])


def verify_shapes(data_dir: str | Path, names: Iterable[str] = DATASET_NAMES):
    """Yield ``(name, expected, found_or_error)`` for each recipe.

    ``expected`` and a successful ``found`` are ``(n, d, m)`` tuples; a load
    failure yields the exception instead.
    """
    for name in names:
        spec = get_recipe(name)
        expected = (spec.expect_n, spec.expect_d, spec.expect_m)
        try:
            ds = load_named(name, data_dir)
        except (OSError, DataError) as exc:
            yield name, expected, exc
            continue
        yield name, expected, (ds.n, ds.d, ds.m)
