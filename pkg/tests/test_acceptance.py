"""Acceptance criteria, one test each.

Every test records a pass/fail line that conftest prints in the terminal
summary. The reproduction tests train real networks and take a few minutes
in total; deselect them with ``-m "not slow"``.
"""

import json
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle
from conftest import ACCEPTANCE_RESULTS, DATA_DIR
from mlpbench.cli import main
from mlpbench.data import DATASET_NAMES, get_recipe, verify_shapes
from mlpbench.harness import (
    ExperimentConfig,
    build_tables,
    load_results,
    render_tables,
    run_experiment,
    strip_timing,
    strip_timing_csv,
)
from mlpbench.metrics import (
    UNDEFINED,
    average_accuracy,
    binary_metrics,
    classification_measures,
    confusion_from_predictions,
    per_class_counts,
)
from mlpbench.network import forward, init_weights
from mlpbench.training import BackpropScratch, encode_one_hot, sgd_step


def record(name, passed, detail):
    ACCEPTANCE_RESULTS.append((name, bool(passed), detail))
    assert passed, f"{name}: {detail}"


def _sweep(tmp_path, **kwargs):
    cfg = ExperimentConfig(data_dir=str(DATA_DIR), output_dir=str(tmp_path), **kwargs)
    start = time.perf_counter()
    run_experiment(cfg)
    elapsed = time.perf_counter() - start
    return build_tables(load_results(tmp_path)), elapsed


def _cell(tables, n_hidden, measure, dataset):
    table = next(t for t in tables if t.n_hidden == n_hidden)
    return table.cells[measure][dataset]


# 1 -------------------------------------------------------------------------------

def _half_sq(net, x, t):
    return 0.5 * float(np.sum((t - forward(net, x).output) ** 2))


def test_01_gradient_oracle():
    rng = np.random.default_rng(1)
    eta, h = 0.3, 1e-6
    worst = 0.0
    start = time.perf_counter()
    for _ in range(20):
        net = init_weights(3, 5, 2, rng)
        for _ in range(10):
            x = rng.uniform(size=3)
            t = encode_one_hot(int(rng.integers(2)), 2)
            stepped = net.copy()
            sgd_step(stepped, x, t, BackpropScratch.zeros(net), eta=eta, mu=0.0)
            for attr in ("hidden_weights", "output_weights"):
                base = getattr(net, attr)
                for idx in np.ndindex(base.shape):
                    plus, minus = net.copy(), net.copy()
                    getattr(plus, attr)[idx] += h
                    getattr(minus, attr)[idx] -= h
                    grad = (_half_sq(plus, x, t) - _half_sq(minus, x, t)) / (2 * h)
                    update = getattr(stepped, attr)[idx] - base[idx]
                    expected = -eta * grad
                    worst = max(worst, abs(update - expected) / max(abs(expected), 1e-12))
    elapsed = time.perf_counter() - start
    record("1 gradient oracle", worst <= 1e-4 and elapsed < 10,
           f"max relative error {worst:.2e} (<= 1e-4), {elapsed:.2f} s (< 10 s)")


# 2 -------------------------------------------------------------------------------

def test_02_metric_oracle_equivalence():
    rng = np.random.default_rng(2)
    mismatches = 0
    start = time.perf_counter()
    for _ in range(1000):
        m = int(rng.integers(2, 9))
        n = int(rng.integers(1, 101))
        truth = [int(v) for v in rng.integers(0, m, n)]
        # bias predictions toward the truth so every regime shows up
        pred = [t if rng.random() < 0.6 else int(rng.integers(0, m)) for t in truth]
        beta = float(rng.choice([0.5, 1.0, 2.0]))
        got = classification_measures(confusion_from_predictions(truth, pred, m), beta)
        want = {k: oracle.as_float(v) for k, v in oracle.measures(truth, pred, m, beta).items()}
        mismatches += got != want
        for counts in oracle.class_counts(truth, pred, m):
            want_b = tuple(oracle.as_float(v) for v in oracle.binary(*counts, beta=beta))
            mismatches += tuple(binary_metrics(*counts, beta=beta)) != want_b
    elapsed = time.perf_counter() - start
    record("2 metric oracle equivalence", mismatches == 0 and elapsed < 30,
           f"{mismatches} mismatches over 1000 label sets, {elapsed:.2f} s (< 30 s)")


# 3 -------------------------------------------------------------------------------

confusion_matrices = st.integers(2, 8).flatmap(
    lambda m: st.lists(st.lists(st.integers(0, 15), min_size=m, max_size=m),
                       min_size=m, max_size=m)
).filter(lambda rows: sum(map(sum, rows)) > 0)


@settings(max_examples=500, deadline=None)
@given(confusion_matrices)
def _micro_identity(rows):
    cm = confusion_from_predictions(
        [i for i, row in enumerate(rows) for j, c in enumerate(row) for _ in range(c)],
        [j for row in rows for j, c in enumerate(row) for _ in range(c)],
        len(rows),
    )
    got = classification_measures(cm)
    assert got["precision_micro"] == got["sensitivity_micro"] == got["fscore_micro"]
    if all(sum(row) > 0 for row in rows):
        expected = 1 - 2 * (1 - got["sensitivity_micro"]) / cm.m
        assert average_accuracy(per_class_counts(cm)) == pytest.approx(expected, rel=0, abs=1e-15)


def test_03_micro_identity():
    try:
        _micro_identity()
        passed, detail = True, "500 random matrices, no counterexample"
    except AssertionError as exc:
        passed, detail = False, f"counterexample: {str(exc).splitlines()[0]}"
    record("3 micro identity", passed, detail)


# 4 -------------------------------------------------------------------------------

def test_04_dataset_verification(capsys):
    start = time.perf_counter()
    rows = list(verify_shapes(DATA_DIR, DATASET_NAMES))
    rc = main(["datasets", "verify", "--data-dir", str(DATA_DIR)])
    elapsed = time.perf_counter() - start
    capsys.readouterr()
    bad = [] if rc == 0 else [f"cli: exit status {rc}"]
    for name, expected, found in rows:
        if isinstance(found, Exception):
            bad.append(f"{name}: {type(found).__name__}")
        elif found != expected:
            bad.append(f"{name}: {found} != {expected}")
    # the expected shapes must be the published ones, not whatever the files hold
    published = {"abalone": (4177, 8), "breast_cancer": (699, 9), "ecoli": (336, 7),
                 "glass": (214, 9), "ilpd": (583, 10), "iris": (150, 4), "wine": (178, 13)}
    for name, (n, d) in published.items():
        spec = get_recipe(name)
        if (spec.expect_n, spec.expect_d) != (n, d):
            bad.append(f"{name}: recipe expects {(spec.expect_n, spec.expect_d)}")
    ok = sum(1 for _, expected, found in rows if found == expected)
    record("4 dataset verification", not bad and elapsed < 5,
           f"{ok}/{len(rows)} ok in {elapsed:.2f} s (< 5 s)" + (f"; {'; '.join(bad)}" if bad else ""))


# 5-8 -----------------------------------------------------------------------------

@pytest.mark.slow
def test_05_iris_reproduction(tmp_path):
    tables, elapsed = _sweep(tmp_path, datasets=("iris",), hidden_sizes=(80,))
    acc = _cell(tables, 80, "accuracy", "iris")
    passed = acc is not None and 0.80 <= acc.mean <= 1.00 and elapsed < 300
    record("5 iris reproduction", passed,
           f"average accuracy {acc.mean:.4f}±{acc.std:.4f} (in [0.80, 1.00]), {elapsed:.1f} s (< 300 s)")


@pytest.mark.slow
def test_06_wine_reproduction(tmp_path):
    tables, elapsed = _sweep(tmp_path, datasets=("wine",), hidden_sizes=(100,))
    acc = _cell(tables, 100, "accuracy", "wine")
    prec = _cell(tables, 100, "precision_micro", "wine")
    passed = acc.mean >= 0.88 and prec.mean >= 0.80 and elapsed < 300
    record("6 wine reproduction", passed,
           f"average accuracy {acc.mean:.4f} (>= 0.88), precision_mu {prec.mean:.4f} (>= 0.80), "
           f"{elapsed:.1f} s (< 300 s)")


@pytest.mark.slow
def test_07_abalone_skew_gap(tmp_path):
    tables, elapsed = _sweep(tmp_path, datasets=("abalone",), hidden_sizes=(60,), epochs=100)
    acc = _cell(tables, 60, "accuracy", "abalone")
    prec = _cell(tables, 60, "precision_micro", "abalone")
    text = render_tables(tables, "text")
    row = next(line for line in text.splitlines() if line.startswith("Precision_M "))
    rendered = row.split()[1]
    passed = acc.mean >= 0.88 and prec.mean <= 0.30 and rendered == UNDEFINED
    record("7 abalone skew gap", passed,
           f"average accuracy {acc.mean:.4f} (>= 0.88), precision_mu {prec.mean:.4f} (<= 0.30), "
           f"Precision_M renders {rendered!r}; 100 epochs, {elapsed:.1f} s")


@pytest.mark.slow
def test_08_undefined_cells(tmp_path):
    # Cells of the default sweep depend only on their own derived seeds, so
    # running just the cells this criterion inspects gives the same values.
    _sweep(tmp_path, datasets=("abalone", "glass"), hidden_sizes=(60,))
    tables, _ = _sweep(tmp_path, datasets=("iris", "wine"), hidden_sizes=(60, 80, 100))
    problems = []
    for name in ("abalone", "glass"):
        for measure in ("precision_macro", "fscore_macro"):
            if _cell(tables, 60, measure, name) is not None:
                problems.append(f"{name} h60 {measure} is defined")
    for name in ("iris", "wine"):
        for h in (60, 80, 100):
            undefined = [m for m, c in next(t for t in tables if t.n_hidden == h).column(name).items()
                         if c is None]
            if undefined:
                problems.append(f"{name} h{h} undefined: {undefined}")
    record("8 undefined-cell reproduction", not problems,
           "abalone/glass h60 show '--' for Precision_M and F-score_M; iris/wine fully defined"
           if not problems else "; ".join(problems))


# 9 -------------------------------------------------------------------------------

def _outputs(out_dir, workers):
    cfg = ExperimentConfig(datasets=("glass", "iris", "wine"), hidden_sizes=(5, 8), runs=3,
                           epochs=20, master_seed=77, data_dir=str(DATA_DIR),
                           output_dir=str(out_dir), workers=workers)
    paths = run_experiment(cfg)
    tables = build_tables(load_results(paths))
    cells = [json.dumps(strip_timing(json.loads(p.read_text())), sort_keys=True) for p in paths]
    report_json = json.dumps(strip_timing(json.loads(render_tables(tables, "json"))), indent=2)
    return strip_timing_csv(render_tables(tables, "csv")), report_json, cells


def test_09_determinism(tmp_path):
    first = _outputs(tmp_path / "a", workers=1)
    again = _outputs(tmp_path / "b", workers=1)
    parallel = _outputs(tmp_path / "c", workers=2)
    same_serial = first == again
    same_parallel = first == parallel
    record("9 determinism", same_serial and same_parallel,
           f"serial rerun identical: {same_serial}; workers=2 identical: {same_parallel} "
           f"(csv {len(first[0])} bytes, json {len(first[1])} bytes, {len(first[2])} cell files)")
