import json

import numpy as np
import pytest

from mlpbench.data import Dataset, load_named
from mlpbench.harness import (
    AggregateCell,
    ExperimentConfig,
    ResultsTable,
    aggregate,
    build_tables,
    derive_run_seed,
    load_results,
    parse_tables,
    render_table,
    render_tables,
    run_experiment,
    run_once,
    strip_timing,
    strip_timing_csv,
)
from mlpbench.metrics import MEASURES, MetricsReport


def test_seed_deterministic_and_distinct():
    a = derive_run_seed(0, "iris", 60, 0)
    assert a == derive_run_seed(0, "iris", 60, 0)
    assert a != derive_run_seed(0, "iris", 60, 1)
    assert a != derive_run_seed(1, "iris", 60, 0)
    assert a != derive_run_seed(0, "wine", 60, 0)
    assert a != derive_run_seed(0, "iris", 80, 0)
    assert 0 <= a < 2**64


def test_seed_rejects_negative_run_index():
    with pytest.raises(ValueError):
        derive_run_seed(0, "iris", 60, -1)


def _report(**overrides):
    values = {name: 0.5 for name, _ in MEASURES}
    values.update(overrides)
    return MetricsReport(**values)


def test_aggregate_constant():
    cells = aggregate([_report()] * 3)
    assert cells["accuracy"] == AggregateCell(0.5, 0.0)


def test_aggregate_two_points():
    cells = aggregate([_report(accuracy=0.0), _report(accuracy=1.0)])
    assert cells["accuracy"].mean == 0.5
    assert cells["accuracy"].std == pytest.approx(2**-0.5, rel=1e-15)


def test_aggregate_single_run_has_zero_std():
    assert aggregate([_report()])["mse_test"] == AggregateCell(0.5, 0.0)


def test_aggregate_undefined_propagates():
    cells = aggregate([_report(), _report(precision_macro=None), _report()])
    assert cells["precision_macro"] is None
    assert cells["precision_micro"] is not None


def test_aggregate_empty():
    with pytest.raises(ValueError):
        aggregate([])


def _table():
    cells = {m: {"abalone": AggregateCell(0.9241, 0.0047), "iris": AggregateCell(1 / 3, 0.1)}
             for m, _ in MEASURES}
    cells["precision_macro"]["abalone"] = None
    return ResultsTable(60, ["abalone", "iris"], ["Abalone", "Iris"], cells, {"abalone": 10, "iris": 10})


def test_render_text():
    text = render_table(_table(), "text")
    lines = text.splitlines()
    assert lines[0] == "n_hidden = 60"
    assert "0.9241±0.0047" in text
    row = next(line for line in lines if line.startswith("Precision_M "))
    assert row.split()[1] == "--"
    labels = [line.split()[0] for line in lines[3:]]
    assert labels == [label for _, label in MEASURES]


def test_render_csv():
    text = render_table(_table(), "csv")
    lines = text.splitlines()
    assert lines[0] == "n_hidden,measure,dataset,mean,std"
    assert "60,Precision_M,abalone,--,--" in lines
    assert f"60,Accuracy,iris,{1 / 3!r},0.1" in lines
    assert len(lines) == 1 + 2 * len(MEASURES)


def test_json_roundtrip():
    table = _table()
    again = parse_tables(render_table(table, "json"))
    assert again == [table]
    assert again[0].cells["accuracy"]["iris"].mean == 1 / 3


def test_unknown_format():
    with pytest.raises(ValueError):
        render_table(_table(), "xml")


def test_strip_timing():
    doc = {"a": [{"time_train_s": 1.0, "x": 2}], "time_train_s": 3}
    assert strip_timing(doc) == {"a": [{"x": 2}]}
    csv_text = "h\n60,Time_train,iris,1,2\n60,MSE_test,iris,1,2\n"
    assert strip_timing_csv(csv_text) == "h\n60,MSE_test,iris,1,2\n"


def test_config_validation():
    for kwargs in ({"runs": 0}, {"hidden_sizes": ()}, {"ratio": 1.0}, {"workers": 0}):
        with pytest.raises(ValueError):
            ExperimentConfig(**kwargs)


def test_echo_excludes_paths():
    echo = ExperimentConfig(data_dir="x", output_dir="y", workers=3).echo()
    assert not {"data_dir", "output_dir", "workers"} & set(echo)
    json.dumps(echo)


def test_run_once_deterministic(data_dir):
    iris = load_named("iris", data_dir)
    cfg = ExperimentConfig(epochs=50)
    a = run_once(iris, 8, 1234, cfg).to_dict()
    b = run_once(iris, 8, 1234, cfg).to_dict()
    assert strip_timing(a) == strip_timing(b)


def test_run_once_learns_toy():
    x = np.repeat(np.array([[0.0, 0.0], [1.0, 1.0]]), 20, axis=0)
    y = np.repeat([0, 1], 20)
    toy = Dataset("toy", x, y, ("a", "b"))
    report = run_once(toy, 4, 7, ExperimentConfig(epochs=100))
    assert report.accuracy == 1.0


def test_run_experiment_writes_cells(tmp_path, data_dir):
    cfg = ExperimentConfig(datasets=("iris", "wine"), hidden_sizes=(4, 6), runs=2, epochs=5,
                           data_dir=str(data_dir), output_dir=str(tmp_path))
    paths = run_experiment(cfg)
    assert sorted(p.name for p in paths) == ["iris_h4.json", "iris_h6.json",
                                             "wine_h4.json", "wine_h6.json"]
    doc = json.loads(paths[0].read_text())
    assert len(doc["runs"]) == 2
    assert doc["config"]["master_seed"] == 0
    assert doc["runs"][1]["seed"] == derive_run_seed(0, doc["dataset"], doc["n_hidden"], 1)

    tables = build_tables(load_results(tmp_path))
    assert [t.n_hidden for t in tables] == [4, 6]
    assert tables[0].datasets == ["iris", "wine"]
    assert tables[0].display_names[0] == "Iris"
    assert tables[0].runs == {"iris": 2, "wine": 2}
    for t in tables:
        for m, _ in MEASURES[3:]:
            for cell in t.cells[m].values():
                assert cell is None or (0 <= cell.mean <= 1 and cell.std >= 0)
    assert render_tables(tables, "text").count("n_hidden =") == 2


def test_load_results_empty_dir(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_results(tmp_path)
