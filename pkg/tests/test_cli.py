import csv
import json

import pytest

from qarchsearch.cli import main
from qarchsearch.graphs import load_dataset
from qarchsearch.search import strip_timing


@pytest.fixture
def er_dataset(tmp_path):
    path = tmp_path / "er.json"
    assert main(["gen-graphs", "--n-graphs", "3", "--n-nodes", "6", "--seed", "5", "--out", str(path)]) == 0
    return path


def test_gen_graphs_er_rotation(tmp_path, er_dataset):
    graphs, meta = load_dataset(er_dataset)
    assert len(graphs) == 3 and meta["edge_prob"] == [0.3, 0.5, 0.7]
    again = tmp_path / "again.json"
    main(["gen-graphs", "--n-graphs", "3", "--n-nodes", "6", "--seed", "5", "--out", str(again)])
    assert again.read_bytes() == er_dataset.read_bytes()
    assert (tmp_path / "er.json.manifest.json").exists()


def test_gen_graphs_regular(tmp_path):
    out = tmp_path / "rr.json"
    assert main(["gen-graphs", "--kind", "regular", "--degree", "4", "--seed", "1", "--out", str(out)]) == 0
    graphs, _ = load_dataset(out)
    assert len(graphs) == 20
    assert all(g.degrees() == [4] * 10 for g in graphs)


def test_gen_graphs_single_edge(tmp_path):
    out = tmp_path / "e.json"
    main(["gen-graphs", "--n-graphs", "1", "--n-nodes", "2", "--edge-prob", "1.0", "--out", str(out)])
    assert [g.edges for g in load_dataset(out)[0]] == [((0, 1),)]


def test_search_workers_identical(tmp_path, er_dataset):
    base = ["search", "--dataset", str(er_dataset), "--p-max", "2", "--k-max", "2", "--max-iters", "20"]
    assert main(base + ["--out", str(tmp_path / "w1"), "--workers", "1"]) == 0
    assert main(base + ["--out", str(tmp_path / "w4"), "--workers", "4"]) == 0
    for i in range(3):
        a = json.loads((tmp_path / "w1" / f"graph_{i:03d}.json").read_text())
        b = json.loads((tmp_path / "w4" / f"graph_{i:03d}.json").read_text())
        assert strip_timing(a) == strip_timing(b)
        assert len(a["candidates"]) == 60


def test_search_fixed_k_count(tmp_path, er_dataset):
    out = tmp_path / "fk"
    main(["search", "--dataset", str(er_dataset), "--graphs", "0", "--fixed-k", "--k-max", "2", "--p-max", "2",
          "--max-iters", "5", "--out", str(out)])
    assert len(json.loads((out / "graph_000.json").read_text())["candidates"]) == 50


def test_search_aggregate(tmp_path, er_dataset):
    out = tmp_path / "agg"
    main(["search", "--dataset", str(er_dataset), "--aggregate", "--p-max", "1", "--k-max", "1",
          "--max-iters", "10", "--out", str(out)])
    doc = json.loads((out / "dataset_result.json").read_text())
    assert len(doc["ranking"]) == 5 and len(doc["graphs"]) == 3


def test_evaluate_zero_delta(tmp_path, er_dataset):
    out = tmp_path / "ev"
    assert main(["evaluate", "--dataset", str(er_dataset), "--mixer", "RX", "--baseline", "RX", "--depths", "1",
                 "--max-iters", "30", "--out", str(out)]) == 0
    doc = json.loads((out / "report.json").read_text())
    assert doc["mean_delta"] == 0.0
    rows = list(csv.DictReader((out / "report.csv").open()))
    assert len(rows) == 6 and set(rows[0]) == {"graph_id", "p", "mixer", "energy", "classical", "ratio"}


def test_bench_single_serial_record(tmp_path, er_dataset):
    out = tmp_path / "b.csv"
    assert main(["bench", "--dataset", str(er_dataset), "--p", "1", "--k-max", "1", "--max-iters", "5",
                 "--reps", "1", "--workers-sweep", "1", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 1
    assert rows[0]["mode"] == "serial" and float(rows[0]["wall_time_s"]) > 0


def test_bench_sweeps(tmp_path, er_dataset):
    out = tmp_path / "b.csv"
    with pytest.warns(UserWarning, match="oversubscribed") if _cores() < 4 else _noop():
        main(["bench", "--dataset", str(er_dataset), "--p-sweep", "1..2", "--workers-sweep", "2..4:2",
              "--k-max", "1", "--max-iters", "5", "--reps", "2", "--out", str(out)])
    rows = list(csv.DictReader(out.open()))
    # 2 depths x (serial + 2 worker counts) x 2 reps
    assert len(rows) == 12
    assert {(r["mode"], r["workers"]) for r in rows} == {("serial", "1"), ("parallel", "2"), ("parallel", "4")}


def test_rerun_reproduces(tmp_path, er_dataset):
    out = tmp_path / "ev"
    main(["evaluate", "--dataset", str(er_dataset), "--mixer", "RX,RY", "--depths", "1,2", "--max-iters", "20",
          "--out", str(out)])
    assert main(["rerun", str(out / "manifest.json"), "--out", str(tmp_path / "ev2")]) == 0
    for name in ("report.json", "report.csv"):
        assert (out / name).read_bytes() == (tmp_path / "ev2" / name).read_bytes()


def test_env_workers_default(monkeypatch, tmp_path, er_dataset):
    monkeypatch.setenv("QARCH_WORKERS", "2")
    out = tmp_path / "s"
    main(["search", "--dataset", str(er_dataset), "--graphs", "0", "--p-max", "1", "--k-max", "1",
          "--max-iters", "5", "--out", str(out)])
    assert json.loads((out / "graph_000.json").read_text())["timing"]["workers"] == 2


def test_error_exit_codes(tmp_path, capsys):
    assert main(["search", "--dataset", str(tmp_path / "missing.json"), "--out", str(tmp_path / "x")]) == 5
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    assert main(["evaluate", "--dataset", str(bad), "--mixer", "RX", "--out", str(tmp_path / "y")]) == 2
    assert main(["gen-graphs", "--kind", "regular", "--n-nodes", "5", "--degree", "3", "--out",
                 str(tmp_path / "z.json")]) == 2
    err = capsys.readouterr().err.strip().splitlines()
    assert [line.split(":")[1].strip() for line in err] == ["io", "invalid-argument", "invalid-argument"]


def _cores():
    import os

    return os.cpu_count() or 1


class _noop:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False
