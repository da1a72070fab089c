import csv
import io

import numpy as np
import pytest

from qarchsearch.circuits import GateKind
from qarchsearch.evaluator import CSV_FIELDS, approximation_ratio, compare_mixers, evaluate_mixer
from qarchsearch.exceptions import InvalidArgument
from qarchsearch.graphs import Graph, erdos_renyi, random_regular
from qarchsearch.optimizer import OptimizerConfig

RX, RY = GateKind.RX, GateKind.RY
EDGE = Graph(2, ((0, 1),))
FAST = OptimizerConfig(max_iters=40)


def test_approximation_ratio():
    assert approximation_ratio(7.5, 10.0) == 0.75
    assert approximation_ratio(3.0, 3.0) == 1.0
    with pytest.raises(InvalidArgument):
        approximation_ratio(1.0, 0.0)


def test_single_edge_dataset():
    rep = evaluate_mixer((RX,), [EDGE], [1])
    assert rep.records[0].ratio >= 0.99


def test_ratio_bounds_and_aggregates():
    data = [erdos_renyi(6, 0.5, s) for s in range(3)]
    rep = evaluate_mixer((RX, RY), data, [1, 2], FAST)
    assert all(0 < r.ratio <= 1 + 1e-9 for r in rep.records)
    for p in (1, 2):
        assert rep.mean_ratio_per_p[("searched", p)] == np.mean(rep.ratios("searched", p))
    assert rep.mean_ratio["searched"] == np.mean([rep.mean_ratio_per_p[("searched", p)] for p in (1, 2)])


def test_identical_mixers_zero_delta():
    data = [erdos_renyi(6, 0.5, s) for s in range(2)]
    cmp = compare_mixers((RX,), (RX,), data, [1, 2], FAST)
    assert all(d["delta"] == 0.0 for d in cmp.deltas)
    assert cmp.mean_delta() == 0.0


def test_deltas_consistent_with_records():
    data = [random_regular(6, 3, s) for s in range(2)]
    cmp = compare_mixers((RX, RY), (RX,), data, [1], FAST)
    by_key = {(r.graph_id, r.p, r.mixer): r.ratio for r in cmp.combined.records}
    for d in cmp.deltas:
        assert d["delta"] == by_key[(d["graph_id"], d["p"], "searched")] - by_key[(d["graph_id"], d["p"], "baseline")]
    wins, total = cmp.wins()
    assert total == 2


def test_relabel_invariance():
    g = erdos_renyi(6, 0.6, 1)
    perm = list(np.random.default_rng(2).permutation(6))
    a = evaluate_mixer((RX, RY), [g], [1])
    b = evaluate_mixer((RX, RY), [g.relabel(perm)], [1])
    assert b.records[0].ratio == pytest.approx(a.records[0].ratio, abs=1e-6)


def test_parallel_matches_serial():
    data = [erdos_renyi(6, 0.5, s) for s in range(3)]
    a = evaluate_mixer((RX,), data, [1, 2], FAST, workers=1)
    b = evaluate_mixer((RX,), data, [1, 2], FAST, workers=2)
    assert a.to_dict() == b.to_dict()


def test_csv_format():
    cmp = compare_mixers((RX, RY), (RX,), [EDGE], [1], FAST)
    rows = list(csv.reader(io.StringIO(cmp.to_csv())))
    assert tuple(rows[0]) == CSV_FIELDS
    assert {r[2] for r in rows[1:]} == {"searched", "baseline"}
    assert len(rows) == 3


def test_empty_graph_rejected():
    with pytest.raises(InvalidArgument):
        evaluate_mixer((RX,), [Graph(3, ())], [1], FAST)
    with pytest.raises(InvalidArgument):
        evaluate_mixer((RX,), [EDGE], [], FAST)
