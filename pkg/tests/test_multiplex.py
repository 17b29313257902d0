import csv
import math

import numpy as np
import pytest

from sbmtwosample.data_io import MultiplexDataset, load_multiplex
from sbmtwosample.deviation import TestConfig, two_sample_test
from sbmtwosample.graph_core import InputError, membership_equal_probability, sample_sbm
from sbmtwosample.multiplex import pairwise_test_table


@pytest.fixture
def small_dataset():
    g = membership_equal_probability(120, 2, seed=0)
    b = np.array([[0.3, 0.05], [0.05, 0.25]])
    layers = [sample_sbm(g, b, seed=s) for s in range(3)]
    return MultiplexDataset(["x", "y", "z"], layers)


def test_aucs_gives_ten_results(aucs_manifest):
    table = pairwise_test_table(load_multiplex(aucs_manifest), 2)
    assert len(table.results) == 10 and not table.errors
    assert table.pairs() == [(i, j) for i in range(5) for j in range(i + 1, 5)]


def test_self_pairs_never_reject(small_dataset):
    table = pairwise_test_table(small_dataset, 2, include_self=True)
    assert len(table.results) == 6
    for i in range(3):
        r = table.results[(i, i)]
        mk = r.m_used * r.k_used
        assert r.statistic_T == pytest.approx(-2 * math.log(mk) + math.log(math.log(mk)))
        assert not r.reject


def test_pair_order_does_not_matter(small_dataset):
    cfg = TestConfig(seed=5)
    a, b = small_dataset.layers[0], small_dataset.layers[2]
    r1 = two_sample_test(a, b, 2, cfg)
    r2 = two_sample_test(b, a, 2, cfg)
    assert r1.f_n == pytest.approx(r2.f_n, rel=1e-12)
    assert r1.reject == r2.reject
    table = pairwise_test_table(small_dataset, 2, cfg)
    assert table.value(2, 0) == table.value(0, 2) == pytest.approx(r1.statistic_T, rel=1e-12)


def test_failed_pair_is_marked_and_others_reported(small_dataset, tmp_path):
    # S above n fails every pair; the table still writes
    table = pairwise_test_table(small_dataset, 2, TestConfig(s=500))
    assert len(table.errors) == 3 and not table.results
    table.write_matrix_csv(tmp_path / "t.csv")
    rows = list(csv.reader(open(tmp_path / "t.csv")))
    assert rows[1][2] == "NA"


def test_matrix_csv_layout(small_dataset, tmp_path):
    table = pairwise_test_table(small_dataset, 2)
    table.write_matrix_csv(tmp_path / "t.csv")
    table.write_long_csv(tmp_path / "l.csv")
    rows = list(csv.reader(open(tmp_path / "t.csv")))
    assert rows[0] == ["", "x", "y", "z"]
    assert rows[1][1] == "x" and rows[2][1] == ""
    assert rows[1][2].rstrip("*") == f"{table.value(0, 1):.2f}"
    long_rows = list(csv.DictReader(open(tmp_path / "l.csv")))
    assert [(r["layer_a"], r["layer_b"]) for r in long_rows] == [("x", "y"), ("x", "z"), ("y", "z")]


def test_needs_two_layers():
    with pytest.raises(InputError):
        pairwise_test_table(MultiplexDataset(["only"], [np.zeros((5, 5))]), 2)
