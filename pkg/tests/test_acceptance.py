"""Exit criteria. Each test prints one PASS/FAIL line in the terminal summary."""
import math
import subprocess
import sys

import numpy as np
import pytest

from sbmtwosample.blocks import estimate_block_matrix
from sbmtwosample.data_io import load_multiplex
from sbmtwosample.deviation import TestConfig, entrywise_deviation
from sbmtwosample.graph_core import Membership
from sbmtwosample.gumbel import gumbel_cdf, gumbel_quantile
from sbmtwosample.multiplex import pairwise_test_table
from sbmtwosample.simulation import ScenarioConfig, run_error_experiment, run_null_calibration

from oracles import block_matrix_bruteforce, deviation_bruteforce, random_symmetric_binary

pytestmark = pytest.mark.acceptance


def cli(*argv, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "sbmtwosample", *map(str, argv)],
        capture_output=True, text=True, check=True, cwd=cwd,
    ).stdout


def test_1_quantile_fidelity(acceptance):
    q = float(cli("quantile", "--alpha", 0.05).strip())
    acceptance(1, "quantile fidelity", abs(q - 4.79) <= 0.005, f"printed {q:.6f}, target 4.79 +- 0.005")


def test_2_gumbel_identities(acceptance):
    at_location = abs(gumbel_cdf(-math.log(math.pi)) - math.exp(-1))
    grid = np.arange(1, 100) / 100
    round_trip = max(abs(gumbel_cdf(gumbel_quantile(p)) - p) for p in grid)
    ok = at_location <= 1e-12 and round_trip <= 1e-10
    acceptance(2, "Gumbel law identities", ok, f"|cdf(-log pi) - 1/e| = {at_location:.1e}, max round-trip error {round_trip:.1e}")


def test_3_oracle_equivalence(acceptance):
    rng = np.random.default_rng(20240601)
    worst_b = worst_rho = 0.0
    for _ in range(100):
        n = int(rng.integers(8, 41))
        K = int(rng.integers(1, 5))
        labels = np.concatenate([np.repeat(np.arange(K), 2), rng.integers(0, K, n - 2 * K)])
        rng.shuffle(labels)
        g = Membership(labels, K)
        a1 = random_symmetric_binary(n, rng.uniform(0.05, 0.8), rng)
        a2 = random_symmetric_binary(n, rng.uniform(0.05, 0.8), rng)
        b1, b2 = estimate_block_matrix(a1, g), estimate_block_matrix(a2, g)
        worst_b = max(worst_b, np.abs(b1 - block_matrix_bruteforce(a1, labels, K)).max())
        eps = 1 / (n * (n - 1))
        rho = entrywise_deviation(a1, a2, g, b1, b2, eps)
        worst_rho = max(worst_rho, np.abs(rho - deviation_bruteforce(a1, a2, labels, K, b1, b2, eps)).max())
    ok = worst_b <= 1e-12 and worst_rho <= 1e-12
    acceptance(3, "oracle equivalence", ok, f"max block error {worst_b:.1e}, max deviation error {worst_rho:.1e}")


@pytest.mark.slow
def test_4_null_calibration(acceptance):
    cfg = ScenarioConfig("null_calibration", (200,), K=2, replications=1000, seed=0)
    (rep,) = run_null_calibration(cfg)
    ok = 0.03 <= rep.rejection_rate <= 0.08 and rep.ks_distance <= 0.10 and rep.failures == 0
    acceptance(4, "null calibration n=200", ok,
               f"size {rep.rejection_rate:.3f} in [0.03, 0.08], KS {rep.ks_distance:.3f} <= 0.10, {rep.failures} failures")


def _inversions(power: list[float]) -> list[float]:
    return [a - b for a, b in zip(power, power[1:]) if b < a]


@pytest.mark.slow
def test_5_dense_size_and_power(acceptance):
    grid = (200, 600, 1000)
    cfg = ScenarioConfig("dense", grid, r=1.0, epsilon=0.04, replications=200, seed=0)
    curve = run_error_experiment(cfg)
    size = [curve.get(n, "T", "null").proportion for n in grid]
    power = [curve.get(n, "T", "alternative").proportion for n in grid]
    drops = _inversions(power)
    ok = (
        all(0.02 <= s <= 0.09 for s in size)
        and len(drops) <= 1 and all(d <= 0.05 for d in drops)
        and power[-1] >= 0.8
        and not curve.failures
    )
    acceptance(5, "dense size and power", ok, f"size {size}, power {power}")


@pytest.mark.slow
def test_6_sparse_size_and_power(acceptance):
    grid = (1000, 3000, 5000)
    cfg = ScenarioConfig("sparse", grid, epsilon=0.4, replications=100, seed=0)
    curve = run_error_experiment(cfg)
    size = [curve.get(n, "T", "null").proportion for n in grid]
    power = [curve.get(n, "T", "alternative").proportion for n in grid]
    ok = (
        all(0.01 <= s <= 0.12 for s in size)
        and power[-1] >= 0.8
        and all(d <= 0.05 for d in _inversions(power))
        and not curve.failures
    )
    acceptance(6, "sparse size and power", ok, f"size {size}, power {power}")


@pytest.mark.slow
def test_7_baseline_contrast(acceptance):
    cfg = ScenarioConfig("sparse", (2000,), epsilon=0.4, replications=100, seed=0, statistics=("T", "T_plus"))
    curve = run_error_experiment(cfg)
    t = curve.get(2000, "T", "alternative").proportion
    t_plus = curve.get(2000, "T_plus", "alternative").proportion
    acceptance(7, "T beats T_plus in the sparse design", t - t_plus >= 0.1,
               f"power T {t:.2f}, T_plus {t_plus:.2f}, gap {t - t_plus:.2f} >= 0.10")


def test_8_aucs_all_pairs_reject(acceptance, aucs_manifest):
    table = pairwise_test_table(load_multiplex(aucs_manifest), 2, TestConfig(seed=0))
    names = table.layer_names
    rejected = sum(r.reject for r in table.results.values())
    kept = [f"{names[i]}/{names[j]} T={r.statistic_T:.2f}" for (i, j), r in table.results.items() if not r.reject]
    ok = rejected == 10 and not table.errors
    acceptance(8, "AUCS layers all differ", ok,
               f"{rejected}/10 pairs reject at seed 0" + (f"; not rejected: {', '.join(kept)}" if kept else ""))


def test_9_determinism(acceptance, tmp_path, aucs_manifest):
    scenario = tmp_path / "scenario.ini"
    scenario.write_text(
        "[scenario]\nscenario = sparse\nn_grid = 300, 500\nepsilon = 0.4\n"
        "replications = 6\nseed = 7\nstatistics = T, T_plus\n"
    )
    calib = tmp_path / "calib.ini"
    calib.write_text("[scenario]\nscenario = null_calibration\nn_grid = 150\nreplications = 8\nseed = 3\n")
    outputs = {}
    for label, workers in [("first", 1), ("rerun", 1), ("parallel", 2)]:
        d = tmp_path / label
        d.mkdir()
        cli("simulate", scenario, "--workers", workers, "--out", d / "sim.csv")
        cli("null-calibrate", calib, "--workers", workers, "--out", d / "cal.csv")
        cli("pairwise", aucs_manifest, "--k", 2, "--seed", 0, "--out", d / "aucs")
        cli("gen", "--n", 80, "--p-in", 0.3, "--p-out", 0.1, "--seed", 5, "--out", d / "g1.edges")
        cli("gen", "--n", 80, "--p-in", 0.3, "--p-out", 0.1, "--seed", 6, "--out", d / "g2.edges")
        cli("test", d / "g1.edges", d / "g2.edges", "--k", 2, "--seed", 1, "--out", d / "test.csv")
        outputs[label] = {p.name: p.read_bytes() for p in sorted(d.iterdir())}
    same = outputs["first"] == outputs["rerun"] == outputs["parallel"]
    acceptance(9, "byte-identical reruns", same,
               f"{len(outputs['first'])} files compared across rerun and 2 workers")
