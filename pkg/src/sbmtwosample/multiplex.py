"""All-pairs two-sample tests across the layers of a multiplex network."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from itertools import combinations

from .data_io import MultiplexDataset
from .deviation import TestConfig, TestResult, two_sample_test
from .graph_core import InputError, PreconditionError

__all__ = ["PairwiseTable", "pairwise_test_table"]


@dataclass
class PairwiseTable:
    layer_names: list[str]
    K: int
    config: TestConfig
    results: dict[tuple[int, int], TestResult] = field(default_factory=dict)
    errors: dict[tuple[int, int], str] = field(default_factory=dict)

    def pairs(self):
        return sorted(set(self.results) | set(self.errors))

    def value(self, i: int, j: int) -> float | None:
        res = self.results.get((min(i, j), max(i, j)))
        return None if res is None else res.statistic_T

    def write_matrix_csv(self, path) -> None:
        """Upper-triangular table of T values with layer names on the diagonal.

        Rejected pairs carry a trailing ``*``; failed pairs read ``NA``.
        """
        names = self.layer_names
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([""] + names)
            for i, name in enumerate(names):
                row = [name]
                for j in range(len(names)):
                    if j < i:
                        row.append("")
                    elif j == i:
                        res = self.results.get((i, i))
                        row.append(name if res is None else _cell(res))
                    elif (i, j) in self.results:
                        row.append(_cell(self.results[(i, j)]))
                    else:
                        row.append("NA")
                w.writerow(row)

    def write_long_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([
                "layer_a", "layer_b", "statistic_T", "threshold", "p_value", "reject",
                "alpha", "S", "M", "K", "seed", "clamp_activated", "error",
            ])
            for i, j in self.pairs():
                a, b = self.layer_names[i], self.layer_names[j]
                if (i, j) in self.errors:
                    w.writerow([a, b, "", "", "", "", self.config.alpha, "", "", self.K, self.config.seed, "", self.errors[(i, j)]])
                    continue
                r = self.results[(i, j)]
                w.writerow([
                    a, b, repr(r.statistic_T), repr(r.threshold), repr(r.p_value), int(r.reject),
                    r.alpha, r.s_used, r.m_used, r.k_used, r.seed, int(r.clamp_activated), "",
                ])


def _cell(res: TestResult) -> str:
    return f"{res.statistic_T:.2f}" + ("*" if res.reject else "")


def pairwise_test_table(dataset: MultiplexDataset, K: int, cfg: TestConfig | None = None,
                        include_self: bool = False) -> PairwiseTable:
    """Run the two-sample test on every unordered pair of layers.

    Every pair uses the same seed. A failing pair is recorded in ``errors``
    and the remaining pairs still run. ``include_self`` also tests each layer
    against itself as a diagnostic.
    """
    cfg = cfg or TestConfig()
    if len(dataset.layers) < 2 and not include_self:
        raise InputError("need at least two layers")
    table = PairwiseTable(list(dataset.layer_names), K, cfg)
    L = len(dataset.layers)
    pairs = list(combinations(range(L), 2))
    if include_self:
        pairs = sorted(pairs + [(i, i) for i in range(L)])
    for i, j in pairs:
        try:
            table.results[(i, j)] = two_sample_test(dataset.layers[i], dataset.layers[j], K, cfg)
        except (InputError, PreconditionError) as exc:
            table.errors[(i, j)] = str(exc)
    return table
