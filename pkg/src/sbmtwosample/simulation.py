"""Monte Carlo experiments: null calibration, size and power curves."""
from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

from . import _rng
from .deviation import TestConfig, two_sample_test
from .graph_core import InputError, PreconditionError, membership_equal_probability, sample_sbm
from .gumbel import gumbel_cdf, gumbel_quantile

__all__ = [
    "ScenarioConfig",
    "ErrorPoint",
    "ErrorCurve",
    "ReplicationOutcome",
    "CalibrationReport",
    "null_scenario_blocks",
    "dense_scenario_blocks",
    "sparse_scenario_blocks",
    "scenario_blocks",
    "replication_seed",
    "run_replication",
    "run_error_experiment",
    "run_null_calibration",
    "ks_distance",
    "read_error_csv",
]

log = logging.getLogger(__name__)

SCENARIOS = ("null_calibration", "dense", "sparse")
STATISTICS = ("T", "T_plus")
CSV_FIELDS = [
    "scenario", "n", "K", "r", "epsilon", "statistic", "hypothesis",
    "replications", "rejections", "proportion", "stderr", "seed",
]


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    n_grid: tuple[int, ...]
    K: int = 2
    r: float = 1.0  # dense scenario only; the others use log(n)/n
    epsilon: float = 0.0
    replications: int = 100
    alpha: float = 0.05
    seed: int = 0
    statistics: tuple[str, ...] = ("T",)
    test: TestConfig = field(default_factory=TestConfig)
    workers: int = 1

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise InputError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        if self.replications < 1:
            raise InputError("replications must be >= 1")
        if not 0 < self.alpha < 1:
            raise InputError("alpha must lie in (0, 1)")
        if self.epsilon < 0:
            raise InputError("epsilon must be >= 0")
        bad = set(self.statistics) - set(STATISTICS)
        if bad or not self.statistics:
            raise InputError(f"statistics must be a nonempty subset of {STATISTICS}")
        if not self.n_grid:
            raise InputError("n_grid is empty")

    @property
    def hypotheses(self) -> tuple[str, ...]:
        if self.scenario == "null_calibration" or self.epsilon == 0:
            return ("null",)
        return ("null", "alternative")


@dataclass(frozen=True)
class ErrorPoint:
    scenario: str
    n: int
    K: int
    r: float
    epsilon: float
    statistic: str
    hypothesis: str
    replications: int
    rejections: int
    proportion: float
    stderr: float
    seed: int

    def row(self) -> list[str]:
        return [
            self.scenario, str(self.n), str(self.K), repr(self.r), repr(self.epsilon),
            self.statistic, self.hypothesis, str(self.replications), str(self.rejections),
            repr(self.proportion), repr(self.stderr), str(self.seed),
        ]


@dataclass
class ErrorCurve:
    points: list[ErrorPoint] = field(default_factory=list)
    failures: dict[tuple[int, str], int] = field(default_factory=dict)

    def get(self, n: int, statistic: str = "T", hypothesis: str = "null") -> ErrorPoint:
        for p in self.points:
            if (p.n, p.statistic, p.hypothesis) == (n, statistic, hypothesis):
                return p
        raise KeyError((n, statistic, hypothesis))

    def proportions(self, statistic: str = "T", hypothesis: str = "null") -> dict[int, float]:
        return {
            p.n: p.proportion for p in self.points
            if p.statistic == statistic and p.hypothesis == hypothesis
        }

    def write_csv(self, path) -> None:
        """Write to a path, or to an already open text stream."""
        if hasattr(path, "write"):
            self._write_rows(path)
            return
        with open(path, "w", newline="") as fh:
            self._write_rows(fh)

    def _write_rows(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for p in self.points:
            w.writerow(p.row())


def read_error_csv(path) -> ErrorCurve:
    curve = ErrorCurve()
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            curve.points.append(ErrorPoint(
                scenario=rec["scenario"], n=int(rec["n"]), K=int(rec["K"]), r=float(rec["r"]),
                epsilon=float(rec["epsilon"]), statistic=rec["statistic"],
                hypothesis=rec["hypothesis"], replications=int(rec["replications"]),
                rejections=int(rec["rejections"]), proportion=float(rec["proportion"]),
                stderr=float(rec["stderr"]), seed=int(rec["seed"]),
            ))
    return curve


def null_scenario_blocks(n: int, K: int = 2) -> np.ndarray:
    """Within-block ``7 log(n)/n``, between-block ``3 log(n)/n``."""
    if n < 2:
        raise PreconditionError("n must be >= 2")
    unit = math.log(n) / n
    if 7 * unit > 1:
        raise PreconditionError(f"n={n} is too small: 7 log(n)/n = {7 * unit:.3f} > 1")
    b = np.full((K, K), 3 * unit)
    np.fill_diagonal(b, 7 * unit)
    return b


def _offset_pair(base_diag: float, base_off: float, shift: float, K: int):
    b1 = np.full((K, K), base_off)
    np.fill_diagonal(b1, base_diag)
    b2 = b1.copy()
    b2[np.diag_indices(K)] += shift
    if b2.max() > 1 or b1.min() < 0:
        raise PreconditionError("scenario block probabilities leave [0, 1]")
    return b1, b2


def dense_scenario_blocks(r: float, epsilon: float, K: int = 2):
    """``B1 = 0.05 r + 0.05 r I``, ``B2 = B1 + epsilon r I``."""
    return _offset_pair(0.1 * r, 0.05 * r, epsilon * r, K)


def sparse_scenario_blocks(n: int, epsilon: float, K: int = 2):
    """``B1 = 0.5 r + 0.5 r I``, ``B2 = B1 + epsilon r I`` with ``r = log(n)/n``."""
    r = math.log(n) / n
    return _offset_pair(r, 0.5 * r, epsilon * r, K)


def scenario_r(cfg: ScenarioConfig, n: int) -> float:
    return cfg.r if cfg.scenario == "dense" else math.log(n) / n


def scenario_blocks(cfg: ScenarioConfig, n: int, hypothesis: str):
    eps = cfg.epsilon if hypothesis == "alternative" else 0.0
    if cfg.scenario == "null_calibration":
        b = null_scenario_blocks(n, cfg.K)
        return b, b
    if cfg.scenario == "dense":
        return dense_scenario_blocks(cfg.r, eps, cfg.K)
    return sparse_scenario_blocks(n, eps, cfg.K)


def replication_seed(master: int, n: int, hypothesis: str, i: int) -> int:
    h = 0 if hypothesis == "null" else 1
    ss = np.random.SeedSequence(master, spawn_key=(_rng.REPLICATION, n, h, i))
    return int(ss.generate_state(1)[0])


@dataclass(frozen=True)
class ReplicationOutcome:
    seed: int
    values: dict[str, float]
    rejects: dict[str, bool]


def run_replication(b1, b2, n: int, K: int, alpha: float, statistics, seed: int,
                    test_cfg: TestConfig | None = None) -> ReplicationOutcome:
    """Draw a membership and two networks, test them, report per-statistic decisions."""
    test_cfg = test_cfg or TestConfig()
    s_member, s_a1, s_a2, s_test = (int(x) for x in np.random.SeedSequence(seed).generate_state(4))
    membership = membership_equal_probability(n, K, s_member)
    a1 = sample_sbm(membership, b1, s_a1)
    a2 = sample_sbm(membership, b2, s_a2)
    result = two_sample_test(a1, a2, K, replace(test_cfg, alpha=alpha, seed=s_test))
    threshold = gumbel_quantile(1 - alpha)
    values = {"T": result.statistic_T, "T_plus": result.statistic_T_plus}
    values = {k: values[k] for k in statistics}
    return ReplicationOutcome(seed, values, {k: v >= threshold for k, v in values.items()})


def _job(args):
    b1, b2, n, K, alpha, statistics, seed, test_cfg = args
    try:
        return run_replication(b1, b2, n, K, alpha, statistics, seed, test_cfg)
    except (PreconditionError, InputError) as exc:
        log.warning("replication seed=%d failed: %s", seed, exc)
        return None


def _run_jobs(jobs, workers: int):
    if workers <= 1:
        return [_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def _replications(cfg: ScenarioConfig, n: int, hypothesis: str):
    b1, b2 = scenario_blocks(cfg, n, hypothesis)
    jobs = [
        (b1, b2, n, cfg.K, cfg.alpha, cfg.statistics, replication_seed(cfg.seed, n, hypothesis, i), cfg.test)
        for i in range(cfg.replications)
    ]
    return _run_jobs(jobs, cfg.workers)


def run_error_experiment(cfg: ScenarioConfig, csv_path=None, progress=None) -> ErrorCurve:
    """Rejection proportions over ``n_grid`` under the null and (if ``epsilon > 0``) the alternative.

    With ``csv_path`` the file is rewritten after every ``(n, hypothesis)``
    cell so partial results survive an interrupted run.
    """
    curve = ErrorCurve()
    for n in cfg.n_grid:
        for hyp in cfg.hypotheses:
            outcomes = [o for o in _replications(cfg, n, hyp) if o is not None]
            failed = cfg.replications - len(outcomes)
            if failed:
                curve.failures[(n, hyp)] = failed
            eps = cfg.epsilon if hyp == "alternative" else 0.0
            for stat in cfg.statistics:
                reps = len(outcomes)
                rej = sum(o.rejects[stat] for o in outcomes)
                prop = rej / reps if reps else float("nan")
                se = math.sqrt(prop * (1 - prop) / reps) if reps else float("nan")
                curve.points.append(ErrorPoint(
                    cfg.scenario, n, cfg.K, scenario_r(cfg, n), eps, stat, hyp,
                    reps, rej, prop, se, cfg.seed,
                ))
            if csv_path is not None:
                curve.write_csv(csv_path)
            if progress is not None:
                progress(n, hyp, curve)
    return curve


def ks_distance(values) -> float:
    """Kolmogorov-Smirnov distance between a sample and the Gumbel limit law."""
    return float(stats.kstest(np.asarray(values, dtype=np.float64), gumbel_cdf).statistic)


@dataclass
class CalibrationReport:
    n: int
    values: np.ndarray
    bin_edges: np.ndarray
    counts: np.ndarray
    ks_distance: float
    rejection_rate: float
    alpha: float
    failures: int = 0

    def ecdf(self, y) -> np.ndarray:
        return np.searchsorted(np.sort(self.values), np.asarray(y), side="right") / self.values.size

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["bin_left", "bin_right", "count"])
            for lo, hi, c in zip(self.bin_edges[:-1], self.bin_edges[1:], self.counts):
                w.writerow([repr(float(lo)), repr(float(hi)), int(c)])
            fh.write(
                f"# n={self.n} replications={self.values.size} failures={self.failures} "
                f"ks_distance={self.ks_distance!r} rejection_rate={self.rejection_rate!r} alpha={self.alpha!r}\n"
            )


def run_null_calibration(cfg: ScenarioConfig, bins: int = 30) -> list[CalibrationReport]:
    """Null distribution of T per ``n`` compared with the Gumbel limit."""
    if cfg.scenario != "null_calibration":
        raise InputError("run_null_calibration needs scenario = null_calibration")
    if "T" not in cfg.statistics:
        cfg = replace(cfg, statistics=("T",) + tuple(cfg.statistics))
    reports = []
    threshold = gumbel_quantile(1 - cfg.alpha)
    for n in cfg.n_grid:
        outcomes = [o for o in _replications(cfg, n, "null") if o is not None]
        values = np.array([o.values["T"] for o in outcomes])
        counts, edges = np.histogram(values, bins=bins)
        reports.append(CalibrationReport(
            n=n,
            values=values,
            bin_edges=edges,
            counts=counts,
            ks_distance=ks_distance(values),
            rejection_rate=float(np.mean(values >= threshold)),
            alpha=cfg.alpha,
            failures=cfg.replications - len(outcomes),
        ))
    return reports
