"""Command-line interface.

Exit codes: 0 when the command ran (a test decision is part of the output),
2 for input errors, 3 for precondition violations.
"""
from __future__ import annotations

import argparse
import csv
import logging
import secrets
import shlex
import sys

import numpy as np

from .community import DetectConfig
from .data_io import load_edge_list, load_multiplex, read_config, write_edge_list
from .deviation import TestConfig, TestResult, two_sample_test
from .graph_core import InputError, PreconditionError, membership_equal_probability, sample_sbm
from .gumbel import gumbel_quantile
from .multiplex import pairwise_test_table
from .simulation import ScenarioConfig, run_error_experiment, run_null_calibration

EXIT_INPUT = 2
EXIT_PRECONDITION = 3

# (config key, type) for options shared by `test`, `pairwise` and the [test] section
TEST_KEYS = {
    "k": int, "s": int, "m": int, "alpha": float, "seed": int, "method": str,
    "resample": str, "regularizer": float, "slim_steps": int, "kmeans_restarts": int,
    "clamp": float,
}


def _convert(key, value, kind):
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise InputError(f"config key {key!r}: cannot parse {value!r} as {kind.__name__}") from None


def _merged(args, section: dict, keys: dict) -> dict:
    """Flags override config values; missing keys are absent."""
    out = {}
    for key, kind in keys.items():
        flag = getattr(args, key, None)
        if flag is not None:
            out[key] = flag
        elif key in section:
            out[key] = _convert(key, section[key], kind)
    return out


def _seed(opts: dict) -> int:
    if opts.get("seed") is None:
        opts["seed"] = secrets.randbits(32)
        print(f"# no seed given; drew seed={opts['seed']}", file=sys.stderr)
    return opts["seed"]


def _test_config(opts: dict) -> TestConfig:
    detect = DetectConfig(
        method=opts.get("method", "spectral"),
        regularizer=opts.get("regularizer"),
        slim_steps=opts.get("slim_steps", 10),
        kmeans_restarts=opts.get("kmeans_restarts", 50),
        seed=opts["seed"],
    )
    return TestConfig(
        s=opts.get("s"),
        m=opts.get("m"),
        alpha=opts.get("alpha", 0.05),
        seed=opts["seed"],
        resample=opts.get("resample", "without"),
        epsilon=opts.get("clamp"),
        detect=detect,
    )


def _repro_flags(opts: dict) -> str:
    parts = []
    for key in TEST_KEYS:
        if key in opts and opts[key] is not None:
            parts.append(f"--{key.replace('_', '-')} {opts[key]}")
    return " ".join(parts)


def _add_test_flags(p):
    p.add_argument("--k", type=int, help="number of communities (required here or in config)")
    p.add_argument("--s", type=int, help="draws per resampled aggregate (default: from sparsity)")
    p.add_argument("--m", type=int, help="realizations per community (default: n // 2K)")
    p.add_argument("--alpha", type=float, help="significance level (default 0.05)")
    p.add_argument("--method", choices=["spectral", "slim"], help="community detection method")
    p.add_argument("--resample", choices=["with", "without"], help="draw with or without replacement")
    p.add_argument("--regularizer", type=float, help="uniform regularizer (default: mean degree / n)")
    p.add_argument("--slim-steps", dest="slim_steps", type=int)
    p.add_argument("--kmeans-restarts", dest="kmeans_restarts", type=int)
    p.add_argument("--clamp", type=float, help="block clamp level (default 1/(n(n-1)))")
    p.add_argument("--seed", type=int)
    p.add_argument("--config", help="key-value config file; flags override it")


def _result_lines(res: TestResult) -> list[str]:
    rep = res.assumption_report
    lines = [
        f"statistic_T: {res.statistic_T!r}",
        f"F_n: {res.f_n!r}",
        f"threshold: {res.threshold!r}",
        f"p_value: {res.p_value!r}",
        f"reject: {str(res.reject).lower()}",
        f"alpha: {res.alpha!r}",
        f"S: {res.s_used}",
        f"M: {res.m_used}",
        f"K: {res.k_used}",
        f"seed: {res.seed}",
        f"clamp_activated: {str(res.clamp_activated).lower()}",
        f"statistic_T_plus: {res.statistic_T_plus!r}",
        f"assumptions_ok: {str(rep.all_ok).lower()}",
    ]
    lines += [f"warning: {m}" for m in rep.messages]
    return lines


def cmd_quantile(args) -> int:
    if not 0 < args.alpha < 1:
        raise InputError(f"alpha must lie in (0, 1), got {args.alpha}")
    print(f"{gumbel_quantile(1 - args.alpha):.6f}")
    return 0


def cmd_gen(args) -> int:
    section = read_config(args.config).get("gen", {}) if args.config else {}
    opts = _merged(args, section, {"n": int, "k": int, "p_in": float, "p_out": float, "seed": int})
    for key in ("n", "p_in", "p_out"):
        if key not in opts:
            raise InputError(f"gen needs --{key.replace('_', '-')}")
    K = opts.get("k", 2)
    seed = _seed(opts)
    blocks = np.full((K, K), opts["p_out"])
    np.fill_diagonal(blocks, opts["p_in"])
    member_seed, graph_seed = (int(x) for x in np.random.SeedSequence(seed).generate_state(2))
    membership = membership_equal_probability(opts["n"], K, member_seed)
    a = sample_sbm(membership, blocks, graph_seed)
    write_edge_list(args.out, a)
    if args.membership_out:
        np.savetxt(args.membership_out, membership.labels, fmt="%d")
    print(f"# reproduce: sbmtwosample gen --n {opts['n']} --k {K} --p-in {opts['p_in']} "
          f"--p-out {opts['p_out']} --seed {seed} --out {shlex.quote(args.out)}")
    print(f"edges: {a.nnz // 2}")
    return 0


def cmd_test(args) -> int:
    section = read_config(args.config).get("test", {}) if args.config else {}
    opts = _merged(args, section, TEST_KEYS)
    if "k" not in opts:
        raise InputError("the number of communities must be given with --k (or k in [test])")
    _seed(opts)
    a1 = load_edge_list(args.file_a)
    a2 = load_edge_list(args.file_b)
    res = two_sample_test(a1, a2, opts["k"], _test_config(opts))
    print(f"# reproduce: sbmtwosample test {shlex.quote(args.file_a)} {shlex.quote(args.file_b)} {_repro_flags(opts)}")
    print("\n".join(_result_lines(res)))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["statistic_T", "F_n", "threshold", "p_value", "reject", "alpha", "S", "M", "K", "seed", "statistic_T_plus"])
            w.writerow([repr(res.statistic_T), repr(res.f_n), repr(res.threshold), repr(res.p_value),
                        int(res.reject), res.alpha, res.s_used, res.m_used, res.k_used, res.seed,
                        repr(res.statistic_T_plus)])
    return 0


def cmd_pairwise(args) -> int:
    section = read_config(args.config).get("test", {}) if args.config else {}
    opts = _merged(args, section, TEST_KEYS)
    if "k" not in opts:
        raise InputError("the number of communities must be given with --k (or k in [test])")
    _seed(opts)
    data = load_multiplex(args.manifest)
    table = pairwise_test_table(data, opts["k"], _test_config(opts), include_self=args.include_self)
    print(f"# reproduce: sbmtwosample pairwise {shlex.quote(args.manifest)} {_repro_flags(opts)}")
    for i, j in table.pairs():
        a, b = table.layer_names[i], table.layer_names[j]
        if (i, j) in table.errors:
            print(f"{a} vs {b}: error: {table.errors[(i, j)]}")
        else:
            r = table.results[(i, j)]
            print(f"{a} vs {b}: T={r.statistic_T:.4f} p={r.p_value:.3g} reject={str(r.reject).lower()}")
    if args.out:
        table.write_matrix_csv(f"{args.out}_table.csv")
        table.write_long_csv(f"{args.out}_pairs.csv")
        if data.node_ids is not None:
            with open(f"{args.out}_nodes.csv", "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["index", "node_id"])
                w.writerows(enumerate(data.node_ids))
    return 0


def _split(value: str) -> list[str]:
    return [v.strip() for v in value.replace(";", ",").split(",") if v.strip()]


def scenario_from_config(path, overrides: dict | None = None) -> ScenarioConfig:
    cfg = read_config(path)
    if "scenario" not in cfg:
        raise InputError(f"{path}: missing [scenario] section")
    sc = dict(cfg["scenario"])
    sc.update({k: v for k, v in (overrides or {}).items() if v is not None})
    if "scenario" not in sc or "n_grid" not in sc:
        raise InputError(f"{path}: [scenario] needs 'scenario' and 'n_grid'")
    test_opts = _merged(argparse.Namespace(), cfg.get("test", {}), TEST_KEYS)
    test_opts["seed"] = 0  # replaced per replication
    try:
        return ScenarioConfig(
            scenario=sc["scenario"],
            n_grid=tuple(int(v) for v in _split(str(sc["n_grid"]))),
            K=int(sc.get("k", 2)),
            r=float(sc.get("r", 1.0)),
            epsilon=float(sc.get("epsilon", 0.0)),
            replications=int(sc.get("replications", 100)),
            alpha=float(sc.get("alpha", 0.05)),
            seed=int(sc["seed"]) if sc.get("seed") is not None else None,
            statistics=tuple(_split(str(sc.get("statistics", "T")))),
            test=_test_config(test_opts),
            workers=int(sc.get("workers", 1)),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"{path}: {exc}") from None


def _scenario(args) -> ScenarioConfig:
    overrides = {"seed": args.seed, "workers": args.workers, "replications": args.replications}
    cfg_seed = read_config(args.config).get("scenario", {}).get("seed")
    if args.seed is None and cfg_seed is None:
        overrides["seed"] = secrets.randbits(32)
        print(f"# no seed given; drew seed={overrides['seed']}", file=sys.stderr)
    return scenario_from_config(args.config, overrides)


def cmd_simulate(args) -> int:
    cfg = _scenario(args)
    print(f"# reproduce: sbmtwosample simulate {shlex.quote(args.config)} --seed {cfg.seed} "
          f"--replications {cfg.replications}")
    curve = run_error_experiment(cfg, csv_path=args.out)
    for p in curve.points:
        print(f"n={p.n} {p.statistic} {p.hypothesis}: {p.rejections}/{p.replications} = {p.proportion:.3f} (se {p.stderr:.3f})")
    for (n, hyp), count in sorted(curve.failures.items()):
        print(f"warning: n={n} {hyp}: {count} replication(s) failed")
    if args.out is None:
        curve.write_csv(sys.stdout)
    return 0


def cmd_null_calibrate(args) -> int:
    cfg = _scenario(args)
    print(f"# reproduce: sbmtwosample null-calibrate {shlex.quote(args.config)} --seed {cfg.seed} "
          f"--replications {cfg.replications}")
    reports = run_null_calibration(cfg)
    for rep in reports:
        print(f"n={rep.n}: KS distance {rep.ks_distance:.4f}, rejection rate {rep.rejection_rate:.3f} "
              f"at alpha={rep.alpha}, {rep.failures} failure(s)")
        if args.out:
            path = args.out if len(reports) == 1 else f"{args.out.removesuffix('.csv')}_n{rep.n}.csv"
            rep.write_csv(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sbmtwosample",
        description="Two-sample test for sparse stochastic block models.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("quantile", help="print the rejection threshold t_{1-alpha}")
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=cmd_quantile)

    p = sub.add_parser("gen", help="sample an SBM to an edge list")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--p-in", dest="p_in", type=float)
    p.add_argument("--p-out", dest="p_out", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--membership-out", dest="membership_out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("test", help="test two edge lists")
    p.add_argument("file_a")
    p.add_argument("file_b")
    _add_test_flags(p)
    p.add_argument("--out", help="write the result as a one-row CSV")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("pairwise", help="test every pair of layers in a multiplex manifest")
    p.add_argument("manifest")
    _add_test_flags(p)
    p.add_argument("--include-self", dest="include_self", action="store_true",
                   help="also test each layer against itself")
    p.add_argument("--out", help="prefix for <out>_table.csv, <out>_pairs.csv (and <out>_nodes.csv)")
    p.set_defaults(func=cmd_pairwise)

    for name, func, help_ in (
        ("simulate", cmd_simulate, "run a size/power experiment"),
        ("null-calibrate", cmd_null_calibrate, "compare the null distribution of T with its limit"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config")
        p.add_argument("--seed", type=int)
        p.add_argument("--workers", type=int)
        p.add_argument("--replications", type=int)
        p.add_argument("--out")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PreconditionError as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
