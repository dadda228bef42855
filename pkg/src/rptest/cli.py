"""Restricted-permutation independence test for bivariate censored data.

Subcommands: ``test``, ``sample``, ``simulate`` and ``mixdiag``.

Exit codes: 0 success, 2 input error, 3 infeasible model, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import sys
from contextlib import contextmanager
from fractions import Fraction

import numpy as np

from . import diagnostics, io, simgen, stats
from .censoring import rank_bounds
from .errors import (
    ContractViolation,
    ConvergenceError,
    DegenerateNullError,
    DomainError,
    InfeasibleBoundsError,
    InvalidDatasetError,
    IsolatedNodeError,
)
from .mcmc import DEFAULT_BURN_IN, DEFAULT_THIN, SamplerConfig, sample_uniform
from .permspace import RestrictedSpace

EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERIC = 4


class UsageError(Exception):
    pass


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _common(p: argparse.ArgumentParser, mc_default: int = 1000) -> None:
    p.add_argument("--seed", type=int, default=None, help="master seed (default 0 unless --strict)")
    p.add_argument("--strict", action="store_true", help="refuse to run without an explicit --seed")
    p.add_argument("--threads", type=_positive, default=1, help="worker cap; results do not depend on it")
    p.add_argument("--burn-in", "--burnin", dest="burn_in", type=_nonneg, default=DEFAULT_BURN_IN)
    p.add_argument("--thin", type=_positive, default=DEFAULT_THIN)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rptest", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("test", help="test independence of a bivariate censored CSV")
    t.add_argument("input")
    t.add_argument("--type", choices=("right", "interval"), default=None)
    t.add_argument("--mc-samples", type=_positive, default=1000)
    t.add_argument("--perms", type=_positive, default=1000)
    t.add_argument("--estimator", choices=stats.ESTIMATORS, default="paired")
    t.add_argument("--out", default=None, help="write the JSON report here instead of stdout")
    t.add_argument("--null-out", default=None, help="write the null draws as CSV")
    _common(t)

    s = sub.add_parser("sample", help="draw uniform rank vectors for one margin")
    s.add_argument("input")
    s.add_argument("--type", choices=("right", "interval"), default=None)
    s.add_argument("--margin", choices=("x", "y"), default="x")
    s.add_argument("--count", type=_positive, default=1000)
    s.add_argument("--out", default=None)
    _common(s)

    m = sub.add_parser("simulate", help="size/power experiment")
    m.add_argument("--copula", choices=[f.value for f in simgen.Family], default="clayton")
    m.add_argument("--tau", type=_fraction, default=0.0)
    m.add_argument("--scenario", choices=[s.value for s in simgen.Scheme], default="right")
    m.add_argument("--n", type=_positive, default=50)
    m.add_argument("--reps", type=_positive, default=500)
    m.add_argument("--cr", type=float, default=9.0)
    m.add_argument("--cl", type=float, default=3.0)
    m.add_argument("--mc-samples", type=_positive, default=1000)
    m.add_argument("--perms", type=_positive, default=1000)
    m.add_argument("--level", type=float, default=0.05)
    m.add_argument("--estimator", choices=stats.ESTIMATORS, default="paired")
    m.add_argument("--out", default=None)
    _common(m)

    d = sub.add_parser("mixdiag", help="mixing study on a benchmark graph")
    d.add_argument("--graph", choices=("circulant", "regular", "watts"), default="circulant")
    d.add_argument("--n", type=_positive, default=None, help="nodes (101 for circulant, else 100)")
    d.add_argument("--jumps", type=_int_list, default=[1])
    d.add_argument("--k", type=_positive, default=None, help="degree (3 regular, 4 watts)")
    d.add_argument("--p", type=float, default=0.1, help="Watts-Strogatz rewiring probability")
    d.add_argument("--total", type=_int_list, default=list(diagnostics.DEFAULT_TOTALS),
                   help="comma-separated retained-sample checkpoints")
    d.add_argument("--seeds", type=_positive, default=20, help="number of replicate seeds")
    d.add_argument("--out", default=None)
    _common(d)
    return parser


@contextmanager
def _output(path: str | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _seed(args) -> int:
    if args.seed is None:
        if args.strict:
            raise UsageError("--strict requires --seed")
        return 0
    return args.seed


def cmd_test(args) -> int:
    seed = _seed(args)
    data = io.read_dataset(args.input, args.type)
    cfg = stats.TestConfig(
        mc_samples=args.mc_samples,
        perms=args.perms,
        burn_in=args.burn_in,
        thin=args.thin,
        seed=seed,
        estimator=args.estimator,
        threads=args.threads,
    )
    report = stats.test_independence(data, cfg)
    with _output(args.out) as fh:
        fh.write(io.dump_json(report.to_json_dict()))
    if args.null_out:
        with open(args.null_out, "w", newline="") as fh:
            io.write_csv(fh, ["index", "null_draw", "seed"],
                         ((i, float(v), seed) for i, v in enumerate(report.null_draws)))
    return 0


def cmd_sample(args) -> int:
    seed = _seed(args)
    data = io.read_dataset(args.input, args.type)
    obs = data.x if args.margin == "x" else data.y
    space = RestrictedSpace.from_bounds(rank_bounds(list(obs)))
    seq = stats.sub_seeds(seed)[0 if args.margin == "x" else 1]
    cfg = SamplerConfig(count=args.count, burn_in=args.burn_in, thin=args.thin)
    rows = sample_uniform(space, cfg, np.random.default_rng(seq))
    header = [f"r{i + 1}" for i in range(space.n)]
    comment = f"rptest sample margin={args.margin} seed={seed} burn_in={args.burn_in} thin={args.thin}"
    with _output(args.out) as fh:
        io.write_csv(fh, header, rows.tolist(), comment=comment)
    return 0


def cmd_simulate(args) -> int:
    seed = _seed(args)
    copula = simgen.CopulaSpec(simgen.Family(args.copula), args.tau)
    scenario = simgen.ScenarioSpec(
        simgen.Scheme(args.scenario), n=args.n, c_r=args.cr, c_l=args.cl, reps=args.reps, level=args.level
    )
    budgets = simgen.Budgets(args.mc_samples, args.perms, args.burn_in, args.thin)
    summary = simgen.run_experiment(copula, scenario, budgets, seed, args.estimator, args.threads)
    header = ["copula", "tau", "scenario", "c_l", "c_r", "n", "reps", "B", "perms", "level",
              "estimator", "metric", "value", "seed"]
    rows = []
    for est, metrics in summary.items():
        for metric, value in metrics.items():
            rows.append([args.copula, float(args.tau), args.scenario, float(args.cl), float(args.cr), args.n,
                         args.reps, args.mc_samples, args.perms, float(args.level), est, metric, value, seed])
    with _output(args.out) as fh:
        io.write_csv(fh, header, rows)
    return 0


def cmd_mixdiag(args) -> int:
    seed = _seed(args)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2**31,)))
    if args.graph == "circulant":
        graph = diagnostics.gen_circulant(args.n or 101, args.jumps)
    elif args.graph == "regular":
        graph = diagnostics.gen_random_regular(args.n or 100, args.k or 3, rng)
    else:
        graph = diagnostics.gen_watts_strogatz(args.n or 100, args.k or 4, args.p, rng)
    seeds = [int(s) for s in np.random.SeedSequence(seed).generate_state(args.seeds, np.uint32)]
    trace = diagnostics.mixing_report(graph, args.burn_in, args.thin, args.total, seeds)
    header = ["graph", "mode", "seed", "retained_samples", "d_sup", "d_tv", "burn_in", "thin", "master_seed"]
    rows = [[args.graph, p.mode, p.seed, p.retained, p.d_sup, p.d_tv, args.burn_in, args.thin, seed]
            for p in trace.points]
    with _output(args.out) as fh:
        io.write_csv(fh, header, rows)
    return 0


COMMANDS = {"test": cmd_test, "sample": cmd_sample, "simulate": cmd_simulate, "mixdiag": cmd_mixdiag}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"rptest: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InfeasibleBoundsError, IsolatedNodeError) as exc:
        print(f"rptest: infeasible model: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (DegenerateNullError, ConvergenceError) as exc:
        print(f"rptest: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InvalidDatasetError, ContractViolation, DomainError, OSError) as exc:
        print(f"rptest: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
