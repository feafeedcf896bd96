"""Command-line front end.

Subcommands::

    run       execute one strategy on one generated instance, print the ledger
    sweep     execute a sweep spec, write CSV and charts
    analytic  tabulate expected tests and bounds over a parameter sweep
    matrix    occurrence counts: single query, or full CSV dump for n <= 16
    session   interactive mode: pools are printed, outcomes typed in

Exit codes: 0 success, 1 usage error, 2 runtime error.  Relative output
paths are resolved against $DIAGSPLIT_OUT when that variable is set.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Sequence

from . import analytics, sim
from .algorithms import (
    ALGORITHM_NAMES,
    AlgorithmConfig,
    RunResult,
    drive_plan,
    plan_for,
    run,
)
from .core import (
    Combinatorial,
    InfectionModel,
    ParameterError,
    Pool,
    Probabilistic,
    TestLedger,
    generate_instance,
)
from .likelihood import (
    BRUTE_FORCE_MAX_N,
    occurrence_count,
    parse_pattern,
    write_matrix_csv,
)

__all__ = ["main"]

OUT_DIR_ENV = "DIAGSPLIT_OUT"


class _UsageError(Exception):
    """Bad flag combination detected after parsing."""


class _UsageExit(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; the contract here is 1
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        raise _UsageExit(f"{self.prog}: error: {message}")


def _parse_model(text: str) -> InfectionModel:
    kind, _, value = text.partition(":")
    if kind == "comb" and value:
        try:
            return Combinatorial(int(value))
        except ValueError:
            raise _UsageError(f"--model comb expects an integer k, got {value!r}")
    if kind == "prob" and value:
        try:
            return Probabilistic(float(value))
        except ValueError:
            raise _UsageError(f"--model prob expects a probability, got {value!r}")
    raise _UsageError(f"--model must look like comb:K or prob:P, got {text!r}")


def _resolve_out(path: str) -> str:
    base = os.environ.get(OUT_DIR_ENV)
    if base and not os.path.isabs(path):
        return os.path.join(base, path)
    return path


def _build_parser() -> _Parser:
    parser = _Parser(prog="diagsplit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one strategy on one instance")
    run_p.add_argument("--algo", required=True, choices=ALGORITHM_NAMES)
    run_p.add_argument("--n", required=True, type=int)
    run_p.add_argument("--model", required=True, help="comb:K or prob:P")
    run_p.add_argument("--seed", type=int, default=0)
    run_p.add_argument("--k-input", type=int, default=None,
                       help="believed infection count (hgbsa only)")
    run_p.add_argument("--initial-screen", action="store_true",
                       help="spend one first-stage test on the whole population")

    sweep_p = sub.add_parser("sweep", help="run a sweep and persist CSV/charts")
    sweep_p.add_argument("--spec", help="sweep-spec file (key = value lines)")
    sweep_p.add_argument("--n", type=int)
    sweep_p.add_argument("--regime", choices=sim.REGIMES)
    sweep_p.add_argument("--params", help="comma-separated k or p values")
    sweep_p.add_argument("--trials", type=int)
    sweep_p.add_argument("--algos", help="comma-separated algorithm names")
    sweep_p.add_argument("--seed", type=int, default=0)
    sweep_p.add_argument("--out", default="sweep",
                         help="output stem; writes <out>.csv and <out>_{tests,stages}.png")
    sweep_p.add_argument("--no-charts", action="store_true")

    ana_p = sub.add_parser("analytic", help="tabulate expectations and bounds")
    ana_p.add_argument("--n", required=True, type=int)
    ana_p.add_argument("--model", help="comb:K or prob:P (single row)")
    ana_p.add_argument("--regime", choices=sim.REGIMES)
    ana_p.add_argument("--params", help="comma-separated k or p values")
    ana_p.add_argument("--out", help="write CSV here instead of stdout")
    ana_p.add_argument("--upper-bound-report", action="store_true",
                       help="compare the asymptotic upper bound against E[T]")
    ana_p.add_argument("--k", type=int, default=1, help="k for the bound report")
    ana_p.add_argument("--epsilon", type=float, default=0.01,
                       help="epsilon for the bound report")

    mat_p = sub.add_parser("matrix", help="occurrence counts of outcome patterns")
    mat_p.add_argument("--n", required=True, type=int)
    mat_p.add_argument("--k", type=int)
    mat_p.add_argument("--pattern", help="bitstring, largest pool first, e.g. 1100")
    mat_p.add_argument("--out", help="dump the full matrix as CSV (n <= 16)")

    ses_p = sub.add_parser("session", help="interactive oracle session")
    ses_p.add_argument("--algo", required=True, choices=ALGORITHM_NAMES)
    ses_p.add_argument("--n", required=True, type=int)
    ses_p.add_argument("--k-input", type=int, default=None)
    ses_p.add_argument("--initial-screen", action="store_true")
    return parser


def _config_from_args(args: argparse.Namespace) -> AlgorithmConfig:
    if args.algo == "hgbsa":
        if args.k_input is None:
            raise _UsageError("--algo hgbsa requires --k-input")
        return AlgorithmConfig(
            "hgbsa", k_input=args.k_input, initial_screen=args.initial_screen
        )
    if args.k_input is not None:
        raise _UsageError("--k-input is only valid with --algo hgbsa")
    return AlgorithmConfig(args.algo, initial_screen=args.initial_screen)


def _print_ledger(result: RunResult) -> None:
    ledger = result.ledger
    print(f"tests={ledger.tests_total} stages={ledger.stages_total}")
    for number, stage in enumerate(ledger.stages, start=1):
        cells = " ".join(
            f"{{{pool.describe()}}}{'+' if outcome else '-'}"
            for pool, outcome in stage
        )
        print(f"stage {number}: {cells}")
    if result.k_estimate is not None:
        print(f"estimated_k={result.k_estimate}")
    infected = result.diagnosis.infected()
    print("infected: " + (",".join(map(str, infected)) if infected else "none"))


def _cmd_run(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    config.validate_for(args.n)
    model = _parse_model(args.model)
    instance = generate_instance(model, args.n, args.seed)
    result = run(instance, config)
    print(f"algorithm={args.algo} n={args.n} model={model.describe()} seed={args.seed}")
    _print_ledger(result)
    return 0


def _sweep_spec_from_args(args: argparse.Namespace) -> sim.SweepSpec:
    if args.spec:
        conflicting = [
            flag
            for flag, value in (
                ("--n", args.n),
                ("--regime", args.regime),
                ("--params", args.params),
                ("--trials", args.trials),
                ("--algos", args.algos),
            )
            if value is not None
        ]
        if conflicting:
            raise _UsageError(f"--spec conflicts with {', '.join(conflicting)}")
        with open(args.spec, encoding="utf-8") as fh:
            return sim.parse_sweep_spec(fh.read())
    missing = [
        flag
        for flag, value in (
            ("--n", args.n),
            ("--regime", args.regime),
            ("--params", args.params),
            ("--trials", args.trials),
            ("--algos", args.algos),
        )
        if value is None
    ]
    if missing:
        raise _UsageError(f"sweep requires --spec or {', '.join(missing)}")
    try:
        params = tuple(
            float(v) if args.regime == "prob" else float(int(v))
            for v in args.params.split(",")
        )
    except ValueError:
        raise _UsageError(f"--params could not be parsed: {args.params!r}")
    spec = sim.SweepSpec(
        n=args.n,
        regime=args.regime,
        params=params,
        trials=args.trials,
        algorithms=tuple(name.strip() for name in args.algos.split(",")),
        base_seed=args.seed,
    )
    spec.validate()
    return spec


def _cmd_sweep(args: argparse.Namespace) -> int:
    spec = _sweep_spec_from_args(args)
    rows = sim.run_sweep(spec)
    stem = _resolve_out(args.out)
    parent = os.path.dirname(stem)
    if parent:
        os.makedirs(parent, exist_ok=True)
    csv_path = stem + ".csv"
    sim.write_csv(rows, csv_path)
    written = [csv_path]
    if not args.no_charts:
        for metric in ("tests", "stages"):
            chart_path = f"{stem}_{metric}.png"
            sim.render_chart(rows, chart_path, metric=metric)
            written.append(chart_path)
    print(f"{len(rows)} rows")
    for path in written:
        print(f"wrote {path}")
    return 0


ANALYTIC_HEADER = "n,regime,param,expected_tests_dsa,counting_bound,hgbsa_bound,bsa_bound"


def _analytic_rows(n: int, models: list[InfectionModel]) -> list[str]:
    lines = [ANALYTIC_HEADER]
    for model in models:
        expected = analytics.expected_tests_dsa(n, model)
        counting = analytics.counting_bound(n, model)
        if isinstance(model, Combinatorial):
            regime, param = "comb", str(model.k)
            k = model.k
        else:
            regime, param = "prob", format(model.p, "g")
            k = round(model.p * n)
        if 1 <= k <= n:
            hgbsa = f"{analytics.hgbsa_bound(n, k):.6f}"
            bsa = f"{analytics.bsa_bound(n, k):.6f}"
        else:
            hgbsa = bsa = ""
        lines.append(
            f"{n},{regime},{param},{expected:.6f},{counting:.6f},{hgbsa},{bsa}"
        )
    return lines


def _cmd_analytic(args: argparse.Namespace) -> int:
    if args.upper_bound_report:
        ns = [1 << d for d in range(4, 11)]  # 16 .. 1024
        rows = analytics.upper_bound_report(ns, args.k, args.epsilon)
        lines = ["n,k,epsilon,c,beta,expected_tests,upper_bound,bound_over_expectation"]
        for row in rows:
            lines.append(
                f"{row['n']},{row['k']},{row['epsilon']:g},{row['c']:.6f},"
                f"{row['beta']:.6f},{row['expected_tests']:.6f},"
                f"{row['upper_bound']:.6f},{row['bound_over_expectation']:.6f}"
            )
    else:
        if args.model:
            models = [_parse_model(args.model)]
        elif args.regime and args.params:
            try:
                values = [
                    float(v) if args.regime == "prob" else int(v)
                    for v in args.params.split(",")
                ]
            except ValueError:
                raise _UsageError(f"--params could not be parsed: {args.params!r}")
            models = [
                Probabilistic(v) if args.regime == "prob" else Combinatorial(int(v))
                for v in values
            ]
        else:
            raise _UsageError("analytic requires --model, or --regime with --params")
        lines = _analytic_rows(args.n, models)
    text = "\n".join(lines) + "\n"
    if args.out:
        path = _resolve_out(args.out)
        with open(path, "w", encoding="ascii") as fh:
            fh.write(text)
        print(f"wrote {path}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_matrix(args: argparse.Namespace) -> int:
    if args.out is not None:
        if args.n > BRUTE_FORCE_MAX_N:
            raise _UsageError(
                f"--out dumps the full matrix and needs --n <= {BRUTE_FORCE_MAX_N}"
            )
        path = _resolve_out(args.out)
        write_matrix_csv(args.n, path)
        print(f"wrote {path}")
        return 0
    if args.k is None or args.pattern is None:
        raise _UsageError("matrix requires --k and --pattern, or --out for a dump")
    count = occurrence_count(args.n, args.k, parse_pattern(args.pattern))
    print(count)
    return 0


def _read_outcomes(pools: list[Pool], number: int) -> list[bool]:
    print(f"stage {number}:")
    for index, pool in enumerate(pools, start=1):
        print(f"  test {index}: {{{pool.describe()}}}")
    outcomes: list[bool] = []
    for index, pool in enumerate(pools, start=1):
        while True:
            try:
                raw = input(f"  outcome of test {index} (+/-): ")
            except EOFError:
                raise RuntimeError("input ended before all outcomes were entered")
            token = raw.strip().lower()
            if token in ("+", "1", "t", "true", "y", "yes", "positive"):
                outcomes.append(True)
                break
            if token in ("-", "0", "f", "false", "n", "no", "negative"):
                outcomes.append(False)
                break
            print("  please answer + or -")
    return outcomes


def _cmd_session(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    config.validate_for(args.n)
    ledger = TestLedger()
    stage_counter = [0]

    def submit(pools: list[Pool]) -> list[bool]:
        stage_counter[0] += 1
        outcomes = _read_outcomes(pools, stage_counter[0])
        ledger.stages.append(list(zip(pools, outcomes)))
        return outcomes

    print(f"interactive session: algorithm={args.algo} n={args.n}")
    statuses, k_estimate = drive_plan(plan_for(config, args.n), submit)
    print(f"tests={ledger.tests_total} stages={ledger.stages_total}")
    if k_estimate is not None:
        print(f"estimated_k={k_estimate}")
    infected = [str(i + 1) for i, s in enumerate(statuses) if s]
    print("infected: " + (",".join(infected) if infected else "none"))
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageExit as exc:
        print(exc, file=sys.stderr)
        return 1
    handlers = {
        "run": _cmd_run,
        "sweep": _cmd_sweep,
        "analytic": _cmd_analytic,
        "matrix": _cmd_matrix,
        "session": _cmd_session,
    }
    try:
        return handlers[args.command](args)
    except _UsageError as exc:
        print(f"diagsplit {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except ParameterError as exc:
        print(f"diagsplit {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failures: I/O, interrupted sessions, ...
        print(f"diagsplit {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
