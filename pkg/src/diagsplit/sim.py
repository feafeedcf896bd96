"""Experiment harness: seeded instance sweeps, aggregation, and persistence.

A sweep fixes a population size and a list of parameter values (infection
counts k, or probabilities p), draws ``trials`` instances per value, runs
each configured strategy on the *same* instance stream (paired comparison),
and aggregates test and stage counts.  Per-trial seeds are derived as
``derive_seed(base_seed, param_index, trial_index)`` -- independent of the
strategy, so all strategies see identical instances at a given point, and
independent of the machine, so reruns are byte-identical.

The count-aware baseline receives the true k in fixed-count sweeps.  In
probability sweeps it only gets the average count round(p*n), which can
undershoot the realized count, so there it runs with ``trust_input=False``
(leftovers are verified rather than declared healthy) to keep recovery exact.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass

from .algorithms import ALGORITHM_NAMES, AlgorithmConfig, run
from .core import (
    Combinatorial,
    InfectionModel,
    ParameterError,
    Probabilistic,
    derive_seed,
    generate_instance,
)
from .tree import is_power_of_two

__all__ = [
    "SweepError",
    "SweepSpec",
    "AggregateRow",
    "CSV_HEADER",
    "run_sweep",
    "format_csv",
    "write_csv",
    "render_chart",
    "parse_sweep_spec",
]

CSV_HEADER = (
    "algorithm,n,regime,param,trials,mean_tests,std_tests,"
    "mean_stages,std_stages,seed"
)

REGIMES = ("comb", "prob")


class SweepError(RuntimeError):
    """A strategy failed inside a sweep; carries (algorithm, param, seed)."""


@dataclass(frozen=True)
class SweepSpec:
    """One reproducible experiment grid."""

    n: int
    regime: str  # "comb" sweeps infection counts, "prob" probabilities
    params: tuple[float, ...]
    trials: int
    algorithms: tuple[str, ...]
    base_seed: int

    def validate(self) -> None:
        if self.regime not in REGIMES:
            raise ParameterError(f"regime must be one of {REGIMES}")
        if self.trials < 1:
            raise ParameterError(f"trials must be >= 1, got {self.trials}")
        if not self.params:
            raise ParameterError("params must not be empty")
        if not self.algorithms:
            raise ParameterError("algorithms must not be empty")
        for name in self.algorithms:
            if name not in ALGORITHM_NAMES:
                raise ParameterError(f"unknown algorithm {name!r}")
            if name in ("dsa", "hybrid") and not (
                is_power_of_two(self.n) and self.n >= 2
            ):
                raise ParameterError(
                    f"{name} requires a power-of-two n, got {self.n}"
                )
        for value in self.params:
            self.model_for(value)

    def model_for(self, value: float) -> InfectionModel:
        if self.regime == "comb":
            k = int(value)
            if k != value or not 0 <= k <= self.n:
                raise ParameterError(
                    f"comb sweep values must be integers in [0, {self.n}], got {value}"
                )
            return Combinatorial(k)
        if not 0.0 <= value <= 1.0:
            raise ParameterError(f"prob sweep values must lie in [0, 1], got {value}")
        return Probabilistic(float(value))

    def config_for(self, name: str, value: float) -> AlgorithmConfig:
        if name != "hgbsa":
            return AlgorithmConfig(name)
        if self.regime == "comb":
            return AlgorithmConfig("hgbsa", k_input=int(value))
        # only the average count is available; do not trust it as exact
        return AlgorithmConfig(
            "hgbsa", k_input=round(value * self.n), trust_input=False
        )


@dataclass(frozen=True)
class AggregateRow:
    algorithm: str
    n: int
    regime: str
    param: float
    trials: int
    mean_tests: float
    std_tests: float
    mean_stages: float
    std_stages: float
    seed: int


def _aggregate(values: list[int]) -> tuple[float, float]:
    mean = statistics.fmean(values)
    std = statistics.stdev(values) if len(values) > 1 else 0.0
    return mean, std


def run_sweep(spec: SweepSpec) -> list[AggregateRow]:
    """Execute the grid and return one aggregate row per (algorithm, param)."""
    spec.validate()
    rows: list[AggregateRow] = []
    for name in sorted(spec.algorithms):
        for param_index, value in enumerate(spec.params):
            model = spec.model_for(value)
            config = spec.config_for(name, value)
            tests: list[int] = []
            stages: list[int] = []
            for trial in range(spec.trials):
                seed = derive_seed(spec.base_seed, param_index, trial)
                instance = generate_instance(model, spec.n, seed)
                try:
                    result = run(instance, config)
                except Exception as exc:
                    raise SweepError(
                        f"{name} failed at param={value} seed={seed}: {exc}"
                    ) from exc
                if not result.diagnosis.matches(instance):
                    raise SweepError(
                        f"{name} misdiagnosed param={value} seed={seed}"
                    )
                tests.append(result.ledger.tests_total)
                stages.append(result.ledger.stages_total)
            mean_tests, std_tests = _aggregate(tests)
            mean_stages, std_stages = _aggregate(stages)
            rows.append(
                AggregateRow(
                    algorithm=name,
                    n=spec.n,
                    regime=spec.regime,
                    param=value,
                    trials=spec.trials,
                    mean_tests=mean_tests,
                    std_tests=std_tests,
                    mean_stages=mean_stages,
                    std_stages=std_stages,
                    seed=spec.base_seed,
                )
            )
    rows.sort(key=lambda r: (r.algorithm, r.param))
    return rows


def _format_param(row: AggregateRow) -> str:
    if row.regime == "comb":
        return str(int(row.param))
    return format(row.param, "g")


def format_csv(rows: list[AggregateRow]) -> str:
    if not rows:
        raise ParameterError("no rows to write")
    lines = [CSV_HEADER]
    for row in rows:
        lines.append(
            ",".join(
                [
                    row.algorithm,
                    str(row.n),
                    row.regime,
                    _format_param(row),
                    str(row.trials),
                    f"{row.mean_tests:.6f}",
                    f"{row.std_tests:.6f}",
                    f"{row.mean_stages:.6f}",
                    f"{row.std_stages:.6f}",
                    str(row.seed),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def write_csv(rows: list[AggregateRow], path: str) -> None:
    text = format_csv(rows)
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write(text)


def render_chart(rows: list[AggregateRow], path: str, metric: str = "tests") -> None:
    """Render mean tests or stages against the sweep parameter, one line per algorithm."""
    if not rows:
        raise ParameterError("no rows to chart")
    if metric not in ("tests", "stages"):
        raise ParameterError(f"metric must be 'tests' or 'stages', got {metric!r}")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4.5))
    by_algorithm: dict[str, list[AggregateRow]] = {}
    for row in rows:
        by_algorithm.setdefault(row.algorithm, []).append(row)
    for name in sorted(by_algorithm):
        series = sorted(by_algorithm[name], key=lambda r: r.param)
        xs = [r.param for r in series]
        ys = [r.mean_tests if metric == "tests" else r.mean_stages for r in series]
        ax.plot(xs, ys, marker="o", markersize=3, label=name)
    first = rows[0]
    ax.set_xlabel("infection count k" if first.regime == "comb" else "infection probability p")
    ax.set_ylabel(f"mean number of {metric}")
    ax.set_title(f"n={first.n}, {first.trials} trials per point")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def parse_sweep_spec(text: str) -> SweepSpec:
    """Parse the key=value sweep-spec format.

    Keys mirror the CLI flags::

        n = 16
        regime = comb
        params = 1,2,4,8,16
        trials = 500
        algorithms = bsa,hgbsa,dsa,hybrid
        seed = 1

    Blank lines and '#' comments are ignored.
    """
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"sweep spec line {lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in fields:
            raise ParameterError(f"sweep spec line {lineno}: duplicate key {key!r}")
        fields[key] = value
    required = {"n", "regime", "params", "trials", "algorithms", "seed"}
    missing = required - fields.keys()
    if missing:
        raise ParameterError(f"sweep spec missing keys: {sorted(missing)}")
    unknown = fields.keys() - required
    if unknown:
        raise ParameterError(f"sweep spec has unknown keys: {sorted(unknown)}")
    try:
        regime = fields["regime"]
        params = tuple(
            float(v) if regime == "prob" else float(int(v))
            for v in fields["params"].split(",")
        )
        spec = SweepSpec(
            n=int(fields["n"]),
            regime=regime,
            params=params,
            trials=int(fields["trials"]),
            algorithms=tuple(
                name.strip() for name in fields["algorithms"].split(",")
            ),
            base_seed=int(fields["seed"]),
        )
    except ValueError as exc:
        raise ParameterError(f"sweep spec: {exc}") from exc
    spec.validate()
    return spec
