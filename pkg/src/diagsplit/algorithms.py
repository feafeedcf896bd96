"""The four zero-error adaptive strategies over the pooled-test oracle.

* ``bsa``    -- sequential binary splitting: test the unresolved set, binary
  search toward one defective, repeat; one test per stage.
* ``hgbsa``  -- generalized binary splitting driven by a believed infection
  count: sized group tests with binary search inside positive groups, falling
  back to individual testing (one stage) once the count is at least half of
  what is unresolved.
* ``dsa``    -- diagonal splitting: each stage slices every still-suspect
  subtree into its diagonal pools, all in one batch; needs no count input.
* ``hybrid`` -- one diagonal stage, a maximum-likelihood estimate of the
  infection count from the outcome pattern, then concurrent generalized
  splitting inside the positive subtrees with the estimate apportioned by
  leaf count.

Each strategy is written as a generator that yields one batch of pools per
stage and receives the outcomes, so the same code runs against the simulated
oracle or an interactive one.  A strategy only ever learns outcomes through
these batch exchanges, which enforces the stage semantics mechanically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Generator, Sequence

from .core import (
    Diagnosis,
    InfectionInstance,
    ParameterError,
    Pool,
    TestLedger,
    submit_batch,
)
from .likelihood import allocate_estimate, estimate_for_pattern
from .tree import SubtreeRef, children_layouts, diagonal_layout, is_power_of_two

__all__ = [
    "ALGORITHM_NAMES",
    "AlgorithmConfig",
    "RunResult",
    "StrategyPlan",
    "plan_for",
    "drive_plan",
    "run",
    "run_bsa",
    "run_hgbsa",
    "run_dsa",
    "run_hybrid",
]

ALGORITHM_NAMES = ("bsa", "hgbsa", "dsa", "hybrid")

Batch = list[Pool]
# yields one batch per stage, receives outcomes, returns (statuses, k_estimate)
StrategyPlan = Generator[Batch, Sequence[bool], tuple[list[bool], int | None]]
SubmitFn = Callable[[Batch], Sequence[bool]]


@dataclass(frozen=True)
class AlgorithmConfig:
    """Which strategy to run and how.

    ``k_input`` is required for hgbsa and forbidden otherwise.  With
    ``trust_input`` set (the default) hgbsa treats the count as exact and
    declares everything left unresolved healthy, free of charge, once that
    many defectives are found; with it unset the count is only a sizing hint
    and leftovers are verified by one more pooled test, so recovery stays
    exact even when the input count is wrong.  ``initial_screen`` spends one
    extra first stage testing the whole population.
    """

    algorithm: str
    k_input: int | None = None
    trust_input: bool = True
    initial_screen: bool = False

    def validate_for(self, n: int) -> None:
        if self.algorithm not in ALGORITHM_NAMES:
            raise ParameterError(f"unknown algorithm {self.algorithm!r}")
        if self.algorithm == "hgbsa":
            if self.k_input is None:
                raise ParameterError("hgbsa requires k_input")
            if not 0 <= self.k_input <= n:
                raise ParameterError(f"k_input={self.k_input} outside [0, {n}]")
        elif self.k_input is not None:
            raise ParameterError("k_input is only meaningful for hgbsa")
        if self.algorithm in ("dsa", "hybrid") and not (
            is_power_of_two(n) and n >= 2
        ):
            raise ParameterError(
                f"{self.algorithm} requires a power-of-two population >= 2, got n={n}"
            )


@dataclass(frozen=True)
class RunResult:
    """Outcome of one full identification run."""

    diagnosis: Diagnosis
    ledger: TestLedger
    k_estimate: int | None = None


def _binary_search(
    group: list[int],
) -> Generator[Batch, Sequence[bool], tuple[int, list[int], list[int]]]:
    """Isolate one defective inside a known-positive group.

    Tests the left half, one test per stage; a negative left half is cleared
    and certifies the right half positive without a test.  Returns the
    defective, the indices cleared along the way, and the still-unknown
    indices (the set-aside right halves), in index order.
    """
    cleared: list[int] = []
    unknown: list[int] = []
    suspects = list(group)
    while len(suspects) > 1:
        half = len(suspects) // 2
        left = suspects[:half]
        positive = (yield [Pool(tuple(left))])[0]
        if positive:
            unknown = suspects[half:] + unknown
            suspects = left
        else:
            cleared += left
            suspects = suspects[half:]
    return suspects[0], cleared, unknown


def _hgbsa_session(
    items: list[int], k_believed: int, trust: bool
) -> Generator[Batch, Sequence[bool], dict[int, bool]]:
    """Generalized binary splitting over ``items``, one round per yield."""
    status: dict[int, bool] = {}
    pending = list(items)
    k = k_believed
    extra_defectives = 0
    while pending:
        if k <= 0:
            if trust:
                for i in pending:
                    status[i] = False
                break
            # Believed count exhausted with items left: verify the leftovers
            # with one pooled test and keep splitting out extra defectives.
            # Once that has cost as much as testing the leftovers one by one
            # would, the estimate is hopeless; finish individually instead.
            search_cost = 1 + (len(pending) - 1).bit_length()
            if extra_defectives * search_cost >= len(pending):
                outcomes = yield [Pool((i,)) for i in pending]
                for i, positive in zip(pending, outcomes):
                    status[i] = positive
                break
            positive = (yield [Pool(tuple(pending))])[0]
            if not positive:
                for i in pending:
                    status[i] = False
                break
            defective, cleared, unknown = yield from _binary_search(pending)
            status[defective] = True
            for i in cleared:
                status[i] = False
            pending = unknown
            extra_defectives += 1
            continue
        remaining = len(pending)
        if 2 * k >= remaining + 1:
            # dense regime: test everyone left individually, in one stage
            outcomes = yield [Pool((i,)) for i in pending]
            for i, positive in zip(pending, outcomes):
                status[i] = positive
            break
        alpha = ((remaining - k + 1) // k).bit_length() - 1
        group = pending[: 1 << alpha]
        positive = (yield [Pool(tuple(group))])[0]
        if not positive:
            for i in group:
                status[i] = False
            pending = pending[len(group):]
            continue
        defective, cleared, unknown = yield from _binary_search(group)
        status[defective] = True
        for i in cleared:
            status[i] = False
        pending = unknown + pending[len(group):]
        k -= 1
    return status


def _merge_rounds(
    sessions: list[Generator[Batch, Sequence[bool], dict[int, bool]]],
) -> Generator[Batch, Sequence[bool], list[dict[int, bool]]]:
    """Run sessions in lockstep, merging their same-round tests into one batch."""
    results: list[dict[int, bool]] = [{} for _ in sessions]
    requests: list[tuple[int, Batch]] = []
    for idx, session in enumerate(sessions):
        try:
            requests.append((idx, next(session)))
        except StopIteration as stop:
            results[idx] = stop.value
    while requests:
        merged = [pool for _, batch in requests for pool in batch]
        outcomes = yield merged
        cursor = 0
        next_requests: list[tuple[int, Batch]] = []
        for idx, batch in requests:
            share = list(outcomes[cursor : cursor + len(batch)])
            cursor += len(batch)
            try:
                next_requests.append((idx, sessions[idx].send(share)))
            except StopIteration as stop:
                results[idx] = stop.value
        requests = next_requests
    return results


def _screen(n: int) -> Generator[Batch, Sequence[bool], bool]:
    positive = (yield [Pool.over(1, n)])[0]
    return positive


def _bsa_plan(n: int, initial_screen: bool) -> StrategyPlan:
    statuses: list[bool | None] = [None] * n
    if initial_screen and not (yield from _screen(n)):
        return [False] * n, None
    pending = list(range(1, n + 1))
    while pending:
        positive = (yield [Pool(tuple(pending))])[0]
        if not positive:
            for i in pending:
                statuses[i - 1] = False
            break
        defective, cleared, unknown = yield from _binary_search(pending)
        statuses[defective - 1] = True
        for i in cleared:
            statuses[i - 1] = False
        pending = unknown
    return [bool(s) for s in statuses], None


def _hgbsa_plan(
    n: int, k_input: int, trust_input: bool, initial_screen: bool
) -> StrategyPlan:
    if initial_screen and not (yield from _screen(n)):
        return [False] * n, None
    result = yield from _hgbsa_session(list(range(1, n + 1)), k_input, trust_input)
    return [result[i] for i in range(1, n + 1)], None


def _dsa_plan(n: int, initial_screen: bool) -> StrategyPlan:
    statuses: list[bool | None] = [None] * n
    if initial_screen and not (yield from _screen(n)):
        return [False] * n, None
    layouts = [diagonal_layout(SubtreeRef.root(n))]
    while layouts:
        pools = [pool for layout in layouts for pool in layout.pools]
        outcomes = yield pools
        next_layouts = []
        cursor = 0
        for layout in layouts:
            share = list(outcomes[cursor : cursor + len(layout.pools)])
            cursor += len(layout.pools)
            for pool, positive in zip(layout.pools, share):
                if not positive:
                    for m in pool.members:
                        statuses[m - 1] = False
                elif pool.size == 1:
                    statuses[pool.members[0] - 1] = True
            next_layouts.extend(
                diagonal_layout(ref) for ref in children_layouts(layout, share)
            )
        layouts = next_layouts
    return [bool(s) for s in statuses], None


def _hybrid_plan(n: int, initial_screen: bool) -> StrategyPlan:
    statuses: list[bool | None] = [None] * n
    if initial_screen and not (yield from _screen(n)):
        return [False] * n, 0
    layout = diagonal_layout(SubtreeRef.root(n))
    outcomes = list((yield list(layout.pools)))
    k_hat = estimate_for_pattern(n, tuple(outcomes))
    certified = 0
    for pool, positive in zip(layout.pools, outcomes):
        if not positive:
            for m in pool.members:
                statuses[m - 1] = False
        elif pool.size == 1:
            statuses[pool.members[0] - 1] = True
            certified += 1
    subtrees = children_layouts(layout, outcomes)
    if subtrees:
        shares = allocate_estimate(k_hat, certified, [ref.size for ref in subtrees])
        # estimates are hints only: sessions verify leftovers, so recovery
        # stays exact even when the pattern was misleading
        sessions = [
            _hgbsa_session(list(ref.leaves()), share, trust=False)
            for ref, share in zip(subtrees, shares)
        ]
        for result in (yield from _merge_rounds(sessions)):
            for member, positive in result.items():
                statuses[member - 1] = positive
    return [bool(s) for s in statuses], k_hat


def plan_for(config: AlgorithmConfig, n: int) -> StrategyPlan:
    """Build the stage generator for a validated configuration."""
    config.validate_for(n)
    if config.algorithm == "bsa":
        return _bsa_plan(n, config.initial_screen)
    if config.algorithm == "hgbsa":
        assert config.k_input is not None
        return _hgbsa_plan(
            n, config.k_input, config.trust_input, config.initial_screen
        )
    if config.algorithm == "dsa":
        return _dsa_plan(n, config.initial_screen)
    return _hybrid_plan(n, config.initial_screen)


def drive_plan(
    plan: StrategyPlan, submit: SubmitFn
) -> tuple[list[bool], int | None]:
    """Feed a strategy plan from any batch oracle until it completes."""
    try:
        batch = next(plan)
        while True:
            batch = plan.send(submit(batch))
    except StopIteration as stop:
        return stop.value


def run(instance: InfectionInstance, config: AlgorithmConfig) -> RunResult:
    """Identify every individual of ``instance`` with the configured strategy."""
    ledger = TestLedger()
    plan = plan_for(config, instance.n)
    statuses, k_estimate = drive_plan(
        plan, lambda pools: submit_batch(ledger, instance, pools)
    )
    return RunResult(Diagnosis(tuple(statuses)), ledger, k_estimate)


def run_bsa(
    instance: InfectionInstance, *, initial_screen: bool = False
) -> RunResult:
    return run(instance, AlgorithmConfig("bsa", initial_screen=initial_screen))


def run_hgbsa(
    instance: InfectionInstance,
    k_input: int,
    *,
    trust_input: bool = True,
    initial_screen: bool = False,
) -> RunResult:
    return run(
        instance,
        AlgorithmConfig(
            "hgbsa",
            k_input=k_input,
            trust_input=trust_input,
            initial_screen=initial_screen,
        ),
    )


def run_dsa(
    instance: InfectionInstance, *, initial_screen: bool = False
) -> RunResult:
    return run(instance, AlgorithmConfig("dsa", initial_screen=initial_screen))


def run_hybrid(
    instance: InfectionInstance, *, initial_screen: bool = False
) -> RunResult:
    return run(instance, AlgorithmConfig("hybrid", initial_screen=initial_screen))
