"""Ground-truth generation, the pooled-test oracle, and test/stage accounting.

A pooled test over a group of individuals is positive iff at least one member
is infected (noiseless OR channel).  Algorithms never evaluate pools directly:
they submit whole batches ("stages") through :func:`submit_batch` and only see
outcomes once the batch is recorded, which mechanically enforces that no test
in a stage depends on another outcome from the same stage.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

__all__ = [
    "ParameterError",
    "Combinatorial",
    "Probabilistic",
    "InfectionModel",
    "InfectionInstance",
    "Pool",
    "TestLedger",
    "Diagnosis",
    "generate_instance",
    "evaluate_pool",
    "submit_batch",
    "derive_seed",
]


class ParameterError(ValueError):
    """An operation received parameters outside its contract."""


@dataclass(frozen=True)
class Combinatorial:
    """Exactly ``k`` infected individuals, all subsets of size k equiprobable."""

    k: int

    def describe(self) -> str:
        return f"comb:{self.k}"


@dataclass(frozen=True)
class Probabilistic:
    """Each individual infected independently with probability ``p``."""

    p: float

    def describe(self) -> str:
        return f"prob:{self.p:g}"


InfectionModel = Combinatorial | Probabilistic


@dataclass(frozen=True)
class InfectionInstance:
    """Ground-truth infection vector plus the parameters that generated it.

    ``statuses[i]`` is True iff individual ``i + 1`` is infected (individuals
    are 1-based everywhere in the public API).  Instances built by
    :func:`generate_instance` are bit-identical when regenerated from the same
    ``(model, n, seed)``.
    """

    n: int
    statuses: tuple[bool, ...]
    model: InfectionModel
    seed: int | None
    positives: frozenset[int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ParameterError(f"population size must be >= 1, got {self.n}")
        if len(self.statuses) != self.n:
            raise ParameterError(
                f"expected {self.n} statuses, got {len(self.statuses)}"
            )
        object.__setattr__(
            self,
            "positives",
            frozenset(i + 1 for i, s in enumerate(self.statuses) if s),
        )

    @classmethod
    def explicit(cls, statuses: Sequence[bool]) -> "InfectionInstance":
        """Build an instance from a literal infection vector (for tests/CLI)."""
        bits = tuple(bool(s) for s in statuses)
        return cls(len(bits), bits, Combinatorial(sum(bits)), None)

    @property
    def infected_count(self) -> int:
        return len(self.positives)


@dataclass(frozen=True)
class Pool:
    """A non-empty ordered set of 1-based individual indices tested together."""

    members: tuple[int, ...]
    member_set: frozenset[int] = field(init=False, repr=False, compare=False)
    max_index: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.members:
            raise ParameterError("pool must not be empty")
        member_set = frozenset(self.members)
        if len(member_set) != len(self.members):
            raise ParameterError(f"pool has duplicate members: {self.members}")
        if min(self.members) < 1:
            raise ParameterError(f"pool indices must be >= 1: {self.members}")
        object.__setattr__(self, "member_set", member_set)
        object.__setattr__(self, "max_index", max(self.members))

    @classmethod
    def of(cls, members: Iterable[int]) -> "Pool":
        return cls(tuple(members))

    @classmethod
    def over(cls, lo: int, hi: int) -> "Pool":
        """Pool covering the contiguous index range ``lo..hi`` inclusive."""
        return cls(tuple(range(lo, hi + 1)))

    @property
    def size(self) -> int:
        return len(self.members)

    def describe(self) -> str:
        """Compact text form, collapsing contiguous runs ("1-4", "7")."""
        parts: list[str] = []
        run_start = prev = self.members[0]
        for m in self.members[1:]:
            if m == prev + 1:
                prev = m
                continue
            parts.append(_run_text(run_start, prev))
            run_start = prev = m
        parts.append(_run_text(run_start, prev))
        return ",".join(parts)


def _run_text(lo: int, hi: int) -> str:
    return str(lo) if lo == hi else f"{lo}-{hi}"


@dataclass
class Diagnosis:
    """Final infection call for every individual (True = infected)."""

    statuses: tuple[bool, ...]

    def infected(self) -> tuple[int, ...]:
        return tuple(i + 1 for i, s in enumerate(self.statuses) if s)

    def matches(self, instance: InfectionInstance) -> bool:
        return self.statuses == instance.statuses


@dataclass
class TestLedger:
    """Metered record of every pooled test, grouped into parallel stages."""

    stages: list[list[tuple[Pool, bool]]] = field(default_factory=list)

    @property
    def tests_total(self) -> int:
        return sum(len(stage) for stage in self.stages)

    @property
    def stages_total(self) -> int:
        return len(self.stages)

    def all_tests(self) -> list[tuple[Pool, bool]]:
        return [entry for stage in self.stages for entry in stage]


def generate_instance(
    model: InfectionModel, n: int, seed: int
) -> InfectionInstance:
    """Draw one ground-truth infection vector.

    The generator is deliberately restricted to ``random.Random.random()``
    (the one primitive with a cross-version stability guarantee), so instances
    are reproducible across machines:

    * combinatorial: each individual gets a uniform draw and the ``k`` with
      the smallest draws are infected (a uniform k-subset);
    * probabilistic: individual ``i`` is infected iff its draw is below ``p``.
    """
    if n < 1:
        raise ParameterError(f"population size must be >= 1, got {n}")
    if isinstance(model, Combinatorial):
        if not 0 <= model.k <= n:
            raise ParameterError(f"k={model.k} outside [0, {n}]")
    elif isinstance(model, Probabilistic):
        if not 0.0 <= model.p <= 1.0:
            raise ParameterError(f"p={model.p} outside [0, 1]")
    else:
        raise ParameterError(f"unknown infection model: {model!r}")

    rng = random.Random(seed)
    draws = [rng.random() for _ in range(n)]
    if isinstance(model, Combinatorial):
        ranked = sorted(range(n), key=draws.__getitem__)
        infected = set(ranked[: model.k])
        statuses = tuple(i in infected for i in range(n))
    else:
        statuses = tuple(u < model.p for u in draws)
    return InfectionInstance(n, statuses, model, seed)


def evaluate_pool(instance: InfectionInstance, pool: Pool) -> bool:
    """Noiseless pooled test: True iff any pool member is infected."""
    if pool.max_index > instance.n:
        raise ParameterError(
            f"pool index {pool.max_index} out of range for n={instance.n}"
        )
    return not instance.positives.isdisjoint(pool.member_set)


def submit_batch(
    ledger: TestLedger, instance: InfectionInstance, pools: Sequence[Pool]
) -> list[bool]:
    """Run one stage of pooled tests and record it.

    All pools in the batch are evaluated together; callers only observe the
    outcomes through the returned list, after the whole stage is recorded.
    """
    if not pools:
        raise ParameterError("a stage must contain at least one pool")
    outcomes = [evaluate_pool(instance, pool) for pool in pools]
    ledger.stages.append(list(zip(pools, outcomes)))
    return outcomes


def derive_seed(base_seed: int, *indices: int) -> int:
    """Stream-splitting rule for sweeps: one independent seed per index tuple.

    Uses SHA-256 of a canonical text key, so the derived streams are portable
    across platforms and Python versions.
    """
    key = "diagsplit:v1:" + ":".join(str(x) for x in (base_seed, *indices))
    digest = hashlib.sha256(key.encode("ascii")).digest()
    return int.from_bytes(digest[:8], "big")
