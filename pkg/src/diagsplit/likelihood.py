"""Occurrence counts and likelihoods of first-stage outcome patterns.

For a power-of-two population, the first diagonal stage tests pools of sizes
``n/2, n/4, ..., 2, 1, 1``.  For an infection count ``k`` and an outcome
pattern ``s`` (one bit per pool, largest pool first), the occurrence count
``M[k, s]`` is the number of size-k infection subsets that produce exactly
that pattern.  Counts satisfy the recurrence

    M[k, s] = sum_{i=1..k} C(N0, i) * M[k - i, s0],      M[0, all-zero] = 1,

where the first nonzero bit of ``s`` (largest pool first) refers to a pool
with ``N0`` leaves and ``s0`` is ``s`` with that bit cleared.  Normalizing by
C(n, k) gives the likelihood L_s(k) of observing ``s`` given ``k``; its argmax
is the infection-count estimate used by the hybrid strategy.

All counts are exact big integers; the argmax is decided by exact
cross-multiplication, never by floating point.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb

from .core import ParameterError
from .tree import tree_depth

__all__ = [
    "Pattern",
    "LikelihoodColumn",
    "first_stage_pool_sizes",
    "all_patterns",
    "parse_pattern",
    "pattern_text",
    "occurrence_count",
    "brute_force_occurrence",
    "likelihood_column",
    "estimate_k",
    "estimate_for_pattern",
    "allocate_estimate",
    "occurrence_matrix",
    "write_matrix_csv",
]

Pattern = tuple[bool, ...]

BRUTE_FORCE_MAX_N = 16


def first_stage_pool_sizes(n: int) -> tuple[int, ...]:
    """Pool sizes of the first diagonal stage, largest first: n/2, ..., 2, 1, 1."""
    d = tree_depth(n)
    if d < 1:
        raise ParameterError("first stage needs a population of at least 2")
    sizes = [n >> (j + 1) for j in range(d - 1)]
    sizes += [1, 1]
    return tuple(sizes)


def _check_pattern(n: int, pattern: Pattern) -> tuple[int, ...]:
    sizes = first_stage_pool_sizes(n)
    if len(pattern) != len(sizes):
        raise ParameterError(
            f"pattern for n={n} must have {len(sizes)} bits, got {len(pattern)}"
        )
    return sizes


def parse_pattern(text: str) -> Pattern:
    """Parse a big-endian bitstring like "1100" (largest pool first)."""
    if not text or any(c not in "01" for c in text):
        raise ParameterError(f"pattern must be a nonempty 0/1 string, got {text!r}")
    return tuple(c == "1" for c in text)


def pattern_text(pattern: Pattern) -> str:
    return "".join("1" if b else "0" for b in pattern)


def all_patterns(n: int) -> list[Pattern]:
    """All 2^(d+1) patterns in ascending big-endian order."""
    width = len(first_stage_pool_sizes(n))
    return [
        tuple(bool((value >> (width - 1 - j)) & 1) for j in range(width))
        for value in range(1 << width)
    ]


@lru_cache(maxsize=4096)
def _column_counts(n: int, pattern: Pattern) -> tuple[int, ...]:
    """Occurrence counts for every k = 0..n via the bit-clearing recurrence.

    Clearing the first nonzero bit relates the column of ``s`` to the column
    of ``s0`` by convolution with the weights C(N0, 1..N0); starting from the
    all-zero base column and folding the positive pools back in therefore
    evaluates the recurrence for all k at once, touching only the at most
    d + 1 reduced patterns on the chain.
    """
    sizes = _check_pattern(n, pattern)
    positive_sizes = [sz for sz, bit in zip(sizes, pattern) if bit]
    column = [0] * (n + 1)
    column[0] = 1
    degree = 0
    for n0 in reversed(positive_sizes):
        weights = [comb(n0, i) for i in range(n0 + 1)]
        new_degree = min(n, degree + n0)
        new = [0] * (n + 1)
        for k in range(1, new_degree + 1):
            total = 0
            for i in range(max(1, k - degree), min(k, n0) + 1):
                prev = column[k - i]
                if prev:
                    total += weights[i] * prev
            new[k] = total
        column = new
        degree = new_degree
    return tuple(column)


def occurrence_count(n: int, k: int, pattern: Pattern) -> int:
    """M[k, s]: size-k infection subsets producing exactly pattern ``s``."""
    if not 0 <= k <= n:
        raise ParameterError(f"k={k} outside [0, {n}]")
    return _column_counts(n, tuple(pattern))[k]


def brute_force_occurrence(n: int, k: int, pattern: Pattern) -> int:
    """Independent oracle: enumerate all size-k subsets and count matches."""
    if n > BRUTE_FORCE_MAX_N:
        raise ParameterError(
            f"brute force limited to n <= {BRUTE_FORCE_MAX_N}, got {n}"
        )
    sizes = _check_pattern(n, tuple(pattern))
    bounds = []
    lo = 1
    for sz in sizes:
        bounds.append((lo, lo + sz - 1))
        lo += sz
    target = tuple(pattern)
    matches = 0
    for subset in itertools.combinations(range(1, n + 1), k):
        chosen = set(subset)
        produced = tuple(
            any(m in chosen for m in range(b_lo, b_hi + 1)) for b_lo, b_hi in bounds
        )
        if produced == target:
            matches += 1
    return matches


@dataclass(frozen=True)
class LikelihoodColumn:
    """Exact occurrence counts and normalized likelihoods for one pattern."""

    n: int
    pattern: Pattern
    counts: tuple[int, ...]

    @property
    def likelihoods(self) -> tuple[float, ...]:
        return tuple(c / comb(self.n, k) for k, c in enumerate(self.counts))


def likelihood_column(n: int, pattern: Pattern) -> LikelihoodColumn:
    pattern = tuple(pattern)
    return LikelihoodColumn(n, pattern, _column_counts(n, pattern))


def estimate_k(column: LikelihoodColumn) -> int:
    """argmax_k L_s(k), ties broken toward the smaller k.

    Comparisons are exact: L(a) < L(b) iff counts[a]*C(n,b) < counts[b]*C(n,a).
    """
    n = column.n
    best: int | None = None
    for k, count in enumerate(column.counts):
        if count == 0:
            continue
        if best is None or count * comb(n, best) > column.counts[best] * comb(n, k):
            best = k
    if best is None:
        raise ParameterError(
            f"pattern {pattern_text(column.pattern)} is impossible for every k"
        )
    return best


@lru_cache(maxsize=4096)
def estimate_for_pattern(n: int, pattern: Pattern) -> int:
    return estimate_k(likelihood_column(n, pattern))


def allocate_estimate(
    k_hat: int, certified: int, leaf_counts: list[int] | tuple[int, ...]
) -> tuple[int, ...]:
    """Split the residual estimate across positive non-singleton subtrees.

    The residual ``max(k_hat - certified, len(leaf_counts))`` is apportioned
    proportionally to leaf counts by largest remainder (ties: larger subtree
    first, then earlier position), then each share is clamped to
    ``[1, leaf_count]``: a positive subtree holds at least one defective and
    never more than its leaves.
    """
    if not leaf_counts:
        return ()
    total = max(k_hat - certified, len(leaf_counts))
    weight_sum = sum(leaf_counts)
    shares = [total * w // weight_sum for w in leaf_counts]
    remainders = [total * w % weight_sum for w in leaf_counts]
    leftover = total - sum(shares)
    order = sorted(
        range(len(leaf_counts)),
        key=lambda i: (-remainders[i], -leaf_counts[i], i),
    )
    for i in order[:leftover]:
        shares[i] += 1
    return tuple(
        min(max(share, 1), leaves) for share, leaves in zip(shares, leaf_counts)
    )


def occurrence_matrix(n: int) -> list[list[int]]:
    """Full (n+1) x 2^(d+1) matrix of counts, rows k, columns per all_patterns."""
    if n > BRUTE_FORCE_MAX_N:
        raise ParameterError(
            f"matrix dump limited to n <= {BRUTE_FORCE_MAX_N}, got {n}"
        )
    columns = [_column_counts(n, p) for p in all_patterns(n)]
    return [[col[k] for col in columns] for k in range(n + 1)]


def write_matrix_csv(n: int, path: str) -> None:
    """Dump the occurrence matrix as CSV: one row per k, one column per pattern."""
    matrix = occurrence_matrix(n)
    header = ["k"] + [pattern_text(p) for p in all_patterns(n)]
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(header) + "\n")
        for k, row in enumerate(matrix):
            fh.write(",".join([str(k)] + [str(v) for v in row]) + "\n")
