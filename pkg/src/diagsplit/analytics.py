"""Closed-form expectations, probabilities, and bounds for the strategies.

Everything here is the analytic counterpart to simulation: the expected test
count of diagonal splitting

    E[T] = d + 1 + sum_{i=1..d-1} 2^(i-1) * P_i * (d - i + 1),

where P_i is the probability that a depth-i node (spanning n_i = 2^(d-i)
leaves) is positive -- hypergeometric under the fixed-count model,
1 - (1-p)^n_i under the independent model -- together with the two closed
forms it reduces to at k = 1 and k = n, the information-theoretic counting
bound, the guarantee bounds of the two binary-splitting baselines, and the
asymptotic upper-bound machinery for the diagonal strategy.

Binomial coefficients are evaluated with exact integer arithmetic and turned
into floats only at the end; the hypergeometric ratios at n = 1024 overflow
naive factorial-based floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .core import Combinatorial, InfectionModel, ParameterError, Probabilistic
from .tree import tree_depth

__all__ = [
    "BoundParams",
    "positive_prob",
    "expected_tests_dsa",
    "corollary_k1",
    "corollary_kn",
    "binary_entropy",
    "counting_bound",
    "bsa_bound",
    "hgbsa_bound",
    "appendix_sum_identity",
    "appendix_upper_bound",
    "upper_bound_report",
]


@dataclass(frozen=True)
class BoundParams:
    """Derived constants of the asymptotic upper bound for a chosen epsilon."""

    epsilon: float
    c: float
    beta: float

    @classmethod
    def for_epsilon(cls, epsilon: float, k: int) -> "BoundParams":
        if not 0.0 < epsilon < 1.0:
            raise ParameterError(f"epsilon must lie in (0, 1), got {epsilon}")
        if k < 1:
            raise ParameterError(f"k must be >= 1, got {k}")
        c = -math.log1p(-epsilon)
        return cls(epsilon, c, math.log2(k / c))


def _validate_model(n: int, model: InfectionModel) -> None:
    if isinstance(model, Combinatorial):
        if not 0 <= model.k <= n:
            raise ParameterError(f"k={model.k} outside [0, {n}]")
    elif isinstance(model, Probabilistic):
        if not 0.0 <= model.p <= 1.0:
            raise ParameterError(f"p={model.p} outside [0, 1]")
    else:
        raise ParameterError(f"unknown infection model: {model!r}")


def positive_prob(n: int, model: InfectionModel, depth: int) -> float:
    """Probability that a tested node at ``depth`` (1..d-1) is positive.

    A node at depth i spans n_i = 2^(d-i) leaves.  Fixed count k: the node is
    negative iff all n_i leaves fall in the n-k healthy ones, so
    P = 1 - C(n-k, n_i) / C(n, n_i) (C(a, b) = 0 when b > a, giving P = 1).
    Independent p: P = 1 - (1-p)^n_i.
    """
    d = tree_depth(n)
    _validate_model(n, model)
    if not 1 <= depth <= d - 1:
        raise ParameterError(f"depth must lie in [1, {d - 1}], got {depth}")
    leaves = 1 << (d - depth)
    if isinstance(model, Combinatorial):
        total = math.comb(n, leaves)
        healthy = math.comb(n - model.k, leaves)
        return float(1 - Fraction(healthy, total))
    return 1.0 - (1.0 - model.p) ** leaves


def expected_tests_dsa(n: int, model: InfectionModel) -> float:
    """Expected total tests of diagonal splitting for exact recovery.

    The first stage always costs d + 1 tests; each positive depth-i node
    (2^(i-1) candidates per depth) triggers d - i + 1 pooled tests at the
    next stage.
    """
    d = tree_depth(n)
    _validate_model(n, model)
    total = float(d + 1)
    for depth in range(1, d):
        total += (
            (1 << (depth - 1))
            * positive_prob(n, model, depth)
            * (d - depth + 1)
        )
    return total


def corollary_k1(d: int) -> float:
    """Closed form of E[T] for a single infection: d^2/4 + 5d/4 + 1/2."""
    if d < 1:
        raise ParameterError(f"depth must be >= 1, got {d}")
    return 0.25 * d * d + 1.25 * d + 0.5


def corollary_kn(n: int) -> float:
    """Closed form of E[T] when everyone is infected: 3n/2 - 1."""
    tree_depth(n)
    return 1.5 * n - 1.0


def binary_entropy(p: float) -> float:
    """h2(p) in bits, with the 0*log(0) = 0 convention."""
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"p={p} outside [0, 1]")
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def counting_bound(n: int, model: InfectionModel) -> float:
    """Information-theoretic minimum: log2 C(n, k), or n*h2(p) on average."""
    _validate_model(n, model)
    if isinstance(model, Combinatorial):
        return math.log2(math.comb(n, model.k)) if 0 < model.k < n else 0.0
    return n * binary_entropy(model.p)


def _validate_nk(n: int, k: int) -> None:
    if n < 1 or not 1 <= k <= n:
        raise ParameterError(f"need 1 <= k <= n, got k={k}, n={n}")


def bsa_bound(n: int, k: int) -> float:
    """Guarantee of sequential binary splitting: k*log2(n) + k tests."""
    _validate_nk(n, k)
    return k * math.log2(n) + k


def hgbsa_bound(n: int, k: int) -> float:
    """Guarantee of generalized binary splitting: log2 C(n, k) + k tests."""
    _validate_nk(n, k)
    return math.log2(math.comb(n, k)) + k


def appendix_sum_identity(beta: int) -> int:
    """Closed form of sum_{i=1..beta} i * 2^(i-1), namely (beta-1)*2^beta + 1."""
    if beta < 1:
        raise ParameterError(f"beta must be >= 1, got {beta}")
    return (beta - 1) * (1 << beta) + 1


def appendix_upper_bound(n: int, k: int, epsilon: float) -> float:
    """Asymptotic upper bound on E[T] of diagonal splitting.

    With C = -ln(1 - epsilon):

        (1/C) * log2 C(n, k) + (log2 C + 2) * k / C + (3/2) * epsilon * n - 1

    The bound is derived in the limit of large n, so a finite-n expectation
    may sit above it for some (n, k, epsilon); it is reported as a
    diagnostic, never asserted as dominating.
    """
    _validate_nk(n, k)
    params = BoundParams.for_epsilon(epsilon, k)
    c = params.c
    return (
        math.log2(math.comb(n, k)) / c
        + (math.log2(c) + 2.0) * k / c
        + 1.5 * epsilon * n
        - 1.0
    )


def upper_bound_report(
    ns: list[int] | tuple[int, ...], k: int, epsilon: float
) -> list[dict[str, float]]:
    """Compare the asymptotic bound against the exact expectation over ``ns``.

    One row per population size: the bound, the exact fixed-count E[T], and
    their ratio.  Ratios below 1 flag where the finite-n expectation exceeds
    the asymptotic bound.
    """
    params = BoundParams.for_epsilon(epsilon, k)
    rows = []
    for n in ns:
        expectation = expected_tests_dsa(n, Combinatorial(k))
        bound = appendix_upper_bound(n, k, epsilon)
        rows.append(
            {
                "n": n,
                "k": k,
                "epsilon": epsilon,
                "c": params.c,
                "beta": params.beta,
                "expected_tests": expectation,
                "upper_bound": bound,
                "bound_over_expectation": bound / expectation,
            }
        )
    return rows
