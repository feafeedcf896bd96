"""Complete-binary-tree index arithmetic and the diagonal pool layout.

The population of size ``n = 2**d`` sits on the leaves of a complete binary
tree.  One diagonal slicing of a subtree with ``m >= 2`` leaves produces
pools of sizes ``m/2, m/4, ..., 2, 1, 1``: the left half, then the left half
of what remains, and finally the two rightmost leaves tested individually.
All pools of a slicing are disjoint, partition the subtree's leaves, and are
submitted as a single stage.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import ParameterError, Pool

__all__ = [
    "SubtreeRef",
    "DiagonalLayout",
    "is_power_of_two",
    "tree_depth",
    "diagonal_layout",
    "children_layouts",
]


def is_power_of_two(x: int) -> bool:
    return x >= 1 and x & (x - 1) == 0


def tree_depth(n: int) -> int:
    """d = log2(n) for a power-of-two population."""
    if not is_power_of_two(n):
        raise ParameterError(f"population size must be a power of two, got {n}")
    return n.bit_length() - 1


@dataclass(frozen=True)
class SubtreeRef:
    """A node of the tree, identified by depth and inclusive 1-based leaf range."""

    depth: int
    leaf_lo: int
    leaf_hi: int

    def __post_init__(self) -> None:
        if self.depth < 0 or self.leaf_lo < 1 or self.leaf_hi < self.leaf_lo:
            raise ParameterError(f"malformed subtree reference: {self}")
        if not is_power_of_two(self.size):
            raise ParameterError(
                f"subtree must span a power-of-two leaf count, got {self.size}"
            )

    @classmethod
    def root(cls, n: int) -> "SubtreeRef":
        tree_depth(n)
        return cls(0, 1, n)

    @property
    def size(self) -> int:
        return self.leaf_hi - self.leaf_lo + 1

    def leaves(self) -> range:
        return range(self.leaf_lo, self.leaf_hi + 1)


@dataclass(frozen=True)
class DiagonalLayout:
    """The ordered pools of one diagonal slicing, largest first.

    ``refs[j]`` is the tree node that ``pools[j]`` tests; the last two pools
    are always the two rightmost leaves of the origin, as singletons.
    """

    origin: SubtreeRef
    pools: tuple[Pool, ...]
    refs: tuple[SubtreeRef, ...]


def diagonal_layout(origin: SubtreeRef) -> DiagonalLayout:
    """Slice a subtree with ``m >= 2`` leaves into its diagonal pools.

    A single leaf is never sliced (it is tested individually by the caller),
    so ``m == 1`` is rejected.
    """
    if origin.size < 2:
        raise ParameterError("cannot slice a single leaf; test it individually")
    pools: list[Pool] = []
    refs: list[SubtreeRef] = []
    lo, hi, depth = origin.leaf_lo, origin.leaf_hi, origin.depth
    while hi - lo + 1 > 2:
        half = (hi - lo + 1) // 2
        depth += 1
        pools.append(Pool.over(lo, lo + half - 1))
        refs.append(SubtreeRef(depth, lo, lo + half - 1))
        lo += half
    depth += 1
    for leaf in (lo, hi):
        pools.append(Pool.over(leaf, leaf))
        refs.append(SubtreeRef(depth, leaf, leaf))
    return DiagonalLayout(origin, tuple(pools), tuple(refs))


def children_layouts(
    layout: DiagonalLayout, outcomes: list[bool] | tuple[bool, ...]
) -> list[SubtreeRef]:
    """Subtrees that the next stage must slice: positive non-singleton pools.

    Negative pools clear all their members and positive singletons are
    terminally resolved, so neither spawns a child subtree.
    """
    if len(outcomes) != len(layout.pools):
        raise ParameterError(
            f"expected {len(layout.pools)} outcomes, got {len(outcomes)}"
        )
    return [
        ref
        for ref, positive in zip(layout.refs, outcomes)
        if positive and ref.size >= 2
    ]
