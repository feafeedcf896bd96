import itertools

from diagsplit import InfectionInstance


def instance_from_bits(bits) -> InfectionInstance:
    return InfectionInstance.explicit(list(bits))


def instance_with_infected(n: int, infected: set[int]) -> InfectionInstance:
    """1-based infected indices -> instance."""
    return InfectionInstance.explicit([i + 1 in infected for i in range(n)])


def all_instances(n: int):
    for bits in itertools.product((False, True), repeat=n):
        yield InfectionInstance.explicit(bits)


def subsets_of_size(n: int, k: int):
    for subset in itertools.combinations(range(1, n + 1), k):
        yield instance_with_infected(n, set(subset))
