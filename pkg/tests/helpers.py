"""Shared random-instance fuel for the protocol and oracle tests."""

import random

from mmslab.core import Instance, Partition
from mmslab.valuations import random_valuation


def random_partition(m: int, k: int, rng: random.Random) -> Partition:
    items = list(range(m))
    rng.shuffle(items)
    if k == 1:
        return Partition.of(m, items)
    if m >= k:
        cutpoints = sorted(rng.sample(range(1, m), k - 1))
    else:
        cutpoints = list(range(1, m)) + [m] * (k - m)
    chunks, prev = [], 0
    for c in cutpoints + [m]:
        chunks.append(items[prev:c])
        prev = c
    return Partition.of(m, *chunks)


def random_instance(n: int, m: int, cls: str, seed: int) -> Instance:
    agents = tuple(random_valuation(cls, m, seed=seed * 31 + j) for j in range(n))
    return Instance(m, agents, label=f"random-{cls}-{seed}")


def random_partitions(inst: Instance, sizes, rng: random.Random):
    return tuple(random_partition(inst.m, k, rng) for k in sizes)
