"""Degenerate shapes the protocols must survive: empty parts, tiny grounds."""

import random
from fractions import Fraction

from mmslab.core import Instance, ItemSet, Partition
from mmslab.mms import mms_value
from mmslab.protocols import (
    dispatch_three,
    four_agents_3344,
    three_agents_322,
    three_agents_431,
    three_agents_422,
    three_agents_521,
    two_types,
)
from mmslab.valuations import RANDOM_CLASSES, random_valuation

from helpers import random_instance


def sparse_partition(m: int, k: int, rng: random.Random) -> Partition:
    """k parts over m items where parts may be empty."""
    chunks = [[] for _ in range(k)]
    for g in range(m):
        slot = rng.randrange(k + 1)  # one extra slot's items land anywhere
        chunks[min(slot, k - 1)].append(g)
    return Partition.of(m, *chunks)


def test_protocols_tolerate_empty_parts():
    suites = (
        (three_agents_322, (3, 2, 2)),
        (three_agents_521, (5, 2, 1)),
        (three_agents_431, (4, 3, 1)),
        (three_agents_422, (4, 2, 2)),
        (four_agents_3344, (3, 3, 4, 4)),
    )
    for protocol, sizes in suites:
        for i in range(40):
            rng = random.Random(f"sparse:{protocol.__name__}:{i}")
            m = rng.randint(max(sizes) - 1, 9)  # sometimes fewer items than parts
            inst = random_instance(len(sizes), m, RANDOM_CLASSES[i % 4], seed=i)
            parts = tuple(sparse_partition(m, k, rng) for k in sizes)
            cert = protocol(inst, parts)
            assert cert.verify(inst).ok


def test_two_types_with_empty_parts():
    for i in range(40):
        rng = random.Random(f"sparse:tt:{i}")
        n = rng.randint(2, 6)
        m = rng.randint(max(2, n - 2), 8)
        vS = random_valuation(RANDOM_CLASSES[i % 4], m, seed=i)
        vT = random_valuation(RANDOM_CLASSES[(i + 1) % 4], m, seed=i + 99)
        types = tuple(rng.choice("ST") for _ in range(n))
        pS = sparse_partition(m, n, rng)
        pT = sparse_partition(m, n, rng)
        cert = two_types(n, vS, vT, types, pS, pT)
        inst = Instance(m, tuple(vS if t == "S" else vT for t in types))
        assert cert.verify(inst).ok


def test_dispatch_with_demands_beyond_item_count():
    # witnesses for part counts above m pad with empty parts; thresholds drop
    # to zero and the certificates still verify
    inst = random_instance(3, 4, "xos", seed=7)
    cert = dispatch_three(inst, "uniform-half", (9, 9, 9))
    assert cert.verify(inst).ok
    cert = dispatch_three(inst, "one-half-half", (6, 5, 4))
    assert cert.verify(inst).ok


def test_mms_witness_with_zero_value_oracle():
    from mmslab.valuations import AdditiveValuation

    flat = AdditiveValuation([0, 0, 0, 0])
    res = mms_value(flat, ItemSet.full(4), 3)
    assert res.value == 0 and len(res.witness) == 3


def test_certificates_are_deterministic():
    for i in range(10):
        inst = random_instance(3, 7, RANDOM_CLASSES[i % 4], seed=i)
        a = dispatch_three(inst, "uniform-half", (3, 2, 2))
        b = dispatch_three(inst, "uniform-half", (3, 2, 2))
        assert a.allocation == b.allocation
        assert a.trace == b.trace
        assert a.partitions == b.partitions
