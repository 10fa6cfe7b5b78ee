import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mmslab.core import (
    Allocation,
    Instance,
    ItemSet,
    Partition,
    demand_vector,
    guarantee_dominates,
    threshold_vector,
    uniform,
    validate_allocation,
)
from mmslab.mms import verify_alpha_mms_d
from mmslab.valuations import random_valuation

masks6 = st.integers(min_value=0, max_value=63)


def test_itemset_basics():
    s = ItemSet.of(5, [0, 2, 4])
    assert len(s) == 3
    assert 2 in s and 1 not in s
    assert list(s) == [0, 2, 4]
    assert s.complement() == ItemSet.of(5, [1, 3])
    assert (s - ItemSet.of(5, [2])) == ItemSet.of(5, [0, 4])


def test_itemset_rejects_out_of_range():
    with pytest.raises(ValueError):
        ItemSet.of(4, [4])
    with pytest.raises(ValueError):
        ItemSet(1 << 4, 4)
    with pytest.raises(ValueError):
        ItemSet(0, 40)


@given(masks6, masks6)
def test_de_morgan(a, b):
    x, y = ItemSet(a, 6), ItemSet(b, 6)
    assert (x | y).complement() == x.complement() & y.complement()
    assert (x & y).complement() == x.complement() | y.complement()


@given(masks6, masks6, masks6)
def test_set_algebra_closure(a, b, c):
    x, y, z = ItemSet(a, 6), ItemSet(b, 6), ItemSet(c, 6)
    assert (x | y) & z == (x & z) | (y & z)
    assert x - y == x & y.complement()


def test_partition_rejects_overlap_and_gap():
    with pytest.raises(ValueError):
        Partition.of(4, [0, 1], [1, 2, 3])
    with pytest.raises(ValueError):
        Partition((ItemSet.of(4, [0]),), ItemSet.full(4))
    p = Partition.of(4, [0, 1], [], [2, 3])
    assert len(p) == 3 and not p[1]


def test_validate_allocation_examples():
    inst = Instance(4, tuple(random_valuation("additive", 4, seed=s) for s in (1, 2)))
    assert validate_allocation(Allocation.of(4, [0, 1], [2, 3]), inst) is None
    report = validate_allocation(Allocation.of(4, [0, 1], [1, 2]), inst)
    assert report is not None and "0 and 1" in report and "1" in report
    assert validate_allocation(Allocation.of(4, [], []), inst) is None
    assert validate_allocation(Allocation.of(4, [0]), inst) is not None


def test_vector_validation():
    assert demand_vector([3, 2, 2]) == (3, 2, 2)
    with pytest.raises(ValueError):
        demand_vector([3, 0])
    assert threshold_vector(["1/2", 1]) == (Fraction(1, 2), Fraction(1))
    with pytest.raises(ValueError):
        threshold_vector([2])


def test_guarantee_dominates_examples():
    half = Fraction(1, 2)
    assert guarantee_dominates([half] * 3, (3, 2, 2), [half] * 3, (3, 3, 3))
    assert guarantee_dominates([half, 1], (1, 2), [half, 1], (1, 2))
    assert not guarantee_dominates([1, half], (1, 2), [1, 1], (1, 2))
    with pytest.raises(ValueError):
        guarantee_dominates([1], (1,), [1, 1], (1, 1))


def test_dominance_implies_weaker_verification():
    # random allocations meeting the stronger guarantee meet the weaker one
    rng = random.Random(7)
    checked = 0
    while checked < 40:
        n, m = rng.randint(2, 3), rng.randint(3, 6)
        inst = Instance(
            m, tuple(random_valuation("xos", m, seed=rng.randint(0, 10**6)) for _ in range(n))
        )
        d = [rng.randint(1, 3) for _ in range(n)]
        d_weak = [x + rng.randint(0, 1) for x in d]
        alpha = [Fraction(rng.randint(0, 4), 4) for _ in range(n)]
        alpha_weak = [a * Fraction(rng.randint(0, 4), 4) for a in alpha]
        assert guarantee_dominates(alpha, d, alpha_weak, d_weak)
        bundles = [0] * n
        for g in range(m):
            who = rng.randint(0, n)
            if who < n:
                bundles[who] |= 1 << g
        allocation = Allocation(tuple(ItemSet(b, m) for b in bundles))
        if verify_alpha_mms_d(allocation, inst, alpha, d).ok:
            assert verify_alpha_mms_d(allocation, inst, alpha_weak, d_weak).ok
            checked += 1


def test_instance_rejects_oversized_ground():
    with pytest.raises(ValueError):
        Instance(40, (random_valuation("additive", 40, seed=0),))


def test_uniform_helper():
    assert uniform(Fraction(1, 2), 3) == (Fraction(1, 2),) * 3
