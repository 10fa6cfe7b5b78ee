"""Dual-route validation of the 27-item structured exhaustion.

The structured checker collapses the second agent's bundle into a single
slice of hers.  Here the collapse is dropped: the second agent ranges over
all 2^18 subsets of the items left by the first agent's slice.  Outcomes
must match -- nonexistence with the gap in place, existence at gap zero.
"""

import time
from fractions import Fraction

from mmslab.counterexamples import grid_slice, instance_27, structured_check_27


def _wide_placement_exists(inst, full_agent) -> bool:
    half = Fraction(1, 2)
    full_mask = (1 << 27) - 1
    v_e = inst.agents[(full_agent + 1) % 3].value_mask
    v_r = inst.agents[(full_agent + 2) % 3].value_mask
    for a_idx in range(3):
        a_mask = grid_slice(full_agent, a_idx).mask
        free = [g for g in range(27) if not (a_mask >> g) & 1]
        lo = [sum(1 << free[t] for t in range(9) if (bits >> t) & 1)
              for bits in range(512)]
        hi = [sum(1 << free[9 + t] for t in range(9) if (bits >> t) & 1)
              for bits in range(512)]
        for h in hi:
            for l in lo:
                e_mask = h | l
                if v_e(e_mask) < half:
                    continue
                if v_r(full_mask & ~a_mask & ~e_mask) >= half:
                    return True
    return False


def test_wide_search_agrees_with_structured_checker():
    t0 = time.perf_counter()
    blocked = instance_27()
    assert structured_check_27().nonexistence
    for full_agent in range(3):
        assert not _wide_placement_exists(blocked, full_agent)
    open_inst = instance_27(Fraction(0))
    assert all(p.exists for p in structured_check_27(Fraction(0)).placements)
    for full_agent in range(3):
        assert _wide_placement_exists(open_inst, full_agent)
    assert time.perf_counter() - t0 < 60
