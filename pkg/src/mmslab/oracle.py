"""Independent brute-force ground truth for allocation guarantees.

These searches certify the protocols and the impossibility instances at desk
scale: they enumerate every allocation, exactly, or refuse.  With monotone
valuations, discarding an item never helps any agent, so the search assigns
every item to some agent (n^m assignments); the pruning-disabled variant
keeps the discard branch ((n+1)^m) and must agree -- tests hold both
implementations to that.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .core import (
    Allocation,
    BudgetExceeded,
    Instance,
    ItemSet,
    demand_vector,
    threshold_vector,
)
from .mms import DEFAULT_MMS_STATES, mms_value


@dataclass(frozen=True)
class SearchBudget:
    """Caps for the exact searches; exceeding one refuses, never truncates."""

    max_assignments: int = 10_000_000
    mms_states: int = DEFAULT_MMS_STATES
    parallel_width: int = 1  # worker hint only; searches run sequentially


DEFAULT_BUDGET = SearchBudget()


@dataclass(frozen=True)
class ExistsResult:
    """Outcome of an existence search over all allocations.

    status: "exists" (witness attached), "not_exists" (full space visited),
    or "refused" (budget).  `space` is the enumerated assignment space,
    `pruned` the size of the discard branch removed by monotone dominance.
    """

    status: str
    witness: Allocation | None
    visited: int
    space: int
    pruned: int
    mu: tuple[Fraction, ...] | None
    reason: str = ""

    @property
    def exists(self) -> bool:
        return self.status == "exists"


@dataclass(frozen=True)
class BestAlphaResult:
    """Exact maximum over allocations of min_i v_i(A_i) / mu_i^{d_i}.

    `value` is None when every agent has mu = 0 (every allocation satisfies
    every threshold vacuously, so the ratio is unbounded).
    """

    status: str  # "ok" | "refused"
    value: Fraction | None
    witness: Allocation | None
    visited: int
    space: int
    mu: tuple[Fraction, ...] | None
    reason: str = ""


def _mu_vector(inst: Instance, d, budget: SearchBudget):
    ground = inst.ground()
    return tuple(
        mms_value(v, ground, d_i, max_states=budget.mms_states).value
        for v, d_i in zip(inst.agents, d)
    )


def _assignment_masks(assignment, n: int) -> list[int]:
    masks = [0] * n
    for g, a in enumerate(assignment):
        if a < n:
            masks[a] |= 1 << g
    return masks


def exists_alpha_mms(
    inst: Instance,
    alpha,
    d,
    budget: SearchBudget = DEFAULT_BUDGET,
    prune: bool = True,
) -> ExistsResult:
    """Decide whether some allocation gives every agent i at least alpha_i * mu_i^{d_i}.

    Exact: the witness re-verifies, and "not_exists" is backed by a full
    enumeration.  The empty allocation is tried first (it settles all-zero
    thresholds immediately); assignments are then enumerated in lexicographic
    agent-index order, so the witness is deterministic.  With `prune` the
    discard branch is dropped, which is lossless for monotone valuations.
    """
    alpha = threshold_vector(alpha)
    d = demand_vector(d)
    n, m = inst.n, inst.m
    if len(alpha) != n or len(d) != n:
        raise ValueError("need one threshold and one demand per agent")
    try:
        mu = _mu_vector(inst, d, budget)
    except BudgetExceeded as exc:
        return ExistsResult("refused", None, 0, 0, 0, None, str(exc))
    thresholds = [a * u for a, u in zip(alpha, mu)]

    base = n if prune else n + 1
    space = base**m
    pruned = (n + 1) ** m - space if prune else 0
    if space > budget.max_assignments:
        return ExistsResult(
            "refused", None, 0, space, pruned, mu,
            f"assignment space {base}^{m} exceeds budget {budget.max_assignments}",
        )

    empty = Allocation(tuple(ItemSet.empty(m) for _ in range(n)))
    visited = 1
    if all(t <= 0 for t in thresholds):
        return ExistsResult("exists", empty, visited, space, pruned, mu)

    values = [v.value_mask for v in inst.agents]
    for assignment in product(range(base), repeat=m):
        visited += 1
        masks = _assignment_masks(assignment, n)
        if all(values[i](masks[i]) >= thresholds[i] for i in range(n)):
            bundles = tuple(ItemSet(mask, m) for mask in masks)
            return ExistsResult("exists", Allocation(bundles), visited, space, pruned, mu)
    return ExistsResult("not_exists", None, visited, space, pruned, mu)


def best_alpha(
    inst: Instance,
    d,
    budget: SearchBudget = DEFAULT_BUDGET,
    prune: bool = True,
) -> BestAlphaResult:
    """Exact max over allocations of the worst ratio v_i(A_i) / mu_i^{d_i}.

    Agents with mu_i = 0 are always satisfied and drop out of the min.  Ties
    are broken toward the lexicographically smallest assignment.
    """
    d = demand_vector(d)
    n, m = inst.n, inst.m
    if len(d) != n:
        raise ValueError("need one demand per agent")
    try:
        mu = _mu_vector(inst, d, budget)
    except BudgetExceeded as exc:
        return BestAlphaResult("refused", None, None, 0, 0, None, str(exc))

    base = n if prune else n + 1
    space = base**m
    if space > budget.max_assignments:
        return BestAlphaResult(
            "refused", None, None, 0, space, mu,
            f"assignment space {base}^{m} exceeds budget {budget.max_assignments}",
        )

    active = [i for i in range(n) if mu[i] != 0]
    if not active:
        empty = Allocation(tuple(ItemSet.empty(m) for _ in range(n)))
        return BestAlphaResult("ok", None, empty, 1, space, mu)

    values = [v.value_mask for v in inst.agents]
    best: Fraction | None = None
    best_assignment = None
    visited = 0
    for assignment in product(range(base), repeat=m):
        visited += 1
        masks = _assignment_masks(assignment, n)
        ratio = min(values[i](masks[i]) / mu[i] for i in active)
        if best is None or ratio > best:
            best = ratio
            best_assignment = masks
    bundles = tuple(ItemSet(mask, m) for mask in best_assignment)
    return BestAlphaResult("ok", best, Allocation(bundles), visited, space, mu)
