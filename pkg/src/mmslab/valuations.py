"""Valuation oracles, hierarchy class checkers, and random generators.

Oracles are pure query functions `v: 2^M -> Q>=0`, normalized (v(empty) = 0)
and monotone.  Class membership (subadditive / submodular / ...) is never
assumed; the checkers in this module verify it exhaustively at desk scale:

  is_monotone     all covering pairs (S, S + {g})          m <= 16 exhaustive
  is_subadditive  all ordered pairs v(S)+v(T) >= v(S|T)    m <= 13 exhaustive
  is_submodular   all triples g, S <= T <= M-{g} via the
                  marginal form v(S+g)-v(S) >= v(T+g)-v(T) m <= 13 exhaustive

Checks are opt-in operations rather than constructor-time mandates: the
27-item instance cannot be checked globally, only bundle by bundle (the
structured mode below, which is exact for `BundleMaxValuation`).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .core import ItemSet, SubadditivityWitness


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


def _int_table(values: list[Fraction]) -> list[int]:
    """Rescale a table of exact rationals to integers (common denominator)."""
    denom = 1
    for f in values:
        denom = _lcm(denom, f.denominator)
    return [f.numerator * (denom // f.denominator) for f in values]


def local_mask(global_mask: int, positions: tuple[int, ...]) -> int:
    """Compress the bits of `global_mask` at `positions` into a dense mask."""
    out = 0
    for j, g in enumerate(positions):
        if (global_mask >> g) & 1:
            out |= 1 << j
    return out


class ValuationOracle:
    """A set function queried by bitmask, with a per-mask result cache.

    Concrete families override `_value_mask`; generic oracles can be built
    directly from a callable on `ItemSet` (used by tests to feed the checkers
    deliberately broken functions).
    """

    def __init__(self, m: int, fn=None, declared_class: str = "unknown"):
        self.m = m
        self.declared_class = declared_class
        self._fn = fn
        self._cache: dict[int, Fraction] = {}

    def _value_mask(self, mask: int) -> Fraction:
        if self._fn is None:
            raise NotImplementedError
        return Fraction(self._fn(ItemSet(mask, self.m)))

    def value_mask(self, mask: int) -> Fraction:
        v = self._cache.get(mask)
        if v is None:
            v = self._value_mask(mask)
            self._cache[mask] = v
        return v

    def value(self, s: ItemSet) -> Fraction:
        if s.m != self.m:
            raise ValueError(f"set over {s.m} items queried on oracle over {self.m}")
        return self.value_mask(s.mask)

    def dense_table(self) -> list[Fraction]:
        """All 2^m values; only sensible for small m."""
        if self.m > 16:
            raise ValueError(f"dense table over {self.m} items is too large")
        return [self.value_mask(mask) for mask in range(1 << self.m)]

    def _key(self):
        return id(self)

    def __eq__(self, other):
        if type(self) is not type(other):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash((type(self).__name__, self._key()))


class AdditiveValuation(ValuationOracle):
    """v(S) = sum of per-item weights over S."""

    def __init__(self, weights):
        self.weights = tuple(Fraction(w) for w in weights)
        if any(w < 0 for w in self.weights):
            raise ValueError("additive weights must be nonnegative")
        super().__init__(len(self.weights), declared_class="additive")

    def _value_mask(self, mask: int) -> Fraction:
        total = Fraction(0)
        while mask:
            low = mask & -mask
            total += self.weights[low.bit_length() - 1]
            mask ^= low
        return total

    def _key(self):
        return self.weights


class XOSValuation(ValuationOracle):
    """Pointwise max of additive clauses (fractionally subadditive)."""

    def __init__(self, clauses):
        self.clauses = tuple(tuple(Fraction(w) for w in c) for c in clauses)
        if not self.clauses:
            raise ValueError("an XOS valuation needs at least one clause")
        m = len(self.clauses[0])
        if any(len(c) != m for c in self.clauses):
            raise ValueError("all clauses must cover the same items")
        if any(w < 0 for c in self.clauses for w in c):
            raise ValueError("clause weights must be nonnegative")
        super().__init__(m, declared_class="xos")

    def _value_mask(self, mask: int) -> Fraction:
        best = Fraction(0)
        for clause in self.clauses:
            total = Fraction(0)
            rest = mask
            while rest:
                low = rest & -rest
                total += clause[low.bit_length() - 1]
                rest ^= low
            if total > best:
                best = total
        return best

    def _key(self):
        return self.clauses


class TableValuation(ValuationOracle):
    """Explicit value per subset, dense over bitmasks; m <= 16.

    The constructor rejects non-normalized or non-monotone tables rather than
    repairing them -- silent repair would mask authoring errors in the
    instance encodings this class carries.
    """

    def __init__(self, m: int, table, declared_class: str = "unknown"):
        if m > 16:
            raise ValueError("table valuations support at most 16 items")
        self.table = tuple(Fraction(x) for x in table)
        if len(self.table) != 1 << m:
            raise ValueError(f"table must have {1 << m} entries, got {len(self.table)}")
        if self.table[0] != 0:
            raise ValueError("table is not normalized: v(empty) != 0")
        for mask in range(1 << m):
            for g in range(m):
                if not (mask >> g) & 1 and self.table[mask] > self.table[mask | (1 << g)]:
                    raise ValueError(
                        f"table is not monotone: v({ItemSet(mask, m)}) > "
                        f"v({ItemSet(mask | (1 << g), m)})"
                    )
        super().__init__(m, declared_class=declared_class)

    def _value_mask(self, mask: int) -> Fraction:
        return self.table[mask]

    def dense_table(self) -> list[Fraction]:
        return list(self.table)

    def _key(self):
        return self.table


class BundleMaxValuation(ValuationOracle):
    """v(B) = max_i f_i(B & R_i) over reference bundles R_1..R_k partitioning M.

    Each inner f_i is a dense table over the local subsets of its bundle,
    normalized and monotone (enforced).  The value of any set is determined by
    the max rule, so v(R_i | extra) never exceeds v(R_i).
    """

    def __init__(self, m: int, bundles, inner_tables, declared_class: str = "unknown"):
        self.bundles = tuple(b if isinstance(b, ItemSet) else ItemSet.of(m, b) for b in bundles)
        union = 0
        for b in self.bundles:
            if union & b.mask:
                raise ValueError("reference bundles must be disjoint")
            union |= b.mask
        if union != (1 << m) - 1:
            raise ValueError("reference bundles must cover all items")
        self.positions = tuple(b.items() for b in self.bundles)
        self.inner_tables = tuple(tuple(Fraction(x) for x in t) for t in inner_tables)
        for b, t in zip(self.bundles, self.inner_tables):
            r = len(b)
            if len(t) != 1 << r:
                raise ValueError(f"inner table must have {1 << r} entries, got {len(t)}")
            if t[0] != 0:
                raise ValueError("inner function is not normalized")
            for mask in range(1 << r):
                for g in range(r):
                    if not (mask >> g) & 1 and t[mask] > t[mask | (1 << g)]:
                        raise ValueError("inner function is not monotone")
        super().__init__(m, declared_class=declared_class)

    def _value_mask(self, mask: int) -> Fraction:
        best = Fraction(0)
        for positions, table in zip(self.positions, self.inner_tables):
            v = table[local_mask(mask, positions)]
            if v > best:
                best = v
        return best

    def _key(self):
        return (tuple(b.mask for b in self.bundles), self.inner_tables)


class BudgetAdditiveValuation(ValuationOracle):
    """v(S) = min(sum of weights over S, cap); submodular."""

    def __init__(self, weights, cap):
        self.weights = tuple(Fraction(w) for w in weights)
        self.cap = Fraction(cap)
        if any(w < 0 for w in self.weights) or self.cap < 0:
            raise ValueError("weights and cap must be nonnegative")
        super().__init__(len(self.weights), declared_class="submodular")

    def _value_mask(self, mask: int) -> Fraction:
        total = Fraction(0)
        while mask:
            low = mask & -mask
            total += self.weights[low.bit_length() - 1]
            mask ^= low
        return min(total, self.cap)

    def _key(self):
        return (self.weights, self.cap)


class CoverageValuation(ValuationOracle):
    """v(S) = number of universe elements covered by the items in S; submodular."""

    def __init__(self, m: int, covers):
        self.covers = tuple(int(c) for c in covers)
        if len(self.covers) != m:
            raise ValueError("one cover mask per item required")
        super().__init__(m, declared_class="submodular")

    def _value_mask(self, mask: int) -> Fraction:
        covered = 0
        while mask:
            low = mask & -mask
            covered |= self.covers[low.bit_length() - 1]
            mask ^= low
        return Fraction(covered.bit_count())

    def _key(self):
        return self.covers


@dataclass(frozen=True)
class MonotonicityWitness:
    small: ItemSet
    large: ItemSet
    value_small: Fraction
    value_large: Fraction


@dataclass(frozen=True)
class SubmodularityWitness:
    s: ItemSet
    t: ItemSet
    g: int
    marginal_s: Fraction
    marginal_t: Fraction


@dataclass(frozen=True)
class CheckResult:
    """Outcome of a class check; `mode` flags how much ground was covered."""

    ok: bool
    mode: str  # "exhaustive" | "structured" | "sampled"
    checked: int
    witness: object | None = None

    def __bool__(self) -> bool:
        return self.ok


def is_monotone(v: ValuationOracle, samples: int = 2000, seed: int = 0) -> CheckResult:
    """Check v(S) <= v(T) for S <= T.

    Exhaustive over all covering pairs (S, S + {g}) for m <= 16 (a violation
    among arbitrary pairs implies one among covering pairs, so the witness is
    minimal).  `BundleMaxValuation` over larger m is checked bundle by bundle,
    which is exact for the max-of-inner-functions shape.  Anything else over
    large m falls back to seeded random covering pairs, flagged as sampled.
    """
    m = v.m
    if m <= 16:
        table = v.dense_table()
        for mask in range(1 << m):
            for g in range(m):
                if not (mask >> g) & 1:
                    up = mask | (1 << g)
                    if table[mask] > table[up]:
                        return CheckResult(
                            False,
                            "exhaustive",
                            (1 << m) * m,
                            MonotonicityWitness(
                                ItemSet(mask, m), ItemSet(up, m), table[mask], table[up]
                            ),
                        )
        return CheckResult(True, "exhaustive", (1 << m) * m)
    if isinstance(v, BundleMaxValuation):
        checked = 0
        for positions, table in zip(v.positions, v.inner_tables):
            r = len(positions)
            checked += (1 << r) * r
            # constructor enforces inner monotonicity, so this re-scan is a
            # consistency check that can only fail if state was tampered with
            for mask in range(1 << r):
                for g in range(r):
                    if not (mask >> g) & 1 and table[mask] > table[mask | (1 << g)]:
                        small = ItemSet.of(m, (positions[j] for j in ItemSet(mask, r)))
                        large = small | ItemSet.of(m, [positions[g]])
                        return CheckResult(
                            False,
                            "structured",
                            checked,
                            MonotonicityWitness(small, large, table[mask], table[mask | (1 << g)]),
                        )
        return CheckResult(True, "structured", checked)
    rng = random.Random(seed)
    for _ in range(samples):
        mask = rng.getrandbits(m)
        g = rng.randrange(m)
        up = mask | (1 << g)
        if v.value_mask(mask & ~(1 << g)) > v.value_mask(up):
            low = mask & ~(1 << g)
            return CheckResult(
                False,
                "sampled",
                samples,
                MonotonicityWitness(
                    ItemSet(low, m), ItemSet(up, m), v.value_mask(low), v.value_mask(up)
                ),
            )
    return CheckResult(True, "sampled", samples)


def _subadditive_scan(values: list[Fraction], m: int) -> tuple[int, int] | None:
    """Find (s, t) with v(s) + v(t) < v(s | t) over all pairs of masks, or None."""
    ints = _int_table(values)
    size = 1 << m
    for s in range(1, size):
        vs = ints[s]
        for t in range(s, size):
            if vs + ints[t] < ints[s | t]:
                return s, t
    return None


def is_subadditive(v: ValuationOracle, samples: int = 5000, seed: int = 0) -> CheckResult:
    """Check v(S) + v(T) >= v(S | T).

    Exhaustive over all 4^m ordered pairs for m <= 13 (the scan walks
    unordered pairs; the condition is symmetric).  For `BundleMaxValuation`
    the structured per-bundle check is exact: with bundles partitioning M,
    v(S | T) = f_i((S & R_i) | (T & R_i)) <= f_i(S & R_i) + f_i(T & R_i)
    <= v(S) + v(T) whenever every inner f_i is subadditive on its bundle.
    Other oracles over m > 13 get seeded random pairs, flagged as sampled.
    """
    m = v.m
    if isinstance(v, BundleMaxValuation) and m > 13:
        checked = 0
        for positions, table in zip(v.positions, v.inner_tables):
            r = len(positions)
            checked += 1 << (2 * r)
            bad = _subadditive_scan(list(table), r)
            if bad is not None:
                s, t = bad
                a = ItemSet.of(m, (positions[j] for j in ItemSet(s, r)))
                b = ItemSet.of(m, (positions[j] for j in ItemSet(t, r)))
                return CheckResult(
                    False,
                    "structured",
                    checked,
                    SubadditivityWitness(a, b, table[s], table[t], table[s | t]),
                )
        return CheckResult(True, "structured", checked)
    if m <= 13:
        table = v.dense_table()
        bad = _subadditive_scan(table, m)
        if bad is not None:
            s, t = bad
            return CheckResult(
                False,
                "exhaustive",
                1 << (2 * m),
                SubadditivityWitness(
                    ItemSet(s, m), ItemSet(t, m), table[s], table[t], table[s | t]
                ),
            )
        return CheckResult(True, "exhaustive", 1 << (2 * m))
    rng = random.Random(seed)
    for _ in range(samples):
        s = rng.getrandbits(m)
        t = rng.getrandbits(m)
        if v.value_mask(s) + v.value_mask(t) < v.value_mask(s | t):
            return CheckResult(
                False,
                "sampled",
                samples,
                SubadditivityWitness(
                    ItemSet(s, m),
                    ItemSet(t, m),
                    v.value_mask(s),
                    v.value_mask(t),
                    v.value_mask(s | t),
                ),
            )
    return CheckResult(True, "sampled", samples)


def is_submodular(v: ValuationOracle) -> CheckResult:
    """Check decreasing marginals: v(S+{g}) - v(S) >= v(T+{g}) - v(T) for S <= T.

    Enumerates every item g and every nested pair S <= T <= M - {g}, which is
    m * 3^(m-1) triples; capped at m <= 13.  The witness carries both
    marginals.
    """
    m = v.m
    if m > 13:
        raise ValueError(f"submodularity scan over {m} items is infeasible; cap is 13")
    table = v.dense_table()
    ints = _int_table(table)
    full = (1 << m) - 1
    checked = m * 3 ** (m - 1)
    for g in range(m):
        bit = 1 << g
        rest = full ^ bit
        # walk T over subsets of rest, then S over subsets of T
        t = rest
        while True:
            marg_t = ints[t | bit] - ints[t]
            s = t
            while True:
                if ints[s | bit] - ints[s] < marg_t:
                    return CheckResult(
                        False,
                        "exhaustive",
                        checked,
                        SubmodularityWitness(
                            ItemSet(s, m),
                            ItemSet(t, m),
                            g,
                            table[s | bit] - table[s],
                            table[t | bit] - table[t],
                        ),
                    )
                if s == 0:
                    break
                s = (s - 1) & t
            if t == 0:
                break
            t = (t - 1) & rest
    return CheckResult(True, "exhaustive", checked)


class ThirdRoundedValuation(ValuationOracle):
    """Round a subadditive valuation onto the grid {0, 1/3, 2/3, 1}.

    v'(empty) = 0; otherwise 1/3 when v < 1/2, 2/3 when 1/2 <= v < 1, and 1
    when v >= 1.  The rounding preserves subadditivity and the key threshold
    equivalence v(S) >= 1/2  <=>  v'(S) >= 2/3.
    """

    def __init__(self, base: ValuationOracle):
        if base.value_mask(0) != 0:
            raise ValueError("base valuation is not normalized: v(empty) != 0")
        self.base = base
        super().__init__(base.m, declared_class="subadditive")

    def _value_mask(self, mask: int) -> Fraction:
        if mask == 0:
            return Fraction(0)
        v = self.base.value_mask(mask)
        if v >= 1:
            return Fraction(1)
        if v >= Fraction(1, 2):
            return Fraction(2, 3)
        return Fraction(1, 3)

    def _key(self):
        return self.base._key()


def third_transform(v: ValuationOracle) -> ValuationOracle:
    """The {0, 1/3, 2/3, 1} rounding of `v` (see `ThirdRoundedValuation`)."""
    return ThirdRoundedValuation(v)


RANDOM_CLASSES = ("additive", "xos", "budget-additive", "coverage")


def random_valuation(cls: str, m: int, seed: int, **params) -> ValuationOracle:
    """Deterministic random oracle of the requested class.

    Classes: additive, xos, budget-additive, coverage.  Budget-additive and
    coverage functions are submodular; all four are subadditive, which is what
    the protocol property tests need for fuel.
    """
    rng = random.Random(f"valuation:{cls}:{m}:{seed}")
    if cls == "additive":
        return AdditiveValuation([rng.randint(0, 12) for _ in range(m)])
    if cls == "xos":
        k = params.get("clauses", rng.randint(2, 4))
        clauses = []
        for _ in range(k):
            clauses.append(
                [rng.randint(0, 12) if rng.random() < 0.7 else 0 for _ in range(m)]
            )
        return XOSValuation(clauses)
    if cls == "budget-additive":
        weights = [rng.randint(0, 12) for _ in range(m)]
        total = max(1, sum(weights))
        return BudgetAdditiveValuation(weights, rng.randint(1, total))
    if cls == "coverage":
        universe = m + rng.randint(0, m)
        covers = []
        for _ in range(m):
            covers.append(sum(1 << u for u in range(universe) if rng.random() < 0.4))
        return CoverageValuation(m, covers)
    raise ValueError(f"unsupported valuation class {cls!r}; use one of {RANDOM_CLASSES}")
