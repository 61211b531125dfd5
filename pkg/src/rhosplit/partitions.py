"""Interval partitions with super-exponential growth and exact per-interval
subsets.

Boundaries are arbitrary-precision: the minimal compliant sizes grow like
2^(n^2/2), overflowing fixed-width integers near n = 10.  Per-interval
subsets carry exact cardinalities so that certificates stay exact at any
depth; structured descriptors (first-s, last-s, ...) remain countable far
beyond the explicit bit-vector cap.
"""

from __future__ import annotations

import threading
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from ._util import as_fraction, ceil_frac
from .omega_sets import (
    CombineNode,
    HorizonOverflowError,
    OmegaSet,
    parse_set,
)

__all__ = [
    "ExactCountError",
    "IntervalPartition",
    "IntervalSubset",
    "IntervalSymbolicSet",
    "build_partition",
    "interval_of",
    "verify_growth",
]

_EXPLICIT_SUBSET_LIMIT = 1 << 20
SUBSET_KINDS = ("full", "empty", "first", "last", "trace", "cotrace", "explicit")


class ExactCountError(ValueError):
    """An exact cardinality was requested that the descriptor cannot supply."""


class IntervalPartition:
    """Consecutive intervals I_n = [b_n, b_{n+1}) with |I_0| >= 2 and
    |I_n| > 2^n * |I_{<n}|.

    Generated partitions extend lazily; extension is append-only behind a
    lock, and reads of already-materialised boundaries never block.
    """

    __slots__ = ("_bounds", "_mode", "_factor", "even_sizes", "_lock")

    def __init__(self, boundaries: Sequence[int], mode: str | None,
                 factor: Fraction | None, even_sizes: bool):
        bounds = [int(b) for b in boundaries]
        if not bounds or bounds[0] != 0:
            raise ValueError("boundaries must start at 0")
        if any(b2 <= b1 for b1, b2 in zip(bounds, bounds[1:])):
            raise ValueError("boundaries must be strictly increasing")
        self._bounds = bounds
        self._mode = mode
        self._factor = factor
        self.even_sizes = even_sizes
        self._lock = threading.Lock()

    @classmethod
    def from_boundaries(cls, boundaries: Sequence[int]) -> "IntervalPartition":
        """Raw boundary list; growth is not enforced (for negative tests)."""
        return cls(boundaries, None, None, False)

    # -- lazy extension -------------------------------------------------

    def _next_size(self, n: int, prefix: int) -> int:
        minimal = 2 if n == 0 else (1 << n) * prefix + 1
        size = minimal
        if self._factor is not None:
            size = ceil_frac(self._factor * minimal)
        if self.even_sizes and size % 2:
            size += 1
        return size

    def ensure(self, count: int):
        """Materialise boundaries for intervals 0..count-1."""
        if len(self._bounds) - 1 >= count:
            return
        if self._mode is None:
            raise ValueError(
                f"raw partition has only {len(self._bounds) - 1} intervals"
            )
        with self._lock:
            while len(self._bounds) - 1 < count:
                n = len(self._bounds) - 1
                prefix = self._bounds[-1]
                self._bounds.append(prefix + self._next_size(n, prefix))

    @property
    def materialized_count(self) -> int:
        return len(self._bounds) - 1

    def boundary(self, i: int) -> int:
        if i < 0:
            raise IndexError("boundary index must be non-negative")
        self.ensure(i)
        return self._bounds[i]

    def boundaries(self, count: int) -> list[int]:
        self.ensure(count)
        return self._bounds[: count + 1]

    def size(self, n: int) -> int:
        return self.boundary(n + 1) - self.boundary(n)

    def prefix_size(self, n: int) -> int:
        """|I_{<n}| = b_n."""
        return self.boundary(n)

    def growth_ratio(self, n: int) -> Fraction:
        """|I_{<n}| / |I_n| as an exact rational."""
        return Fraction(self.prefix_size(n), self.size(n))

    def interval_of(self, x: int) -> int:
        if x < 0:
            raise ValueError("points live in the naturals")
        while self._bounds[-1] <= x:
            if self._mode is None:
                raise ValueError(f"{x} lies beyond the raw partition")
            self.ensure(len(self._bounds))
        return bisect_right(self._bounds, x) - 1

    def verify_growth(self) -> int | None:
        """None if compliant; else the least violating interval index."""
        for n in range(self.materialized_count):
            size = self._bounds[n + 1] - self._bounds[n]
            if n == 0:
                if size < 2:
                    return 0
            elif size <= (1 << n) * self._bounds[n]:
                return n
            if self.even_sizes and size % 2:
                return n
        return None

    # -- subset constructors ---------------------------------------------

    def full(self, k: int) -> "IntervalSubset":
        return IntervalSubset(self, k, "full", self.size(k))

    def empty(self, k: int) -> "IntervalSubset":
        return IntervalSubset(self, k, "empty", 0)

    def first(self, k: int, s: int) -> "IntervalSubset":
        if not 0 <= s <= self.size(k):
            raise ValueError(f"first-{s} does not fit interval {k}")
        return IntervalSubset(self, k, "first", s, s=s)

    def last(self, k: int, s: int) -> "IntervalSubset":
        if not 0 <= s <= self.size(k):
            raise ValueError(f"last-{s} does not fit interval {k}")
        return IntervalSubset(self, k, "last", s, s=s)

    def trace(self, k: int, base: OmegaSet) -> "IntervalSubset":
        lo, hi = self.boundary(k), self.boundary(k + 1)
        try:
            cnt = base.count_below(hi) - base.count_below(lo)
        except HorizonOverflowError as exc:
            raise ExactCountError(
                f"trace cardinality on interval {k} needs counts beyond the "
                f"explicit cap; use a structured descriptor ({exc})"
            ) from exc
        return IntervalSubset(self, k, "trace", cnt, base=base)

    def cotrace(self, k: int, base: OmegaSet) -> "IntervalSubset":
        inner = self.trace(k, base)
        return IntervalSubset(self, k, "cotrace", self.size(k) - inner.count,
                              base=base)

    def explicit(self, k: int, elements) -> "IntervalSubset":
        lo, hi = self.boundary(k), self.boundary(k + 1)
        if hi - lo > _EXPLICIT_SUBSET_LIMIT:
            raise ExactCountError(
                f"interval {k} is too large for an explicit subset"
            )
        elems = tuple(sorted(set(int(e) for e in elements)))
        if elems and not (lo <= elems[0] and elems[-1] < hi):
            raise ValueError(f"elements escape interval {k} = [{lo},{hi})")
        return IntervalSubset(self, k, "explicit", len(elems), elements=elems)

    def complement_subset(self, sub: "IntervalSubset") -> "IntervalSubset":
        k, size = sub.index, self.size(sub.index)
        if sub.kind == "full":
            return self.empty(k)
        if sub.kind == "empty":
            return self.full(k)
        if sub.kind == "first":
            return self.last(k, size - sub.s)
        if sub.kind == "last":
            return self.first(k, size - sub.s)
        if sub.kind == "trace":
            return self.cotrace(k, sub.base)
        if sub.kind == "cotrace":
            return self.trace(k, sub.base)
        lo, hi = self.boundary(k), self.boundary(k + 1)
        present = set(sub.elements)
        return self.explicit(k, [x for x in range(lo, hi) if x not in present])

    def subset_from_json(self, obj: Mapping) -> "IntervalSubset":
        k = int(obj["index"])
        kind = obj["kind"]
        if kind == "full":
            return self.full(k)
        if kind == "empty":
            return self.empty(k)
        if kind == "first":
            return self.first(k, int(obj["s"]))
        if kind == "last":
            return self.last(k, int(obj["s"]))
        if kind in ("trace", "cotrace"):
            base = parse_set(obj["base"])
            return self.trace(k, base) if kind == "trace" else self.cotrace(k, base)
        if kind == "explicit":
            return self.explicit(k, obj["elements"])
        raise ValueError(f"unknown subset kind {kind!r}")

    def to_json(self, count: int | None = None) -> list[str]:
        bounds = self.boundaries(count) if count is not None else list(self._bounds)
        return [str(b) for b in bounds]

    def __repr__(self):
        mode = self._mode or "raw"
        return (f"IntervalPartition({mode}, materialized={self.materialized_count},"
                f" even_sizes={self.even_sizes})")


def build_partition(min_growth="minimal", count: int = 16,
                    even_sizes: bool = False) -> IntervalPartition:
    """Construct a compliant partition.

    min_growth is either "minimal" (smallest sizes satisfying the strict
    growth inequality, parity-adjusted when even_sizes is set) or a factor
    f >= 1 applied to the minimal size, rounded up and parity-adjusted.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if min_growth == "minimal":
        mode, factor = "minimal", None
    else:
        if isinstance(min_growth, str) and min_growth.startswith("factor:"):
            min_growth = min_growth.split(":", 1)[1]
        factor = as_fraction(min_growth)
        if factor < 1:
            raise ValueError("growth factor must be at least 1")
        mode = "factor"
    part = IntervalPartition([0], mode, factor, even_sizes)
    part.ensure(count)
    return part


def interval_of(partition: IntervalPartition, x: int) -> int:
    return partition.interval_of(x)


def verify_growth(partition: IntervalPartition) -> int | None:
    return partition.verify_growth()


@dataclass(frozen=True)
class IntervalSubset:
    """A subset of one interval I_k with an exact cardinality.

    Structured kinds (first/last/full/empty) stay exact at any interval
    size; trace kinds are exact whenever the base set counts exactly over
    [b_k, b_{k+1}), which excludes Bernoulli sets beyond the explicit cap.
    """

    partition: IntervalPartition = field(repr=False)
    index: int
    kind: str
    count: int
    s: int | None = None
    base: OmegaSet | None = field(default=None, repr=False)
    elements: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind not in SUBSET_KINDS:
            raise ValueError(f"unknown subset kind {self.kind!r}")
        if not 0 <= self.count <= self.size:
            raise ValueError(
                f"cardinality {self.count} escapes interval {self.index}"
            )

    @property
    def lo(self) -> int:
        return self.partition.boundary(self.index)

    @property
    def hi(self) -> int:
        return self.partition.boundary(self.index + 1)

    @property
    def size(self) -> int:
        return self.hi - self.lo

    def ratio(self) -> Fraction:
        return Fraction(self.count, self.size)

    # -- pointwise and range queries ------------------------------------

    def membership(self, x: int) -> bool:
        if not (self.lo <= x < self.hi):
            return False
        k = self.kind
        if k == "full":
            return True
        if k == "empty":
            return False
        if k == "first":
            return x < self.lo + self.s
        if k == "last":
            return x >= self.hi - self.s
        if k == "trace":
            return self.base.contains(x)
        if k == "cotrace":
            return not self.base.contains(x)
        return x in self.elements

    def count_strictly_below(self, x: int) -> int:
        """|subset ∩ [lo, x)| with x clamped into [lo, hi]."""
        if x <= self.lo:
            return 0
        if x >= self.hi:
            return self.count
        k = self.kind
        if k == "full":
            return x - self.lo
        if k == "empty":
            return 0
        if k == "first":
            return min(self.s, x - self.lo)
        if k == "last":
            return max(0, x - (self.hi - self.s))
        if k == "trace":
            return self.base.count_below(x) - self.base.count_below(self.lo)
        if k == "cotrace":
            inside = self.base.count_below(x) - self.base.count_below(self.lo)
            return (x - self.lo) - inside
        lo_i = 0
        while lo_i < len(self.elements) and self.elements[lo_i] < x:
            lo_i += 1
        return lo_i

    def select(self, j: int) -> int:
        """j-th element (0-indexed) of the subset."""
        if not 0 <= j < self.count:
            raise IndexError(f"subset of interval {self.index} has {self.count} points")
        k = self.kind
        if k in ("full", "first"):
            return self.lo + j
        if k == "last":
            return self.hi - self.s + j
        if k == "explicit":
            return self.elements[j]
        if k == "trace":
            return self.base.kth_element(self.base.count_below(self.lo) + j)
        lo, hi = self.lo, self.hi
        while lo + 1 < hi:
            mid = (lo + hi) // 2
            if self.count_strictly_below(mid) <= j:
                lo = mid
            else:
                hi = mid
        return lo

    def iter_points(self):
        for j in range(self.count):
            yield self.select(j)

    # -- exact intersections ---------------------------------------------

    def intersect_set_count(self, other: OmegaSet) -> int:
        """|subset ∩ other|, exactly."""
        k = self.kind
        if k == "empty" or self.count == 0:
            return 0
        if self.base is other:
            return self.count if k == "trace" else 0
        if k == "full":
            return _range_count(other, self.lo, self.hi)
        if k == "first":
            return _range_count(other, self.lo, self.lo + self.s)
        if k == "last":
            return _range_count(other, self.hi - self.s, self.hi)
        if k == "explicit":
            return sum(1 for e in self.elements if other.contains(e))
        if k == "trace":
            node = CombineNode("inter", [self.base, other])
            return _range_count(node, self.lo, self.hi)
        whole = _range_count(other, self.lo, self.hi)
        node = CombineNode("inter", [self.base, other])
        return whole - _range_count(node, self.lo, self.hi)

    def intersect_subset_count(self, other: "IntervalSubset") -> int:
        """|self ∩ other| for subsets of the same interval, exactly."""
        if other.index != self.index:
            raise ValueError("subsets live on different intervals")
        a, b = self, other
        if a.count == 0 or b.count == 0:
            return 0
        if a.kind == "full":
            return b.count
        if b.kind == "full":
            return a.count
        if a.kind == "explicit":
            return sum(1 for e in a.elements if b.membership(e))
        if b.kind == "explicit":
            return sum(1 for e in b.elements if a.membership(e))
        if a.kind == "first" or a.kind == "last":
            a, b = b, a
        # now b.kind in (first, last); a in (first, last, trace, cotrace)
        if b.kind == "first":
            return a.count_strictly_below(b.lo + b.s)
        if b.kind == "last":
            return a.count - a.count_strictly_below(b.hi - b.s)
        # both trace-like
        if a.base is b.base:
            same = a.kind == b.kind
            if same:
                return a.count
            return 0
        if a.kind == "cotrace" and b.kind == "cotrace":
            both = self.partition.trace(
                self.index, CombineNode("union", [a.base, b.base])
            )
            return self.size - both.count
        if a.kind == "cotrace":
            a, b = b, a
        # a is trace
        node = CombineNode("inter", [a.base, b.base])
        inter = _range_count(node, a.lo, a.hi)
        if b.kind == "trace":
            return inter
        return a.count - inter

    def complement(self) -> "IntervalSubset":
        return self.partition.complement_subset(self)

    def to_json(self) -> dict:
        out: dict = {"index": self.index, "kind": self.kind, "count": self.count}
        if self.s is not None:
            out["s"] = self.s
        if self.base is not None:
            out["base"] = self.base.descriptor()
        if self.elements is not None:
            out["elements"] = list(self.elements)
        return out


def _range_count(s: OmegaSet, lo: int, hi: int) -> int:
    try:
        return s.count_below(hi) - s.count_below(lo)
    except HorizonOverflowError as exc:
        raise ExactCountError(
            f"exact count over [{lo},{hi}) is beyond the explicit cap; "
            f"use a structured descriptor ({exc})"
        ) from exc


_DEFAULT_KINDS = ("singleton", "empty", "full", "trace")


class IntervalSymbolicSet(OmegaSet):
    """A set given per interval of a partition by exact subset descriptors.

    Intervals without an explicit value follow the default rule; the
    "singleton" default keeps assembled sets infinite by placing the least
    element of every unclaimed interval.  Counting is exact at any
    magnitude: a point at 2^1000 sits in interval ~44 of a minimal
    partition, so prefix counts cost one pass over a few dozen intervals.
    """

    __slots__ = ("part", "values", "default", "default_base", "_resolved")

    def __init__(self, partition: IntervalPartition,
                 values: Mapping[int, IntervalSubset] | None = None,
                 default: str = "singleton",
                 default_base: OmegaSet | None = None):
        super().__init__()
        if default not in _DEFAULT_KINDS:
            raise ValueError(f"unknown default rule {default!r}")
        if default == "trace" and default_base is None:
            raise ValueError("trace default needs a base set")
        self.part = partition
        vals = dict(values or {})
        for k, sub in vals.items():
            if sub.index != k:
                raise ValueError(f"subset at key {k} has index {sub.index}")
            if sub.partition is not partition:
                raise ValueError("subset built on a different partition")
        self.values = vals
        self.default = default
        self.default_base = default_base
        self._resolved: dict[int, IntervalSubset] = {}

    def value_at(self, k: int) -> IntervalSubset:
        sub = self.values.get(k)
        if sub is not None:
            return sub
        sub = self._resolved.get(k)
        if sub is not None:
            return sub
        if self.default == "singleton":
            sub = self.part.first(k, min(1, self.part.size(k)))
        elif self.default == "empty":
            sub = self.part.empty(k)
        elif self.default == "full":
            sub = self.part.full(k)
        else:
            sub = self.part.trace(k, self.default_base)
        self._resolved[k] = sub
        return sub

    def with_value(self, k: int, sub: IntervalSubset) -> "IntervalSymbolicSet":
        vals = dict(self.values)
        vals[k] = sub
        return IntervalSymbolicSet(self.part, vals, self.default, self.default_base)

    # -- OmegaSet surface --------------------------------------------------

    def contains(self, k: int) -> bool:
        return self.value_at(self.part.interval_of(k)).membership(k)

    def count_below(self, n: int) -> int:
        if n <= 0:
            return 0
        last = self.part.interval_of(n - 1)
        total = sum(self.value_at(j).count for j in range(last))
        total += self.value_at(last).count_strictly_below(n)
        return total

    def counts_at(self, checkpoints):
        return [self.count_below(n) for n in checkpoints]

    def prefix_count(self, k: int) -> int:
        """|self ∩ I_{<=k}| = count below b_{k+1}."""
        return sum(self.value_at(j).count for j in range(k + 1))

    def kth_element(self, k: int) -> int:
        if k < 0:
            raise IndexError("negative index")
        seen, j = 0, 0
        while True:
            sub = self.value_at(j)
            if k < seen + sub.count:
                return sub.select(k - seen)
            seen += sub.count
            j += 1
            if self.default == "empty" and j > max(self.values, default=-1):
                raise IndexError(f"element {k} beyond finite set of size {seen}")

    def size_if_finite(self) -> int | None:
        if self.default != "empty":
            return None
        return sum(sub.count for sub in self.values.values())

    @property
    def provably_finite(self) -> bool:
        return self.default == "empty"

    @property
    def provably_coinfinite(self) -> bool:
        return self.default in ("singleton", "empty")

    def enumerate_below(self, n, limit):
        if self.count_below(n) > limit:
            return None
        out = []
        last = self.part.interval_of(n - 1) if n > 0 else 0
        for j in range(last + 1):
            sub = self.value_at(j)
            for x in sub.iter_points():
                if x < n:
                    out.append(x)
        return out

    def _materialize_impl(self, n):
        out = np.zeros(n, dtype=bool)
        if n == 0:
            return out
        last = self.part.interval_of(n - 1)
        for j in range(last + 1):
            sub = self.value_at(j)
            lo, hi = sub.lo, min(sub.hi, n)
            if lo >= n or sub.count == 0:
                continue
            kind = sub.kind
            if kind == "full":
                out[lo:hi] = True
            elif kind == "first":
                out[lo : min(lo + sub.s, n)] = True
            elif kind == "last":
                start = sub.hi - sub.s
                if start < n:
                    out[start:hi] = True
            elif kind == "trace":
                out[lo:hi] = sub.base.materialize(hi)[lo:hi]
            elif kind == "cotrace":
                out[lo:hi] = ~sub.base.materialize(hi)[lo:hi]
            elif kind == "explicit":
                for e in sub.elements:
                    if e < n:
                        out[e] = True
        return out

    def to_json(self, count: int | None = None) -> dict:
        upto = count if count is not None else self.part.materialized_count
        out = {
            "partition": self.part.to_json(upto),
            "default": self.default,
            "values": {str(k): self.value_at(k).to_json() for k in range(upto)},
        }
        if self.default_base is not None:
            out["default_base"] = self.default_base.descriptor()
        return out

    def __repr__(self):
        return (f"IntervalSymbolicSet(defined={sorted(self.values)}, "
                f"default={self.default!r})")
