"""Infinite subsets of the naturals with exact counting at finite horizon.

A set is an immutable descriptor tree.  Membership of a single point is
always computable.  Prefix counts use closed forms wherever the
descriptor admits one (arithmetic progressions, eventually periodic
boolean combinations, sparse enumerations) and fall back to materialised
bit vectors below a configurable cap.  Partition-scale work should use
the interval-symbolic representation from :mod:`rhosplit.partitions`,
which counts exactly at any magnitude.
"""

from __future__ import annotations

import os
import re
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Callable, Iterator, Sequence

import numpy as np

from ._util import GOLDEN64, MASK64, as_fraction, mix64

__all__ = [
    "DEFAULT_EXPLICIT_CAP",
    "HorizonOverflowError",
    "FiniteSetError",
    "OmegaSet",
    "Progression",
    "ExplicitSet",
    "BernoulliSet",
    "CombineNode",
    "PowersSet",
    "SequenceSet",
    "StrideSelection",
    "Prefix",
    "OMEGA",
    "EVENS",
    "ODDS",
    "explicit_cap",
    "materialize_prefix",
    "count_below",
    "combine",
    "intersect",
    "union",
    "difference",
    "complement",
    "kth_element",
    "parse_set",
]

DEFAULT_EXPLICIT_CAP = 1 << 27
_ENV_CAP = "RHOSPLIT_HORIZON_CAP"

# Closed-form counting guards: prefix scans stay cheap, combined periodic
# patterns stay small, sparse enumerations stay bounded.
_PREFIX_SCAN_LIMIT = 1 << 16
_PATTERN_LIMIT = 1 << 12
_ENUM_LIMIT = 1 << 18
_CHUNK = 1 << 22

_PRF_MULT = 0xBF58476D1CE4E5B9


def explicit_cap() -> int:
    """Largest horizon for explicit bit-vector materialisation."""
    raw = os.environ.get(_ENV_CAP)
    return int(raw) if raw else DEFAULT_EXPLICIT_CAP


class HorizonOverflowError(Exception):
    """Explicit materialisation was requested beyond the configured cap.

    Callers holding partition-scale data should switch to the
    interval-symbolic representation instead of raising the cap.
    """


class FiniteSetError(ValueError):
    """An operation that needs an infinite set got a finite-flagged one."""


@dataclass(frozen=True)
class TailPattern:
    """Eventually periodic structure: for k >= start, k is a member iff
    pattern[k % period]."""

    start: int
    period: int
    pattern: tuple[bool, ...]

    def count_range(self, lo: int, hi: int) -> int:
        """Members in [lo, hi); requires lo >= start."""
        if hi <= lo:
            return 0
        per_period = sum(self.pattern)
        full, rest = divmod(hi - lo, self.period)
        total = full * per_period
        base = lo % self.period
        for j in range(rest):
            if self.pattern[(base + j) % self.period]:
                total += 1
        return total


class OmegaSet:
    """Base class for enumerable subsets of the naturals.

    Values are immutable after construction; all operations are pure, so
    sharing across threads is safe.  The only internal mutation is a
    grow-only materialisation cache.
    """

    __slots__ = ("_mat",)

    def __init__(self):
        self._mat: np.ndarray | None = None

    # -- membership and structure ------------------------------------

    def contains(self, k: int) -> bool:
        raise NotImplementedError

    def tail_pattern(self) -> TailPattern | None:
        return None

    @property
    def provably_finite(self) -> bool:
        tp = self.tail_pattern()
        return tp is not None and not any(tp.pattern)

    @property
    def provably_coinfinite(self) -> bool:
        tp = self.tail_pattern()
        if tp is not None:
            return not all(tp.pattern)
        return False

    def size_if_finite(self) -> int | None:
        tp = self.tail_pattern()
        if tp is not None and not any(tp.pattern):
            return self.count_below(tp.start)
        return None

    # -- exact counting ------------------------------------------------

    def count_below(self, n: int) -> int:
        """|self ∩ [0, n)|, exactly.

        Strategy order: closed form from the periodic structure, then a
        materialised bit vector below the cap, then sparse enumeration
        (the rescue path for astronomically large horizons).
        """
        if n <= 0:
            return 0
        tp = self.tail_pattern()
        if tp is not None and tp.start <= _PREFIX_SCAN_LIMIT:
            head = min(n, tp.start)
            c = sum(1 for k in range(head) if self.contains(k))
            if n > tp.start:
                c += tp.count_range(tp.start, n)
            return c
        if n <= explicit_cap():
            return int(self.materialize(n).sum())
        elems = self.enumerate_below(n, _ENUM_LIMIT)
        if elems is not None:
            return len(elems)
        return int(self.materialize(n).sum())  # raises HorizonOverflowError

    def counts_at(self, checkpoints: Sequence[int]) -> list[int]:
        """count_below at each checkpoint, sharing work across them."""
        if not checkpoints:
            return []
        horizon = max(checkpoints)
        tp = self.tail_pattern()
        if tp is not None and tp.start <= _PREFIX_SCAN_LIMIT:
            return [self.count_below(n) for n in checkpoints]
        if horizon <= explicit_cap():
            arr = self.materialize(horizon)
            cum = np.cumsum(arr, dtype=np.int64)
            return [int(cum[n - 1]) if n > 0 else 0 for n in checkpoints]
        elems = self.enumerate_below(horizon, _ENUM_LIMIT)
        if elems is not None:
            return [bisect_left(elems, n) for n in checkpoints]
        raise HorizonOverflowError(
            f"cannot count at horizon {horizon}: beyond the cap and not "
            "sparsely enumerable"
        )

    def enumerate_below(self, n: int, limit: int) -> list[int] | None:
        """Sorted members below n, or None when not cheaply enumerable."""
        return None

    # -- materialisation -----------------------------------------------

    def materialize(self, n: int, cap: int | None = None) -> np.ndarray:
        """Membership bits over [0, n) as a read-only bool vector."""
        if n < 0:
            raise ValueError("horizon must be non-negative")
        cap = explicit_cap() if cap is None else cap
        if n > cap:
            raise HorizonOverflowError(
                f"explicit horizon {n} exceeds cap {cap}; "
                "use the interval-symbolic form"
            )
        cached = self._mat
        if cached is not None and cached.shape[0] >= n:
            return cached[:n]
        arr = self._materialize_impl(n)
        arr.flags.writeable = False
        self._mat = arr
        return arr

    def _materialize_impl(self, n: int) -> np.ndarray:
        out = np.zeros(n, dtype=bool)
        for k in range(n):
            if self.contains(k):
                out[k] = True
        return out

    # -- enumeration -----------------------------------------------------

    def kth_element(self, k: int) -> int:
        """k-th member (0-indexed) of the increasing enumeration."""
        if k < 0:
            raise IndexError("negative index")
        total = self.size_if_finite()
        if total is not None and k >= total:
            raise IndexError(f"element {k} beyond finite set of size {total}")
        lo, hi = 0, 256
        while self.count_below(hi) <= k:
            lo, hi = hi, hi * 2
        # invariant: count_below(lo) <= k < count_below(hi)
        while lo + 1 < hi:
            mid = (lo + hi) // 2
            if self.count_below(mid) <= k:
                lo = mid
            else:
                hi = mid
        return lo

    def iter_elements(self) -> Iterator[int]:
        k = 0
        while True:
            yield self.kth_element(k)
            k += 1

    def descriptor(self) -> str:
        """Grammar form of this set, when it has one."""
        raise NotImplementedError(f"{type(self).__name__} has no grammar form")


class Progression(OmegaSet):
    """Arithmetic progression a, a+d, a+2d, ..."""

    __slots__ = ("a", "d")

    def __init__(self, a: int, d: int):
        super().__init__()
        if a < 0 or d <= 0:
            raise ValueError("progression needs a >= 0 and d >= 1")
        self.a = a
        self.d = d

    def contains(self, k: int) -> bool:
        return k >= self.a and (k - self.a) % self.d == 0

    def count_below(self, n: int) -> int:
        if n <= self.a:
            return 0
        return (n - 1 - self.a) // self.d + 1

    def counts_at(self, checkpoints):
        return [self.count_below(n) for n in checkpoints]

    def kth_element(self, k: int) -> int:
        if k < 0:
            raise IndexError("negative index")
        return self.a + self.d * k

    def tail_pattern(self):
        if self.a > _PREFIX_SCAN_LIMIT or self.d > _PATTERN_LIMIT:
            return None
        res = self.a % self.d
        return TailPattern(self.a, self.d, tuple(r == res for r in range(self.d)))

    @property
    def provably_finite(self) -> bool:
        return False

    @property
    def provably_coinfinite(self) -> bool:
        return self.d > 1

    def enumerate_below(self, n, limit):
        c = self.count_below(n)
        if c > limit:
            return None
        return [self.a + self.d * j for j in range(c)]

    def _materialize_impl(self, n):
        out = np.zeros(n, dtype=bool)
        if self.a < n:
            out[self.a :: self.d] = True
        return out

    def descriptor(self) -> str:
        if self.a == 0 and self.d == 1:
            return "omega"
        return f"prog({self.a},{self.d})"

    def __repr__(self):
        return f"Progression({self.a}, {self.d})"


class ExplicitSet(OmegaSet):
    """Explicit prefix bits followed by a periodic tail pattern."""

    __slots__ = ("prefix", "tail", "_cum")

    def __init__(self, prefix_bits, tail: Sequence[bool] = (False,)):
        super().__init__()
        arr = np.asarray(prefix_bits, dtype=bool)
        if arr.ndim != 1:
            raise ValueError("prefix bits must be one-dimensional")
        arr = arr.copy()
        arr.flags.writeable = False
        self.prefix = arr
        self.tail = tuple(bool(b) for b in tail)
        if not self.tail:
            raise ValueError("tail pattern must be non-empty")
        self._cum = None

    @classmethod
    def from_elements(cls, elements, horizon: int | None = None,
                      tail: Sequence[bool] = (False,)) -> "ExplicitSet":
        elements = sorted(set(elements))
        if elements and elements[0] < 0:
            raise ValueError("elements must be naturals")
        n = horizon if horizon is not None else (elements[-1] + 1 if elements else 0)
        bits = np.zeros(n, dtype=bool)
        for e in elements:
            if e < n:
                bits[e] = True
        return cls(bits, tail)

    def _cumulative(self):
        if self._cum is None:
            self._cum = np.cumsum(self.prefix, dtype=np.int64)
        return self._cum

    def contains(self, k: int) -> bool:
        n = self.prefix.shape[0]
        if k < n:
            return bool(self.prefix[k])
        return self.tail[(k - n) % len(self.tail)]

    def count_below(self, n: int) -> int:
        if n <= 0:
            return 0
        plen = self.prefix.shape[0]
        head = min(n, plen)
        c = int(self._cumulative()[head - 1]) if head > 0 else 0
        if n > plen:
            span = n - plen
            per = len(self.tail)
            full, rest = divmod(span, per)
            c += full * sum(self.tail) + sum(self.tail[:rest])
        return c

    def counts_at(self, checkpoints):
        return [self.count_below(n) for n in checkpoints]

    def tail_pattern(self):
        n, per = self.prefix.shape[0], len(self.tail)
        pattern = tuple(self.tail[(r - n) % per] for r in range(per))
        return TailPattern(n, per, pattern)

    def enumerate_below(self, n, limit):
        if self.count_below(n) > limit:
            return None
        head = [int(i) for i in np.flatnonzero(self.prefix) if i < n]
        plen = self.prefix.shape[0]
        out = head
        k = plen
        while k < n:
            if self.tail[(k - plen) % len(self.tail)]:
                out.append(k)
            k += 1
        return out

    def _materialize_impl(self, n):
        plen = self.prefix.shape[0]
        if n <= plen:
            return self.prefix[:n].copy()
        reps = -((-(n - plen)) // len(self.tail))
        tail_arr = np.tile(np.asarray(self.tail, dtype=bool), reps)[: n - plen]
        return np.concatenate([self.prefix, tail_arr])

    def __repr__(self):
        return f"ExplicitSet(<{self.prefix.shape[0]} bits>, tail={self.tail})"


class BernoulliSet(OmegaSet):
    """Pseudo-random set: k is a member iff PRF(seed, k) < p * 2^64.

    The PRF is counter-mode (a pure function of (seed, k)), so membership
    of any index is computable without streaming and two materialisations
    agree bit for bit.
    """

    __slots__ = ("p", "seed", "_key", "_thr")

    def __init__(self, p, seed: int):
        super().__init__()
        p = as_fraction(p)
        if not (0 < p < 1):
            raise ValueError(f"Bernoulli density must lie in (0,1), got {p}")
        self.p = p
        self.seed = int(seed)
        self._key = mix64((self.seed + GOLDEN64) & MASK64)
        thr = -((-(p.numerator << 64)) // p.denominator)  # ceil(p * 2^64)
        self._thr = min(thr, MASK64)

    def contains(self, k: int) -> bool:
        u = mix64(self._key ^ ((k * _PRF_MULT) & MASK64))
        return u < self._thr

    def _bits_range(self, lo: int, hi: int) -> np.ndarray:
        with np.errstate(over="ignore"):
            x = np.arange(lo, hi, dtype=np.uint64)
            x = (x * np.uint64(_PRF_MULT)) ^ np.uint64(self._key)
            x = x ^ (x >> np.uint64(30))
            x = x * np.uint64(0xBF58476D1CE4E5B9)
            x = x ^ (x >> np.uint64(27))
            x = x * np.uint64(0x94D049BB133111EB)
            x = x ^ (x >> np.uint64(31))
        return x < np.uint64(self._thr)

    def _materialize_impl(self, n):
        return self._bits_range(0, n)

    def count_below(self, n: int) -> int:
        if n <= 0:
            return 0
        if n > explicit_cap():
            raise HorizonOverflowError(
                f"Bernoulli count at {n} exceeds cap {explicit_cap()}; "
                "use a structured per-interval descriptor"
            )
        if n <= (1 << 24):
            return int(self.materialize(n).sum())
        total, lo = 0, 0
        while lo < n:
            hi = min(lo + _CHUNK, n)
            total += int(self._bits_range(lo, hi).sum())
            lo = hi
        return total

    def kth_element(self, k: int) -> int:
        if k < 0:
            raise IndexError("negative index")
        base, lo = 0, 0
        cap = explicit_cap()
        while lo < cap:
            hi = min(lo + _CHUNK, cap)
            bits = self._bits_range(lo, hi)
            c = int(bits.sum())
            if k < base + c:
                return lo + int(np.flatnonzero(bits)[k - base])
            base += c
            lo = hi
        raise HorizonOverflowError(f"element {k} not found below cap {cap}")

    @property
    def provably_finite(self) -> bool:
        return False

    @property
    def provably_coinfinite(self) -> bool:
        return True

    def descriptor(self) -> str:
        return f"bern({self.p},{self.seed})"

    def __repr__(self):
        return f"BernoulliSet({self.p}, seed={self.seed})"


_BINARY_OPS = ("inter", "union", "diff")


class CombineNode(OmegaSet):
    """Pointwise boolean combination of child sets."""

    __slots__ = ("op", "children")

    def __init__(self, op: str, children: Sequence[OmegaSet]):
        super().__init__()
        if op == "compl":
            if len(children) != 1:
                raise ValueError("complement takes exactly one child")
        elif op in _BINARY_OPS:
            if len(children) != 2:
                raise ValueError(f"{op} takes exactly two children")
        else:
            raise ValueError(f"unknown combination op {op!r}")
        self.op = op
        self.children = tuple(children)

    def contains(self, k: int) -> bool:
        ch = self.children
        if self.op == "compl":
            return not ch[0].contains(k)
        a = ch[0].contains(k)
        if self.op == "inter":
            return a and ch[1].contains(k)
        if self.op == "union":
            return a or ch[1].contains(k)
        return a and not ch[1].contains(k)

    def tail_pattern(self):
        tps = [c.tail_pattern() for c in self.children]
        if any(tp is None for tp in tps):
            return None
        if self.op == "compl":
            tp = tps[0]
            return TailPattern(tp.start, tp.period,
                               tuple(not b for b in tp.pattern))
        ta, tb = tps
        period = lcm(ta.period, tb.period)
        if period > _PATTERN_LIMIT:
            return None
        start = max(ta.start, tb.start)
        out = []
        for r in range(period):
            a = ta.pattern[r % ta.period]
            b = tb.pattern[r % tb.period]
            if self.op == "inter":
                out.append(a and b)
            elif self.op == "union":
                out.append(a or b)
            else:
                out.append(a and not b)
        return TailPattern(start, period, tuple(out))

    def enumerate_below(self, n, limit):
        if self.op == "compl":
            return None
        left = self.children[0].enumerate_below(n, limit)
        if self.op in ("inter", "diff"):
            base = left
            if base is None and self.op == "inter":
                base = self.children[1].enumerate_below(n, limit)
            if base is None:
                return None
            return [e for e in base if self.contains(e)]
        right = self.children[1].enumerate_below(n, limit)
        if left is None or right is None:
            return None
        merged = sorted(set(left) | set(right))
        return merged if len(merged) <= limit else None

    def _materialize_impl(self, n):
        ch = self.children
        if self.op == "compl":
            return ~ch[0].materialize(n)
        a = ch[0].materialize(n)
        b = ch[1].materialize(n)
        if self.op == "inter":
            return a & b
        if self.op == "union":
            return a | b
        return a & ~b

    def descriptor(self) -> str:
        parts = ",".join(c.descriptor() for c in self.children)
        return f"{self.op}({parts})"

    def __repr__(self):
        return f"CombineNode({self.op!r}, {list(self.children)!r})"


class PowersSet(OmegaSet):
    """Geometric set {base**k : k >= 0}."""

    __slots__ = ("base",)

    def __init__(self, base: int):
        super().__init__()
        if base < 2:
            raise ValueError("base must be at least 2")
        self.base = int(base)

    def contains(self, k: int) -> bool:
        if k < 1:
            return False
        while k % self.base == 0:
            k //= self.base
        return k == 1

    def count_below(self, n: int) -> int:
        c, v = 0, 1
        while v < n:
            c += 1
            v *= self.base
        return c

    def counts_at(self, checkpoints):
        return [self.count_below(n) for n in checkpoints]

    def kth_element(self, k: int) -> int:
        if k < 0:
            raise IndexError("negative index")
        return self.base ** k

    def enumerate_below(self, n, limit):
        out, v = [], 1
        while v < n:
            out.append(v)
            v *= self.base
        return out

    @property
    def provably_finite(self) -> bool:
        return False

    @property
    def provably_coinfinite(self) -> bool:
        return True

    def _materialize_impl(self, n):
        out = np.zeros(n, dtype=bool)
        for e in self.enumerate_below(n, n):
            out[e] = True
        return out

    def descriptor(self) -> str:
        return f"pow({self.base})"

    def __repr__(self):
        return f"PowersSet({self.base})"


class SequenceSet(OmegaSet):
    """Range of a strictly increasing integer sequence given by a function.

    Intended for sparse sequences (the constructor contract asserts
    co-infinitude); increases are validated as values are demanded.
    """

    __slots__ = ("fn", "name", "_vals", "coinfinite")

    def __init__(self, fn: Callable[[int], int], name: str = "seq",
                 coinfinite: bool = True):
        super().__init__()
        self.fn = fn
        self.name = name
        self.coinfinite = coinfinite
        self._vals: list[int] = []

    def _ensure(self, idx: int):
        vals = self._vals
        while len(vals) <= idx:
            v = int(self.fn(len(vals)))
            if vals and v <= vals[-1]:
                raise ValueError(
                    f"{self.name} is not strictly increasing at index {len(vals)}"
                )
            if v < 0:
                raise ValueError("sequence values must be naturals")
            vals.append(v)

    def _extend_past(self, bound: int):
        self._ensure(0)
        while self._vals[-1] < bound:
            self._ensure(len(self._vals))

    def contains(self, k: int) -> bool:
        self._extend_past(k)
        i = bisect_left(self._vals, k)
        return i < len(self._vals) and self._vals[i] == k

    def count_below(self, n: int) -> int:
        if n <= 0:
            return 0
        self._extend_past(n)
        return bisect_left(self._vals, n)

    def counts_at(self, checkpoints):
        return [self.count_below(n) for n in checkpoints]

    def kth_element(self, k: int) -> int:
        if k < 0:
            raise IndexError("negative index")
        self._ensure(k)
        return self._vals[k]

    def enumerate_below(self, n, limit):
        c = self.count_below(n)
        if c > limit:
            return None
        return self._vals[:c]

    @property
    def provably_finite(self) -> bool:
        return False

    @property
    def provably_coinfinite(self) -> bool:
        return self.coinfinite

    def _materialize_impl(self, n):
        out = np.zeros(n, dtype=bool)
        for e in self.enumerate_below(n, n):
            out[e] = True
        return out

    def __repr__(self):
        return f"SequenceSet({self.name})"


class StrideSelection(OmegaSet):
    """Every stride-th element of a base set, starting at position offset."""

    __slots__ = ("source", "stride", "offset")

    def __init__(self, source: OmegaSet, stride: int, offset: int = 0):
        super().__init__()
        if stride < 1 or not (0 <= offset < stride):
            raise ValueError("need stride >= 1 and 0 <= offset < stride")
        self.source = source
        self.stride = stride
        self.offset = offset

    def contains(self, k: int) -> bool:
        if not self.source.contains(k):
            return False
        j = self.source.count_below(k)
        return j % self.stride == self.offset

    def count_below(self, n: int) -> int:
        j = self.source.count_below(n)
        if j <= self.offset:
            return 0
        return (j - self.offset + self.stride - 1) // self.stride

    def counts_at(self, checkpoints):
        src = self.source.counts_at(checkpoints)
        out = []
        for j in src:
            if j <= self.offset:
                out.append(0)
            else:
                out.append((j - self.offset + self.stride - 1) // self.stride)
        return out

    def kth_element(self, k: int) -> int:
        if k < 0:
            raise IndexError("negative index")
        return self.source.kth_element(self.offset + self.stride * k)

    @property
    def provably_finite(self) -> bool:
        return self.source.provably_finite

    @property
    def provably_coinfinite(self) -> bool:
        return self.stride > 1 or self.source.provably_coinfinite

    def _materialize_impl(self, n):
        base = self.source.materialize(n)
        idx = np.flatnonzero(base)[self.offset :: self.stride]
        out = np.zeros(n, dtype=bool)
        out[idx] = True
        return out

    def descriptor(self) -> str:
        return f"every({self.source.descriptor()},{self.stride},{self.offset})"

    def __repr__(self):
        return f"StrideSelection({self.source!r}, {self.stride}, {self.offset})"


OMEGA = Progression(0, 1)
EVENS = Progression(0, 2)
ODDS = Progression(1, 2)


# -- finite prefixes ------------------------------------------------------


class Prefix:
    """Finite truncation of a set: a horizon and the bits below it."""

    __slots__ = ("horizon", "bits")

    def __init__(self, horizon: int, bits):
        arr = np.asarray(bits, dtype=bool)
        if arr.shape != (horizon,):
            raise ValueError("bit vector length must equal the horizon")
        arr = arr.copy()
        arr.flags.writeable = False
        self.horizon = horizon
        self.bits = arr

    @property
    def count(self) -> int:
        return int(self.bits.sum())

    def elements(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.bits)]

    def to_rle(self) -> list[int]:
        """Run lengths, alternating and starting with a run of zeros
        (possibly of length 0)."""
        if self.horizon == 0:
            return []
        changes = np.flatnonzero(np.diff(self.bits)) + 1
        edges = np.concatenate([[0], changes, [self.horizon]])
        runs = np.diff(edges).tolist()
        if bool(self.bits[0]):
            runs = [0] + runs
        return [int(r) for r in runs]

    @classmethod
    def from_rle(cls, runs: Sequence[int], horizon: int) -> "Prefix":
        bits = np.zeros(horizon, dtype=bool)
        pos, val = 0, False
        for r in runs:
            if val:
                bits[pos : pos + r] = True
            pos += r
            val = not val
        if pos != horizon:
            raise ValueError("run lengths do not sum to the horizon")
        return cls(horizon, bits)

    def __eq__(self, other):
        return (
            isinstance(other, Prefix)
            and self.horizon == other.horizon
            and bool(np.array_equal(self.bits, other.bits))
        )

    def __repr__(self):
        return f"Prefix(horizon={self.horizon}, count={self.count})"


# -- operation-style wrappers --------------------------------------------


def materialize_prefix(s: OmegaSet, n: int, cap: int | None = None) -> Prefix:
    if n < 1:
        raise ValueError("prefix horizon must be at least 1")
    return Prefix(n, s.materialize(n, cap=cap))


def count_below(s: OmegaSet, n: int) -> int:
    if n < 0:
        raise ValueError("horizon must be non-negative")
    return s.count_below(n)


def combine(op: str, a: OmegaSet, b: OmegaSet | None = None) -> OmegaSet:
    if op == "compl":
        if b is not None:
            raise ValueError("complement takes a single set")
        return CombineNode("compl", [a])
    if b is None:
        raise ValueError(f"{op} takes two sets")
    return CombineNode(op, [a, b])


def intersect(a: OmegaSet, b: OmegaSet) -> OmegaSet:
    return CombineNode("inter", [a, b])


def union(a: OmegaSet, b: OmegaSet) -> OmegaSet:
    return CombineNode("union", [a, b])


def difference(a: OmegaSet, b: OmegaSet) -> OmegaSet:
    return CombineNode("diff", [a, b])


def complement(a: OmegaSet) -> OmegaSet:
    return CombineNode("compl", [a])


def kth_element(s: OmegaSet, k: int) -> int:
    return s.kth_element(k)


# -- descriptor grammar -----------------------------------------------------

_TOKEN = re.compile(r"\s*(\d+/\d+|\d+\.\d+|\d+|[A-Za-z_][A-Za-z_0-9]*|[(),])")


def _tokenize(text: str) -> list[str]:
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"bad descriptor near {text[pos:pos + 12]!r}")
        out.append(m.group(1))
        pos = m.end()
    return out


def parse_set(text: str) -> OmegaSet:
    """Parse the textual set grammar.

    Forms: omega, prog(a,d), bern(p,seed), pow(b), inter(A,B), union(A,B),
    diff(A,B), compl(A), every(A,stride[,offset]).
    """
    tokens = _tokenize(text)
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def take(expected=None):
        nonlocal pos
        if pos >= len(tokens):
            raise ValueError("unexpected end of descriptor")
        tok = tokens[pos]
        if expected is not None and tok != expected:
            raise ValueError(f"expected {expected!r}, got {tok!r}")
        pos += 1
        return tok

    def parse_args():
        take("(")
        args = []
        if peek() != ")":
            args.append(parse_value())
            while peek() == ",":
                take(",")
                args.append(parse_value())
        take(")")
        return args

    def parse_value():
        tok = peek()
        if tok is None:
            raise ValueError("unexpected end of descriptor")
        if tok[0].isdigit():
            take()
            if "/" in tok or "." in tok:
                return Fraction(tok)
            return int(tok)
        return parse_expr()

    def parse_expr() -> OmegaSet:
        name = take()
        if name == "omega":
            return Progression(0, 1)
        args = parse_args()
        if name == "prog":
            a, d = args
            return Progression(int(a), int(d))
        if name == "bern":
            p, seed = args
            return BernoulliSet(as_fraction(p), int(seed))
        if name == "pow":
            (b,) = args
            return PowersSet(int(b))
        if name in _BINARY_OPS:
            a, b = args
            return CombineNode(name, [a, b])
        if name == "compl":
            (a,) = args
            return CombineNode("compl", [a])
        if name == "every":
            if len(args) == 2:
                src, stride = args
                return StrideSelection(src, int(stride), 0)
            src, stride, offset = args
            return StrideSelection(src, int(stride), int(offset))
        raise ValueError(f"unknown set constructor {name!r}")

    result = parse_expr()
    if pos != len(tokens):
        raise ValueError(f"trailing tokens in descriptor: {tokens[pos:]}")
    return result


def parse_family(text: str) -> list[OmegaSet]:
    """Parse a comma-separated list of descriptors (commas inside
    parentheses belong to the descriptors)."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
            continue
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        cur.append(ch)
    if cur:
        parts.append("".join(cur))
    return [parse_set(p) for p in parts if p.strip()]


def require_infinite(s: OmegaSet, role: str = "set"):
    if s.provably_finite:
        raise FiniteSetError(f"{role} is finite-flagged; an infinite set is required")
