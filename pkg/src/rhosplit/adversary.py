"""Adversarial interval constructions that defeat purported almost-bisectors.

Given exact per-interval cardinalities of a candidate splitter, these
operations extend a finite condition interval by interval, assembling a
set whose density ratio provably escapes the (1/2-eps, 1/2+eps) band at
chosen interval boundaries, and emit exact-rational certificates for each
escape.  The forcing-theoretic surroundings are not simulated: the
centred and slalom chains take their E-sequence / slalom data as input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from ._util import HALF, as_fraction
from .certificates import Certificate, Step
from .omega_sets import OmegaSet, require_infinite
from .partitions import IntervalPartition, IntervalSubset, IntervalSymbolicSet

__all__ = [
    "Condition",
    "EMPTY_CONDITION",
    "DefeatResult",
    "Slalom",
    "min_index_for_eps",
    "defeat_bisector",
    "centred_thresholds",
    "centred_escape",
    "laver_blocks",
    "laver_escape",
    "half_slalom",
]


@dataclass(frozen=True)
class Condition:
    """Finite partial function n -> subset of I_n, ordered by extension."""

    values: Mapping[int, IntervalSubset] = field(default_factory=dict)

    def __post_init__(self):
        for k, sub in self.values.items():
            if sub.index != k:
                raise ValueError(f"value at {k} has interval index {sub.index}")

    @property
    def domain(self) -> frozenset[int]:
        return frozenset(self.values)

    def extend(self, k: int, sub: IntervalSubset) -> "Condition":
        if k in self.values:
            raise ValueError(f"interval {k} already in the domain")
        vals = dict(self.values)
        vals[k] = sub
        return Condition(vals)

    def extends(self, other: "Condition") -> bool:
        return all(
            k in self.values and self.values[k] == sub
            for k, sub in other.values.items()
        )


EMPTY_CONDITION = Condition({})


def min_index_for_eps(eps) -> int:
    """Least n with 2^(1-n) <= 1/2 - eps.

    For that n, 1/(2^(1-n) + 1) >= 1/2 + eps holds as well, which is what
    the escape chains need.
    """
    eps = as_fraction(eps)
    if not (0 < eps < HALF):
        raise ValueError("eps must lie in (0, 1/2)")
    bound = HALF - eps
    n = 1
    while Fraction(2, 2 ** n) > bound:
        n += 1
    assert Fraction(2 ** n, 2 ** n + 2) >= HALF + eps
    return n


def _per_interval_count(S: OmegaSet, partition: IntervalPartition, n: int) -> IntervalSubset:
    """Exact descriptor for S ∩ I_n (reusing symbolic values when aligned)."""
    if isinstance(S, IntervalSymbolicSet) and S.part is partition:
        return S.value_at(n)
    return partition.trace(n, S)


@dataclass
class DefeatResult:
    x_set: IntervalSymbolicSet
    certificates: list[Certificate]
    realized: list[tuple[int, Fraction]]
    cases: list[str]


def defeat_bisector(S: OmegaSet, eps, partition: IntervalPartition,
                    condition: Condition | None = None,
                    rounds: int = 1) -> DefeatResult:
    """Extend a condition so the assembled set escapes the eps-band.

    Each round picks the least unused interval index n at or above the
    eps threshold; when |S ∩ I_n| > |I_n|/2 the new value is S ∩ I_n
    (ratio certified >= 1/2 + eps at I_{<=n}), otherwise it is I_n \\ S
    (ratio certified <= 1/2 - eps).  Unclaimed intervals are filled with
    the least element of the interval to keep the set infinite.
    """
    eps = as_fraction(eps)
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    if partition.verify_growth() is not None:
        raise ValueError("partition violates the growth condition")
    require_infinite(S, "S")
    cond = condition or EMPTY_CONDITION

    n_min = min_index_for_eps(eps)
    used = set(cond.domain)
    chosen: list[tuple[int, str, IntervalSubset]] = []
    for _ in range(rounds):
        n = n_min
        while n in used:
            n += 1
        used.add(n)
        sub = _per_interval_count(S, partition, n)
        case = "case1" if 2 * sub.count > partition.size(n) else "case2"
        chosen.append((n, case, sub))

    values: dict[int, IntervalSubset] = dict(cond.values)
    case_at: dict[int, str] = {}
    for n, case, sub in chosen:
        values[n] = sub if case == "case1" else sub.complement()
        case_at[n] = case
    x_set = IntervalSymbolicSet(partition, values, default="singleton")

    max_n = max(n for n, _, _ in chosen)
    x_counts, sx_counts = [], []
    for k in range(max_n + 1):
        xsub = x_set.value_at(k)
        x_counts.append(xsub.count)
        if k in case_at:
            # chosen values are S∩I_k (all of it in S) or I_k \ S (none)
            sx_counts.append(xsub.count if case_at[k] == "case1" else 0)
        else:
            sx_counts.append(xsub.intersect_set_count(S))

    certificates, realized, cases = [], [], []
    for n, case, sub in chosen:
        num = sum(sx_counts[: n + 1])
        den = sum(x_counts[: n + 1])
        cert = _game_certificate(case, n, eps, partition, sub.count, num, den)
        certificates.append(cert)
        realized.append((n, Fraction(num, den)))
        cases.append(case)
    return DefeatResult(x_set, certificates, realized, cases)


def _game_certificate(case: str, n: int, eps: Fraction,
                      partition: IntervalPartition, c: int,
                      num: int, den: int) -> Certificate:
    b = partition.prefix_size(n)
    size = partition.size(n)
    realized = Fraction(num, den)
    cards = {
        "prefix_count": b,
        "interval_size": size,
        "s_in_interval": c,
        "ratio_num": num,
        "ratio_den": den,
    }
    boundaries = tuple(partition.boundaries(n + 1))
    if case == "case1":
        steps = (
            Step(realized, ">=", Fraction(c, b + c)),
            Step(Fraction(c, b + c), ">", Fraction(size, 2 * b + size)),
            Step(Fraction(size, 2 * b + size), ">", Fraction(2 ** n, 2 ** n + 2)),
            Step(Fraction(2 ** n, 2 ** n + 2), ">=", HALF + eps),
        )
        cert = Certificate("game-case1", n, eps, None, cards, steps,
                           ">=", HALF + eps, boundaries)
    else:
        steps = (
            Step(realized, "<=", Fraction(b, size - c)),
            Step(Fraction(b, size - c), "<=", Fraction(2 * b, size)),
            Step(Fraction(2 * b, size), "<", Fraction(2, 2 ** n)),
            Step(Fraction(2, 2 ** n), "<=", HALF - eps),
        )
        cert = Certificate("game-case2", n, eps, None, cards, steps,
                           "<=", HALF - eps, boundaries)
    for step in cert.steps:
        assert step.holds(), f"emitted step fails: {step}"
    return cert


def centred_thresholds(eps, eps_prime) -> tuple[int, int]:
    """Least indices activating the centred escape chain.

    n0: least n with (1 + 2^-n)(1/2 + eps) < 1/2 + eps' and
    1/2 - eps - 2^-n > 1/2 - eps'.  k0: least k with
    2^-k / (1/2 - eps') + 1 <= 1/(1/2 + eps).
    """
    eps, eps_prime = as_fraction(eps), as_fraction(eps_prime)
    if not (0 < eps < eps_prime < HALF):
        raise ValueError("need 0 < eps < eps' < 1/2")
    n0 = 0
    while True:
        pw = Fraction(1, 2 ** n0)
        if (1 + pw) * (HALF + eps) < HALF + eps_prime and HALF - eps - pw > HALF - eps_prime:
            break
        n0 += 1
    k0 = 0
    while Fraction(1, 2 ** k0) / (HALF - eps_prime) + 1 > 1 / (HALF + eps):
        k0 += 1
    return n0, k0


def centred_escape(guards: Mapping[int, IntervalSubset], eps, eps_prime,
                   n: int) -> Certificate:
    """Certificate that the set assembled from the E-sequence escapes
    upward at interval n.

    Every E_k for k <= n must be non-empty with |E_k|/|I_k| strictly
    inside (1/2 - eps', 1/2 + eps'); n must be at or above the k-threshold
    of centred_thresholds.
    """
    eps, eps_prime = as_fraction(eps), as_fraction(eps_prime)
    _, k0 = centred_thresholds(eps, eps_prime)
    if n < k0:
        raise ValueError(f"index {n} below the chain threshold k0={k0}")
    missing = [k for k in range(n + 1) if k not in guards]
    if missing:
        raise ValueError(f"E-sequence is missing intervals {missing}")
    partition = guards[n].partition
    lo_band, hi_band = HALF - eps_prime, HALF + eps_prime
    for k in range(n + 1):
        sub = guards[k]
        if sub.count == 0:
            raise ValueError(f"E_{k} is empty")
        r = sub.ratio()
        if not (lo_band < r < hi_band):
            raise ValueError(
                f"band violated at interval {k}: |E_k|/|I_k| = {r}"
            )
    b = partition.prefix_size(n)
    size = partition.size(n)
    e = guards[n].count
    xc = sum(guards[k].count for k in range(n + 1))
    t = lo_band * size
    c3 = 1 / (Fraction(1, 2 ** n) / lo_band + 1)
    steps = (
        Step(Fraction(e, xc), ">=", Fraction(e, b + e)),
        Step(Fraction(e, b + e), ">", t / (b + t)),
        Step(t / (b + t), ">", c3),
        Step(c3, ">=", HALF + eps),
    )
    cert = Certificate(
        "centred-chain", n, eps, eps_prime,
        {"prefix_count": b, "interval_size": size, "escape_count": e,
         "x_count": xc},
        steps, ">=", HALF + eps, tuple(partition.boundaries(n + 1)),
    )
    for step in cert.steps:
        assert step.holds(), f"emitted step fails: {step}"
    return cert


def laver_blocks(partition: IntervalPartition, m: int) -> tuple[int, int]:
    """Block m of the slalom schedule: intervals [2^m, 2^m + 2^m)."""
    if m < 0:
        raise ValueError("block index must be non-negative")
    first, count = 2 ** m, 2 ** m
    partition.ensure(first + count)
    return first, count


@dataclass(frozen=True)
class Slalom:
    """Per-block candidate families S(m) = {S^m_j : j < 2^m} over the
    blocks Q_m, each candidate given per interval, plus a branch choice."""

    partition: IntervalPartition
    blocks: Mapping[int, Sequence[Mapping[int, IntervalSubset]]]
    branch: Mapping[int, int]

    def __post_init__(self):
        for m, cands in self.blocks.items():
            if len(cands) != 2 ** m:
                raise ValueError(
                    f"block {m} must hold exactly {2 ** m} candidates, "
                    f"got {len(cands)}"
                )
            first, count = 2 ** m, 2 ** m
            for j, cand in enumerate(cands):
                diag = first + j
                if diag not in cand:
                    raise ValueError(
                        f"candidate {j} of block {m} lacks its diagonal "
                        f"interval {diag}"
                    )
                for k in cand:
                    if not (first <= k < first + count):
                        raise ValueError(
                            f"candidate {j} of block {m} escapes the block at {k}"
                        )
        for m, j in self.branch.items():
            if m not in self.blocks:
                raise ValueError(f"branch chooses missing block {m}")
            if not 0 <= j < 2 ** m:
                raise ValueError(f"branch value {j} invalid for block {m}")

    def diagonal(self, m: int, j: int) -> IntervalSubset:
        return self.blocks[m][j][2 ** m + j]


def half_slalom(partition: IntervalPartition, depth: int,
                branch: Mapping[int, int] | None = None) -> Slalom:
    """Standard battery slalom: every candidate is the first half of each
    interval of its block."""
    blocks: dict[int, list[dict[int, IntervalSubset]]] = {}
    for m in range(depth + 1):
        first, count = laver_blocks(partition, m)
        cands = []
        for _ in range(2 ** m):
            cand = {}
            for k in range(first, first + count):
                size = partition.size(k)
                cand[k] = partition.first(k, (size + 1) // 2)
            cands.append(cand)
        blocks[m] = cands
    chosen = dict(branch or {m: 0 for m in range(depth + 1)})
    return Slalom(partition, blocks, chosen)


def laver_escape(slalom: Slalom, eps, eps_prime,
                 m: int) -> tuple[IntervalSymbolicSet, Certificate]:
    """Assemble the diagonal union of the slalom and certify the upward
    escape at interval k = 2^m + branch(m)."""
    eps, eps_prime = as_fraction(eps), as_fraction(eps_prime)
    if not (0 < eps < eps_prime < HALF):
        raise ValueError("need 0 < eps < eps' < 1/2")
    if m not in slalom.blocks:
        raise ValueError(f"slalom does not define block {m}")
    lo_band, hi_band = HALF - eps_prime, HALF + eps_prime
    threshold = lo_band * (HALF - eps) / (HALF + eps)
    if Fraction(1, 2 ** (2 ** m)) > threshold:
        raise ValueError(
            f"block {m} is below the escape threshold "
            f"(need 2^-2^m <= {threshold})"
        )
    partition = slalom.partition
    values: dict[int, IntervalSubset] = {}
    for blk, cands in sorted(slalom.blocks.items()):
        for j, cand in enumerate(cands):
            diag = 2 ** blk + j
            sub = cand[diag]
            r = sub.ratio()
            if not (lo_band < r < hi_band):
                raise ValueError(
                    f"band violated: candidate {j} of block {blk} has "
                    f"ratio {r} on its interval"
                )
            values[diag] = sub
    x_set = IntervalSymbolicSet(partition, values, default="singleton")

    k = 2 ** m + slalom.branch[m]
    sub = slalom.diagonal(m, slalom.branch[m])
    e = sub.count
    b = partition.prefix_size(k)
    size = partition.size(k)
    xc = x_set.prefix_count(k)
    t = lo_band * size
    c3 = 1 / (Fraction(1, 2 ** k) / lo_band + 1)
    c4 = 1 / (Fraction(1, 2 ** (2 ** m)) / lo_band + 1)
    steps = (
        Step(Fraction(e, xc), ">=", Fraction(e, b + e)),
        Step(Fraction(e, b + e), ">", t / (b + t)),
        Step(t / (b + t), ">", c3),
        Step(c3, ">=", c4),
        Step(c4, ">=", HALF + eps),
    )
    cert = Certificate(
        "slalom-chain", k, eps, eps_prime,
        {"prefix_count": b, "interval_size": size, "escape_count": e,
         "x_count": xc, "block": m},
        steps, ">=", HALF + eps, tuple(partition.boundaries(k + 1)),
    )
    for step in cert.steps:
        assert step.holds(), f"emitted step fails: {step}"
    return x_set, cert
