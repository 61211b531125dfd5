"""Splitting chains, base expansions, and density-parameter transforms.

The forward transform turns a source of 1/2-splitters into a
rho-splitter by selecting difference levels along the binary expansion
of rho; the converse turns rho-splitters into a 1/2-splitter via the
geometric-weight expansion, squaring the parameter down into (1/3, 2/3)
first when the direct expansion cannot reach 1/2.

Oracles are validated and resampled rather than trusted: a proposal
enters a chain only after its tail ratios pass a count-aware band check
against every current family member.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from ._util import HALF, as_fraction, derive_seed, frac_str
from .density import DensityReport, density_report, split_verdict
from .omega_sets import (
    OMEGA,
    BernoulliSet,
    OmegaSet,
    StrideSelection,
    complement,
    difference,
    intersect,
    require_infinite,
    union,
)

__all__ = [
    "ChainConfig",
    "SplitterOracle",
    "BernoulliOracle",
    "RoundRobinOracle",
    "ComposedOracle",
    "make_oracle",
    "OracleExhaustedError",
    "TransformError",
    "SplitChain",
    "binary_digits",
    "greedy_base_digits",
    "select_levels",
    "geometric_weights",
    "dyadic_weights",
    "squaring_plan",
    "build_chain",
    "transform_splitter",
    "TransformResult",
]


@dataclass(frozen=True)
class ChainConfig:
    depth: int = 8
    horizon: int = 1_000_000
    stride: int | None = None
    tail_window: Fraction = HALF
    band_tolerance: Fraction = Fraction(1, 50)
    stage_tolerance: Fraction = Fraction(1, 100)
    residual_tolerance: Fraction = Fraction(1, 100)
    seed: int = 1
    max_attempts: int = 12


class OracleExhaustedError(RuntimeError):
    """A splitter oracle ran out of resampling attempts."""

    def __init__(self, message: str, diagnostics: list | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


class TransformError(RuntimeError):
    """The level selection could not reach its target within tolerance."""

    def __init__(self, message: str, residual_trace: list | None = None):
        super().__init__(message)
        self.residual_trace = residual_trace or []


# -- expansions --------------------------------------------------------------


def binary_digits(rho, K: int) -> list[int]:
    """Positions of the 1-digits in the binary expansion of rho, truncated
    at K digits; dyadic inputs get the terminating representation.

    The residual rho - sum(2^-m) lies in [0, 2^-K).
    """
    rho = as_fraction(rho)
    if not (0 < rho < 1):
        raise ValueError("rho must lie in (0, 1)")
    out, r = [], rho
    for m in range(1, K + 1):
        w = Fraction(1, 2 ** m)
        if w <= r:
            out.append(m)
            r -= w
    return out


def greedy_base_digits(x, b, K: int) -> list[tuple[int, int]]:
    """Greedy digits of x > 0 in base b > 1: pairs (exponent, digit) with
    0 <= digit < b, descending exponents, K positions, zero digits
    omitted.  The residual is below b^(N-K+1) for leading exponent N."""
    x, b = as_fraction(x), as_fraction(b)
    if x <= 0:
        raise ValueError("x must be positive")
    if b <= 1:
        raise ValueError("base must exceed 1")
    if K < 1:
        raise ValueError("need at least one digit position")
    N = 0
    if x >= 1:
        while b ** (N + 1) <= x:
            N += 1
    else:
        while b ** N > x:
            N -= 1
    digit_cap = -((-b.numerator) // b.denominator) - 1  # ceil(b) - 1
    out, r = [], x
    for n in range(N, N - K, -1):
        power = b ** n
        c = min(r // power, digit_cap)
        c = int(c)
        if c:
            out.append((n, c))
            r -= c * power
    return out


def dyadic_weights() -> Callable[[int], Fraction]:
    return lambda m: Fraction(1, 2 ** m)


def geometric_weights(rho) -> Callable[[int], Fraction]:
    rho = as_fraction(rho)
    return lambda m: rho ** (m - 1) * (1 - rho)


def select_levels(weights: Callable[[int], Fraction], target,
                  K: int) -> tuple[list[int], Fraction]:
    """Greedy level selection: take level m (ascending) iff its weight
    fits the remaining residual; returns the selection and the exact
    residual after K levels."""
    target = as_fraction(target)
    if target <= 0:
        raise ValueError("target must be positive")
    out, r = [], target
    for m in range(1, K + 1):
        w = weights(m)
        if w <= 0:
            raise ValueError(f"weight at level {m} is not positive")
        if w <= r:
            out.append(m)
            r -= w
    return out, r


def squaring_plan(rho, max_iter: int = 64) -> tuple[list[str], Fraction]:
    """Drive rho into (1/3, 2/3) by squaring, complementing when at or
    below 1/3; returns the operation list and the final parameter."""
    x = as_fraction(rho)
    if not (0 < x < 1):
        raise ValueError("rho must lie in (0, 1)")
    third, two_thirds = Fraction(1, 3), Fraction(2, 3)
    ops: list[str] = []
    while not (third < x < two_thirds):
        if len(ops) >= max_iter:
            raise RuntimeError(f"squaring plan did not settle in {max_iter} steps")
        if x >= two_thirds:
            x = x * x
            ops.append("square")
        else:
            x = 1 - x
            ops.append("complement")
    return ops, x


# -- oracles -----------------------------------------------------------------


class SplitterOracle:
    """Source of candidate p-splitters for the current family."""

    p: Fraction

    def propose(self, stage: int, attempt: int,
                targets: Sequence[OmegaSet]) -> OmegaSet:
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


class BernoulliOracle(SplitterOracle):
    """Proposes Bernoulli(p) sets with seeds derived from (seed, stage,
    attempt); the law of large numbers makes validation succeed with
    overwhelming probability."""

    def __init__(self, p, seed: int):
        self.p = as_fraction(p)
        if not (0 < self.p < 1):
            raise ValueError("oracle density must lie in (0, 1)")
        self.seed = int(seed)

    def propose(self, stage, attempt, targets):
        return BernoulliSet(self.p, derive_seed(self.seed, stage, attempt))

    def describe(self):
        return {"kind": "bernoulli", "p": frac_str(self.p), "seed": self.seed}


class RoundRobinOracle(SplitterOracle):
    """Deterministic exact 1/2-splitter of a single target: every second
    element of the target in enumeration order."""

    def __init__(self):
        self.p = HALF

    def propose(self, stage, attempt, targets):
        if len(targets) != 1:
            raise ValueError("round-robin needs a single-target family")
        return StrideSelection(targets[0], 2, 0)

    def describe(self):
        return {"kind": "round-robin"}


class ComposedOracle(SplitterOracle):
    """Oracle obtained from an inner one by intersection-squaring steps
    (density p -> p^2, each leg validated against its own targets) and
    complementations (p -> 1-p)."""

    def __init__(self, inner: SplitterOracle, ops: Sequence[str],
                 cfg: ChainConfig):
        self.inner = inner
        self.ops = tuple(ops)
        self.cfg = cfg
        p = inner.p
        for op in ops:
            p = p * p if op == "square" else 1 - p
        self.p = p

    def propose(self, stage, attempt, targets):
        return self._build(len(self.ops), stage, attempt * 2 + 1, targets)

    def _build(self, level, stage, salt, targets):
        if level == 0:
            return _accepted_proposal(self.inner, stage, salt, targets, self.cfg)
        op = self.ops[level - 1]
        if op == "complement":
            return complement(self._build(level - 1, stage, salt * 3 + 1, targets))
        a = self._build(level - 1, stage, salt * 3 + 1, targets)
        b = self._build(level - 1, stage, salt * 3 + 2,
                        [intersect(a, t) for t in targets])
        return intersect(a, b)

    def describe(self):
        return {"kind": "composed", "ops": list(self.ops),
                "p": frac_str(self.p), "inner": self.inner.describe()}


def make_oracle(kind: str, *, p=None, seed: int = 0) -> SplitterOracle:
    if kind == "bernoulli":
        return BernoulliOracle(p, seed)
    if kind == "round-robin":
        return RoundRobinOracle()
    raise ValueError(f"unknown oracle kind {kind!r}")


# -- validation --------------------------------------------------------------


def _stage_report(S: OmegaSet, R: OmegaSet, p: Fraction,
                  cfg: ChainConfig) -> DensityReport:
    return density_report(S, R, cfg.horizon, stride=cfg.stride,
                          tail_window=cfg.tail_window, target=p)


def _band_ok(report: DensityReport, p: Fraction, cfg: ChainConfig) -> bool:
    """Count-aware acceptance: the allowed deviation at a checkpoint with
    denominator d widens to sqrt(6.1/d), covering binomial fluctuation of
    thinned members with a union-bound-safe margin."""
    base = float(cfg.stage_tolerance)
    for _, _, den, ratio in report.tail_rows():
        tol = max(base, math.sqrt(6.1 / den))
        if abs(float(ratio - p)) > tol:
            return False
    return True


def _accepted_proposal(oracle: SplitterOracle, stage: int, salt: int,
                       targets: Sequence[OmegaSet],
                       cfg: ChainConfig) -> OmegaSet:
    failures = []
    for attempt in range(cfg.max_attempts):
        S = oracle.propose(stage, salt + attempt * 1000, targets)
        ok = True
        for R in targets:
            rep = _stage_report(S, R, oracle.p, cfg)
            if not _band_ok(rep, oracle.p, cfg):
                failures.append((stage, attempt, rep.to_json()))
                ok = False
                break
        if ok:
            return S
    raise OracleExhaustedError(
        f"oracle failed validation {cfg.max_attempts} times at stage {stage}",
        failures,
    )


# -- chains ------------------------------------------------------------------


@dataclass
class SplitChain:
    """Nested splitting stages with their intersections and differences.

    nested[m] is the intersection of the first m stages; differences[m]
    = nested[m-1] \\ nested[m] for m >= 1 (index 0 unused).
    """

    family: tuple[OmegaSet, ...]
    stages: tuple[OmegaSet, ...]
    nested: tuple[OmegaSet, ...]
    differences: tuple[OmegaSet | None, ...]
    mode: str
    p: Fraction
    cfg: ChainConfig

    @property
    def depth(self) -> int:
        return len(self.stages) - 1

    def level_target(self, m: int, kind: str) -> Fraction:
        if kind == "nested":
            return self.p ** m
        return self.p ** (m - 1) * (1 - self.p)

    def level_report(self, m: int, kind: str, member: OmegaSet) -> DensityReport:
        s = self.nested[m] if kind == "nested" else self.differences[m]
        return density_report(s, member, self.cfg.horizon, stride=self.cfg.stride,
                              tail_window=self.cfg.tail_window,
                              target=self.level_target(m, kind))

    def max_band_deviation(self, tolerance=None) -> Fraction:
        """Largest tail deviation of any nested/difference level from its
        target across the family."""
        worst = Fraction(0)
        for member in self.family:
            for m in range(1, self.depth + 1):
                for kind in ("nested", "differences"):
                    rep = self.level_report(m, kind, member)
                    worst = max(worst, rep.max_tail_deviation)
        return worst

    def summary(self) -> dict:
        return {
            "depth": self.depth,
            "mode": self.mode,
            "p": frac_str(self.p),
            "horizon": self.cfg.horizon,
        }


def build_chain(family: Sequence[OmegaSet], oracle: SplitterOracle,
                depth: int, mode: str, cfg: ChainConfig) -> SplitChain:
    """Build the stage recursion S_0 = omega, S_{n+1} splitting every
    member of the current family, replacing the family by its traces.

    Each accepted stage is oracle output that passed the band check
    against every live member; the exact identity "stage-m family =
    {nested[m] ∩ X}" is checked bitwise at the horizon.
    """
    if not family:
        raise ValueError("family must be non-empty")
    for member in family:
        require_infinite(member, "family member")
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if mode not in ("half", "rho"):
        raise ValueError("mode must be 'half' or 'rho'")
    if mode == "half" and oracle.p != HALF:
        raise ValueError("half mode needs an oracle with p = 1/2")
    family = tuple(family)
    targets: list[OmegaSet] = list(family)
    stages: list[OmegaSet] = [OMEGA]
    nested: list[OmegaSet] = [OMEGA]
    differences: list[OmegaSet | None] = [None]
    for stage_idx in range(1, depth + 1):
        S = _accepted_proposal(oracle, stage_idx, 0, targets, cfg)
        stages.append(S)
        nested.append(intersect(nested[-1], S))
        differences.append(difference(nested[-2], nested[-1]))
        targets = [intersect(S, R) for R in targets]
        for R, member in zip(targets, family):
            expect = intersect(nested[-1], member)
            if not np.array_equal(R.materialize(cfg.horizon),
                                  expect.materialize(cfg.horizon)):
                raise AssertionError(
                    f"trace identity failed at stage {stage_idx}"
                )
    return SplitChain(family, tuple(stages), tuple(nested),
                      tuple(differences), mode, oracle.p, cfg)


# -- end-to-end transforms ----------------------------------------------------


@dataclass
class TransformResult:
    splitter: OmegaSet
    path: str                       # "direct" | "fallback"
    selection: list[int]
    residual: Fraction
    ops: list[str]
    effective_p: Fraction
    advertised_tolerance: Fraction
    verdicts: list
    chain: SplitChain
    residual_trace: list = field(default_factory=list)

    @property
    def all_hold(self) -> bool:
        return all(v.holds_numerically for v in self.verdicts)

    def to_json(self) -> dict:
        return {
            "path": self.path,
            "selection": self.selection,
            "residual": frac_str(self.residual),
            "ops": self.ops,
            "effective_p": frac_str(self.effective_p),
            "advertised_tolerance": frac_str(self.advertised_tolerance),
            "residual_trace": [
                [frac_str(p), frac_str(r)] for p, r in self.residual_trace
            ],
            "chain": self.chain.summary(),
            "verdicts": [v.to_json() for v in self.verdicts],
        }


def _union_of_levels(chain: SplitChain, levels: Sequence[int]) -> OmegaSet:
    if not levels:
        raise TransformError("empty level selection; increase the depth")
    out = chain.differences[levels[0]]
    for m in levels[1:]:
        out = union(out, chain.differences[m])
    return out


def transform_splitter(family: Sequence[OmegaSet], direction: str, rho,
                       oracle: SplitterOracle | None = None,
                       cfg: ChainConfig | None = None) -> TransformResult:
    """Transform between bisecting and rho-splitting behaviour.

    half-to-rho: build a half chain, pick difference levels along the
    binary expansion of rho, return their union with per-member verdicts
    at tolerance band + 2^-depth.

    rho-to-half: attempt the direct geometric-weight expansion of 1/2;
    when rho >= 2/3 or the residual exceeds tolerance, square (and
    complement) the parameter into (1/3, 2/3) via composed oracles, then
    reselect.  Which path ran is recorded.
    """
    cfg = cfg or ChainConfig()
    rho = as_fraction(rho)
    if not (0 < rho < 1):
        raise ValueError("rho must lie in (0, 1)")
    if direction == "half-to-rho":
        oracle = oracle or BernoulliOracle(HALF, cfg.seed)
        if oracle.p != HALF:
            raise ValueError("half-to-rho needs a 1/2 oracle")
        chain = build_chain(family, oracle, cfg.depth, "half", cfg)
        levels = binary_digits(rho, cfg.depth)
        residual = rho - sum(Fraction(1, 2 ** m) for m in levels)
        splitter = _union_of_levels(chain, levels)
        advertised = cfg.band_tolerance + Fraction(1, 2 ** cfg.depth)
        verdicts = [
            split_verdict("rho", splitter, member, cfg.horizon, rho=rho,
                          tolerance=advertised, stride=cfg.stride,
                          tail_window=cfg.tail_window)
            for member in family
        ]
        return TransformResult(splitter, "direct", levels, residual, [],
                               HALF, advertised, verdicts, chain)

    if direction != "rho-to-half":
        raise ValueError(f"unknown direction {direction!r}")
    oracle = oracle or BernoulliOracle(rho, cfg.seed)
    if oracle.p != rho:
        raise ValueError("rho-to-half needs an oracle with p = rho")
    levels, residual = select_levels(geometric_weights(rho), HALF, cfg.depth)
    trace = [(rho, residual)]
    if rho < Fraction(2, 3) and residual <= cfg.residual_tolerance:
        chain = build_chain(family, oracle, cfg.depth, "rho", cfg)
        path, ops, eff = "direct", [], rho
    else:
        ops, eff = squaring_plan(rho)
        levels, residual = select_levels(geometric_weights(eff), HALF, cfg.depth)
        trace.append((eff, residual))
        if residual > cfg.residual_tolerance:
            raise TransformError(
                f"residual {residual} above tolerance after fallback",
                trace,
            )
        composed = ComposedOracle(oracle, ops, cfg)
        chain = build_chain(family, composed, cfg.depth, "rho", cfg)
        path = "fallback"
    splitter = _union_of_levels(chain, levels)
    advertised = cfg.band_tolerance + residual
    verdicts = [
        split_verdict("rho", splitter, member, cfg.horizon, rho=HALF,
                      tolerance=advertised, stride=cfg.stride,
                      tail_window=cfg.tail_window)
        for member in family
    ]
    return TransformResult(splitter, path, levels, residual, ops, eff,
                           advertised, verdicts, chain, trace)
