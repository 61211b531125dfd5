"""Relative-density reports and splitting verdicts at finite horizon.

Limits are undecidable at finite horizon, so every predicate returns a
numeric verdict (band membership over a tail window) plus full
diagnostics, never a claim about the true limit.  All ratios are exact
rationals; floating point appears only in rendered output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ._util import HALF, as_fraction, ceil_frac, frac_str
from .omega_sets import CombineNode, OmegaSet, require_infinite

__all__ = [
    "DEFAULT_TOLERANCE",
    "DensityReport",
    "SplitVerdict",
    "build_checkpoints",
    "density_report",
    "upper_lower_density",
    "split_verdict",
    "compose_densities",
]

DEFAULT_TOLERANCE = Fraction(1, 100)
SPLIT_KINDS = ("classical", "rho", "eps_band", "zero", "one")


@dataclass(frozen=True)
class DensityReport:
    """Checkpointed exact ratios |S∩X∩n| / |X∩n| with tail estimates.

    Checkpoints below tail_window * horizon are reported but excluded
    from the tail estimators (the densities of interest are tail
    properties).
    """

    checkpoints: tuple[int, ...]
    numerators: tuple[int, ...]
    denominators: tuple[int, ...]
    ratios: tuple[Fraction, ...]
    tail_window: Fraction
    tail_from: int
    upper_est: Fraction
    lower_est: Fraction
    target: Fraction | None = None
    max_tail_deviation: Fraction | None = None

    def tail_rows(self):
        return [
            (cp, num, den, r)
            for cp, num, den, r in zip(
                self.checkpoints, self.numerators, self.denominators, self.ratios
            )
            if cp >= self.tail_from
        ]

    def to_json(self) -> dict:
        return {
            "checkpoints": list(self.checkpoints),
            "ratios": [frac_str(r) for r in self.ratios],
            "counts": [[n, d] for n, d in zip(self.numerators, self.denominators)],
            "tail_window": frac_str(self.tail_window),
            "tail_from": self.tail_from,
            "upper_est": frac_str(self.upper_est),
            "lower_est": frac_str(self.lower_est),
            "target": frac_str(self.target) if self.target is not None else None,
            "max_tail_deviation": (
                frac_str(self.max_tail_deviation)
                if self.max_tail_deviation is not None
                else None
            ),
        }


def build_checkpoints(horizon: int, stride: int | None = None,
                      geometric: bool = False) -> list[int]:
    """Checkpoint schedule; always includes the horizon."""
    if horizon < 1:
        raise ValueError("horizon must be positive")
    if geometric:
        cps, n = [], 1
        while n < horizon:
            cps.append(n)
            n *= 2
        cps.append(horizon)
        return sorted(set(cps))
    if stride is None:
        stride = max(1, horizon // 100)
    cps = list(range(stride, horizon + 1, stride))
    if not cps or cps[-1] != horizon:
        cps.append(horizon)
    return cps


def _pair_counts(S: OmegaSet, X: OmegaSet, checkpoints: Sequence[int]):
    if S is X:
        den = X.counts_at(checkpoints)
        return list(den), den
    joint = CombineNode("inter", [S, X])
    return joint.counts_at(checkpoints), X.counts_at(checkpoints)


def density_report(S: OmegaSet, X: OmegaSet, horizon: int,
                   stride: int | None = None,
                   checkpoints: Sequence[int] | None = None,
                   geometric: bool = False,
                   tail_window: Fraction = HALF,
                   target=None) -> DensityReport:
    """Exact checkpointed ratios of S within X below the horizon."""
    tail_window = as_fraction(tail_window)
    if not (0 < tail_window < 1):
        raise ValueError("tail window must lie in (0,1)")
    require_infinite(X, "X")
    if checkpoints is None:
        checkpoints = build_checkpoints(horizon, stride, geometric)
    else:
        checkpoints = sorted(set(int(c) for c in checkpoints) | {horizon})
    nums, dens = _pair_counts(S, X, checkpoints)
    if dens[-1] < 10:
        raise ValueError(
            f"X has only {dens[-1]} points below horizon {horizon}; "
            "need at least 10"
        )
    rows = [
        (cp, n, d) for cp, n, d in zip(checkpoints, nums, dens) if d > 0
    ]
    checkpoints = tuple(cp for cp, _, _ in rows)
    nums = tuple(n for _, n, _ in rows)
    dens = tuple(d for _, _, d in rows)
    ratios = tuple(Fraction(n, d) for n, d in zip(nums, dens))
    tail_from = ceil_frac(tail_window * horizon)
    tail = [r for cp, r in zip(checkpoints, ratios) if cp >= tail_from]
    if not tail:
        tail = [ratios[-1]]
        tail_from = checkpoints[-1]
    tgt = as_fraction(target) if target is not None else None
    max_dev = max(abs(r - tgt) for r in tail) if tgt is not None else None
    return DensityReport(
        checkpoints=checkpoints,
        numerators=nums,
        denominators=dens,
        ratios=ratios,
        tail_window=tail_window,
        tail_from=tail_from,
        upper_est=max(tail),
        lower_est=min(tail),
        target=tgt,
        max_tail_deviation=max_dev,
    )


def upper_lower_density(S: OmegaSet, X: OmegaSet, horizon: int,
                        tail_window: Fraction = HALF,
                        stride: int | None = None,
                        geometric: bool = False) -> tuple[Fraction, Fraction]:
    """Finite-horizon estimators of the upper and lower relative density."""
    rep = density_report(S, X, horizon, stride=stride, geometric=geometric,
                         tail_window=tail_window)
    return rep.upper_est, rep.lower_est


@dataclass(frozen=True)
class SplitVerdict:
    kind: str
    holds_numerically: bool
    diagnostics: DensityReport | None
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "holds_numerically": self.holds_numerically,
            "details": {k: str(v) for k, v in self.details.items()},
            "diagnostics": self.diagnostics.to_json() if self.diagnostics else None,
        }


def split_verdict(kind: str, S: OmegaSet, X: OmegaSet, horizon: int, *,
                  rho=None, eps=None, tolerance=DEFAULT_TOLERANCE,
                  tail_window: Fraction = HALF, stride: int | None = None,
                  checkpoints: Sequence[int] | None = None,
                  geometric: bool = False,
                  growth_floor: int = 10) -> SplitVerdict:
    """Numeric splitting verdict of the requested kind.

    classical: both |S∩X∩N| and |X∩N \\ S| must exceed the growth floor.
    rho: tail ratios within rho ± tolerance.  eps_band: tail ratios
    strictly inside (1/2-eps, 1/2+eps).  zero/one: tail ratios within
    tolerance of 0 or 1, requiring S infinite and co-infinite.
    """
    if kind not in SPLIT_KINDS:
        raise ValueError(f"unknown split kind {kind!r}")
    tolerance = as_fraction(tolerance)
    require_infinite(X, "X")
    if kind == "classical":
        require_infinite(S, "S")
        inter = CombineNode("inter", [S, X]).count_below(horizon)
        diff = CombineNode("diff", [X, S]).count_below(horizon)
        holds = inter > growth_floor and diff > growth_floor
        return SplitVerdict(kind, holds, None, {
            "s_and_x": inter, "x_minus_s": diff, "growth_floor": growth_floor,
        })
    if kind in ("zero", "one"):
        require_infinite(S, "S")
        s_count = S.count_below(horizon)
        if s_count >= horizon:
            raise ValueError("S must be co-infinite (density below 1 at horizon)")
    if kind == "rho":
        target = as_fraction(rho)
    elif kind == "eps_band":
        target = HALF
    elif kind == "zero":
        target = Fraction(0)
    else:
        target = Fraction(1)
    rep = density_report(S, X, horizon, stride=stride, checkpoints=checkpoints,
                         geometric=geometric, tail_window=tail_window,
                         target=target)
    details: dict = {"target": target}
    if kind == "eps_band":
        eps = as_fraction(eps)
        if not (0 < eps < HALF):
            raise ValueError("eps must lie in (0, 1/2)")
        lo, hi = HALF - eps, HALF + eps
        holds = all(lo < r < hi for _, _, _, r in rep.tail_rows())
        details["eps"] = eps
    else:
        holds = rep.max_tail_deviation <= tolerance
        details["tolerance"] = tolerance
    return SplitVerdict(kind, holds, rep, details)


def compose_densities(mode: str, rho0, rho1) -> Fraction:
    """Density of an intersection (rho0*rho1) or union
    (rho0 + rho1 - rho0*rho1) of independent splitters."""
    rho0, rho1 = as_fraction(rho0), as_fraction(rho1)
    for r in (rho0, rho1):
        if not (0 < r <= 1):
            raise ValueError("densities must lie in (0,1]")
    if mode == "inter" or mode == "intersect":
        return rho0 * rho1
    if mode == "union":
        return rho0 + rho1 - rho0 * rho1
    raise ValueError(f"unknown composition mode {mode!r}")
