"""Finite relational systems: exact bounding/dominating numbers, duality,
Tukey-connection checking, and the doubling-enumeration zero-split bound.

Brute force here is exact and intended for universes of at most ~20
points per side; the dominating number is a minimum set cover solved by
branch and bound on the least uncovered row.  Truncations of the
classical infinite systems are emitted for inspection only and claim
nothing about the infinite invariants.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product

from ._util import as_fraction
from .omega_sets import OmegaSet

__all__ = [
    "FiniteRelSys",
    "TukeyPair",
    "TukeyVerdict",
    "bounding_number",
    "dominating_number",
    "dual",
    "check_tukey",
    "zero_split_check",
    "ZeroSplitReport",
    "random_system",
    "pullback_pair",
    "gallery_dom",
    "gallery_reap",
    "gallery_reap_rho",
]


@dataclass(frozen=True)
class FiniteRelSys:
    """A relational system (X, rel, Y) with rel as a row-major boolean
    matrix: rel[i][j] iff x_i is related below y_j."""

    x_labels: tuple[str, ...]
    y_labels: tuple[str, ...]
    rel: tuple[tuple[bool, ...], ...]

    def __post_init__(self):
        if len(self.rel) != len(self.x_labels):
            raise ValueError("relation has wrong number of rows")
        for row in self.rel:
            if len(row) != len(self.y_labels):
                raise ValueError("relation has wrong number of columns")

    @property
    def nx(self) -> int:
        return len(self.x_labels)

    @property
    def ny(self) -> int:
        return len(self.y_labels)

    def validate(self):
        """Total domain (every row related to something) and no single
        dominating column."""
        for i, row in enumerate(self.rel):
            if not any(row):
                raise ValueError(
                    f"domain condition fails: row {self.x_labels[i]!r} is empty"
                )
        for j in range(self.ny):
            if all(self.rel[i][j] for i in range(self.nx)):
                raise ValueError(
                    f"column {self.y_labels[j]!r} dominates every point"
                )

    def row_mask(self, i: int) -> int:
        mask = 0
        for j in range(self.ny):
            if self.rel[i][j]:
                mask |= 1 << j
        return mask

    def col_mask(self, j: int) -> int:
        mask = 0
        for i in range(self.nx):
            if self.rel[i][j]:
                mask |= 1 << i
        return mask

    def to_json(self) -> dict:
        return {
            "X": list(self.x_labels),
            "Y": list(self.y_labels),
            "rel": ["".join("1" if b else "0" for b in row) for row in self.rel],
        }

    @classmethod
    def from_json(cls, obj) -> "FiniteRelSys":
        rel = tuple(tuple(ch == "1" for ch in row) for row in obj["rel"])
        return cls(tuple(obj["X"]), tuple(obj["Y"]), rel)


def bounding_number(R: FiniteRelSys) -> int:
    """Smallest size of a subset of X that no single y bounds entirely."""
    R.validate()
    masks = [R.row_mask(i) for i in range(R.nx)]
    for k in range(1, R.nx + 1):
        for combo in combinations(range(R.nx), k):
            acc = masks[combo[0]]
            for i in combo[1:]:
                acc &= masks[i]
            if acc == 0:
                return k
    raise AssertionError("validated system must have an unbounded subset")


def dominating_number(R: FiniteRelSys) -> int:
    """Smallest size of a subset of Y covering every x (exact set cover)."""
    R.validate()
    cols = [R.col_mask(j) for j in range(R.ny)]
    full = (1 << R.nx) - 1

    # greedy upper bound
    covered, used = 0, 0
    while covered != full:
        best = max(range(R.ny), key=lambda j: bin(cols[j] & ~covered).count("1"))
        covered |= cols[best]
        used += 1
    best_size = used

    def search(covered: int, used: int):
        nonlocal best_size
        if covered == full:
            best_size = min(best_size, used)
            return
        if used + 1 >= best_size:
            return
        # branch on the least uncovered row
        i = next(b for b in range(R.nx) if not covered & (1 << b))
        for j in range(R.ny):
            if cols[j] & (1 << i):
                search(covered | cols[j], used + 1)

    search(0, 0)
    return best_size


def dual(R: FiniteRelSys) -> FiniteRelSys:
    """(Y, not-related-transposed, X); conditions hold automatically for a
    valid input, so a failure here is an implementation bug."""
    R.validate()
    rel = tuple(
        tuple(not R.rel[i][j] for i in range(R.nx)) for j in range(R.ny)
    )
    out = FiniteRelSys(R.y_labels, R.x_labels, rel)
    out.validate()
    return out


@dataclass(frozen=True)
class TukeyPair:
    """Index maps F: X0 -> X1 and G: Y1 -> Y0."""

    f: tuple[int, ...]
    g: tuple[int, ...]


@dataclass(frozen=True)
class TukeyVerdict:
    holds: bool
    counterexample: tuple[int, int] | None = None

    def __bool__(self):
        return self.holds


def check_tukey(R0: FiniteRelSys, R1: FiniteRelSys,
                pair: TukeyPair) -> TukeyVerdict:
    """Exhaustively verify: rel1[F(x0)][y1] implies rel0[x0][G(y1)].

    Returns the least counterexample (x0, y1) in input order on failure.
    """
    if len(pair.f) != R0.nx:
        raise ValueError("F must be total on X0")
    if len(pair.g) != R1.ny:
        raise ValueError("G must be total on Y1")
    for i in pair.f:
        if not 0 <= i < R1.nx:
            raise ValueError("F maps outside X1")
    for j in pair.g:
        if not 0 <= j < R0.ny:
            raise ValueError("G maps outside Y0")
    for x0 in range(R0.nx):
        for y1 in range(R1.ny):
            if R1.rel[pair.f[x0]][y1] and not R0.rel[x0][pair.g[y1]]:
                return TukeyVerdict(False, (x0, y1))
    return TukeyVerdict(True)


# -- zero-split bound for the doubling enumeration map -----------------------


@dataclass(frozen=True)
class ZeroSplitWindow:
    n: int
    max_ratio: Fraction
    bound: Fraction
    ok: bool


@dataclass(frozen=True)
class ZeroSplitReport:
    windows: tuple[ZeroSplitWindow, ...]
    threshold: int
    zero_splits: bool

    @property
    def bound_holds(self) -> bool:
        return all(w.ok for w in self.windows)

    def to_json(self) -> dict:
        return {
            "threshold": self.threshold,
            "zero_splits": self.zero_splits,
            "windows": [
                {"n": w.n, "max_ratio": str(w.max_ratio),
                 "bound": str(w.bound), "ok": w.ok}
                for w in self.windows
            ],
        }


def zero_split_check(R: OmegaSet, x: OmegaSet, N: int, max_window: int,
                     tolerance=Fraction(1, 20)) -> ZeroSplitReport:
    """Verify the (N+n)/2^n ratio bound for the doubling enumeration map.

    Hypothesis: the 2^n-th element of R is at most x(n) for every
    n >= N (violations are reported with the offending n).  For each
    window between consecutive doubling elements of R, the exact maximum
    of |ran(x) ∩ R ∩ k| / |R ∩ k| is compared against (N+n)/2^n; the
    bound is provable for N >= 1.  The verdict says whether ran(x)
    0-splits R numerically (final window ratio within tolerance of 0).

    Windows are indexed by n, not by a value horizon: the elements
    involved grow doubly exponentially, so all counting is sparse.
    """
    tolerance = as_fraction(tolerance)
    if max_window < N:
        raise ValueError("need at least one window at or above the threshold")
    probe = 10 ** 6
    if x.count_below(probe) >= probe:
        raise ValueError("x must have co-infinite range (density below 1)")
    for n in range(N, max_window + 2):
        r = R.kth_element(2 ** n)
        xv = x.kth_element(n)
        if r > xv:
            raise ValueError(
                f"hypothesis fails at n={n}: R's 2^n-th element {r} exceeds x(n)={xv}"
            )
    windows = []
    for n in range(N, max_window + 1):
        lo = R.kth_element(2 ** n)
        hi = R.kth_element(2 ** (n + 1))
        # ratio maxima occur at the window start and just past each
        # element of ran(x) ∩ R inside the window
        candidates = [lo + 1]
        j = 0
        while True:
            xe = x.kth_element(j)
            if xe >= hi:
                break
            if xe > lo and R.contains(xe):
                candidates.append(xe + 1)
            j += 1
        best = Fraction(0)
        for k in candidates:
            num = sum(
                1 for i in range(j + 1)
                if x.kth_element(i) < k and R.contains(x.kth_element(i))
            )
            den = R.count_below(k)
            best = max(best, Fraction(num, den))
        bound = Fraction(N + n, 2 ** n)
        windows.append(ZeroSplitWindow(n, best, bound, best <= bound))
    zero = windows[-1].max_ratio <= tolerance
    return ZeroSplitReport(tuple(windows), N, zero)


# -- random batteries and gallery truncations ---------------------------------


def random_system(rng: random.Random, nx: int, ny: int,
                  density: float = 0.5, max_tries: int = 1000) -> FiniteRelSys:
    """Random valid system by rejection sampling."""
    for _ in range(max_tries):
        rel = tuple(
            tuple(rng.random() < density for _ in range(ny))
            for _ in range(nx)
        )
        sys_ = FiniteRelSys(
            tuple(f"x{i}" for i in range(nx)),
            tuple(f"y{j}" for j in range(ny)),
            rel,
        )
        try:
            sys_.validate()
            return sys_
        except ValueError:
            continue
    raise RuntimeError("could not sample a valid system")


def pullback_pair(rng: random.Random, R1: FiniteRelSys, nx0: int, ny0: int,
                  max_tries: int = 1000):
    """Random (R0, pair) with the connection accepted by construction:
    R0's relation is the pullback rel0[x0][y0] iff some y1 with
    G(y1) = y0 satisfies rel1[F(x0)][y1]."""
    for _ in range(max_tries):
        f = tuple(rng.randrange(R1.nx) for _ in range(nx0))
        g = tuple(rng.randrange(ny0) for _ in range(R1.ny))
        rel0 = []
        for x0 in range(nx0):
            row = [False] * ny0
            for y1 in range(R1.ny):
                if R1.rel[f[x0]][y1]:
                    row[g[y1]] = True
            rel0.append(tuple(row))
        R0 = FiniteRelSys(
            tuple(f"a{i}" for i in range(nx0)),
            tuple(f"b{j}" for j in range(ny0)),
            tuple(rel0),
        )
        try:
            R0.validate()
        except ValueError:
            continue
        pair = TukeyPair(f, g)
        assert check_tukey(R0, R1, pair).holds
        return R0, pair
    raise RuntimeError("could not sample an accepted pullback pair")


def gallery_dom(length: int, height: int) -> FiniteRelSys:
    """Truncated domination system, inspection only.

    X is the grid {0..height}^length minus its top; Y holds the coatoms
    (top lowered by one in a single coordinate); the relation is
    pointwise <=.  Every x misses the top somewhere, so some coatom
    dominates it, while no single coatom dominates the others.  Needs
    length >= 2."""
    if length < 2:
        raise ValueError("need at least two coordinates")
    top = tuple([height] * length)
    xs = [x for x in product(range(height + 1), repeat=length) if x != top]
    ys = [tuple(height if i != j else height - 1 for i in range(length))
          for j in range(length)]
    rel = tuple(
        tuple(all(a <= b for a, b in zip(fx, fy)) for fy in ys) for fx in xs
    )
    return FiniteRelSys(
        tuple(str(list(t)) for t in xs),
        tuple(str(list(t)) for t in ys),
        rel,
    )


def _subsets(universe: int, min_size: int):
    for mask in range(1 << universe):
        bits = [i for i in range(universe) if mask & (1 << i)]
        if len(bits) >= min_size:
            yield tuple(bits)


def gallery_reap(universe: int = 5, min_size: int = 3,
                 split_floor: int = 1) -> FiniteRelSys:
    """Truncated reaping system: S related below X iff S does NOT split X
    at the truncation scale (one of S∩X, X\\S falls under the floor)."""
    sets = list(_subsets(universe, min_size))
    rel = []
    for s in sets:
        row = []
        ss = set(s)
        for xx in sets:
            inter = len(ss & set(xx))
            rest = len(set(xx) - ss)
            row.append(not (inter >= split_floor and rest >= split_floor))
        rel.append(tuple(row))
    return FiniteRelSys(
        tuple(str(list(s)) for s in sets),
        tuple(str(list(s)) for s in sets),
        tuple(rel),
    )


def gallery_reap_rho(universe: int = 6, rho=Fraction(1, 2),
                     tol=Fraction(1, 4), min_size: int = 2) -> FiniteRelSys:
    """Truncated rho-reaping system; membership is band membership of
    |S∩X|/|X| at the truncation horizon, and is labelled as such (the
    limit property is not decidable from a truncation)."""
    rho, tol = as_fraction(rho), as_fraction(tol)
    sets = list(_subsets(universe, min_size))
    rel = []
    for s in sets:
        row = []
        ss = set(s)
        for xx in sets:
            ratio = Fraction(len(ss & set(xx)), len(xx))
            row.append(not (abs(ratio - rho) <= tol))
        rel.append(tuple(row))
    return FiniteRelSys(
        tuple(str(list(s)) for s in sets),
        tuple(str(list(s)) for s in sets),
        tuple(rel),
    )
