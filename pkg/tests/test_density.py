import numpy as np
import pytest
from fractions import Fraction
from hypothesis import given, strategies as st

from rhosplit import (
    OMEGA,
    BernoulliSet,
    ExplicitSet,
    PowersSet,
    Progression,
    SequenceSet,
    complement,
    compose_densities,
    density_report,
    intersect,
    parse_set,
    split_verdict,
    union,
    upper_lower_density,
)
from rhosplit.density import build_checkpoints

HALF = Fraction(1, 2)


def test_report_evens_in_omega_exact_half():
    rep = density_report(Progression(0, 2), OMEGA, 1000, stride=100)
    assert set(rep.ratios) == {HALF}
    assert rep.checkpoints[-1] == 1000


def test_report_multiples_of_three_in_evens():
    rep = density_report(Progression(0, 3), Progression(0, 2), 10 ** 6,
                         stride=10 ** 4)
    assert Fraction(33, 100) <= rep.lower_est <= rep.upper_est <= Fraction(34, 100)


def test_report_identity_case():
    s = parse_set("prog(3,7)")
    rep = density_report(s, s, 10 ** 4, stride=1000)
    assert set(rep.ratios) == {Fraction(1)}


def test_report_requires_inhabited_x():
    sparse = PowersSet(2)
    with pytest.raises(ValueError, match="at least 10"):
        density_report(OMEGA, sparse, 100)


def test_report_counts_are_exact():
    S, X = parse_set("bern(1/2,5)"), Progression(0, 2)
    rep = density_report(S, X, 20000, stride=5000)
    joint = intersect(S, X)
    for cp, num, den in zip(rep.checkpoints, rep.numerators, rep.denominators):
        assert num == joint.count_below(cp)
        assert den == X.count_below(cp)


def test_upper_lower_oscillating_blocks():
    # S fills [2^(2k), 2^(2k+1)) and skips [2^(2k+1), 2^(2k+2))
    N = 2 ** 20
    bits = np.zeros(N, dtype=bool)
    k = 0
    while 4 ** k < N:
        bits[4 ** k: min(2 * 4 ** k, N)] = True
        k += 1
    osc = ExplicitSet(bits, tail=(True,))
    upper, lower = upper_lower_density(osc, OMEGA, N, geometric=True)
    # brute-force oracle at the two tail checkpoints 2^19, 2^20
    cum = np.cumsum(bits)
    expect_hi = Fraction(int(cum[2 ** 19 - 1]), 2 ** 19)
    expect_lo = Fraction(int(cum[2 ** 20 - 1]), 2 ** 20)
    assert upper == expect_hi and lower == expect_lo
    assert upper - lower >= Fraction(1, 5)


def test_complement_duality_at_checkpoints():
    S = parse_set("bern(2/5,17)")
    rep = density_report(S, OMEGA, 10 ** 5, stride=10 ** 4)
    rep_c = density_report(complement(S), OMEGA, 10 ** 5, stride=10 ** 4)
    for r, rc in zip(rep.ratios, rep_c.ratios):
        assert rc == 1 - r


def test_finite_additivity_at_checkpoints():
    s1, s2 = Progression(0, 4), Progression(1, 4)  # disjoint
    u = union(s1, s2)
    r1 = density_report(s1, OMEGA, 10 ** 5, stride=7777)
    r2 = density_report(s2, OMEGA, 10 ** 5, stride=7777)
    ru = density_report(u, OMEGA, 10 ** 5, stride=7777)
    for a, b, c in zip(r1.ratios, r2.ratios, ru.ratios):
        assert c == a + b


def test_monotone_in_the_set():
    small, big = Progression(0, 4), Progression(0, 2)  # small ⊆ big
    rs = density_report(small, OMEGA, 10 ** 4, stride=999)
    rb = density_report(big, OMEGA, 10 ** 4, stride=999)
    for a, b in zip(rs.ratios, rb.ratios):
        assert a <= b


def test_classical_verdict():
    v = split_verdict("classical", Progression(0, 2), OMEGA, 10 ** 4)
    assert v.holds_numerically
    assert v.details["s_and_x"] == 5000
    assert v.details["x_minus_s"] == 5000


def test_rho_verdict_bernoulli_half():
    v = split_verdict("rho", BernoulliSet(HALF, 5), OMEGA, 10 ** 6,
                      rho=HALF, tolerance=Fraction(1, 100))
    assert v.holds_numerically
    assert v.diagnostics.max_tail_deviation <= Fraction(1, 100)


def test_eps_band_is_strict():
    # a set pinned at exactly 1/2 + eps at every checkpoint violates the
    # open band
    v = split_verdict("eps_band", Progression(0, 2), OMEGA, 1000,
                      eps=Fraction(1, 10), stride=100)
    assert v.holds_numerically  # 1/2 strictly inside
    bits = np.zeros(1000, dtype=bool)
    bits[0::5] = True
    bits[1::5] = True
    bits[2::5] = True  # density exactly 3/5 = 1/2 + 1/10
    s = ExplicitSet(bits, tail=(True, True, True, False, False))
    v2 = split_verdict("eps_band", s, OMEGA, 1000, eps=Fraction(1, 10),
                       stride=100)
    assert not v2.holds_numerically


def test_zero_verdict_sparse_range():
    # ran(x) with x(n) = 2^(2^n) inside the powers of two, horizon 2^32
    R = PowersSet(2)
    x = SequenceSet(lambda n: 2 ** (2 ** n), name="doubling")
    v = split_verdict("zero", x, R, 2 ** 32, geometric=True,
                      tolerance=Fraction(1, 5))
    assert v.holds_numerically


def test_zero_verdict_preconditions():
    with pytest.raises(ValueError, match="co-infinite"):
        split_verdict("zero", OMEGA, Progression(0, 2), 1000)


def test_one_verdict():
    almost_all = complement(PowersSet(2))
    v = split_verdict("one", almost_all, OMEGA, 10 ** 5,
                      tolerance=Fraction(1, 100))
    assert v.holds_numerically


def test_compose_densities_laws():
    assert compose_densities("inter", HALF, HALF) == Fraction(1, 4)
    assert compose_densities("union", HALF, HALF) == Fraction(3, 4)
    assert compose_densities("inter", Fraction(2, 7), 1) == Fraction(2, 7)


@given(st.fractions(min_value=Fraction(1, 100), max_value=Fraction(99, 100)),
       st.fractions(min_value=Fraction(1, 100), max_value=Fraction(99, 100)))
def test_compose_densities_algebra(r0, r1):
    inter = compose_densities("inter", r0, r1)
    un = compose_densities("union", r0, r1)
    assert inter + un == r0 + r1  # inclusion-exclusion
    assert 0 < inter <= min(r0, r1)
    assert max(r0, r1) <= un < 1


def test_fact_intersection_realized():
    # evens bisect omega, multiples of four bisect the evens; the
    # intersection quarters omega, exactly at multiples of four
    A, B = Progression(0, 2), Progression(0, 4)
    rep = density_report(intersect(A, B), OMEGA, 10 ** 6, stride=10 ** 4)
    assert all(r == Fraction(1, 4) for cp, r in zip(rep.checkpoints, rep.ratios)
               if cp % 4 == 0)
    assert rep.max_tail_deviation is None
    rep_t = density_report(intersect(A, B), OMEGA, 10 ** 6, stride=10 ** 4,
                           target=Fraction(1, 4))
    assert rep_t.max_tail_deviation <= Fraction(1, 1000)


def test_fact_union_realized():
    A, B = Progression(0, 2), Progression(1, 4)
    rep = density_report(union(A, B), OMEGA, 10 ** 6, stride=10 ** 4,
                         target=Fraction(3, 4))
    assert all(r == Fraction(3, 4) for cp, r in zip(rep.checkpoints, rep.ratios)
               if cp % 4 == 0)
    assert rep.max_tail_deviation <= Fraction(1, 1000)


def test_build_checkpoints():
    cps = build_checkpoints(1000, stride=300)
    assert cps == [300, 600, 900, 1000]
    geo = build_checkpoints(100, geometric=True)
    assert geo == [1, 2, 4, 8, 16, 32, 64, 100]
