import numpy as np
import pytest
from fractions import Fraction
from hypothesis import given, strategies as st

from rhosplit import (
    OMEGA,
    BernoulliSet,
    ExplicitSet,
    FiniteSetError,
    HorizonOverflowError,
    PowersSet,
    Prefix,
    Progression,
    SequenceSet,
    StrideSelection,
    combine,
    complement,
    count_below,
    difference,
    intersect,
    kth_element,
    materialize_prefix,
    parse_set,
    union,
)
from rhosplit.omega_sets import parse_family, require_infinite

from conftest import brute_count


progressions = st.builds(
    Progression, st.integers(0, 40), st.integers(1, 12)
)


def small_sets():
    explicit = st.builds(
        lambda bits, tail: ExplicitSet(np.array(bits, dtype=bool), tuple(tail)),
        st.lists(st.booleans(), min_size=0, max_size=24),
        st.lists(st.booleans(), min_size=1, max_size=5),
    )
    return st.one_of(progressions, explicit)


def combos():
    base = small_sets()
    unary = st.builds(lambda a: complement(a), base)
    binary = st.builds(
        lambda op, a, b: combine(op, a, b),
        st.sampled_from(["inter", "union", "diff"]),
        base,
        base,
    )
    return st.one_of(base, unary, binary)


def test_materialize_progressions():
    evens = Progression(0, 2)
    assert materialize_prefix(evens, 10).elements() == [0, 2, 4, 6, 8]
    assert materialize_prefix(complement(evens), 10).elements() == [1, 3, 5, 7, 9]


def test_materialize_is_idempotent_and_deterministic():
    s = parse_set("inter(prog(0,2),bern(1/2,5))")
    a = materialize_prefix(s, 5000)
    b = materialize_prefix(s, 5000)
    assert a == b


def test_bernoulli_count_chernoff_band_and_regression():
    s = BernoulliSet(Fraction(1, 2), 7)
    c = count_below(s, 10 ** 6)
    assert 490_000 <= c <= 510_000  # Chernoff band, 20 sigma
    assert c == 499_780  # frozen regression value of the seeded stream


def test_bernoulli_first_element_regression():
    s = BernoulliSet(Fraction(1, 2), 7)
    assert kth_element(s, 0) == 0  # frozen from the seeded generator
    assert s.contains(0)


def test_bernoulli_scalar_vector_agree():
    s = BernoulliSet(Fraction(1, 3), 99)
    arr = s.materialize(4096)
    scalar = np.array([s.contains(k) for k in range(4096)])
    assert np.array_equal(arr, scalar)


def test_bernoulli_two_instances_agree_bit_for_bit():
    a = BernoulliSet(Fraction(3, 10), 1234)
    b = BernoulliSet(Fraction(3, 10), 1234)
    assert np.array_equal(a.materialize(20000), b.materialize(20000))


def test_count_below_examples():
    evens = Progression(0, 2)
    assert count_below(evens, 10) == 5
    m3 = Progression(0, 3)
    joint = intersect(evens, m3)
    assert count_below(joint, 36) == brute_count(
        lambda k: k % 6 == 0, 36
    ) == 6
    assert count_below(joint, 0) == 0


def test_combinations_pointwise_and_flags():
    evens, odds = Progression(0, 2), Progression(1, 2)
    empty = intersect(evens, odds)
    assert empty.provably_finite
    assert np.array_equal(union(evens, odds).materialize(100),
                          OMEGA.materialize(100))
    assert np.array_equal(difference(OMEGA, evens).materialize(100),
                          odds.materialize(100))
    with pytest.raises(FiniteSetError):
        require_infinite(empty)


def test_combine_arity_checks():
    with pytest.raises(ValueError):
        combine("compl", OMEGA, OMEGA)
    with pytest.raises(ValueError):
        combine("inter", OMEGA)


def test_kth_element_examples():
    assert kth_element(Progression(0, 2), 3) == 6
    assert kth_element(PowersSet(2), 5) == 32
    finite = ExplicitSet(np.array([1, 0, 1], dtype=bool), tail=(False,))
    assert kth_element(finite, 1) == 2
    with pytest.raises(IndexError):
        kth_element(finite, 2)


def test_horizon_overflow():
    s = BernoulliSet(Fraction(1, 2), 3)
    with pytest.raises(HorizonOverflowError):
        s.materialize((1 << 27) + 1)
    with pytest.raises(HorizonOverflowError):
        s.count_below((1 << 27) + 1)
    # progressions count fine at any magnitude
    assert Progression(0, 2).count_below(10 ** 40) == 5 * 10 ** 39


@given(combos(), st.integers(0, 200), st.integers(0, 200))
def test_count_monotone_lipschitz(s, n, m):
    lo, hi = min(n, m), max(n, m)
    assert s.count_below(lo) <= s.count_below(hi) <= s.count_below(lo) + hi - lo


@given(small_sets(), small_sets(), st.integers(1, 300))
def test_de_morgan(a, b, n):
    lhs = complement(union(a, b)).materialize(n)
    rhs = intersect(complement(a), complement(b)).materialize(n)
    assert np.array_equal(lhs, rhs)


@given(progressions, st.integers(0, 500))
def test_next_element_at_or_beyond_prefix(s, n):
    assert s.kth_element(s.count_below(n)) >= n


@given(combos(), st.integers(1, 256))
def test_count_matches_materialization(s, n):
    assert s.count_below(n) == int(s.materialize(n).sum())


def test_stride_selection_counts():
    evens = Progression(0, 2)
    quarters = StrideSelection(evens, 2, 0)
    assert [quarters.kth_element(i) for i in range(4)] == [0, 4, 8, 12]
    for n in (0, 1, 5, 17, 100):
        assert quarters.count_below(n) == brute_count(lambda k: k % 4 == 0, n)


def test_sequence_set():
    s = SequenceSet(lambda n: 2 ** (2 ** n), name="towers")
    assert [s.kth_element(i) for i in range(4)] == [2, 4, 16, 256]
    assert s.count_below(257) == 4
    assert s.contains(16) and not s.contains(17)
    bad = SequenceSet(lambda n: 5, name="flat")
    with pytest.raises(ValueError):
        bad.kth_element(1)


def test_powers_membership():
    p3 = PowersSet(3)
    members = {1, 3, 9, 27, 81}
    for k in range(100):
        assert p3.contains(k) == (k in members)
    assert p3.count_below(10 ** 30) == 63  # 3^62 < 10^30 < 3^63


def test_prefix_rle_roundtrip():
    evens = Progression(0, 2)
    pref = materialize_prefix(evens, 11)
    runs = pref.to_rle()
    assert runs[0] == 0  # starts with a set bit
    assert Prefix.from_rle(runs, 11) == pref
    assert pref.count == 6


def test_prefix_requires_positive_horizon():
    with pytest.raises(ValueError):
        materialize_prefix(OMEGA, 0)


def test_grammar_roundtrip():
    texts = [
        "omega",
        "prog(0,2)",
        "bern(1/2,7)",
        "pow(2)",
        "inter(prog(0,2),prog(0,3))",
        "compl(prog(1,2))",
        "union(prog(0,4),prog(1,4))",
        "diff(omega,prog(0,2))",
        "every(prog(0,2),2,0)",
    ]
    for text in texts:
        s = parse_set(text)
        again = parse_set(s.descriptor())
        assert np.array_equal(s.materialize(512), again.materialize(512))


def test_grammar_rejects_junk():
    for bad in ("prog(0,2", "nope(1)", "prog(0,2) extra", "bern(2,1)"):
        with pytest.raises(ValueError):
            parse_set(bad)


def test_parse_family_handles_nested_commas():
    members = parse_family("omega,prog(0,2),inter(prog(0,2),prog(0,3))")
    assert len(members) == 3
    assert members[2].count_below(36) == 6
