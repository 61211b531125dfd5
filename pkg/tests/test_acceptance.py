"""Acceptance suite: one test per criterion, each at its stated tolerance,
printing one pass/fail line.  Run with `pytest tests/test_acceptance.py -v -s`.
"""

import contextlib
import io
import json
import random
import time
from fractions import Fraction

import pytest

from rhosplit import (
    OMEGA,
    BernoulliSet,
    Progression,
    binary_digits,
    build_partition,
    centred_escape,
    centred_thresholds,
    defeat_bisector,
    greedy_base_digits,
    half_slalom,
    intersect,
    laver_escape,
    rel_holds,
    reap_tukey_map,
    split_verdict,
    squaring_plan,
    transform_splitter,
    union,
    verify_certificate,
    witness_above,
    witness_below,
    zero_split_check,
)
from rhosplit.certificates import Certificate
from rhosplit.cli import run as cli_run
from rhosplit.density import density_report
from rhosplit.omega_sets import PowersSet, SequenceSet, parse_family
from rhosplit.relsys import (
    bounding_number,
    check_tukey,
    dominating_number,
    dual,
    pullback_pair,
    random_system,
)
from rhosplit.rho_transform import ChainConfig

from test_preservation import HORIZON_K, make_battery

HALF = Fraction(1, 2)


def report(num, ok, detail, limit, elapsed):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {num}: {status} ({detail}; {elapsed:.2f}s / limit {limit}s)")
    assert ok, f"criterion {num}: {detail}"
    assert elapsed < limit, f"criterion {num} exceeded {limit}s ({elapsed:.2f}s)"


def test_criterion_1_partition_growth():
    t0 = time.perf_counter()
    P = build_partition("minimal", 16)
    ok = P.verify_growth() is None
    ok &= all(P.growth_ratio(n) < Fraction(1, 2 ** n) for n in range(1, 16))
    ok &= [P.size(n) for n in range(3)] == [2, 5, 29]
    report(1, ok, "minimal depth 16, strict growth, sizes 2/5/29",
           1, time.perf_counter() - t0)


def test_criterion_2_density_composition_realized():
    t0 = time.perf_counter()
    A, B4, B1 = Progression(0, 2), Progression(0, 4), Progression(1, 4)
    inter_rep = density_report(intersect(A, B4), OMEGA, 10 ** 6,
                               stride=10 ** 4, target=Fraction(1, 4))
    union_rep = density_report(union(A, B1), OMEGA, 10 ** 6,
                               stride=10 ** 4, target=Fraction(3, 4))
    ok = all(r == Fraction(1, 4) for cp, r in
             zip(inter_rep.checkpoints, inter_rep.ratios) if cp % 4 == 0)
    ok &= all(r == Fraction(3, 4) for cp, r in
              zip(union_rep.checkpoints, union_rep.ratios) if cp % 4 == 0)
    ok &= inter_rep.max_tail_deviation <= Fraction(1, 1000)
    ok &= union_rep.max_tail_deviation <= Fraction(1, 1000)
    report(2, ok, "intersection 1/4 and union 3/4, exact at aligned checkpoints",
           5, time.perf_counter() - t0)


def test_criterion_3_adversary_battery(minimal16, splitter_battery):
    t0 = time.perf_counter()
    checked = 0
    ok = True
    for eps in (Fraction(1, 10), Fraction(1, 4), Fraction(2, 5)):
        lo, hi = HALF - eps, HALF + eps
        for name, S in splitter_battery.items():
            res = defeat_bisector(S, eps, minimal16, rounds=3)
            ok &= len(res.certificates) >= 3
            for cert, (n, ratio) in zip(res.certificates, res.realized):
                ok &= bool(verify_certificate(cert))
                ok &= ratio < lo or ratio > hi
                checked += 1
    report(3, ok, f"5 splitters x 3 eps, {checked} certificates verified, "
           "ratios escape the closed band", 10, time.perf_counter() - t0)


def test_criterion_4_escape_kernels(minimal16):
    t0 = time.perf_counter()
    ok = centred_thresholds(Fraction(1, 10), Fraction(2, 10)) == (4, 3)
    eps, epsp = Fraction(1, 10), Fraction(1, 5)
    guards = {k: minimal16.first(k, (minimal16.size(k) + 1) // 2)
              for k in range(5)}
    certs = [centred_escape(guards, eps, epsp, 4)]
    for m in (2, 3):
        slalom = half_slalom(minimal16, m)
        certs.append(laver_escape(slalom, eps, epsp, m)[1])
    tampers = 0
    for cert in certs:
        ok &= bool(verify_certificate(cert))
        payload = json.loads(cert.dumps())
        for key in payload["cardinalities"]:
            for delta in (1, -1):
                bad = json.loads(cert.dumps())
                bad["cardinalities"][key] = str(
                    int(bad["cardinalities"][key]) + delta)
                ok &= not verify_certificate(Certificate.from_json(bad))
                tampers += 1
    report(4, ok, f"thresholds (4,3); escape chains verify; "
           f"{tampers} single-count tamperings all detected",
           5, time.perf_counter() - t0)


def test_criterion_5_guarded_relation_suite(minimal16):
    t0 = time.perf_counter()
    P = minimal16
    battery = make_battery(P)
    ok = len(battery) == 10
    eps = Fraction(1, 10)
    branches = set()
    for X in battery.values():
        pair = witness_above(X, eps, P, HORIZON_K)
        branch1 = any(k in pair.guards and pair.guard_at(k).kind
                      in ("cotrace", "last", "empty")
                      or (k in pair.guards and pair.guard_at(k).base is not None)
                      for k in range(HORIZON_K))
        branches.add(branch1)
        ok &= rel_holds(X, pair, 1 if branch1 else 0, HORIZON_K).holds
    ok &= branches == {True, False}

    from rhosplit import GoodPair
    from rhosplit.omega_sets import ExplicitSet
    import numpy as np

    H_all = ExplicitSet(np.ones(HORIZON_K, dtype=bool), tail=(True,))
    pairs = [
        GoodPair(P, H_all, {k: P.first(k, max(1, (5 * P.size(k)) // 16 + 1))
                            for k in range(HORIZON_K)}, eps),
        GoodPair(P, H_all, {}, eps),
        GoodPair(P, H_all, {k: P.trace(k, Progression(0, 2))
                            for k in range(HORIZON_K)}, eps),
    ]
    defaults = set()
    for pair in pairs:
        Y = witness_below(pair, HORIZON_K)
        defaults.add(Y.default)
        ok &= rel_holds(Y, pair, 1, HORIZON_K).holds
    ok &= defaults >= {"singleton", "full"}

    banded = pairs[0]
    flips = 0
    for X in battery.values():
        if not rel_holds(X, banded, 1, HORIZON_K).holds:
            continue
        for m in (0, 10):
            Y, k = nwd_escape_checked(X, banded, m)
            after = rel_holds(Y, banded, 1, HORIZON_K)
            ok &= (not after.holds) and after.witness_k == k
            ok &= bool(np.array_equal(Y.materialize(m), X.materialize(m)))
            flips += 1

    S = BernoulliSet(HALF, 11)
    pair = reap_tukey_map(S, eps, P, HORIZON_K)
    targets = [battery[k] for k in
               ("evens", "odds", "mult3", "first-half", "full")]
    for X in targets:
        ok &= split_verdict("eps_band", S, X, 10 ** 6, eps=eps).holds_numerically
        least = next((k0 for k0 in range(HORIZON_K)
                      if rel_holds(X, pair, k0, HORIZON_K).holds), None)
        ok &= least is not None
    report(5, ok, f"witness battery of 10 (both branches), {flips} escapes "
           "flip with prefixes intact, reaping contract at 1e6",
           30, time.perf_counter() - t0)


def nwd_escape_checked(X, pair, m):
    from rhosplit import nwd_escape

    return nwd_escape(X, pair, 1, m, HORIZON_K)


FAMILY = "omega,prog(0,2),prog(1,2),prog(0,3),prog(1,4)"


@pytest.mark.parametrize("rho", [Fraction(7, 16), Fraction(3, 5), Fraction(4, 5)])
def test_criterion_6_forward_transform(rho):
    t0 = time.perf_counter()
    family = parse_family(FAMILY)
    cfg = ChainConfig(depth=8, horizon=10 ** 6, seed=1,
                      band_tolerance=Fraction(1, 50))
    res = transform_splitter(family, "half-to-rho", rho, None, cfg)
    budget = Fraction(1, 50) + Fraction(1, 256)
    devs = [v.diagnostics.max_tail_deviation for v in res.verdicts]
    ok = res.all_hold and all(d <= budget for d in devs)
    report(6, ok, f"rho={rho}: levels {res.selection}, max deviation "
           f"{float(max(devs)):.4f} <= 0.02 + 2^-8", 120,
           time.perf_counter() - t0)


def test_criterion_7_converse_transform():
    t0 = time.perf_counter()
    family = parse_family(FAMILY)
    cfg = ChainConfig(depth=8, horizon=10 ** 6, seed=1,
                      band_tolerance=Fraction(1, 50))
    direct = transform_splitter(family, "rho-to-half", Fraction(11, 20),
                                None, cfg)
    ok = direct.path == "direct" and direct.residual < Fraction(1, 100)

    fallback = transform_splitter(family, "rho-to-half", Fraction(3, 4),
                                  None, cfg)
    ok &= fallback.path == "fallback"
    ok &= fallback.ops == ["square"]
    ok &= fallback.effective_p == Fraction(9, 16)
    devs = [v.diagnostics.max_tail_deviation for v in
            direct.verdicts + fallback.verdicts]
    ok &= all(d <= Fraction(3, 100) for d in devs)
    report(7, ok, f"11/20 direct (residual {float(direct.residual):.4f}), "
           f"3/4 one squaring to 9/16, bisection within 0.03",
           180, time.perf_counter() - t0)


def test_criterion_8_expansions_and_squaring():
    t0 = time.perf_counter()
    rng = random.Random(12345)
    ok = True
    for _ in range(1000):
        num = rng.randrange(1, 1000)
        den = rng.randrange(num + 1, 1100)
        rho = Fraction(num, den)
        K = rng.randrange(4, 24)
        P = binary_digits(rho, K)
        resid = rho - sum(Fraction(1, 2 ** m) for m in P)
        ok &= 0 <= resid < Fraction(1, 2 ** K)

        x = Fraction(rng.randrange(1, 400), rng.randrange(1, 40))
        b = Fraction(rng.randrange(11, 40), 10)
        Kd = rng.randrange(2, 10)
        digits = greedy_base_digits(x, b, Kd)
        total = sum(c * b ** n for n, c in digits)
        if digits:
            N = digits[0][0]
            ok &= 0 <= x - total < b ** (N - Kd + 1)
        ok &= all(0 <= c < b for _, c in digits)
    for _ in range(10_000):
        rho = Fraction(rng.randrange(1, 10 ** 4), 10 ** 4)
        if rho == 1:
            continue
        ops, x = squaring_plan(rho)
        ok &= len(ops) <= 64 and Fraction(1, 3) < x < Fraction(2, 3)
    report(8, ok, "1e3 expansions reconstruct within bounds, "
           "1e4 squaring plans settle in <= 64 steps",
           10, time.perf_counter() - t0)


def test_criterion_9_relational_systems():
    t0 = time.perf_counter()
    rng = random.Random(777)
    ok = True
    for _ in range(200):
        R = random_system(rng, 2 + rng.randrange(7), 2 + rng.randrange(7))
        D = dual(R)
        ok &= bounding_number(D) == dominating_number(R)
        ok &= dominating_number(D) == bounding_number(R)
    accepted = 0
    while accepted < 100:
        R1 = random_system(rng, 2 + rng.randrange(5), 2 + rng.randrange(5))
        try:
            R0, pair = pullback_pair(rng, R1, 2 + rng.randrange(5),
                                     2 + rng.randrange(5), max_tries=200)
        except RuntimeError:
            continue
        ok &= check_tukey(R0, R1, pair).holds
        ok &= bounding_number(R0) >= bounding_number(R1)
        ok &= dominating_number(R0) <= dominating_number(R1)
        accepted += 1
    rep = zero_split_check(PowersSet(2),
                           SequenceSet(lambda n: 2 ** (2 ** n), name="doubling"),
                           1, 10)
    ok &= rep.bound_holds
    report(9, ok, "duality exact on 200 systems, monotonicity on 100 "
           "accepted pairs, doubling bound exact to n = 10",
           30, time.perf_counter() - t0)


SEEDED_RUNS = [
    ["density", "--S", "bern(1/2,7)", "--X", "omega", "--horizon", "1000000",
     "--kind", "rho", "--rho", "1/2"],
    ["adversary", "--S", "prog(0,2)", "--epsilon", "1/4", "--rounds", "3"],
    ["adversary", "--S", "bern(1/2,7)", "--epsilon", "1/10", "--rounds", "3"],
    ["escape", "--chain", "slalom", "--eps", "1/10", "--eps-prime", "1/5",
     "--index", "3"],
    ["preserve", "--op", "reap-map", "--S", "bern(1/2,11)", "--horizon-k", "6"],
    ["transform", "--direction", "half-to-rho", "--rho", "7/16",
     "--depth", "8", "--horizon", "200000", "--seed", "1"],
    ["transform", "--direction", "rho-to-half", "--rho", "3/4",
     "--depth", "8", "--horizon", "200000", "--seed", "1"],
    ["relsys", "--random", "50", "--seed", "9"],
    ["relsys", "--fact54", "--max-window", "10"],
]


def test_criterion_10_reproducibility():
    t0 = time.perf_counter()
    ok = True
    for argv in SEEDED_RUNS:
        outs = []
        for _ in range(2):
            buf = io.StringIO()
            with contextlib.redirect_stdout(buf):
                code = cli_run(argv)
            outs.append((code, buf.getvalue()))
        ok &= outs[0] == outs[1]
        ok &= outs[0][0] == 0
        ok &= len(outs[0][1]) > 0
    report(10, ok, f"{len(SEEDED_RUNS)} seeded runs repeated byte-identically",
           240, time.perf_counter() - t0)
