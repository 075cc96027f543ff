from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sharedcache import gf2
from sharedcache.delivery import improved_delivery, sc_delivery
from sharedcache.indexcoding import (
    DecodeError,
    IcsiInstance,
    OracleLimitError,
    Receiver,
    alpha_bruteforce,
    alpha_formula,
    build_icsi,
    compute_bounds,
    construct_B,
    decoding_combination,
    is_generalized_independent,
    kappa_bruteforce,
    max_generalized_independent_set,
    min_rank_code,
    receiver_decode,
    to_mask,
)
from sharedcache.model import Association, SystemConfig, binomial, sc_place

WORST = tuple(range(1, 9))
EX3_A = (1, 2, 2, 3, 4, 4, 5, 6, 6)
EX3_B = (1, 2, 3, 4, 5, 1, 2, 3, 4)


def names(subfiles):
    return {str(x) for x in subfiles}


@st.composite
def instances(draw, max_messages=6, max_receivers=7):
    n = draw(st.integers(1, max_messages))
    k = draw(st.integers(1, max_receivers))
    receivers = []
    for _ in range(k):
        w = draw(st.integers(0, n - 1))
        has = draw(st.integers(0, (1 << n) - 1)) & ~(1 << w)
        receivers.append(Receiver(w, has, 0, None))
    return IcsiInstance(n, tuple(receivers))


def naive_alpha(inst):
    wanted = list(gf2.bits(inst.wanted))
    for size in range(len(wanted), 0, -1):
        for H in combinations(wanted, size):
            if is_generalized_independent(inst, H, method="exhaustive"):
                return size
    return 0


def naive_kappa(inst):
    n = inst.num_messages
    vectors = range(1, 1 << n)
    for r in range(0, n + 1):
        for rows in combinations(vectors, r):
            try:
                for i in range(len(inst.receivers)):
                    decoding_combination(inst, list(rows), i)
            except DecodeError:
                continue
            return r
    raise AssertionError("unicast always works")


def test_instance_shape(ex1):
    cfg, assoc = ex1
    inst = build_icsi(cfg, None, assoc, WORST)
    assert inst.num_messages == 48
    # each user misses C(3,2) = 3 of the six subfiles of its file
    assert len(inst.receivers) == 24
    assert all(not (r.has >> r.wants) & 1 for r in inst.receivers)
    assert inst.wanted.bit_count() == 24


def test_B_worst_case(ex1):
    cfg, assoc = ex1
    B = construct_B(cfg, assoc, WORST)
    assert names(B) == {
        "X^1_{2,3}", "X^1_{2,4}", "X^1_{3,4}", "X^2_{2,3}", "X^2_{2,4}", "X^2_{3,4}",
        "X^3_{2,3}", "X^3_{2,4}", "X^3_{3,4}", "X^4_{3,4}", "X^5_{3,4}",
    }
    assert len(B) == alpha_formula(cfg, assoc) == 11
    inst = build_icsi(cfg, None, assoc, WORST)
    H = to_mask(B, 4)
    assert is_generalized_independent(inst, H)
    assert is_generalized_independent(inst, H, method="exhaustive")


def test_B_example3(ex3):
    cfg, assoc = ex3
    assert names(construct_B(cfg, assoc, EX3_A)) == {
        "X^1_{2}", "X^1_{3}", "X^2_{2}", "X^2_{3}", "X^3_{3}", "X^4_{3}",
    }
    B = construct_B(cfg, assoc, EX3_B)
    assert names(B) == {
        "X^1_{2}", "X^1_{3}", "X^2_{2}", "X^2_{3}", "X^3_{2}", "X^3_{3}", "X^4_{3}", "X^5_{3}",
    }
    assert is_generalized_independent(build_icsi(cfg, None, assoc, EX3_B), to_mask(B, 3))


def test_example3_second_demand_exact_values(ex3):
    cfg, assoc = ex3
    inst = build_icsi(cfg, None, assoc, EX3_B)
    assert alpha_bruteforce(inst) == 8
    assert kappa_bruteforce(inst) == 8
    code = min_rank_code(inst)
    assert len(code) == 8
    for i in range(len(inst.receivers)):
        decoding_combination(inst, code, i)
    assert len(improved_delivery(cfg, assoc, EX3_B)) == 9


@settings(max_examples=150, deadline=None)
@given(instances(), st.integers(0, 63))
def test_peel_matches_exhaustive(inst, H):
    H &= (1 << inst.num_messages) - 1
    assert is_generalized_independent(inst, H) == is_generalized_independent(inst, H, method="exhaustive")


@settings(max_examples=150, deadline=None)
@given(instances())
def test_alpha_matches_naive(inst):
    best = max_generalized_independent_set(inst)
    assert is_generalized_independent(inst, to_mask(best))
    assert alpha_bruteforce(inst) == len(best) == naive_alpha(inst)


@settings(max_examples=60, deadline=None)
@given(instances(max_messages=4, max_receivers=6))
def test_kappa_matches_naive(inst):
    k = naive_kappa(inst)
    assert kappa_bruteforce(inst) == k
    assert kappa_bruteforce(inst, gis_bound=False) == k
    assert alpha_bruteforce(inst) <= k


@pytest.mark.parametrize(
    "profile, t, K",
    [((2, 1), 1, 3), ((1, 1, 1), 1, 3), ((2, 1, 1), 1, 4), ((2, 2, 0), 1, 4), ((3, 1, 0), 2, 4)],
)
def test_kappa_bound_on_and_off_agree(profile, t, K):
    lam = len(profile)
    cfg = SystemConfig(K, K, lam, Fraction(t * K, lam), binomial(lam, t))
    assoc = Association.from_profile(profile)
    inst = build_icsi(cfg, None, assoc, tuple(range(1, K + 1)))
    assert kappa_bruteforce(inst) == kappa_bruteforce(inst, gis_bound=False) == alpha_bruteforce(inst)


def test_oracle_limits(ex1):
    cfg, assoc = ex1
    inst = build_icsi(cfg, None, assoc, WORST)
    with pytest.raises(OracleLimitError):
        alpha_bruteforce(inst)
    with pytest.raises(OracleLimitError):
        kappa_bruteforce(inst)
    assert alpha_bruteforce(inst, limit=24) == 11


@pytest.mark.slow
def test_example1_kappa_oracle(ex1):
    cfg, assoc = ex1
    inst = build_icsi(cfg, None, assoc, WORST)
    assert kappa_bruteforce(inst, limit=24) == 11


def test_receiver_decode_recovers_payloads(ex1):
    cfg, assoc = ex1
    payloads = [(0xABCDEF * n) % (1 << cfg.file_size_bits) for n in range(1, 9)]
    pl = sc_place(cfg, payloads)
    for plan in (sc_delivery(cfg, assoc, WORST, pl), improved_delivery(cfg, assoc, (1, 2, 3, 1, 1, 1, 1, 1), pl)):
        d = WORST if plan.scheme == "sc" else (1, 2, 3, 1, 1, 1, 1, 1)
        inst = build_icsi(cfg, pl, assoc, d)
        known = {m: pl.payload(inst.subfile(m)) for m in range(inst.num_messages)}
        for i, r in enumerate(inst.receivers):
            got = receiver_decode(inst, plan.rows(), i, plan.symbols(), known)
            assert got == pl.payload(r.subfile)


def test_decode_error_when_plan_insufficient(ex1):
    cfg, assoc = ex1
    inst = build_icsi(cfg, None, assoc, WORST)
    rows = sc_delivery(cfg, assoc, WORST).rows()[:-1]
    with pytest.raises(DecodeError):
        for i in range(len(inst.receivers)):
            decoding_combination(inst, rows, i)


def test_bounds_reports(ex1, ex3):
    cfg, assoc = ex1
    rep = compute_bounds(cfg, assoc, WORST)
    assert rep.alpha_lower == rep.kappa_upper == 11 and rep.bounds_meet
    assert rep.exact_source == "sandwich" and set(rep.skipped) == {"alpha", "kappa"}

    cfg3, assoc3 = ex3
    gap = compute_bounds(cfg3, assoc3, EX3_B)
    assert (gap.alpha_lower, gap.kappa_upper, gap.bounds_meet) == (8, 9, False)
    assert (gap.alpha_exact, gap.kappa_exact) == (8, 8)
    skipped = compute_bounds(cfg3, assoc3, EX3_B, run_oracles=False)
    assert skipped.alpha_exact is None and skipped.kappa_exact is None

    tiny = compute_bounds(SystemConfig(2, 2, 2, 1, 2), Association.from_profile((1, 1)), (1, 2))
    assert tiny.alpha_exact == tiny.kappa_exact == 1
    assert tiny.exact_source == "oracle"
    assert tiny.to_json()["bounds_meet"] is True
