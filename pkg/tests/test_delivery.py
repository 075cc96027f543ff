from fractions import Fraction

import pytest

from sharedcache.delivery import (
    TransmissionPlan,
    eliminate_redundant,
    improved_delivery,
    plan_delivery,
    predicted_count_thm3,
    sc_delivery,
    select_leaders,
    worst_case_count,
    worst_case_rate_points,
)
from sharedcache.model import Association, SubfileId, SystemConfig, sc_place

WORST = tuple(range(1, 9))
MOTIVATING = (1, 2, 3, 1, 1, 1, 1, 1)


def terms(tx):
    return {str(x) for x in tx.terms}


def check_structure(plan):
    for tx in plan:
        for x, c in zip(tx.terms, tx.serving_caches()):
            assert set(x.subset) == set(tx.cache_set) - {c}


def test_worst_case_plan(ex1):
    cfg, assoc = ex1
    plan = sc_delivery(cfg, assoc, WORST)
    assert len(plan) == 11 == worst_case_count(cfg, assoc)
    assert plan.rounds == ((1, 4, 6, 8), (2, 5, 7), (3,))
    assert plan.rate == Fraction(11, 6)
    assert terms(plan.transmissions[0]) == {"X^1_{2,3}", "X^4_{1,3}", "X^6_{1,2}"}
    assert str(plan.transmissions[0]) == "T_{1,4,6} = X^1_{2,3} ⊕ X^4_{1,3} ⊕ X^6_{1,2}"
    check_structure(plan)


def test_motivating_improved_plan(ex1):
    cfg, assoc = ex1
    plan = improved_delivery(cfg, assoc, MOTIVATING)
    assert len(plan) == 9 and plan.rate == Fraction(3, 2)
    first = [terms(tx) for tx in plan if tx.round == 1]
    assert first == [
        {"X^1_{2,3}", "X^1_{1,3}", "X^1_{1,2}"},
        {"X^1_{2,4}", "X^1_{1,4}", "X^1_{1,2}"},
        {"X^1_{3,4}", "X^1_{1,4}", "X^1_{1,3}"},
    ]
    later = [terms(tx) for tx in plan if tx.round > 1]
    assert later == [{f"X^{n}_{{{T}}}"} for n in (2, 3) for T in ("2,3", "2,4", "3,4")]
    check_structure(plan)


def test_elimination(ex1):
    _, assoc = ex1
    reduced, dem, proxies = eliminate_redundant(assoc, MOTIVATING)
    assert reduced.profile == (3, 1, 1, 1)
    assert dem == (1, 2, 3, 1, 1, 1)
    assert proxies == {5: 4, 7: 6}
    assert select_leaders((1, 4, 6, 8), MOTIVATING) == (1,)


def test_example3_plans(ex3):
    cfg, assoc = ex3
    plan = improved_delivery(cfg, assoc, (1, 2, 2, 3, 4, 4, 5, 6, 6))
    assert [terms(tx) for tx in plan] == [
        {"X^1_{2}", "X^3_{1}"}, {"X^1_{3}", "X^5_{1}"}, {"X^3_{3}", "X^5_{2}"},
        {"X^2_{2}", "X^4_{1}"}, {"X^2_{3}", "X^6_{1}"}, {"X^4_{3}", "X^6_{2}"},
    ]
    second = improved_delivery(cfg, assoc, (1, 2, 3, 4, 5, 1, 2, 3, 4))
    assert len(second) == 9
    check_structure(second)


def test_thm3_prediction_values(ex1, ex3):
    cfg, assoc = ex1
    assert predicted_count_thm3(cfg, assoc, MOTIVATING) == 7
    # the printed formula subtracts the empty subsets twice in full rounds
    assert predicted_count_thm3(cfg, assoc, WORST) == 10
    cfg3, assoc3 = ex3
    assert predicted_count_thm3(cfg3, assoc3, (1, 2, 2, 3, 4, 4, 5, 6, 6)) == 6
    assert predicted_count_thm3(cfg3, assoc3, (1, 2, 3, 4, 5, 1, 2, 3, 4)) == 9


def test_worst_case_points(ex1):
    cfg, assoc = ex1
    pts = worst_case_rate_points(cfg, assoc)
    assert pts[1] == (Fraction(1, 2), Fraction(11, 6))
    assert pts[-1] == (Fraction(1), Fraction(0))


def test_extreme_memory_points():
    assoc = Association.from_profile((2, 1))
    full = SystemConfig(3, 3, 2, 3, 4)
    assert len(sc_delivery(full, assoc, (1, 2, 3))) == 0
    assert len(improved_delivery(full, assoc, (1, 2, 3))) == 0
    empty = SystemConfig(3, 3, 2, 0, 4)
    assert len(sc_delivery(empty, assoc, (1, 1, 2))) == 3 == worst_case_count(empty, assoc)
    plan = improved_delivery(empty, assoc, (1, 1, 2))
    assert sorted(tx.terms[0].file for tx in plan) == [1, 2]


def test_plan_json_roundtrip_with_payloads(ex1):
    cfg, assoc = ex1
    pl = sc_place(cfg, [n * 12345 for n in range(1, 9)])
    for scheme in ("sc", "improved"):
        plan = plan_delivery(scheme, cfg, assoc, MOTIVATING, pl)
        again = TransmissionPlan.from_json(plan.to_json())
        assert again == plan
        assert again.symbols() == plan.symbols()


def test_payload_is_xor_of_terms(ex1):
    cfg, assoc = ex1
    pl = sc_place(cfg, [n * 777 for n in range(1, 9)])
    for tx in sc_delivery(cfg, assoc, WORST, pl):
        acc = 0
        for x in tx.terms:
            acc ^= pl.payload(x)
        assert acc == tx.payload


def test_unknown_scheme(ex1):
    cfg, assoc = ex1
    with pytest.raises(ValueError):
        plan_delivery("mds", cfg, assoc, WORST)


def test_log_lines_blocks(ex1):
    cfg, assoc = ex1
    lines = sc_delivery(cfg, assoc, WORST).log_lines()
    assert [l for l in lines if l.startswith("Round")] == [
        "Round 1: R_1 = {1, 4, 6, 8}", "Round 2: R_2 = {2, 5, 7}", "Round 3: R_3 = {3}",
    ]
    assert sum(l.startswith("  T_") for l in lines) == 11
    assert SubfileId(3, (2, 4)).message_index(4) == 2 * 6 + 4
