import random
from fractions import Fraction as F

import pytest

import welfarist.solver as solver_mod
from oracles import brute_maximizers, mnw_score
from welfarist.fairness import is_ef1
from welfarist.model import Allocation, CapacityError, Profile, random_profile, utility_vector
from welfarist.solver import (
    Strategy,
    UnsupportedWelfareError,
    maximizers,
    mnw_maximizers,
    solve_one,
)
from welfarist.welfare import Backend, MnwKey, Ordering, compare_values, evaluate, parse_welfare

NASH = parse_welfare("prod(u)")
UTIL = parse_welfare("sum(u)")


def bundles(ms):
    return {a.bundles for a in ms.allocations}


def prod(vec):
    out = F(1)
    for v in vec:
        out *= v
    return out


def test_empty_profile_single_allocation():
    p = Profile.from_matrix([[], []])
    for f in (NASH, UTIL, parse_welfare("lognash")):
        ms = maximizers(p, f)
        assert ms.allocations == (Allocation((set(), set())),)
        assert ms.exhaustive


def test_two_by_two_nash(two_by_two):
    best, expected = brute_maximizers(two_by_two.utilities, prod)
    ms = maximizers(two_by_two, NASH)
    assert best == 4
    assert ms.welfare_value.value == 4
    assert bundles(ms) == expected == {(frozenset({0}), frozenset({1}))}


def test_utilitarian_gadget(util_gadget, util_gadget_maximizer):
    best, expected = brute_maximizers(util_gadget.utilities, sum)
    ms = maximizers(util_gadget, UTIL)
    assert best == F(9, 2) == ms.welfare_value.value
    assert ms.allocations == (util_gadget_maximizer,)
    assert ms.utility_vectors == ((F(1, 2), 4),)
    assert bundles(ms) == expected


def test_mnw_degenerate_tie_break():
    p = Profile.from_matrix([[1], [0]])
    ms = mnw_maximizers(p)
    assert ms.allocations == (Allocation(({0}, set())),)
    assert ms.welfare_value == MnwKey(1, 1)


def test_mnw_examples(two_by_two):
    assert mnw_maximizers(two_by_two).allocations == (Allocation(({0}, {1})),)
    sym = Profile.from_matrix([[1, 1], [1, 1]])
    ms = mnw_maximizers(sym)
    assert ms.as_set() == {Allocation(({0}, {1})), Allocation(({1}, {0}))}
    assert ms.welfare_value == MnwKey(2, 1)


def test_maximizers_match_brute_force_oracle():
    rng = random.Random(17)
    families = {
        "prod(u)": prod,
        "sum(u)": sum,
        "min(u)": min,
        "sum(u^2)": lambda v: sum(x * x for x in v),
        "max(u) - min(u)": lambda v: max(v) - min(v),
    }
    for _ in range(40):
        n, m = rng.randint(2, 3), rng.randint(0, 6)
        rows = [[F(rng.randint(0, 6), rng.choice([1, 1, 2, 3])) for _ in range(m)] for _ in range(n)]
        p = Profile.from_matrix(rows)
        for text, score in families.items():
            best, expected = brute_maximizers(rows, score)
            ms = maximizers(p, parse_welfare(text))
            assert ms.welfare_value.value == best
            assert bundles(ms) == expected, text


def test_mnw_matches_brute_force_oracle():
    rng = random.Random(99)
    for _ in range(60):
        n, m = rng.randint(2, 4), rng.randint(0, 6)
        rows = [[F(rng.randint(0, 4), rng.choice([1, 2])) for _ in range(m)] for _ in range(n)]
        best, expected = brute_maximizers(rows, mnw_score)
        ms = mnw_maximizers(Profile.from_matrix(rows))
        assert (ms.welfare_value.positive_count, ms.welfare_value.positive_product) == best
        assert bundles(ms) == expected


def test_float_backend_ties_are_all_included():
    p = Profile.from_matrix([[1, 1], [1, 1]])
    ms = maximizers(p, parse_welfare("lognash"))
    assert ms.backend is Backend.FLOAT
    assert len(ms) == 2
    assert not ms.tolerance_ties


def test_float_tolerance_ties_are_flagged():
    # products 1 and 1 + 2^-80 differ by less than the tolerance after log
    eps = F(1, 2**80)
    p = Profile.from_matrix([[1, 1 + eps], [1, 1]])
    ms = maximizers(p, parse_welfare("lognash"))
    assert len(ms) == 2
    assert ms.tolerance_ties
    exact = maximizers(p, NASH)
    assert len(exact) == 1


def test_maximizer_values_are_attained():
    rng = random.Random(3)
    for _ in range(30):
        p = random_profile(rng, 3, 5)
        for f in (NASH, UTIL, parse_welfare("min(u)")):
            ms = maximizers(p, f)
            for alloc, vec in zip(ms.allocations, ms.utility_vectors):
                assert utility_vector(p, alloc) == vec
                assert evaluate(f, vec) == ms.welfare_value


def test_capacity_error():
    p = Profile.from_matrix([[1] * 10, [1] * 10])
    with pytest.raises(CapacityError):
        maximizers(p, NASH, cap=1000)


def test_chunked_and_parallel_scans_agree(monkeypatch):
    rng = random.Random(1)
    p = random_profile(rng, 3, 7)
    reference = maximizers(p, NASH)
    monkeypatch.setattr(solver_mod, "CHUNK_SIZE", 37)
    chunked = maximizers(p, NASH)
    parallel = maximizers(p, NASH, workers=3)
    assert chunked == reference == parallel
    assert mnw_maximizers(p, workers=2) == mnw_maximizers(p)


def test_large_integers_fall_back_to_python_ints():
    big = 2**70
    p = Profile.from_matrix([[big, 1, F(1, 3)], [1, big, 2]])
    best, expected = brute_maximizers(p.utilities, prod)
    assert bundles(maximizers(p, NASH)) == expected
    best, expected = brute_maximizers(p.utilities, mnw_score)
    assert bundles(mnw_maximizers(p)) == expected


def test_solve_one_brute_is_a_maximizer(two_by_two):
    assert solve_one(two_by_two, NASH) in maximizers(two_by_two, NASH)


def test_branch_and_bound_matches_brute_force():
    rng = random.Random(31)
    for _ in range(100):
        n, m = rng.randint(2, 3), rng.randint(0, 7)
        p = random_profile(rng, n, m, require_positive=False)
        for text in ("prod(u)", "sum(u)", "sum(log(u))"):
            f = parse_welfare(text)
            brute = maximizers(p, f)
            alloc = solve_one(p, f, Strategy.BRANCH_BOUND)
            value = evaluate(f, utility_vector(p, alloc))
            assert compare_values(value, brute.welfare_value).ordering is Ordering.EQUAL
            # same deterministic pick: the first maximizer in enumeration order
            assert alloc == brute.allocations[0]


def test_branch_and_bound_constant_objective():
    p = Profile.from_matrix([[1] * 12, [1] * 12])
    alloc = solve_one(p, UTIL, "bb")
    assert evaluate(UTIL, utility_vector(p, alloc)).value == 12


def test_branch_and_bound_rejects_other_families(two_by_two):
    with pytest.raises(UnsupportedWelfareError):
        solve_one(two_by_two, parse_welfare("min(u)"), "bb")


def test_mnw_implies_ef1():
    rng = random.Random(12)
    for _ in range(120):
        n = rng.choice([2, 3, 4])
        p = random_profile(rng, n, rng.randint(n, 7))
        for alloc in mnw_maximizers(p).allocations:
            assert is_ef1(p, alloc).holds


def test_scale_invariance_of_mnw_argmax():
    rng = random.Random(21)
    for _ in range(60):
        n = rng.choice([2, 3])
        p = random_profile(rng, n, rng.randint(n, 6))
        factor = F(rng.randint(1, 9), rng.randint(1, 9))
        q = p.scaled(rng.randrange(n), factor)
        assert mnw_maximizers(q).as_set() == mnw_maximizers(p).as_set()


@pytest.mark.parametrize("text", ["prod(u)", "prod(u)^3"])
def test_monotone_transform_invariance(text):
    rng = random.Random(8)
    for _ in range(60):
        n = rng.choice([2, 3])
        p = random_profile(rng, n, rng.randint(n, 6))
        assert maximizers(p, parse_welfare(text)).as_set() == maximizers(p, NASH).as_set()
