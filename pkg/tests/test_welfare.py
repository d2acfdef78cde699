import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from welfarist.welfare import (
    FLOAT_TOLERANCE,
    NEG_INFINITY,
    OTHER_FAMILIES,
    PRODUCT_FAMILIES,
    Aggregate,
    Backend,
    MnwKey,
    Ordering,
    Var,
    WelfareDomainError,
    WelfareParseError,
    WelfareStructureError,
    compare,
    evaluate,
    mnw_key,
    parse_welfare,
    render,
)

ALL_FAMILIES = {**PRODUCT_FAMILIES, **OTHER_FAMILIES}


def test_parse_examples():
    f = parse_welfare("sum(u)")
    assert f.root == Aggregate("sum", Var())
    assert f.rational_closed
    assert not parse_welfare("sum(log(u))").rational_closed
    g = parse_welfare("prod(u) + min(u)")
    assert g.rational_closed
    assert evaluate(g, [2, 3]) == evaluate(parse_welfare("8"), [0, 0])


@pytest.mark.parametrize("name,text", [("nash", "prod(u)"), ("lognash", "sum(log(u))"), ("util", "sum(u)"), ("egal", "min(u)")])
def test_shortcuts(name, text):
    assert parse_welfare(name).root == parse_welfare(text).root


@pytest.mark.parametrize(
    "text,closed",
    [("sum(u^2)", True), ("sum(u^-1)", True), ("sum(u^(1/2))", False), ("exp(sum(u))", False),
     ("max(u) - 2*min(u)/3", True), ("prod(u)^3", True)],
)
def test_rational_closed_flag(text, closed):
    assert parse_welfare(text).rational_closed is closed


@pytest.mark.parametrize("text", list(ALL_FAMILIES.values()) + ["-min(u) + 2^3", "sum((u+1)^2) / 3", "log(prod(u)) + 1"])
def test_render_round_trip(text):
    f = parse_welfare(text)
    assert parse_welfare(render(f.root)).root == f.root


@pytest.mark.parametrize(
    "text,position,structural",
    [
        ("sum(prod(u))", 4, True),
        ("u + 1", 0, True),
        ("sum(u ^ u)", 6, True),
        ("sum(u", 5, False),
        ("sum(u)) ", 6, False),
        ("sum(u) # 2", 7, False),
        ("avg(u)", 0, False),
    ],
)
def test_parse_errors(text, position, structural):
    with pytest.raises(WelfareParseError) as err:
        parse_welfare(text)
    assert err.value.position == position
    assert isinstance(err.value, WelfareStructureError) == structural


def test_evaluate_examples():
    assert evaluate(parse_welfare("prod(u)"), [2, 3]).value == 6
    assert evaluate(parse_welfare("sum(log(u))"), [1, 0]).is_neg_inf
    assert evaluate(parse_welfare("sum(u) - 1"), [0, 0]) > NEG_INFINITY
    assert evaluate(parse_welfare("sum(u^2)"), [F(1, 2), 2]).value == F(17, 4)


def test_backend_selection():
    assert evaluate(parse_welfare("prod(u)"), [2, 3]).backend is Backend.EXACT
    assert evaluate(parse_welfare("lognash"), [2, 3]).backend is Backend.FLOAT
    with pytest.raises(WelfareDomainError):
        evaluate(parse_welfare("lognash"), [2, 3], backend="exact")


def test_neg_infinity_semantics():
    lognash = parse_welfare("lognash")
    assert evaluate(lognash, [0, 5]).is_neg_inf
    assert evaluate(parse_welfare("exp(sum(log(u)))"), [0, 5]).value == 0
    assert evaluate(parse_welfare("min(log(u))"), [0, 5]).is_neg_inf
    assert not evaluate(parse_welfare("max(log(u))"), [0, 5]).is_neg_inf
    assert evaluate(lognash, [0, 5]) < evaluate(lognash, [F(1, 10**9), F(1, 10**9)])


@pytest.mark.parametrize(
    "text,x",
    [
        ("sum(u^(-1/2))", [0, 1]),
        ("sum(u^-1)", [0, 1]),
        ("sum(u) / min(u)", [0, 1]),
        ("-sum(log(u))", [0, 1]),
        ("prod(log(u))", [0, 1]),
    ],
)
def test_domain_errors(text, x):
    with pytest.raises(WelfareDomainError):
        evaluate(parse_welfare(text), x)


def test_fractional_power_at_zero_with_positive_exponent():
    assert evaluate(parse_welfare("sum(u^(1/2))"), [0, 4]).value == 2


def test_compare_examples():
    assert compare(parse_welfare("prod(u)"), [2, 3], [6, 1]).ordering is Ordering.EQUAL
    result = compare(parse_welfare("sum(u)"), [2, 3], [6, 1])
    assert result.ordering is Ordering.LESS
    assert (result.left.value, result.right.value) == (5, 7)
    assert compare(parse_welfare("min(u)"), [2, 2], [1, 4]).ordering is Ordering.GREATER


def test_float_compare_reports_tolerance():
    result = compare(parse_welfare("lognash"), [2, 3], [6, 1])
    assert result.ordering is Ordering.EQUAL
    assert result.backend is Backend.FLOAT
    assert result.tolerance == FLOAT_TOLERANCE
    assert compare(parse_welfare("prod(u)"), [2, 3], [6, 1]).tolerance is None


def test_float_compare_resolves_gaps_above_tolerance():
    # relative gap 2^-60 is above 2^-64
    x = [1 + F(1, 2**60), 1]
    assert compare(parse_welfare("sum(u^(1/2))"), x, [1, 1]).ordering is Ordering.GREATER
    y = [1 + F(1, 2**70), 1]
    assert compare(parse_welfare("sum(u^(1/2))"), y, [1, 1]).ordering is Ordering.EQUAL


def test_float_backend_matches_math():
    value = evaluate(parse_welfare("lognash"), [2, 3]).to_float()
    assert value == pytest.approx(math.log(6), rel=1e-15)


def test_mnw_key_examples():
    assert mnw_key([0, 0]) == MnwKey(0, 1)
    assert mnw_key([2, 3]) == MnwKey(2, 6)
    assert mnw_key([0, 5, 4]) == MnwKey(2, 20)
    assert MnwKey(1, 1) > MnwKey(0, 1)
    assert MnwKey(2, F(1, 100)) > MnwKey(1, 1000)


positive = st.fractions(min_value=F(1, 20), max_value=20, max_denominator=20)
nonneg = st.fractions(min_value=0, max_value=20, max_denominator=20)


@settings(max_examples=60, deadline=None)
@given(st.lists(positive, min_size=2, max_size=4), st.data())
def test_monotonicity_audit(x, data):
    bumped = [v + data.draw(st.fractions(min_value=0, max_value=5, max_denominator=10)) for v in x]
    for text in ALL_FAMILIES.values():
        f = parse_welfare(text)
        assert compare(f, bumped, x).ordering is not Ordering.LESS, text


@settings(max_examples=60, deadline=None)
@given(st.lists(nonneg, min_size=2, max_size=5), st.randoms())
def test_product_permutation_invariance(x, rnd):
    y = list(x)
    rnd.shuffle(y)
    f = parse_welfare("prod(u)")
    assert evaluate(f, x) == evaluate(f, y)


@pytest.mark.parametrize(
    "text", ["prod(u)", "sum(u^2)", "max(u) - min(u)/3", "prod(u)^3", "sum(u^-1)", "sum((u + 1/3)^5) * 7/9"]
)
def test_backend_agreement(text):
    f = parse_welfare(text)
    rng = random.Random(11)
    for _ in range(100):
        x = [F(rng.randint(1, 99), rng.randint(1, 99)) for _ in range(rng.randint(2, 5))]
        exact = evaluate(f, x, "exact").value
        approx = evaluate(f, x, "float").value
        approx = F(int(approx.man)) * F(2) ** int(approx.exp)  # exact value of the binary float
        assert abs(approx - exact) <= F(1, 2**100) * max(1, abs(exact))


@pytest.mark.parametrize("text", ["prod(u)", "sum(log(u))", "prod(u)^3"])
def test_zero_domination(text):
    f = parse_welfare(text)
    rng = random.Random(3)
    for _ in range(300):
        n = rng.randint(2, 4)
        x = [F(rng.randint(1, 30), rng.randint(1, 30)) for _ in range(n)]
        y = [F(rng.randint(0, 30), rng.randint(1, 30)) for _ in range(n)]
        y[rng.randrange(n)] = 0
        assert compare(f, x, y).ordering is Ordering.GREATER


def test_sum_and_min_are_not_zero_dominating():
    assert compare(parse_welfare("sum(u)"), [1, 1], [0, 5]).ordering is Ordering.LESS
