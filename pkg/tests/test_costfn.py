import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gradsamp.costfn import (
    Abs,
    Add,
    Const,
    CostParseError,
    CostSingularityError,
    CostSpec,
    Div,
    Freq,
    Mul,
    Pow,
    Sqrt,
    Sub,
    check_gradient,
    evaluate,
    parse_cost_expr,
    partial,
    to_text,
)
from gradsamp.infer import synthesize_mse


def resolver(names):
    mapping = {name: i for i, name in enumerate(names, start=1)}

    def resolve(ref):
        if ref not in mapping:
            raise CostParseError(f"unknown identifier {ref!r}")
        return mapping[ref]

    return resolve


MSE_TEXT = "((0.2 - f(a))^2 + (0.6 - f(b))^2)/2"
COND_TEXT = "(0.4 - f(aux)/f(q))^2"


def test_parse_mse_structure():
    expr = parse_cost_expr(MSE_TEXT, resolver(["a", "b"]))
    assert expr == Div(
        Add(
            Pow(Sub(Const(0.2), Freq(1)), 2),
            Pow(Sub(Const(0.6), Freq(2)), 2),
        ),
        Const(2.0),
    )


def test_parse_conditional_structure():
    expr = parse_cost_expr(COND_TEXT, resolver(["aux", "q"]))
    assert expr == Pow(Sub(Const(0.4), Div(Freq(1), Freq(2))), 2)


def test_parse_constant():
    expr = parse_cost_expr("0.5", resolver([]))
    assert expr == Const(0.5)
    spec = CostSpec(expr, ())
    assert spec.gradient({}) == {}


def test_parse_structured_atom_reference():
    expr = parse_cost_expr("f(coin_out(1, heads))", resolver(["coin_out(1,heads)"]))
    assert expr == Freq(1)


@pytest.mark.parametrize(
    "text,beta,value",
    [
        ("1 - 2 - 3", {}, -4.0),  # left associativity
        ("2 + 3 * 2", {}, 8.0),  # * binds tighter than +
        ("2 * f(a)^2", {1: 3.0}, 18.0),  # ^ binds tighter than *
        ("8 / 4 / 2", {}, 1.0),
        ("-f(a) + 1", {1: 0.25}, 0.75),
        ("sqrt(f(a))", {1: 0.25}, 0.5),
        ("abs(0 - f(a))", {1: 0.3}, 0.3),
        ("f(a)^-1", {1: 0.5}, 2.0),
    ],
)
def test_grammar_and_eval(text, beta, value):
    expr = parse_cost_expr(text, resolver(["a"]))
    assert evaluate(expr, beta) == pytest.approx(value)


def test_eval_mse_at_targets_is_zero():
    expr = parse_cost_expr(MSE_TEXT, resolver(["a", "b"]))
    assert evaluate(expr, {1: 0.2, 2: 0.6}) == pytest.approx(0.0)


def test_eval_mse_at_origin():
    expr = parse_cost_expr(MSE_TEXT, resolver(["a", "b"]))
    assert evaluate(expr, {1: 0.0, 2: 0.0}) == pytest.approx(0.2)


def test_eval_conditional_hits_target():
    expr = parse_cost_expr(COND_TEXT, resolver(["aux", "q"]))
    assert evaluate(expr, {1: 0.2, 2: 0.5}) == pytest.approx(0.0)


def test_division_by_zero_reports_subexpression():
    expr = parse_cost_expr("f(a)/f(b)", resolver(["a", "b"]))
    with pytest.raises(CostSingularityError) as err:
        evaluate(expr, {1: 0.5, 2: 0.0})
    assert "f(" in str(err.value)


def test_sqrt_of_negative_raises():
    expr = parse_cost_expr("sqrt(f(a) - 1)", resolver(["a"]))
    with pytest.raises(CostSingularityError):
        evaluate(expr, {1: 0.0})


def test_partials_mse_at_origin():
    spec = CostSpec(parse_cost_expr(MSE_TEXT, resolver(["a", "b"])), (1, 2))
    grad = spec.gradient({1: 0.0, 2: 0.0})
    assert grad[1] == pytest.approx(-0.2)
    assert grad[2] == pytest.approx(-0.6)


def test_partials_constant_cost_zero():
    spec = CostSpec(Const(0.5), (1, 2))
    assert spec.gradient({1: 0.3, 2: 0.7}) == {1: 0.0, 2: 0.0}


def test_partials_vanish_at_minimum():
    spec = CostSpec(parse_cost_expr(MSE_TEXT, resolver(["a", "b"])), (1, 2))
    grad = spec.gradient({1: 0.2, 2: 0.6})
    assert grad[1] == pytest.approx(0.0) and grad[2] == pytest.approx(0.0)


def test_abs_partial_away_from_kink():
    spec = CostSpec(Abs(Sub(Freq(1), Const(0.5))), (1,))
    assert spec.gradient({1: 0.8})[1] == pytest.approx(1.0)
    assert spec.gradient({1: 0.2})[1] == pytest.approx(-1.0)


def test_gradient_check_mse():
    spec = CostSpec(parse_cost_expr(MSE_TEXT, resolver(["a", "b"])), (1, 2))
    check_gradient(spec, points=100)


def test_gradient_check_conditional():
    spec = CostSpec(parse_cost_expr(COND_TEXT, resolver(["aux", "q"])), (1, 2))
    check_gradient(spec, points=100, lo=0.1)


def random_smooth_expr(rng: random.Random, params, depth: int = 0):
    """Random cost AST that stays smooth on [0.01, 0.99]^n."""
    if depth >= 3 or rng.random() < 0.3:
        if rng.random() < 0.5:
            return Const(round(rng.uniform(-2, 2), 4))
        return Freq(rng.choice(params))
    kind = rng.randrange(6)
    left = random_smooth_expr(rng, params, depth + 1)
    right = random_smooth_expr(rng, params, depth + 1)
    if kind == 0:
        return Add(left, right)
    if kind == 1:
        return Sub(left, right)
    if kind == 2:
        return Mul(left, right)
    if kind == 3:
        return Div(left, Const(round(rng.uniform(0.5, 2.0), 3)))
    if kind == 4:
        return Pow(left, rng.randint(0, 3))
    return Sqrt(Add(Const(round(rng.uniform(0.3, 1.0), 3)), Pow(left, 2)))


def test_gradient_check_random_asts():
    rng = random.Random(11)
    params = (1, 2, 3)
    for _ in range(20):
        expr = random_smooth_expr(rng, params)
        spec = CostSpec(expr, params)
        check_gradient(spec, points=25, rng=rng)


def test_closed_form_mse_gradient_bitwise_equal():
    rng = random.Random(5)
    for n in (1, 2, 3, 7):
        params = tuple(range(1, n + 1))
        weights = {p: round(rng.uniform(0.05, 0.95), 3) for p in params}
        expr = synthesize_mse(weights, params)
        generic = CostSpec(expr, params, mse_weights=weights, use_closed_form=False)
        closed = CostSpec(expr, params, mse_weights=weights, use_closed_form=True)
        for _ in range(200):
            beta = {p: rng.random() for p in params}
            g1 = generic.gradient(beta)
            g2 = closed.gradient(beta)
            assert all(g1[p] == g2[p] for p in params), (g1, g2)


# --- round trip ---------------------------------------------------------------


def _exprs():
    consts = st.floats(
        min_value=-4, max_value=4, allow_nan=False, allow_infinity=False
    ).map(lambda v: Const(round(v, 4)))
    freqs = st.integers(min_value=1, max_value=4).map(Freq)
    leaves = st.one_of(consts, freqs)

    def extend(children):
        pairs = st.tuples(children, children)
        return st.one_of(
            pairs.map(lambda t: Add(*t)),
            pairs.map(lambda t: Sub(*t)),
            pairs.map(lambda t: Mul(*t)),
            pairs.map(lambda t: Div(*t)),
            st.tuples(children, st.integers(-3, 3)).map(lambda t: Pow(*t)),
            children.map(Abs),
            children.map(Sqrt),
        )

    return st.recursive(leaves, extend, max_leaves=12)


@settings(max_examples=200, deadline=None)
@given(_exprs())
def test_print_parse_round_trip(expr):
    text = to_text(expr)
    parsed = parse_cost_expr(text, lambda ref: int(ref))
    assert parsed == expr


def test_parse_unknown_identifier():
    with pytest.raises(CostParseError, match="unknown identifier"):
        parse_cost_expr("g(a)", resolver(["a"]))


def test_parse_undeclared_parameter():
    with pytest.raises(CostParseError):
        parse_cost_expr("f(zz)", resolver(["a"]))


@pytest.mark.parametrize("text", ["0.2 +", "(1", "f(a", "1 ^ f(a)", "2 ^ 1.5", "* 3"])
def test_parse_malformed(text):
    with pytest.raises(CostParseError):
        parse_cost_expr(text, resolver(["a"]))


def test_partial_of_division_quotient_rule():
    expr = parse_cost_expr("f(a)/f(b)", resolver(["a", "b"]))
    d = partial(expr, 1)
    assert evaluate(d, {1: 0.3, 2: 0.5}) == pytest.approx(1 / 0.5)
    d2 = partial(expr, 2)
    assert evaluate(d2, {1: 0.3, 2: 0.5}) == pytest.approx(-0.3 / 0.25)
