from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings, strategies as st

from pathmetric.expr import (
    Const,
    EvalDomainError,
    ExactEvalError,
    ParseError,
    Power,
    Product,
    Quotient,
    Sum,
    SymbolTable,
    Var,
    add,
    compile_float,
    diff,
    eval_exact,
    eval_float,
    evaluate,
    mul,
    parse_expr,
    power,
    subst,
    to_text,
)
from pathmetric.zerotest import is_zero

ST = SymbolTable(parameters=("alpha", "beta"))
x, y, p = Var("x"), Var("y"), Var("p")


def test_parse_pi_rhs():
    e = parse_expr("6*y^2 + x", ST)
    assert e == Sum((Product((Const(Fr(6)), Power(y, Fr(2)))), x))


def test_parse_zero():
    assert parse_expr("0", ST) == Const(Fr(0))


def test_parse_fractional_powers():
    e = parse_expr("y^(4/3)/x^(2/3)", ST)
    assert e == Quotient(Power(y, Fr(4, 3)), Power(x, Fr(2, 3)))


def test_parse_rejects_undeclared():
    with pytest.raises(ParseError) as err:
        parse_expr("x + q", ST)
    assert "q" in str(err.value)


def test_parse_reports_position():
    with pytest.raises(ParseError) as err:
        parse_expr("x + ", ST)
    assert err.value.position == 4


def test_parse_rejects_expression_exponent():
    with pytest.raises(ParseError):
        parse_expr("x^y", ST)


def test_sqrt_sugar():
    assert parse_expr("sqrt(x)", ST) == Power(x, Fr(1, 2))


def test_diff_polynomial():
    e = parse_expr("6*y^2 + x", ST)
    assert diff(e, "y") == mul(12, y)
    assert diff(e, "x") == Const(Fr(1))


def test_diff_fractional_power_rule():
    e = parse_expr("y^(4/3)*x^(-2/3)", ST)
    d = diff(e, "x")
    expected = parse_expr("-2/3*y^(4/3)*x^(-5/3)", ST)
    assert is_zero(d - expected).is_zero


def test_diff_exp():
    e = parse_expr("exp(y)", ST)
    assert diff(e, "y") == e


def test_diff_treats_parameters_as_constants():
    e = parse_expr("alpha*y", ST)
    assert diff(e, "y") == Var("alpha")
    assert diff(e, "x") == Const(Fr(0))


def test_eval_exact_examples():
    assert eval_exact(parse_expr("6*y^2 + x", ST), {"x": 1, "y": 2}) == 25
    v = eval_float(parse_expr("y^(4/3)/x^(2/3)", ST), {"x": 1, "y": 1})
    assert abs(v - 1) < 1e-15


def test_eval_division_by_zero():
    with pytest.raises(EvalDomainError):
        eval_exact(parse_expr("1/y", ST), {"y": 0})


def test_eval_negative_fractional_base():
    with pytest.raises(EvalDomainError):
        eval_float(parse_expr("y^(1/2)", ST), {"y": -1})


def test_eval_exact_perfect_roots():
    assert eval_exact(parse_expr("y^(4/3)", ST), {"y": 8}) == 16
    with pytest.raises(ExactEvalError):
        eval_exact(parse_expr("y^(1/2)", ST), {"y": 2})


def test_evaluate_dispatch():
    e = parse_expr("x + 1/2", ST)
    assert evaluate(e, {"x": Fr(1, 2)}) == 1
    assert float(evaluate(e, {"x": 0.5}, mode="float")) == 1.0


def test_subst_builds_through_constructors():
    e = parse_expr("x^2 + y", ST)
    assert subst(e, {"y": Const(Fr(0))}) == power(x, 2)
    composed = subst(e, {"x": add(y, 1)})
    assert eval_exact(composed, {"y": 2}) == 11


def test_compile_float_matches_exact():
    e = parse_expr("(x + y)^3/(1 + x*y)", ST)
    fn = compile_float(e, ("x", "y"))
    assert abs(fn(0.5, 0.25) - float(eval_exact(e, {"x": Fr(1, 2), "y": Fr(1, 4)}))) < 1e-14


# -- property tests ------------------------------------------------------------

_leaves = st.one_of(
    st.integers(min_value=-4, max_value=4).map(lambda n: Const(Fr(n))),
    st.sampled_from([x, y]),
    st.fractions(min_value=Fr(-3), max_value=Fr(3), max_denominator=5).map(Const),
)


def _combine(children):
    return st.one_of(
        st.tuples(children, children).map(lambda ab: add(ab[0], ab[1])),
        st.tuples(children, children).map(lambda ab: mul(ab[0], ab[1])),
        st.tuples(children, children).map(lambda ab: ab[0] - ab[1]),
        st.tuples(children, st.integers(min_value=0, max_value=3)).map(
            lambda an: power(an[0], an[1])
        ),
        st.tuples(children, children).map(
            lambda ab: ab[0] / ab[1] if ab[1] != Const(Fr(0)) else ab[0]
        ),
    )


exprs = st.recursive(_leaves, _combine, max_leaves=12)


@settings(max_examples=60, deadline=None)
@given(exprs)
def test_print_parse_roundtrip(e):
    assert parse_expr(to_text(e), ST) == e


@settings(max_examples=40, deadline=None)
@given(exprs, exprs)
def test_diff_is_leibniz(a, b):
    lhs = diff(mul(a, b), "x")
    rhs = add(mul(diff(a, "x"), b), mul(a, diff(b, "x")))
    verdict = is_zero(lhs - rhs)
    assert verdict.is_zero and verdict.tier == "exact"


@settings(max_examples=40, deadline=None)
@given(exprs, exprs, st.integers(min_value=-3, max_value=3))
def test_diff_is_linear(a, b, c):
    lhs = diff(add(mul(c, a), b), "y")
    rhs = add(mul(c, diff(a, "y")), diff(b, "y"))
    assert is_zero(lhs - rhs).is_zero
