import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from pcopt.expressions import (
    Add,
    Const,
    Div,
    ExpressionError,
    Mul,
    Neg,
    ParseError,
    Pow,
    Sub,
    Var,
    eval_expr,
    grad_expr,
    parse_expr,
    substitute,
    to_text,
    variables,
)

QUAD = "(1+lambda)*x^2 + x"


class TestParse:
    def test_precedence(self):
        assert eval_expr(parse_expr("1 + 2*3^2"), {}) == 19

    def test_unary_minus_binds_looser_than_power(self):
        assert eval_expr(parse_expr("-x^2"), {"x": 3.0}) == -9.0

    def test_left_associative(self):
        assert eval_expr(parse_expr("8 - 3 - 2"), {}) == 3
        assert eval_expr(parse_expr("8 / 4 / 2"), {}) == 1

    def test_scientific_numbers(self):
        assert eval_expr(parse_expr("1.5e-1 * 2"), {}) == pytest.approx(0.3)

    def test_variables(self):
        assert variables(parse_expr(QUAD)) == {"x", "lambda"}

    @pytest.mark.parametrize(
        "text, column",
        [("x +", 4), ("(x + 1", 7), ("x ^ -2", 5), ("x $ 2", 3), ("2 x", 3)],
    )
    def test_syntax_error_position(self, text, column):
        with pytest.raises(ParseError) as info:
            parse_expr(text)
        assert info.value.line == 1
        assert info.value.column == column

    def test_error_offsets(self):
        with pytest.raises(ParseError) as info:
            parse_expr("x * * 2", line=4, column=10)
        assert (info.value.line, info.value.column) == (4, 14)

    def test_literal_zero_denominator(self):
        with pytest.raises((ParseError, ExpressionError)):
            parse_expr("x / 0")


class TestEval:
    def test_quadratic_at_optimum(self):
        assert eval_expr(parse_expr(QUAD), {"x": -0.5, "lambda": 0.0}) == pytest.approx(-0.25)

    def test_constant_term(self):
        assert eval_expr(parse_expr("3*x^2 - 2*y + 7"), {"x": 0.0, "y": 0.0}) == 7.0

    def test_zero_power(self):
        assert eval_expr(parse_expr("x^0"), {"x": 7.0}) == 1.0

    def test_division_by_zero(self):
        with pytest.raises(ExpressionError):
            eval_expr(parse_expr("1 / (x - 1)"), {"x": 1.0})

    def test_missing_binding(self):
        with pytest.raises(ExpressionError, match="y"):
            eval_expr(parse_expr("x + y"), {"x": 1.0})

    def test_vectorized(self):
        out = eval_expr(parse_expr(QUAD), {"x": np.array([1.0, 2.0]), "lambda": 0.5})
        np.testing.assert_allclose(out, [2.5, 8.0])


class TestGrad:
    def test_quadratic(self):
        assert grad_expr(parse_expr(QUAD), "x", {"x": 1.0, "lambda": 0.0}) == pytest.approx(3.0)

    def test_absent_variable(self):
        assert grad_expr(parse_expr("x^2"), "lambda", {"x": 4.0, "lambda": 1.0}) == 0.0

    def test_power_rule(self):
        assert grad_expr(parse_expr("x^3"), "x", {"x": 2.0}) == pytest.approx(12.0)

    def test_quotient(self):
        assert grad_expr(parse_expr("1 / x"), "x", {"x": 2.0}) == pytest.approx(-0.25)


def test_substitute():
    e = substitute(parse_expr("x^2 + y"), {"x": parse_expr("a + 1")})
    assert eval_expr(e, {"a": 2.0, "y": 1.0}) == 10.0


# random expression trees over x, y, z with safe denominators
names = st.sampled_from(["x", "y", "z"])
leaves = st.one_of(
    st.builds(Const, st.floats(-3, 3, allow_nan=False).map(lambda v: round(v, 3))),
    st.builds(Var, names),
)


def _extend(children):
    return st.one_of(
        st.builds(Add, children, children),
        st.builds(Sub, children, children),
        st.builds(Mul, children, children),
        st.builds(Neg, children),
        st.builds(Pow, children, st.integers(0, 3)),
        st.builds(lambda a, b: Div(a, Add(Const(2.0), Mul(b, b))), children, children),
    )


trees = st.recursive(leaves, _extend, max_leaves=8)
points = st.fixed_dictionaries({k: st.floats(-1.5, 1.5) for k in "xyz"})


@settings(max_examples=100, deadline=None)
@given(trees)
def test_parse_print_parse_round_trip(e):
    once = parse_expr(to_text(e))
    assert parse_expr(to_text(once)) == once


def _no_negative_constants(e):
    if isinstance(e, Const):
        return e.value >= 0 and math.copysign(1.0, e.value) > 0
    return all(_no_negative_constants(c) for c in vars(e).values() if not isinstance(c, (int, float, str)))


@settings(max_examples=100, deadline=None)
@given(trees.filter(_no_negative_constants))
def test_tree_survives_printing(e):
    # negative literals print as "-c" and come back as Neg(Const(c)), hence the filter
    assert parse_expr(to_text(e)) == e


@settings(max_examples=100, deadline=None)
@given(trees, points, names)
def test_gradient_matches_central_difference(e, env, wrt):
    h = 1e-6
    value = eval_expr(e, env)
    assume(math.isfinite(value) and abs(value) < 1e6)
    up = eval_expr(e, dict(env, **{wrt: env[wrt] + h}))
    down = eval_expr(e, dict(env, **{wrt: env[wrt] - h}))
    fd = (up - down) / (2 * h)
    g = grad_expr(e, wrt, env)
    # FD truncation plus roundoff, relative to the size of the function near the point
    scale = max(1.0, abs(value), abs(up), abs(down))
    assert abs(g - fd) <= 1e-5 * max(abs(g), scale)
