from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thinlayer import expr as ex
from thinlayer.errors import (DomainError, NonDifferentiable, ParseError, UnboundVariable,
                              UnknownIdentifier)


def ev(text, **env):
    return ex.evaluate(ex.parse(text), env)


# ------------------------------------------------------------- examples


def test_cosh_expression_at_origin():
    assert ev("a*cosh(x/a)", a=1.0, x=0.0) == 1.0


def test_paraboloid_profile_text():
    assert ev("rho^2/(2*a)", a=1.0, rho=2.0) == 2.0


def test_malformed_reports_offset():
    with pytest.raises(ParseError) as info:
        ex.parse("2*+3")
    assert info.value.offset == 2
    assert info.value.expected


def test_cosh_at_zero():
    assert ev("cosh(x)", x=0.0) == 1.0


def test_scaled_cosh():
    assert ev("a*cosh(x/a)", a=2.0, x=2.0) == pytest.approx(2.0 * math.cosh(1.0), rel=1e-15)
    assert ev("a*cosh(x/a)", a=2.0, x=2.0) == pytest.approx(3.0862, abs=1e-4)


def test_sqrt_of_negative():
    with pytest.raises(DomainError):
        ev("sqrt(0-1)")


def test_derivative_of_catenary_profile():
    d = ex.differentiate(ex.parse("a*cosh(x/a)"), "x")
    assert ex.evaluate(d, {"a": 1.0, "x": 1.0}) == pytest.approx(math.sinh(1.0), rel=1e-14)
    assert ex.evaluate(d, {"a": 1.0, "x": 1.0}) == pytest.approx(1.1752, abs=1e-4)


def test_power_derivative():
    assert ex.evaluate(ex.differentiate(ex.parse("x^2"), "x"), {"x": 3.0}) == 6.0


def test_derivative_in_other_variable_is_zero():
    d = ex.differentiate(ex.parse("x^2"), "y")
    assert d == ex.Num(0.0)


# ------------------------------------------------------------- grammar


@pytest.mark.parametrize("text,value", [
    ("-x^2", -9.0),
    ("2^3^2", 512.0),
    ("-2^2", -4.0),
    ("2^-1", 0.5),
    ("1-2-3", -4.0),
    ("8/4/2", 1.0),
    ("2*3+4*5", 26.0),
    ("(1+2)*3", 9.0),
    ("--x", 3.0),
    ("1.5e1 + 2E-1", 15.2),
])
def test_precedence(text, value):
    assert ev(text, x=3.0) == pytest.approx(value, rel=1e-15)


@pytest.mark.parametrize("text", ["", "   ", "1+", "(1", "1)", "sin", "sin x", "2**3", "3 4", "1e", "@"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        ex.parse(text)


def test_unknown_identifier_has_position():
    with pytest.raises(UnknownIdentifier) as info:
        ex.parse("x + zz", variables=("x", "y"))
    assert info.value.name == "zz"
    assert info.value.offset == 4


def test_unknown_function():
    with pytest.raises((UnknownIdentifier, ParseError)):
        ex.parse("sec(x)")


def test_unbound_variable():
    with pytest.raises(UnboundVariable):
        ev("x + y", x=1.0)


@pytest.mark.parametrize("text", ["ln(0)", "ln(0-2)", "1/0", "(0-8)^(1/3)", "0^(0-1)", "exp(1000)"])
def test_domain_errors(text):
    with pytest.raises(DomainError):
        ev(text)


def test_abs_not_differentiable_at_zero():
    d = ex.differentiate(ex.parse("abs(x)"), "x")
    assert ex.evaluate(d, {"x": 2.0}) == 1.0
    assert ex.evaluate(d, {"x": -2.0}) == -1.0
    with pytest.raises(NonDifferentiable):
        ex.evaluate(d, {"x": 0.0})


def test_parse_is_deterministic():
    text = "a*cosh(x/a) + sin(x)^2 - 3*y"
    assert ex.parse(text) == ex.parse(text)
    assert hash(ex.parse(text)) == hash(ex.parse(text))


def test_as_function_is_elementwise():
    f = ex.as_function(ex.parse("x^2 + a"), "x", {"a": 1.0})
    np.testing.assert_array_equal(f(np.array([0.0, 1.0, 2.0])), [1.0, 2.0, 5.0])
    assert f(3.0) == 10.0


# ------------------------------------------------------------ round trip

names = st.sampled_from(["x", "y", "a"])
numbers = st.floats(min_value=0.0, max_value=1e6, allow_nan=False, allow_infinity=False)
leaves = st.one_of(numbers.map(ex.Num), names.map(ex.Var))


def _extend(children):
    return st.one_of(
        children.map(ex.Neg),
        st.tuples(st.sampled_from("+-*/^"), children, children).map(lambda t: ex.BinOp(*t)),
        st.tuples(st.sampled_from(sorted(ex.FUNCTIONS)), children).map(lambda t: ex.Call(*t)),
    )


asts = st.recursive(leaves, _extend, max_leaves=12)


@given(asts)
def test_round_trip(node):
    text = ex.to_string(node)
    assert ex.parse(text) == node


# ------------------------------------------------------ derivative oracle

SURFACE_EXPRESSIONS = [
    ("a*cosh(x/a)", ("x",), {"a": 1.3}),
    ("rho^2/(2*a)", ("rho",), {"a": 0.7}),
    ("sin(x)*cos(y)", ("x", "y"), {}),
    ("(x^2 + y^2)/2", ("x", "y"), {}),
    ("0.3*exp(-(x^2 + 2*y^2))", ("x", "y"), {}),
    ("x*y", ("x", "y"), {}),
    ("sqrt(1 + x^2)*tanh(y)", ("x", "y"), {}),
    ("ln(2 + sin(rho))^2", ("rho",), {}),
]


@pytest.mark.parametrize("text,variables,params", SURFACE_EXPRESSIONS)
def test_derivatives_match_central_differences(text, variables, params):
    rng = np.random.default_rng(11)
    ast = ex.parse(text, variables=variables, parameters=tuple(params))
    for var in variables:
        first = ex.differentiate(ast, var)
        second = ex.differentiate(first, var)
        for _ in range(20):
            env = dict(params, **{v: float(rng.uniform(-1.5, 1.5)) for v in variables})
            h = 1e-6 * max(1.0, abs(env[var]))

            def at(node, shift):
                return ex.evaluate(node, dict(env, **{var: env[var] + shift}))

            fd1 = (at(ast, h) - at(ast, -h)) / (2 * h)
            fd2 = (at(first, h) - at(first, -h)) / (2 * h)
            for sym, fd in ((at(first, 0.0), fd1), (at(second, 0.0), fd2)):
                assert abs(sym - fd) <= 1e-6 * max(abs(sym), 1.0)


def test_mixed_partials_commute():
    ast = ex.parse("sin(x)*cos(y) + x^3*y^2")
    dxy = ex.differentiate(ex.differentiate(ast, "x"), "y")
    dyx = ex.differentiate(ex.differentiate(ast, "y"), "x")
    env = {"x": 0.4, "y": -0.9}
    assert ex.evaluate(dxy, env) == pytest.approx(ex.evaluate(dyx, env), rel=1e-13)


def test_variable_exponent_rule():
    d = ex.differentiate(ex.parse("x^x"), "x")
    x = 1.7
    assert ex.evaluate(d, {"x": x}) == pytest.approx(x**x * (math.log(x) + 1.0), rel=1e-13)
