import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from tresse.core.parser import parse, parse_pair, tokenize
from tresse.core.symbols import P, X, Y, jet_symbol
from tresse.exceptions import ParseError


@pytest.mark.parametrize(
    "text, expected",
    [
        ("x^2 + 3*y", X**2 + 3 * Y),
        ("x**2 + 3*y", X**2 + 3 * Y),
        ("5/2", sympy.Rational(5, 2)),
        ("0.25*p", P / 4),
        ("2^3^2", sympy.Integer(512)),
        ("-x^2", -(X**2)),
        ("(x - y)*(x + y)", (X - Y) * (X + Y)),
        ("exp(p) + ln(x) + sqrt(y)", sympy.exp(P) + sympy.log(X) + sympy.sqrt(Y)),
        ("x - y - p", X - Y - P),
        ("x/y/p", X / Y / P),
    ],
)
def test_parse(text, expected):
    assert sympy.simplify(parse(text) - expected) == 0


def test_decimals_are_exact():
    assert parse("0.1") == sympy.Rational(1, 10)


@pytest.mark.parametrize(
    "text, position",
    [
        ("x +", 3),
        ("x $ y", 2),
        ("(x + y", 6),
        ("sin(x)", 0),
        ("q + 1", 0),
        ("x y", 2),
        ("1.2.3", 0),
    ],
)
def test_parse_errors_carry_position(text, position):
    with pytest.raises(ParseError) as err:
        parse(text)
    assert err.value.position == position
    assert err.value.text == text


def test_function_without_argument():
    with pytest.raises(ParseError, match="needs an argument"):
        parse("exp + 1")


def test_empty_input():
    with pytest.raises(ParseError, match="Empty"):
        parse("   ")


@pytest.mark.parametrize(
    "text, jet",
    [
        ("u", (0, 0, 0)),
        ("u^4", (0, 0, 4)),
        ("u_{10}", (1, 0, 0)),
        ("u^2_{01}", (0, 1, 2)),
        ("u^{5}_{10}", (1, 0, 5)),
    ],
)
def test_jet_coordinates(text, jet):
    assert parse(text, jets=True) == jet_symbol(*jet)


def test_jet_power_is_not_a_jet_index():
    # without jet mode, u^4 is a power of the plain variable u
    assert parse("u^4") == sympy.Symbol("u") ** 4


def test_bad_jet_subscript():
    with pytest.raises(ParseError, match="two digits"):
        tokenize("u_{1}", jets=True)


def test_parse_pair():
    assert parse_pair("x + y, 2*y") == (X + Y, 2 * Y)
    assert parse_pair("exp(x + y), y") == (sympy.exp(X + Y), Y)


@pytest.mark.parametrize("text", ["x", "x, y, p"])
def test_parse_pair_needs_two_components(text):
    with pytest.raises(ParseError):
        parse_pair(text)


@given(st.integers(-50, 50), st.integers(-50, 50), st.integers(1, 9))
def test_linear_forms(a, b, c):
    text = f"{a}*x + {b}/{c}*p"
    assert sympy.expand(parse(text) - (a * X + sympy.Rational(b, c) * P)) == 0
