import numpy as np
import pytest
import sympy

from tresse.core.jetspace import (
    ODE,
    Direction,
    PointField,
    PointMap,
    cocycles,
    jet_order,
    lie_derivative,
    numeric_restrict,
    prolong_field,
    restrict,
    total_derivative,
    transform_ode,
    weight_multiplier,
)
from tresse.core.symbols import P, U, X, Y, jet_symbol
from tresse.core.symcore import normalize, parse_expr
from tresse.exceptions import JetOrderError, MapError, ParseError

EQUATIONS = ["exp(p)", "y^2 + p^4", "x*p^5 + y", "p^3/(1 + x^2)"]
JET_EXPRESSIONS = [
    jet_symbol(0, 0, 4),
    jet_symbol(1, 0, 2) * U,
    X * jet_symbol(0, 1, 1) + P**2,
    jet_symbol(2, 0, 3) + Y * jet_symbol(1, 1, 0),
]


@pytest.mark.parametrize("f", EQUATIONS)
@pytest.mark.parametrize("e", JET_EXPRESSIONS)
def test_restriction_commutes_with_total_derivatives(f, e):
    ode = ODE.from_text(f)
    r = restrict(e, ode)
    checks = [
        (Direction.DP, sympy.diff(r, P)),
        (Direction.DY, sympy.diff(r, Y)),
        (Direction.DX_HAT, sympy.diff(r, X) + P * sympy.diff(r, Y)),
    ]
    for direction, expected in checks:
        assert normalize(restrict(total_derivative(direction, e), ode) - expected) == 0


def test_dp_and_dhat_x_commutator_is_dy():
    e = jet_symbol(1, 0, 2) * jet_symbol(0, 1, 0) + jet_symbol(2, 0, 0)
    lhs = total_derivative("Dp", total_derivative("Dx_hat", e)) - total_derivative(
        "Dx_hat", total_derivative("Dp", e)
    )
    assert sympy.expand(lhs - total_derivative("Dy", e)) == 0


def test_jet_order():
    assert jet_order(jet_symbol(1, 2, 3) * X) == 6
    assert jet_order(X + P) == 0


def test_ode_rejects_foreign_symbols():
    with pytest.raises(ParseError):
        ODE(sympy.Symbol("z") * X)


def test_ode_str():
    assert str(ODE.from_text("p^2")) == "y'' = p**2"


def test_prolongation_order_limit():
    with pytest.raises(JetOrderError):
        prolong_field(PointField(X, Y), order=8, max_order=8)


def test_i_is_relative_invariant():
    rng = np.random.default_rng(3)
    I = jet_symbol(0, 0, 4)
    for _ in range(2):
        xi = PointField.random(rng, degree=2)
        residual = lie_derivative(xi, I) + weight_multiplier(xi, -2, 3) * I
        assert sympy.expand(residual) == 0


def test_cocycles_of_scalings():
    assert cocycles(PointField(X, sympy.Integer(0))) == (1, 0)
    # y∂y: a_x + b_y = 1 and ∂y φ = 1
    assert cocycles(PointField(sympy.Integer(0), Y)) == (1, 1)


def test_bracket_of_translations_vanishes():
    field = PointField(sympy.Integer(1), sympy.Integer(0)).bracket(PointField(sympy.Integer(0), sympy.Integer(1)))
    assert field.a == 0 and field.b == 0


def test_transform_adds_constant():
    # Y = y + x^2 turns y'' = 0 into Y'' = 2
    result = transform_ode(PointMap(X, Y + X**2), ODE(sympy.Integer(0)))
    assert result.symbolic
    assert normalize(result.ode.f - 2) == 0


def test_transform_scaling():
    result = transform_ode(PointMap.from_text("x, 2*y"), ODE.from_text("p^4"))
    # y = Y/2, p = P/2: Y'' = 2*y'' = 2*(P/2)^4
    assert normalize(result.ode.f - P**4 / 8) == 0


def test_transform_numeric_mode_matches_prolongation():
    point_map = PointMap(X + Y**3, Y)
    result = transform_ode(point_map, ODE.from_text("x*p"))
    assert not result.symbolic
    Xv, Yv, Pv, fv = result.prolong((0.5, 0.7, 0.3))
    assert result.evaluate(Xv.real, Yv.real, Pv.real, guess=(0.4, 0.6)) == pytest.approx(fv, rel=1e-8)


def test_singular_map():
    with pytest.raises(MapError):
        transform_ode(PointMap(X, X), ODE.from_text("p"))


def test_random_map_inverse():
    rng = np.random.default_rng(1)
    point_map = PointMap.random(rng, degree=2)
    inverse = point_map.inverse()
    assert inverse is not None
    composed = inverse.compose(point_map)
    assert sympy.expand(composed.X - X) == 0
    assert sympy.expand(composed.Y - Y) == 0


def test_parse_expr_round_trip_in_restrict():
    ode = ODE.from_text("y*exp(p)")
    assert normalize(restrict(parse_expr("u^2", jets=True), ode) - Y * sympy.exp(P)) == 0


def test_numeric_restrict_matches_substitution():
    ode = ODE.from_text("y*exp(p)")
    value = numeric_restrict(parse_expr("u^2", jets=True), ode, {X: 0.5, Y: 2.0, P: 0.3})
    assert value == pytest.approx(2.0 * np.exp(0.3))


@pytest.mark.slow
def test_prolong_field_respects_brackets():
    rng = np.random.default_rng(23)
    xi, eta = PointField.random(rng, degree=2), PointField.random(rng, degree=2)
    first, second = prolong_field(xi, 6), prolong_field(eta, 6)

    def apply(coefficients, g):
        return sum((sympy.diff(g, s) * coefficients[s] for s in g.free_symbols), sympy.Integer(0))

    for s, coefficient in prolong_field(xi.bracket(eta), 5).items():
        assert sympy.expand(apply(first, second[s]) - apply(second, first[s]) - coefficient) == 0


def test_transform_composition():
    ode = ODE.from_text("exp(p) + x*y")
    inner = PointMap(X + Y**2, Y, (X - Y**2, Y))
    outer = PointMap(X, Y + X**2 / 2, (X, Y - X**2 / 2))
    composite = transform_ode(outer.compose(inner), ode)
    stepwise = transform_ode(outer, transform_ode(inner, ode).ode)
    assert composite.ode is not None and stepwise.ode is not None
    for point in [(0.4, 0.9, 0.2), (1.1, 0.5, -0.3), (0.7, 1.3, 0.6)]:
        x1, y1, p1, value = composite.prolong(point)
        expected = complex(stepwise.ode.f.evalf(subs={X: x1, Y: y1, P: p1}))
        assert value == pytest.approx(expected, rel=1e-9)
