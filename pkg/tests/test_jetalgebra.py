from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from tresse.core.jetalgebra import JetRing, PolyEvaluator, prolongation
from tresse.core.jetspace import PointField, lie_derivative
from tresse.core.symbols import X, Y, jet_symbol
from tresse.exceptions import JetOrderError


@pytest.fixture(scope="module")
def ring() -> JetRing:
    return JetRing(6)


def test_jet_count(ring):
    # monomials of degree <= 6 in three variables
    assert len(ring.jets) == 84
    assert len(ring.gens) == 87


def test_order_limit(ring):
    with pytest.raises(JetOrderError):
        ring.jet(0, 0, 7)


def test_frame_commutators(ring):
    j = ring.jet
    f = j(1, 0, 2) * j(0, 1, 0) + j(2, 0, 0) ** 2 + ring.x * j(0, 0, 3)
    dp_dx = ring.D_p(ring.Dhat_x(f)) - ring.Dhat_x(ring.D_p(f))
    assert dp_dx == ring.D_y(f)
    assert ring.D_p(ring.D_y(f)) == ring.D_y(ring.D_p(f))


def test_dx_is_dhat_x_minus_p_dy(ring):
    f = ring.jet(1, 1, 1) * ring.y + ring.jet(0, 0, 2)
    assert ring.D_x(f) == ring.Dhat_x(f) - ring.p * ring.D_y(f)


@pytest.mark.parametrize(
    "a, b, jet",
    [
        (X * Y, X**2, (0, 0, 4)),
        (Y**2, X + Y, (1, 0, 2)),
        (X**2 * Y, Y**3 - X, (0, 1, 3)),
    ],
)
def test_prolongation_matches_jet_space(ring, a, b, jet):
    xi = prolongation(ring, ring.from_expr(a), ring.from_expr(b))
    e = jet_symbol(*jet)
    exact = ring.to_expr(xi(ring.from_expr(e)))
    assert sympy.expand(exact - lie_derivative(PointField(a, b), e)) == 0


def test_poly_evaluator(ring):
    f = 3 * ring.x**2 * ring.jet(0, 0, 4) - ring.const(Fraction(1, 2)) * ring.p
    values = np.linspace(0.1, 1.0, len(ring.gens))
    expected = 3 * values[0] ** 2 * values[ring.jet_index[(0, 0, 4)]] - 0.5 * values[2]
    assert PolyEvaluator(ring, f)(values) == pytest.approx(expected)


def test_poly_evaluator_vectorized(ring):
    f = ring.x * ring.y
    values = np.ones((4, len(ring.gens)))
    values[:, 0] = [1.0, 2.0, 3.0, 4.0]
    assert PolyEvaluator(ring, f)(values) == pytest.approx([1.0, 2.0, 3.0, 4.0])


def test_zero_polynomial(ring):
    assert PolyEvaluator(ring, ring.zero)(np.ones(len(ring.gens))) == 0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2), st.integers(0, 2), st.integers(0, 2))
def test_leibniz_rule(ring, l, m, k):
    f = ring.jet(l, m, k)
    g = ring.jet(0, 0, 2) * ring.y
    for D in ring.frame:
        assert D(f * g) == D(f) * g + f * D(g)


@pytest.mark.slow
@pytest.mark.parametrize("seed", [3, 19])
def test_prolongation_respects_brackets(seed):
    ring = JetRing(7)
    rng = np.random.default_rng(seed)
    xi, eta = PointField.random(rng, degree=2), PointField.random(rng, degree=2)

    def lift(v: PointField):
        return prolongation(ring, ring.from_expr(v.a), ring.from_expr(v.b))

    first, second, bracket = lift(xi), lift(eta), lift(xi.bracket(eta))
    columns = [0, 1, 2] + [ring.jet_index[jet] for jet in ring.jets if sum(jet) <= 5]
    for c in columns:
        assert first(second.image(c)) - second(first.image(c)) == bracket.image(c)
