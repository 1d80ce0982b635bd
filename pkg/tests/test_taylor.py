import math

import numpy as np
import pytest
import sympy

from tresse.core.jetalgebra import JetRing
from tresse.core.jetspace import ODE, restrict
from tresse.core.symbols import P, X, Y, jet_symbol
from tresse.core.taylor import JetEvaluator, Taylor, basis, expand
from tresse.exceptions import SamplingError


def test_basis_size():
    # monomials of total degree <= 3 in three variables
    assert basis(3).size == 20


def test_product_values():
    tb = basis(2)
    a = Taylor.variable(tb, 0, 2.0)
    b = Taylor.variable(tb, 1, 3.0)
    assert (a * b).value == 6.0
    assert (a * b).coeffs[tb.index[(1, 1, 0)]] == 1.0


def test_expand_exponential():
    series = expand(sympy.exp(X) * Y, (0.5, 2.0, 0.0), 3)
    tb = series.basis
    e = math.exp(0.5)
    assert series.coeffs[tb.index[(0, 0, 0)]] == pytest.approx(2 * e)
    assert series.coeffs[tb.index[(2, 0, 0)]] == pytest.approx(2 * e / 2)
    assert series.coeffs[tb.index[(1, 1, 0)]] == pytest.approx(e)
    assert series.coeffs[tb.index[(0, 0, 1)]] == pytest.approx(0)


def test_expand_fractional_power():
    series = expand(sympy.sqrt(P), (0.0, 0.0, 4.0), 2)
    tb = series.basis
    assert series.coeffs[tb.index[(0, 0, 1)]] == pytest.approx(0.25)
    assert series.coeffs[tb.index[(0, 0, 2)]] == pytest.approx(-1 / 64)


def test_unknown_variable():
    with pytest.raises(SamplingError):
        expand(sympy.Symbol("z") + X, (1.0, 1.0, 1.0), 2)


@pytest.mark.parametrize("f", ["exp(p)*x + y^2*p", "p^4/(1 + x*y)", "ln(x + p)*y^3"])
def test_jet_evaluator_matches_restriction(f):
    ring = JetRing(4)
    ode = ODE.from_text(f)
    point = (0.7, 1.1, 0.4)
    values = JetEvaluator(ode.f, ring)(point)
    subs = dict(zip((X, Y, P), point, strict=True))
    for jet, col in ring.jet_index.items():
        expected = complex(restrict(jet_symbol(*jet), ode).evalf(subs=subs))
        assert values[col] == pytest.approx(expected, rel=1e-9, abs=1e-9)


def test_jet_evaluator_pole():
    with pytest.raises(ZeroDivisionError):
        JetEvaluator(1 / X, JetRing(3))((0.0, 1.0, 1.0))


def test_series_is_finite_on_box():
    values = JetEvaluator(sympy.exp(P) * X, JetRing(6))((0.3, 0.3, 0.3))
    assert np.all(np.isfinite(values))
