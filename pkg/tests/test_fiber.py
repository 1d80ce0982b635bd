import numpy as np
import pytest
import sympy

from tresse.core.fiber import (
    G4,
    G6,
    analyze_curve,
    box_nabla_ratio,
    curve_order,
    diamond_identity_residual,
    diamond_p,
    fiber_invariant,
    i7_on_curve,
    invariant_chain,
    l8_closure,
    l8_invariance_check,
    s2_curve,
    singular_orbit,
    total_p,
    uj,
)
from tresse.core.invariants import Weight
from tresse.core.symbols import P
from tresse.core.symcore import normalize
from tresse.exceptions import DegenerateCurveError, ParseError, UnknownInvariantError


def test_total_p():
    assert total_p(uj(4) * P) == uj(5) * P + uj(4)


def test_fiber_weights():
    assert fiber_invariant("G4").weight == Weight.of(4, -1)
    assert fiber_invariant("G6").weight == Weight.of(10, -2)
    with pytest.raises(UnknownInvariantError):
        fiber_invariant("G5")


def test_l8_closes():
    assert l8_closure() == (8, 8)


def test_l8_invariance(config):
    report = l8_invariance_check(config.sampling)
    failed = [(c.generator, c.invariant) for c in report.checks if not c.passed]
    assert report.passed, failed


def test_diamond_of_g4_vanishes():
    assert normalize(diamond_p(Weight.of(4, -1), G4)) == 0


def test_i7_identity():
    assert diamond_identity_residual() == 0


def test_i7_on_exponential(config):
    value = i7_on_curve(sympy.exp(P), 0.3, config.sampling)
    assert abs(value - 4j) <= 1e-9


@pytest.mark.parametrize("p0", [0.3, 0.7, 1.1])
def test_i7_is_constant_on_exponential(config, p0):
    assert abs(i7_on_curve(sympy.exp(P), p0, config.sampling) - 4j) <= 1e-9


def test_singular_orbits(config):
    assert singular_orbit(P**3 + P, config.sampling) == "S1"
    one = sympy.Integer(1)
    curve = s2_curve((one, 2 * one, 0 * one, one), 3 * one, -2 * one)
    assert singular_orbit(curve, config.sampling) == "S2"
    assert singular_orbit(sympy.exp(P), config.sampling) is None


def test_i7_undefined_on_singular_orbits(config):
    with pytest.raises(DegenerateCurveError, match="S1"):
        i7_on_curve(P**2, 0.5, config.sampling)


def test_curve_must_depend_on_p_only(config):
    with pytest.raises(ParseError):
        analyze_curve(P + sympy.Symbol("x"), [0.5], config.sampling)


def test_analyze_curve(config):
    report = analyze_curve(sympy.exp(P), [0.3, 0.7], config.sampling)
    assert report.orbit is None
    assert normalize(report.G6 + sympy.exp(2 * P)) == 0
    assert [p for p, _ in report.i7_values] == [0.3, 0.7]
    for (_, direct), (_, via) in zip(report.i7_values, report.diamond_values, strict=True):
        assert abs(direct - via) <= 1e-9
    assert all(abs(v) <= 1e-9 for _, v in report.box_values)


def test_analyze_singular_curve(config):
    report = analyze_curve(P**3, [0.5], config.sampling)
    assert report.orbit == "S1"
    assert report.i7_values == []


def test_invariant_chain_orders():
    chain = invariant_chain(3)
    assert [curve_order(e) for e in chain] == [7, 8, 9]


@pytest.mark.slow
def test_box_matches_nabla_p():
    pairs = box_nabla_ratio(samples=4)
    assert len(pairs) == 4
    ratio, expected = np.array(pairs).T
    assert np.allclose(ratio, expected, rtol=1e-9)
