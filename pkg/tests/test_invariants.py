from fractions import Fraction

import numpy as np
import pytest
import sympy

from tresse.core.invariants import (
    ABSOLUTE_NAMES,
    RELATIVE_NAMES,
    RelInvariant,
    Weight,
    abs_invariant,
    delta,
    rel_invariant,
)
from tresse.core.jetspace import ODE, PointField, restrict
from tresse.core.symbols import P, X, Y
from tresse.core.symcore import normalize
from tresse.exceptions import UnknownInvariantError, WeightError


@pytest.mark.parametrize(
    "name, weight",
    [
        ("I", (-2, 3)),
        ("H", (2, 1)),
        ("K", (1, 2)),
        ("H10", (3, 1)),
        ("H01", (2, 2)),
    ],
)
def test_weights(alg, name, weight):
    assert alg.rel(name).weight == Weight.of(*weight)


def test_weight_arithmetic():
    w = Weight.of(2, 1) + Weight.of(-1, 1)
    assert w == Weight.of(1, 2)
    assert (2 * w).as_tuple() == ("2", "4")
    assert str(Weight.of(-2, 3)) == "(-2, 3)"
    assert Weight.of(0, 0).is_absolute


def test_orders(alg):
    assert alg.rel("I").order == 4
    assert alg.rel("H").order == 4
    assert alg.rel("K").order == 5


def test_restricted_i_and_h_on_exp(alg):
    ode = ODE.from_text("exp(p)")
    assert normalize(restrict(alg.rel("I").expr, ode) - sympy.exp(P)) == 0
    assert normalize(restrict(alg.rel("H").expr, ode) - sympy.exp(3 * P)) == 0


def test_h_vanishes_on_linear_equations(alg):
    assert normalize(restrict(alg.rel("H").expr, ODE.from_text("x*y + p"))) == 0


def test_i_and_h_are_relative_invariants(alg):
    rng = np.random.default_rng(17)
    for _ in range(3):
        xi = PointField.random(rng, degree=3)
        for name in ("I", "H"):
            assert alg.relative_invariance_residual(alg.rel(name), xi).is_zero()


@pytest.mark.slow
@pytest.mark.parametrize("name", ["K", "H10", "H01", "Om6"])
def test_derived_invariants_are_relative_invariants(alg, name):
    rng = np.random.default_rng(23)
    xi = PointField.random(rng, degree=2)
    assert alg.relative_invariance_residual(alg.rel(name), xi).is_zero()


def test_bad_invariant_weight_fails_invariance(alg):
    xi = PointField(X**2, X * Y)
    H = alg.rel("H")
    wrong = RelInvariant("H", H.value, Weight.of(1, 1))
    assert not alg.relative_invariance_residual(wrong, xi).is_zero()


def test_absolute_invariants_have_zero_weight(alg):
    for name in ("Hb10", "Hb01", "Kb"):
        assert alg.abs_invariant(name).weight.is_absolute
    assert alg.abs_invariant("J1").weight == Weight.of(1, 0)
    assert alg.abs_invariant("J2").weight == Weight.of(0, 1)


@pytest.mark.slow
@pytest.mark.parametrize("name", ["Om4_20", "Om4_11", "Om4_02", "Om5_10", "Om5_01"])
def test_omega_family_is_relatively_invariant(alg, name):
    xi = PointField.random(np.random.default_rng(31), degree=2)
    assert alg.relative_invariance_residual(alg.rel(name), xi).is_zero()


@pytest.mark.slow
@pytest.mark.parametrize("name", ["Hb10", "Hb01", "Kb"])
def test_absolute_invariants_are_killed_by_prolonged_fields(alg, name):
    rng = np.random.default_rng(37)
    F = alg.abs_invariant(name)
    for _ in range(2):
        assert alg.relative_invariance_residual(F, PointField.random(rng, degree=2)).is_zero()


def test_nabla_x_of_j1_gives_tilde_j1(alg):
    J1 = alg.abs_invariant("J1")
    scaled = alg.nabla("x", J1, extended=True).value * Fraction(8, 3)
    assert (scaled - alg.abs_invariant("Jt1").value).is_zero()
    with pytest.raises(WeightError):
        alg.nabla("x", J1)


def test_nabla_rejects_relative_inputs(alg):
    with pytest.raises(WeightError):
        alg.nabla("p", alg.rel("H"))


def test_unknown_names(alg):
    with pytest.raises(UnknownInvariantError, match="Known"):
        alg.rel("Q")
    with pytest.raises(UnknownInvariantError):
        alg.abs_invariant("Qb")


def test_name_tables_are_consistent(alg):
    assert len(set(RELATIVE_NAMES)) == len(RELATIVE_NAMES)
    assert "Kb" in ABSOLUTE_NAMES


@pytest.mark.slow
def test_syzygies(alg):
    report = alg.check_syzygies()
    failed = [r.name for r in report.results if not r.passed]
    assert report.passed, failed


@pytest.mark.slow
def test_zero_order_commutator(alg):
    results = alg.check_omega_relations()
    assert all(r.passed for r in results), [r.name for r in results if not r.passed]


def test_module_level_operations():
    I = rel_invariant("I")
    assert I.weight == Weight.of(-2, 3)
    for direction in ("x", "y", "p"):
        assert normalize(delta(direction, I).expr) == 0
    K = delta("p", rel_invariant("H"))
    assert K.weight == Weight.of(1, 2)
    assert normalize(K.expr - rel_invariant("K").expr) == 0
    assert abs_invariant("Kb").weight.is_absolute
