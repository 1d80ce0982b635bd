import numpy as np
import pytest
import sympy

from tresse.core.classify import Verdict, symmetry_dimension
from tresse.core.jetspace import ODE, PointField
from tresse.core.projective import (
    F3_WEIGHT,
    CubicODE,
    LinearizationVerdict,
    cubic_equivalence,
    determining_matrix,
    extract_cubic,
    f3_variant,
    fit_weight,
    h_proportionality,
    invariance_residual,
    linearizable,
    liouville,
    liouville_l,
    nabla12,
    symmetry_jet_dimension,
    tensor_law_residuals,
)
from tresse.core.selftest import linearization_corpus
from tresse.core.symbols import P, X, Y
from tresse.core.symcore import normalize
from tresse.exceptions import NotCubicError, StratumError


def test_extract_cubic():
    C = extract_cubic(ODE.from_text("x + y*p - p^3/x"))
    expected = (X, Y, 0, -1 / X)
    assert all(normalize(a - b) == 0 for a, b in zip(C.alpha, expected, strict=True))
    assert normalize(C.f - (X + Y * P - P**3 / X)) == 0


def test_extract_cubic_rejects_quartic():
    with pytest.raises(NotCubicError):
        extract_cubic(ODE.from_text("p^4"))


def test_liouville_on_y_squared():
    L1, L2 = liouville_l(extract_cubic(ODE.from_text("y^2")))
    assert L1 == -6
    assert L2 == 0


@pytest.mark.parametrize("text", ["0", "y", "x*y + p"])
def test_linear_equations_are_flat(text):
    data = liouville(extract_cubic(ODE.from_text(text)))
    assert (data.L1, data.L2, data.F3, data.Psi1, data.Psi2) == (0, 0, 0, 0, 0)


def test_linearization_corpus(config):
    for text, expected in linearization_corpus(config):
        report = linearizable(ODE.from_text(text), config, cross_check=True)
        assert (report.verdict is LinearizationVerdict.LINEARIZABLE) == expected, text
        assert report.consistent, text


def test_not_cubic_verdict(config):
    assert linearizable(ODE.from_text("exp(p)"), config).verdict is LinearizationVerdict.NOT_CUBIC


def test_consistent_f3_is_selected():
    assert f3_variant() == "consistent"


def test_wedge_of_frame_is_three_f3():
    data = liouville(CubicODE.random(np.random.default_rng(4)), "consistent")
    assert normalize(data.L1 * data.Psi2 - data.L2 * data.Psi1 - 3 * data.F3) == 0


def test_f3_weight():
    rng = np.random.default_rng(11)
    C = CubicODE.random(rng)
    xi = PointField(X**2 + Y, X * Y)
    consistent = lambda c: liouville(c, "consistent").F3  # noqa: E731
    assert normalize(invariance_residual(consistent, F3_WEIGHT, C, xi)) == 0
    ratios = fit_weight(consistent, C, xi)
    assert ratios
    assert np.allclose(ratios, F3_WEIGHT, rtol=1e-6)


def test_tensor_law():
    rng = np.random.default_rng(5)
    C = CubicODE.random(rng)
    for _ in range(2):
        xi = PointField.random(rng, degree=2)
        assert all(normalize(r) == 0 for r in tensor_law_residuals(C, xi))


def test_h_proportional_to_l(config):
    ratio = h_proportionality(ODE.from_text("y^2"), config, count=6)
    assert len(ratio.ratios) == 6
    assert ratio.spread <= 1e-8


def test_h_proportionality_needs_nonzero_l(config):
    with pytest.raises(StratumError):
        h_proportionality(ODE.from_text("y"), config)


def test_nabla_requires_f3():
    with pytest.raises(StratumError):
        nabla12(1, Y, extract_cubic(ODE.from_text("y^2")))


def test_determining_matrix_of_trivial_equation():
    matrix, unknowns = determining_matrix(CubicODE((sympy.Integer(0),) * 4), (0.5, 0.5), order=4)
    assert len(unknowns) == 2 * 15
    assert matrix.shape == (6 * 5, 30)


@pytest.mark.parametrize(
    "alpha, expected",
    [
        ((0, 0, 0, 0), 8),
        ((Y**2, 0, 0, 0), 2),
        ((Y ** (-3), 0, 0, 0), 3),
    ],
)
def test_symmetry_jet_dimension(alpha, expected):
    C = CubicODE(tuple(sympy.sympify(a) for a in alpha))
    assert symmetry_jet_dimension(C, (0.7, 1.1)) == expected


@pytest.mark.slow
@pytest.mark.parametrize(
    "text, dimension",
    [
        ("y^2", 2),
        ("y^(-3)", 3),
        ("(x*p - y)^3", 3),
        ("-(x*p - y)^3", 3),
    ],
)
def test_cubic_symmetry_dimension(config, text, dimension):
    assert symmetry_dimension(ODE.from_text(text), config).dimension == dimension


def test_cubic_equivalence_of_linear_equations(config):
    report = cubic_equivalence(ODE.from_text("y"), ODE.from_text("x*p + 3"), config)
    assert report.verdict is Verdict.EQUIVALENT


def test_cubic_equivalence_flat_against_curved(config):
    report = cubic_equivalence(ODE.from_text("0"), ODE.from_text("y^2"), config)
    assert report.verdict is Verdict.NOT_EQUIVALENT
