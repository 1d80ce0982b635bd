import math

import numpy as np
import pytest

from tresse.core.classify import (
    ProfileReport,
    Stratum,
    Verdict,
    default_box,
    describe,
    equivalent,
    equivalent_under_map,
    expected_codim,
    h_null_profile,
    image_box,
    numeric_stratum,
    orbit_codim,
    sample_box,
    signature,
    stratum,
    symmetry_dimension,
)
from tresse.core.invariants import algebra
from tresse.core.jetalgebra import PolyEvaluator
from tresse.core.jetspace import ODE, PointMap, transform_ode
from tresse.core.selftest import EQUIVALENCE_CORPUS
from tresse.core.taylor import JetEvaluator
from tresse.exceptions import MapError, StratumError


@pytest.mark.parametrize(
    "text, expected",
    [
        ("exp(p)", Stratum.GENERIC),
        ("p^4 + x", Stratum.GENERIC),
        ("y^2", Stratum.CUBIC),
        ("0", Stratum.CUBIC),
        ("x*p^3 + y", Stratum.CUBIC),
    ],
)
def test_stratum(config, text, expected):
    assert stratum(ODE.from_text(text), config) is expected


@pytest.mark.parametrize(
    "text, expected",
    [
        ("exp(p)", Stratum.GENERIC),
        ("p^4 + x", Stratum.GENERIC),
        ("y^2", Stratum.CUBIC),
        ("x*p^3 + y", Stratum.CUBIC),
    ],
)
def test_numeric_stratum_matches_symbolic(config, text, expected):
    assert numeric_stratum(ODE.from_text(text), config) is expected


def _shear_image(text: str, seed: int = 0):
    return transform_ode(PointMap.random(np.random.default_rng(seed), degree=2), ODE.from_text(text))


def _relative_h(ode: ODE, z) -> float:
    alg = algebra()
    jets = JetEvaluator(ode.f, alg.ring)(z)
    h = PolyEvaluator(alg.ring, alg.ctx.require_h())
    return float(abs(h(jets)) / (1.0 + h.magnitude(jets)))


@pytest.mark.parametrize("text", ["exp(p)", "p^4 + x", "y^2", "y"])
def test_stratum_survives_nonlinear_maps(config, text):
    moved = _shear_image(text)
    assert moved.ode is not None
    assert stratum(moved.ode, config) is stratum(ODE.from_text(text), config)


def test_h_zero_set_survives_nonlinear_maps(config):
    points = sample_box(default_box(config), 3, 5)
    flat, curved = _shear_image("y").ode, _shear_image("y^2").ode
    assert all(_relative_h(flat, z) <= 1e-9 for z in points)
    assert all(_relative_h(curved, z) > 1e-7 for z in points)


def test_sample_box_is_reproducible():
    box = ((0.0, 1.0), (2.0, 3.0), (-1.0, 1.0))
    a = sample_box(box, 10, 5)
    assert np.array_equal(a, sample_box(box, 10, 5))
    assert a.shape == (10, 3)
    assert np.all((a[:, 1] >= 2.0) & (a[:, 1] <= 3.0))


@pytest.mark.parametrize("k, codim", [(4, 0), (5, 3), (6, 14), (3, 0), (7, 36)])
def test_expected_codim(k, codim):
    assert expected_codim(k) == codim


@pytest.mark.parametrize("k", [4, 5])
def test_orbit_codim(config, k):
    measured = orbit_codim(k, 3, config)
    assert measured.codim == expected_codim(k) == measured.expected
    assert measured.matches
    assert len(measured.ranks) == 3


@pytest.mark.slow
def test_orbit_codim_order_six(config):
    assert orbit_codim(6, 3, config).codim == 14


@pytest.mark.parametrize("k", [3, 7])
def test_orbit_codim_range(config, k):
    with pytest.raises(ValueError, match="4 <= k <= 6"):
        orbit_codim(k, 1, config)


def test_trivial_equation_has_eight_symmetries(config):
    report = symmetry_dimension(ODE.from_text("0"), config)
    assert report.dimension == 8
    assert report.stratum is Stratum.CUBIC


@pytest.mark.slow
@pytest.mark.parametrize(
    "text, dimension",
    [
        ("exp(p)", 3),
        ("p^(5/2)", 3),
        ("(p^4 + p^6)/x", 2),
        ("(x*p - y)^3", 3),
        ("-(x*p - y)^3", 3),
    ],
)
def test_symmetry_dimension_normal_forms(config, text, dimension):
    assert symmetry_dimension(ODE.from_text(text), config).dimension == dimension


@pytest.mark.slow
def test_symmetry_dimension_generic(config):
    assert symmetry_dimension(ODE.from_text("p^4 + x*p^2*y + y^3*p"), config).dimension <= 1


def test_cubic_against_quartic_is_not_equivalent(config):
    report = equivalent(ODE.from_text("x*p^3"), ODE.from_text("p^4"), config)
    assert report.verdict is Verdict.NOT_EQUIVALENT
    assert "strata differ" in report.reason


@pytest.mark.slow
def test_equivalent_under_scaling_map(config):
    moved, report = equivalent_under_map(ODE.from_text("p^4"), PointMap.from_text("x, 2*y"), config)
    assert moved.ode is not None
    assert report.verdict is Verdict.EQUIVALENT
    assert report.max_discrepancy is not None and report.max_discrepancy <= config.classify.match_rtol


@pytest.mark.slow
@pytest.mark.parametrize("text", EQUIVALENCE_CORPUS)
def test_equivalent_to_images_under_random_maps(config, text):
    rng = np.random.default_rng(2024)
    ode = ODE.from_text(text)
    for _ in range(3):
        moved, report = equivalent_under_map(ode, PointMap.random(rng, degree=2), config)
        assert moved.ode is not None
        assert report.verdict is Verdict.EQUIVALENT, report.reason
        assert report.max_discrepancy is not None and report.max_discrepancy <= 1e-5


@pytest.mark.slow
@pytest.mark.parametrize("text, dimension", [("exp(p)", 3), ("(p^4 + p^6)/x", 2)])
def test_symmetry_dimension_survives_nonlinear_maps(config, text, dimension):
    moved = _shear_image(text, seed=4)
    box = image_box(moved.point_map.X, moved.point_map.Y, moved.p_new, default_box(config), config.sampling.seed)
    assert symmetry_dimension(moved.ode, config, box=box).dimension == dimension


@pytest.mark.slow
def test_equivalence_is_reflexive(config):
    ode = ODE.from_text("exp(p)")
    assert equivalent(ode, ode, config).verdict is Verdict.EQUIVALENT


def test_equivalent_under_map_needs_an_inverse(config):
    with pytest.raises(MapError):
        equivalent_under_map(ODE.from_text("p^4"), PointMap.from_text("x + y^3, y"), config)


def test_h_null_profile_derived():
    report = h_null_profile("derived")
    assert len(report.residuals) == 10
    assert report.max_residual <= 1e-6


def test_profile_report_without_points():
    assert math.isinf(ProfileReport("derived").max_residual)


def test_describe_trivial(config):
    d = describe(ODE.from_text("0"), config)
    assert d.stratum is Stratum.CUBIC
    assert "trivial stratum I=H=0" in d.note
    names = [s.name for s in d.invariants]
    assert names == ["I", "H", "L1", "L2", "F3"]
    assert all(s.expr == 0 for s in d.invariants)
    assert d.rank is not None and d.rank.dimension == 8


def test_describe_cubic(config):
    d = describe(ODE.from_text("y^2"), config)
    assert d.note == "cubic stratum I=0"
    L1 = next(s for s in d.invariants if s.name == "L1")
    assert L1.expr == -6
    assert L1.values == [-6.0] * 3


@pytest.mark.slow
def test_describe_generic(config):
    d = describe(ODE.from_text("exp(p)"), config)
    assert d.stratum is Stratum.GENERIC
    names = [s.name for s in d.invariants]
    assert names[:3] == ["I", "H", "K"]
    hb10 = next(s for s in d.invariants if s.name == "Hb10")
    assert np.allclose(hb10.values, hb10.values[0], rtol=1e-6)
    assert d.rank is not None and d.rank.dimension == 3


def test_signature_rejects_cubic(config):
    with pytest.raises(StratumError, match="cubic"):
        signature(ODE.from_text("y^2"), config)
