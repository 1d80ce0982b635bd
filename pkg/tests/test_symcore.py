import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from tresse.core.symbols import P, X, Y
from tresse.core.symcore import (
    ZeroVerdict,
    eval_num,
    is_zero,
    normalize,
    normalize_with_domain,
    parse_expr,
    sample_points,
    tree_size,
)
from tresse.exceptions import SamplingError
from tresse.models.config import SamplingConfig

CORPUS = [
    "x^2*y + exp(p)*x",
    "(x + y)/(x - p)",
    "ln(x)*y^3 + sqrt(p)",
    "exp(x*y)/(1 + p^2)",
]


def test_normalize_cancels_and_records_restrictions():
    result = normalize_with_domain((X**2 - 1) / (X - 1))
    assert result.expr == X + 1
    assert X - 1 in result.restrictions


@pytest.mark.parametrize("text", CORPUS)
def test_normalize_is_idempotent(text):
    e = normalize(parse_expr(text))
    assert normalize(e) == e


def test_normalize_treats_exp_as_atom():
    e = sympy.exp(P) * (X + 1) - sympy.exp(P) * X
    assert normalize(e) == sympy.exp(P)


@pytest.mark.parametrize("text", CORPUS)
def test_diff_commutes(text):
    e = parse_expr(text)
    for a, b in [(X, Y), (X, P), (Y, P)]:
        assert normalize(sympy.diff(e, a, b) - sympy.diff(e, b, a)) == 0


def test_zero_verdicts():
    assert is_zero(sympy.Integer(0)) is ZeroVerdict.PROVED_ZERO
    assert is_zero(sympy.Integer(3)) is ZeroVerdict.PROVED_NONZERO
    assert is_zero((X**2 - Y**2) - (X - Y) * (X + Y)) is ZeroVerdict.PROVED_ZERO
    assert is_zero(X - Y) is ZeroVerdict.NUMERICALLY_NONZERO


def test_numeric_zero_beyond_rational_normal_form():
    # log(x*y) is a different atom from log(x) + log(y), but they agree on the box
    verdict = is_zero(sympy.log(X * Y) - sympy.log(X) - sympy.log(Y))
    assert verdict is ZeroVerdict.NUMERICALLY_ZERO
    assert verdict.is_zero


def test_all_singular_samples():
    config = SamplingConfig(box=(1e-300, 2e-300), symbolic_node_limit=0)
    with pytest.raises(SamplingError):
        is_zero(sympy.exp(1 / X**2) - sympy.exp(1 / Y**2), config)


def test_eval_num_principal_branch():
    assert eval_num(sympy.sqrt(X), {"x": -4}) == pytest.approx(2j)
    assert eval_num(X * Y + P, {X: 2, "y": 3, "p": 1}) == pytest.approx(7)


def test_eval_num_missing_variable():
    with pytest.raises(KeyError, match="y"):
        eval_num(X + Y, {"x": 1})


def test_sample_points_are_reproducible():
    config = SamplingConfig(seed=5)
    first = sample_points([X, Y], 4, config)
    second = sample_points([X, Y], 4, config)
    assert first == second
    lo, hi = config.box
    assert all(lo <= v <= hi for point in first for v in point.values())


def test_tree_size():
    assert tree_size(X) == 1
    assert tree_size(X + Y) == 3


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=3, max_size=3), st.integers(1, 4))
def test_expanded_square_is_zero(coeffs, n):
    a, b, c = coeffs
    e = (a * X + b * Y + c * P) ** n
    assert is_zero(sympy.expand(e) - e) is ZeroVerdict.PROVED_ZERO


def test_small_nonzero_term_is_detected():
    big = sympy.Integer(10) ** 12
    e = (big * X + 1) - big * X - 1 + sympy.Float(1e-6) * X
    assert not is_zero(e, SamplingConfig(zero_tol=1e-20)).is_zero
    assert np.isfinite(complex(eval_num(e, {"x": 1})).real)
