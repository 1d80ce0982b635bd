"""Symbolic kernel: parsing, differentiation, normalization, numeric evaluation, zero tests.

Expressions are immutable sympy trees over exact rationals. Rational-function
parts are normalized with exp/log subtrees kept as opaque atoms; anything a
rational normal form cannot decide is settled by sampling in complex
arithmetic (principal branches).
"""

import logging
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from enum import StrEnum
from functools import lru_cache
from typing import Any

import numpy as np
import sympy

from tresse.exceptions import SamplingError
from tresse.models.config import SamplingConfig

logger = logging.getLogger(__name__)

Expr = sympy.Expr
VarAssignment = Mapping[sympy.Symbol | str, complex]

MAX_SCALE_TERMS = 200


class ZeroVerdict(StrEnum):
    """Outcome of a zero test."""

    PROVED_ZERO = "ProvedZero"
    PROVED_NONZERO = "ProvedNonzero"
    NUMERICALLY_ZERO = "NumericallyZero"
    NUMERICALLY_NONZERO = "NumericallyNonzero"

    @property
    def is_zero(self) -> bool:
        return self in (ZeroVerdict.PROVED_ZERO, ZeroVerdict.NUMERICALLY_ZERO)


@dataclass(frozen=True)
class Normalized:
    """A normal form together with the denominator factors that were canceled."""

    expr: Expr
    restrictions: tuple[Expr, ...] = field(default_factory=tuple)


def parse_expr(text: str, jets: bool = False) -> Expr:
    """Parse text in the expression grammar (see ``tresse.core.parser``)."""
    from tresse.core.parser import parse

    return parse(text, jets=jets)


def diff(e: Expr, v: sympy.Symbol) -> Expr:
    """Exact partial derivative."""
    return sympy.diff(e, v)


def tree_size(e: sympy.Basic) -> int:
    """Exact tree size by preorder traversal."""
    return sum(1 for _ in sympy.preorder_traversal(e))


def _atomize(e: Expr) -> tuple[Expr, dict[sympy.Symbol, Expr]]:
    """Replace exp/log subtrees by fresh symbols so they behave as atoms."""
    replacements: dict[Expr, sympy.Symbol] = {}
    for node in sympy.preorder_traversal(e):
        if isinstance(node, sympy.exp | sympy.log) and node not in replacements:
            replacements[node] = sympy.Dummy(f"atom{len(replacements)}")
    if not replacements:
        return e, {}
    # innermost first so nested atoms are captured inside their parents
    ordered = sorted(replacements.items(), key=lambda kv: tree_size(kv[0]))
    atomized = e.xreplace(dict(ordered))
    back = {sym: node for node, sym in ordered}
    return atomized, back


def normalize_with_domain(e: Expr) -> Normalized:
    """Canonical rational normal form, recording canceled denominator factors.

    Exp/log subtrees are atoms. The result is ``numerator/denominator`` with
    both expanded; common factors are canceled, and every factor removed from
    the denominator is recorded as a domain restriction (factor != 0).
    """
    atomized, back = _atomize(sympy.sympify(e))
    together = sympy.together(atomized)
    num, den = sympy.fraction(together)
    num = sympy.expand(num)
    den = sympy.expand(den)
    restrictions: list[Expr] = []
    if den.free_symbols:
        try:
            gcd = sympy.gcd(num, den)
            if gcd.free_symbols:
                restrictions.extend(f for f, _ in sympy.factor_list(gcd)[1])
                num = sympy.expand(sympy.quo(num, gcd))
                den = sympy.expand(sympy.quo(den, gcd))
        except sympy.PolynomialError:
            logger.debug("normalize: gcd skipped for non-polynomial parts")
    if num == 0:
        result: Expr = sympy.Integer(0)
    else:
        lc = _leading_coefficient(den)
        if lc != 1 and lc != 0:
            num = sympy.expand(num / lc)
            den = sympy.expand(den / lc)
        result = num if den == 1 else num / den
    if back:
        result = result.xreplace(back)
        restrictions = [r.xreplace(back) for r in restrictions]
    return Normalized(result, tuple(restrictions))


def _leading_coefficient(den: Expr) -> Expr:
    if not den.free_symbols:
        return den
    try:
        return sympy.Poly(den).LC()
    except sympy.PolynomialError:
        return sympy.Integer(1)


def normalize(e: Expr) -> Expr:
    """Canonical form of a rational function of atoms; idempotent."""
    return normalize_with_domain(e).expr


def free_names(e: Expr) -> list[sympy.Symbol]:
    """Free symbols sorted by name for reproducible sampling."""
    return sorted(e.free_symbols, key=lambda s: s.name)


@lru_cache(maxsize=256)
def _compiled(e: Expr, variables: tuple[sympy.Symbol, ...]) -> Any:
    return sympy.lambdify(variables, e, modules="numpy", dummify=True)


def eval_num(e: Expr, assignment: VarAssignment) -> complex:
    """Evaluate in complex arithmetic with principal branches.

    Raises:
        KeyError: If a free variable is unassigned.
        ZeroDivisionError: At a pole.
    """
    by_name = {(k if isinstance(k, str) else k.name): complex(v) for k, v in assignment.items()}
    variables = tuple(free_names(e))
    missing = [s.name for s in variables if s.name not in by_name]
    if missing:
        raise KeyError(f"Unassigned variables: {', '.join(missing)}")
    fn = _compiled(e, variables)
    with np.errstate(all="raise"):
        try:
            value = complex(fn(*(np.complex128(by_name[s.name]) for s in variables)))
        except FloatingPointError as err:
            raise ZeroDivisionError(str(err)) from err
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise ZeroDivisionError("non-finite value")
    return value


def _scale(e: Expr, variables: tuple[sympy.Symbol, ...], values: Iterable[complex]) -> float:
    """Largest magnitude among the top-level terms of e at a point."""
    vals = list(values)
    terms = e.args if isinstance(e, sympy.Add) else (e,)
    if len(terms) > MAX_SCALE_TERMS:
        terms = terms[:MAX_SCALE_TERMS]
    scale = 0.0
    for term in terms:
        try:
            fn = _compiled(term, variables)
            with np.errstate(all="ignore"):
                v = complex(fn(*vals))
        except (ZeroDivisionError, ValueError, TypeError):
            continue
        if math.isfinite(abs(v)):
            scale = max(scale, abs(v))
    return scale


def sample_points(
    variables: list[sympy.Symbol], count: int, config: SamplingConfig | None = None
) -> list[dict[sympy.Symbol, float]]:
    """Reproducible points drawn uniformly from the sampling box."""
    cfg = config or SamplingConfig()
    rng = np.random.default_rng(cfg.seed)
    lo, hi = cfg.box
    draws = rng.uniform(lo, hi, size=(count, len(variables)))
    return [dict(zip(variables, row, strict=True)) for row in draws]


def is_zero(e: Expr, config: SamplingConfig | None = None) -> ZeroVerdict:
    """Decide whether e vanishes identically.

    ProvedZero iff the rational normal form is 0; ProvedNonzero for nonzero
    constants; otherwise the Numerically* verdict from sampling, where a value
    counts as zero when ``|v| <= tol*(1 + scale)`` and scale is the largest
    term magnitude at that point.

    Raises:
        SamplingError: If every sample point is singular.
    """
    cfg = config or SamplingConfig()
    e = sympy.sympify(e)
    if e.is_number:
        value = complex(sympy.N(e))
        return ZeroVerdict.PROVED_ZERO if value == 0 else ZeroVerdict.PROVED_NONZERO
    if tree_size(e) <= cfg.symbolic_node_limit:
        normal = normalize(e)
        if normal == 0:
            return ZeroVerdict.PROVED_ZERO
        if normal.is_number:
            return ZeroVerdict.PROVED_NONZERO
        e = normal
    variables = tuple(free_names(e))
    fn = _compiled(e, variables)
    usable = 0
    # oversample so that singular points can be skipped
    for point in sample_points(list(variables), cfg.zero_samples * 4, cfg):
        values = [np.complex128(point[v]) for v in variables]
        try:
            with np.errstate(all="raise"):
                value = complex(fn(*values))
        except (FloatingPointError, ZeroDivisionError, ValueError):
            logger.debug("is_zero: singular sample skipped")
            continue
        if not (math.isfinite(value.real) and math.isfinite(value.imag)):
            continue
        scale = _scale(e, variables, values)
        if abs(value) > cfg.zero_tol * (1.0 + scale):
            return ZeroVerdict.NUMERICALLY_NONZERO
        usable += 1
        if usable >= cfg.zero_samples:
            return ZeroVerdict.NUMERICALLY_ZERO
    if usable == 0:
        raise SamplingError("All sample points are singular")
    return ZeroVerdict.NUMERICALLY_ZERO
