"""Jet-space calculus on sympy expressions.

Non-holonomic jet coordinates u^k_{lm} = D̂x^l Dy^m Dp^k(u) (Dp innermost,
D̂x outermost), total derivatives, prolongation of point vector fields,
restriction of jet expressions to an equation y'' = f(x, y, p), and the
action of point transformations on equations.
"""

import logging
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from enum import StrEnum
from functools import cached_property
from math import comb
from typing import Any

import numpy as np
import sympy
from scipy import optimize

from tresse.core.symbols import BASE_SYMBOLS, P, U, X, Y, jet_index, jet_name, jet_symbol
from tresse.core.symcore import Expr, ZeroVerdict, is_zero, parse_expr
from tresse.exceptions import JetOrderError, MapError, ParseError
from tresse.models.config import SamplingConfig

logger = logging.getLogger(__name__)

DEFAULT_MAX_ORDER = 8


@dataclass(frozen=True, order=True)
class JetVar:
    """The jet coordinate u^k_{lm}."""

    l: int
    m: int
    k: int

    def __post_init__(self) -> None:
        if min(self.l, self.m, self.k) < 0:
            raise ValueError("jet indices must be non-negative")

    @property
    def order(self) -> int:
        return self.l + self.m + self.k

    @property
    def symbol(self) -> sympy.Symbol:
        return jet_symbol(self.l, self.m, self.k)

    def __str__(self) -> str:
        return jet_name(self.l, self.m, self.k)

    @classmethod
    def of(cls, symbol: sympy.Basic) -> "JetVar | None":
        triple = jet_index(symbol)
        return cls(*triple) if triple is not None else None


def jet_vars(e: Expr) -> list[JetVar]:
    """Jet coordinates occurring in e, sorted."""
    found = (JetVar.of(s) for s in e.free_symbols)
    return sorted(v for v in found if v is not None)


def jet_order(e: Expr) -> int:
    return max((v.order for v in jet_vars(e)), default=0)


@dataclass(frozen=True)
class ODE:
    """The equation y'' = f(x, y, p)."""

    f: Expr

    def __post_init__(self) -> None:
        stray = [s for s in self.f.free_symbols if s not in BASE_SYMBOLS]
        if stray:
            names = ", ".join(sorted(str(s) for s in stray))
            raise ParseError(f"Right-hand side may only use x, y, p (found {names})")

    @classmethod
    def from_text(cls, text: str) -> "ODE":
        return cls(parse_expr(text))

    def __str__(self) -> str:
        return f"y'' = {sympy.sstr(self.f)}"


def base_dx(e: Expr) -> Expr:
    """The truncated total derivative ∂x + p∂y on functions of (x, y, p)."""
    return sympy.diff(e, X) + P * sympy.diff(e, Y)


@dataclass(frozen=True)
class PointField:
    """The vector field a∂x + b∂y with a, b functions of (x, y)."""

    a: Expr
    b: Expr

    @cached_property
    def phi(self) -> Expr:
        return sympy.expand(self.b - P * self.a)

    @cached_property
    def A(self) -> Expr:
        return sympy.expand(base_dx(self.phi))

    @cached_property
    def B0(self) -> Expr:
        return sympy.expand(base_dx(self.A))

    @cached_property
    def B1(self) -> Expr:
        return sympy.expand(sympy.diff(self.phi, Y) - 2 * base_dx(self.a))

    def bracket(self, other: "PointField") -> "PointField":
        """The Lie bracket [self, other] of base fields."""

        def apply(v: PointField, g: Expr) -> Expr:
            return v.a * sympy.diff(g, X) + v.b * sympy.diff(g, Y)

        return PointField(
            sympy.expand(apply(self, other.a) - apply(other, self.a)),
            sympy.expand(apply(self, other.b) - apply(other, self.b)),
        )

    @classmethod
    def random(cls, rng: np.random.Generator, degree: int = 3, spread: int = 3) -> "PointField":
        """Polynomial field with small integer coefficients of total degree <= degree."""
        monomials = [X**i * Y**j for i in range(degree + 1) for j in range(degree + 1 - i)]

        def draw() -> Expr:
            coeffs = rng.integers(-spread, spread + 1, size=len(monomials))
            return sympy.Add(*(int(c) * mono for c, mono in zip(coeffs, monomials, strict=True)))

        return cls(draw(), draw())


class Direction(StrEnum):
    """Total derivative directions."""

    DX = "Dx"
    DY = "Dy"
    DP = "Dp"
    DX_HAT = "Dx_hat"


def _raise_jet(v: JetVar, direction: Direction) -> Expr:
    l, m, k = v.l, v.m, v.k
    if direction is Direction.DX_HAT:
        return jet_symbol(l + 1, m, k)
    if direction is Direction.DY:
        return jet_symbol(l, m + 1, k)
    if direction is Direction.DP:
        # [Dp, D̂x] = Dy
        return jet_symbol(l, m, k + 1) + l * jet_symbol(l - 1, m + 1, k) if l else jet_symbol(l, m, k + 1)
    return jet_symbol(l + 1, m, k) - P * jet_symbol(l, m + 1, k)


def _base_partial(direction: Direction, s: sympy.Symbol) -> Expr:
    table = {
        Direction.DX: {X: 1},
        Direction.DX_HAT: {X: 1, Y: P},
        Direction.DY: {Y: 1},
        Direction.DP: {P: 1},
    }
    return sympy.sympify(table[direction].get(s, 0))


def total_derivative(direction: Direction | str, e: Expr) -> Expr:
    """Apply Dx, Dy, Dp or D̂x to a jet expression.

    Jet coordinates are raised in canonical u^k_{lm} form; base variables
    differentiate classically, with D̂x acting as ∂x + p∂y on them.
    """
    direction = Direction(direction)
    result: Expr = sympy.Integer(0)
    for s in e.free_symbols:
        v = JetVar.of(s)
        image = _raise_jet(v, direction) if v is not None else _base_partial(direction, s)
        if image != 0:
            result += sympy.diff(e, s) * image
    return result


def prolong_field(xi: PointField, order: int, max_order: int = DEFAULT_MAX_ORDER) -> dict[sympy.Symbol, Expr]:
    """Coefficients of the prolonged field ξ̂ on J^order.

    ξ̂ = a·Dx + b·Dy + A·Dp + E_Q with generating function
    Q = B0 + B1·u − a·Dx(u) − b·Dy(u) − A·Dp(u); the evolutionary part sends
    u^k_{lm} to D̂x^l Dy^m Dp^k(Q).
    """
    if order + 1 > max_order:
        raise JetOrderError(f"Prolongation to order {order} needs jets of order {order + 1} > {max_order}")
    Q = (
        xi.B0
        + xi.B1 * U
        - xi.a * total_derivative(Direction.DX, U)
        - xi.b * jet_symbol(0, 1, 0)
        - xi.A * jet_symbol(0, 0, 1)
    )
    chain: dict[tuple[int, int, int], Expr] = {(0, 0, 0): sympy.expand(Q)}

    def evolved(l: int, m: int, k: int) -> Expr:
        key = (l, m, k)
        if key not in chain:
            if l:
                chain[key] = sympy.expand(total_derivative(Direction.DX_HAT, evolved(l - 1, m, k)))
            elif m:
                chain[key] = sympy.expand(total_derivative(Direction.DY, evolved(0, m - 1, k)))
            else:
                chain[key] = sympy.expand(total_derivative(Direction.DP, evolved(0, 0, k - 1)))
        return chain[key]

    coefficients: dict[sympy.Symbol, Expr] = {X: xi.a, Y: xi.b, P: xi.A}
    for n in range(order + 1):
        for l in range(n + 1):
            for m in range(n + 1 - l):
                v = JetVar(l, m, n - l - m)
                transport = (
                    xi.a * total_derivative(Direction.DX, v.symbol)
                    + xi.b * total_derivative(Direction.DY, v.symbol)
                    + xi.A * total_derivative(Direction.DP, v.symbol)
                )
                coefficients[v.symbol] = sympy.expand(transport + evolved(v.l, v.m, v.k))
    return coefficients


def lie_derivative(xi: PointField, e: Expr, order: int | None = None) -> Expr:
    """ξ̂(e): the prolonged field applied to a jet expression."""
    k = jet_order(e) if order is None else order
    coefficients = prolong_field(xi, k, max_order=max(DEFAULT_MAX_ORDER, k + 1))
    result: Expr = sympy.Integer(0)
    for s in e.free_symbols:
        coefficient = coefficients.get(s)
        if coefficient is None:
            raise JetOrderError(f"Expression has order above {k}")
        result += sympy.diff(e, s) * coefficient
    return sympy.expand(result)


def cocycles(xi: PointField) -> tuple[Expr, Expr]:
    """(C_w, C_q) = (a_x + b_y, ∂y φ)."""
    return (
        sympy.expand(sympy.diff(xi.a, X) + sympy.diff(xi.b, Y)),
        sympy.expand(sympy.diff(xi.phi, Y)),
    )


def weight_multiplier(xi: PointField, r: Any, s: Any) -> Expr:
    """r·Dx(a) + s·∂yφ, the multiplier in ξ̂(ψ) = −(r·Dx(a) + s·∂yφ)ψ."""
    return sympy.expand(r * base_dx(xi.a) + s * sympy.diff(xi.phi, Y))


class _Restrictor:
    """Memoized section pull-back u^k_{lm} ↦ (∂x + p∂y)^l ∂y^m ∂p^k f."""

    def __init__(self, f: Expr) -> None:
        self.f = f
        self._partials: dict[tuple[int, int, int], Expr] = {(0, 0, 0): f}

    def partial(self, i: int, j: int, k: int) -> Expr:
        key = (i, j, k)
        if key not in self._partials:
            if k:
                self._partials[key] = sympy.diff(self.partial(i, j, k - 1), P)
            elif j:
                self._partials[key] = sympy.diff(self.partial(i, j - 1, 0), Y)
            else:
                self._partials[key] = sympy.diff(self.partial(i - 1, 0, 0), X)
        return self._partials[key]

    def jet(self, v: JetVar) -> Expr:
        # ∂x and p∂y commute, so the binomial expansion of (∂x + p∂y)^l applies
        return sympy.Add(*(comb(v.l, i) * P**i * self.partial(v.l - i, i + v.m, v.k) for i in range(v.l + 1)))


def restrict(e: Expr, ode: ODE) -> Expr:
    """Pull a jet expression back to the section u = f(x, y, p)."""
    restrictor = _Restrictor(ode.f)
    substitution = {v.symbol: restrictor.jet(v) for v in jet_vars(e)}
    return e.xreplace(substitution)


def _is_affine(e: Expr) -> bool:
    try:
        return sympy.Poly(e, X, Y).total_degree() <= 1
    except sympy.PolynomialError:
        return False


@dataclass(frozen=True)
class PointMap:
    """A local diffeomorphism (x, y) ↦ (X, Y), optionally with a known inverse."""

    X: Expr
    Y: Expr
    inverse_pair: tuple[Expr, Expr] | None = field(default=None, compare=False)

    @classmethod
    def from_text(cls, text: str) -> "PointMap":
        from tresse.core.parser import parse_pair

        return cls(*parse_pair(text))

    @classmethod
    def identity(cls) -> "PointMap":
        return cls(X, Y, (X, Y))

    @property
    def jacobian(self) -> Expr:
        return sympy.expand(
            sympy.diff(self.X, X) * sympy.diff(self.Y, Y) - sympy.diff(self.X, Y) * sympy.diff(self.Y, X)
        )

    def check_invertible(self, config: SamplingConfig | None = None) -> None:
        if is_zero(self.jacobian, config) is ZeroVerdict.PROVED_ZERO:
            raise MapError(f"Point map ({self.X}, {self.Y}) has vanishing Jacobian")

    def inverse(self) -> "PointMap | None":
        """Symbolic inverse for affine maps or maps carrying one."""
        if self.inverse_pair is not None:
            return PointMap(*self.inverse_pair, inverse_pair=(self.X, self.Y))
        if _is_affine(self.X) and _is_affine(self.Y):
            xs, ys = sympy.Dummy("xs"), sympy.Dummy("ys")
            solution = sympy.solve([self.X - xs, self.Y - ys], [X, Y], dict=True)
            if len(solution) == 1:
                inv_x = solution[0][X].xreplace({xs: X, ys: Y})
                inv_y = solution[0][Y].xreplace({xs: X, ys: Y})
                return PointMap(inv_x, inv_y, inverse_pair=(self.X, self.Y))
        return None

    def compose(self, inner: "PointMap") -> "PointMap":
        """self ∘ inner."""
        outer_inv = self.inverse()
        inner_inv = inner.inverse()
        inverse_pair = None
        if outer_inv is not None and inner_inv is not None:
            inverse_pair = (
                inner_inv.X.xreplace({X: outer_inv.X, Y: outer_inv.Y}),
                inner_inv.Y.xreplace({X: outer_inv.X, Y: outer_inv.Y}),
            )
        return PointMap(
            sympy.expand(self.X.xreplace({X: inner.X, Y: inner.Y})),
            sympy.expand(self.Y.xreplace({X: inner.X, Y: inner.Y})),
            inverse_pair,
        )

    def __call__(self, x: complex, y: complex) -> tuple[complex, complex]:
        values = {X: x, Y: y}
        return complex(self.X.evalf(subs=values)), complex(self.Y.evalf(subs=values))

    @classmethod
    def random(cls, rng: np.random.Generator, degree: int = 2) -> "PointMap":
        """A random invertible polynomial map with known inverse.

        Composition of an affine map with integer coefficients and, for
        degree >= 2, shears (x + c·y^n, y) and (x, y + c·x^n).
        """
        while True:
            m = rng.integers(-2, 3, size=(2, 2))
            if m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0] != 0:
                break
        shift = rng.integers(-1, 2, size=2)
        result = cls(
            int(m[0, 0]) * X + int(m[0, 1]) * Y + int(shift[0]),
            int(m[1, 0]) * X + int(m[1, 1]) * Y + int(shift[1]),
        )
        for n in range(2, degree + 1):
            c1, c2 = (sympy.Rational(int(c), 4) for c in rng.integers(1, 4, size=2))
            shear_x = cls(X + c1 * Y**n, Y, (X - c1 * Y**n, Y))
            shear_y = cls(X, Y + c2 * X**n, (X, Y - c2 * X**n))
            result = shear_y.compose(shear_x.compose(result))
        return result


@dataclass
class TransformResult:
    """The transformed equation; ``ode`` is None when φ has no symbolic inverse."""

    point_map: PointMap
    source: ODE
    ode: ODE | None
    p_new: Expr
    f_new_source: Expr

    @property
    def symbolic(self) -> bool:
        return self.ode is not None

    def prolong(self, point: tuple[complex, complex, complex]) -> tuple[complex, complex, complex, complex]:
        """Φ₂ at a source point: (X, Y, P̃, f̃)."""
        values = dict(zip((X, Y, P), point, strict=True))
        return (
            complex(self.point_map.X.evalf(subs=values)),
            complex(self.point_map.Y.evalf(subs=values)),
            complex(self.p_new.evalf(subs=values)),
            complex(self.f_new_source.evalf(subs=values)),
        )

    def evaluate(self, x: float, y: float, p: float, guess: tuple[float, float] = (1.0, 1.0)) -> complex:
        """Value of f̃ at a target point, inverting φ numerically when needed."""
        if self.ode is not None:
            return complex(self.ode.f.evalf(subs={X: x, Y: y, P: p}))
        fn: Callable[..., Any] = sympy.lambdify((X, Y), [self.point_map.X - x, self.point_map.Y - y], "numpy")
        src, info, ok, msg = optimize.fsolve(lambda v: fn(*v), guess, full_output=True)
        if ok != 1:
            raise MapError(f"Numeric inversion failed: {msg}")
        xs, ys = (float(v) for v in src)
        den_p = self.point_map.Y.diff(Y) - p * self.point_map.X.diff(Y)
        num_p = p * self.point_map.X.diff(X) - self.point_map.Y.diff(X)
        ps = complex((num_p / den_p).evalf(subs={X: xs, Y: ys}))
        return complex(self.f_new_source.evalf(subs={X: xs, Y: ys, P: ps}))


def transform_ode(point_map: PointMap, ode: ODE, config: SamplingConfig | None = None) -> TransformResult:
    """Push y'' = f forward along the point map.

    p̃ = (Y_x + Y_y p)/(X_x + X_y p) and f̃∘Φ₂ = D(p̃)/(X_x + X_y p) with
    D = ∂x + p∂y + f∂p; the result is expressed in the new variables when φ
    has a symbolic inverse.

    Raises:
        MapError: If the Jacobian vanishes identically.
    """
    point_map.check_invertible(config)
    Xm, Ym = point_map.X, point_map.Y
    denominator = sympy.diff(Xm, X) + P * sympy.diff(Xm, Y)
    p_new = (sympy.diff(Ym, X) + P * sympy.diff(Ym, Y)) / denominator
    along = base_dx(p_new) + ode.f * sympy.diff(p_new, P)
    f_new_source = sympy.together(along / denominator)
    inverse = point_map.inverse()
    if inverse is None:
        logger.info("No symbolic inverse for (%s, %s); numeric mode only", Xm, Ym)
        return TransformResult(point_map, ode, None, p_new, f_new_source)
    # source slope in terms of target coordinates
    p_source = (P * sympy.diff(Xm, X) - sympy.diff(Ym, X)) / (sympy.diff(Ym, Y) - P * sympy.diff(Xm, Y))
    xs, ys, ps = sympy.symbols("xs ys ps", cls=sympy.Dummy)
    staged = f_new_source.xreplace({X: xs, Y: ys, P: ps})
    p_back = p_source.xreplace({X: inverse.X, Y: inverse.Y})
    f_new = staged.xreplace({ps: p_back}).xreplace({xs: inverse.X, ys: inverse.Y})
    f_new = sympy.cancel(f_new) if f_new.is_rational_function(X, Y, P) else sympy.together(f_new)
    return TransformResult(point_map, ode, ODE(f_new), p_new, f_new_source)


def numeric_restrict(e: Expr, ode: ODE, point: Mapping[sympy.Symbol, complex]) -> complex:
    """Value of restrict(e, ode) at a point, by substitution."""
    return complex(restrict(e, ode).evalf(subs=dict(point)))
