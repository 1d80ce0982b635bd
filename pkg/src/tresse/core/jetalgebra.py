"""Exact jet algebra.

A polynomial ring over QQ in the base coordinates x, y, p and every
non-holonomic jet u^k_{lm} up to a maximal order, derivations given by their
values on generators, weighted fractions ``sum(num * I**a * H**b)`` with
rational exponents, and first-order operators over the frame (D̂x, Dy, Dp).
Everything here is exact; numeric evaluation of polynomials goes through
exponent matrices.
"""

from collections.abc import Callable, Iterable, Iterator
from dataclasses import dataclass, field
from fractions import Fraction
from math import floor
from typing import Any

import numpy as np
import sympy
from sympy.polys.domains import QQ
from sympy.polys.orderings import lex
from sympy.polys.rings import PolyElement, PolyRing

from tresse.core.symbols import BASE_SYMBOLS, jet_symbol
from tresse.exceptions import JetOrderError

Poly = PolyElement
Number = int | Fraction

FRAME = ("Dhat_x", "D_y", "D_p")


class DerivationRing:
    """Polynomial ring with named generators supporting derivations."""

    def __init__(self, symbols: Iterable[sympy.Symbol]) -> None:
        self.symbols = tuple(symbols)
        self.ring = PolyRing(self.symbols, QQ, lex)
        self.gens: tuple[Poly, ...] = self.ring.gens
        self.index = {s: i for i, s in enumerate(self.symbols)}
        self.zero: Poly = self.ring.zero
        self.one: Poly = self.ring.one

    def gen_of(self, symbol: sympy.Symbol) -> Poly:
        return self.gens[self.index[symbol]]

    def const(self, c: Number) -> Poly:
        return self.ring.ground_new(QQ.convert(c) if isinstance(c, int) else QQ(c.numerator, c.denominator))

    def from_expr(self, expr: sympy.Expr) -> Poly:
        """Convert a polynomial sympy expression in the ring symbols."""
        return self.ring.from_expr(sympy.expand(expr))

    def to_expr(self, poly: Poly) -> sympy.Expr:
        return poly.as_expr()

    def support(self, poly: Poly) -> list[int]:
        """Indices of generators occurring in poly."""
        return [i for i, d in enumerate(poly.degrees()) if d > 0]


class Derivation:
    """A derivation of a DerivationRing, defined by its generator images.

    Images are computed lazily through ``image_fn`` and memoized, so fields
    whose images are expensive (prolongations) only pay for the generators
    actually met.
    """

    def __init__(self, ring: DerivationRing, image_fn: Callable[[int], Poly], name: str = "") -> None:
        self.ring = ring
        self.name = name
        self._image_fn = image_fn
        self._images: dict[int, Poly] = {}
        self._named: dict[str, Poly] = {}

    def image(self, i: int) -> Poly:
        if i not in self._images:
            self._images[i] = self._image_fn(i)
        return self._images[i]

    def __call__(self, f: Poly) -> Poly:
        result = self.ring.zero
        for i in self.ring.support(f):
            img = self.image(i)
            if img:
                result += f.diff(self.ring.gens[i]) * img
        return result

    def cached(self, key: str, f: Poly) -> Poly:
        """Image of a long-lived polynomial (a named factor), memoized by key."""
        if key not in self._named:
            self._named[key] = self(f)
        return self._named[key]


class JetRing(DerivationRing):
    """Ring of x, y, p and u^k_{lm} with l + m + k <= max_order."""

    def __init__(self, max_order: int = 8) -> None:
        self.max_order = max_order
        self.jets: list[tuple[int, int, int]] = [
            (l, m, k)
            for order in range(max_order + 1)
            for l in range(order, -1, -1)
            for m in range(order - l, -1, -1)
            for k in [order - l - m]
        ]
        super().__init__([*BASE_SYMBOLS, *(jet_symbol(*j) for j in self.jets)])
        self.jet_index = {j: 3 + n for n, j in enumerate(self.jets)}
        self.x, self.y, self.p = self.gens[:3]
        self.Dhat_x = Derivation(self, self._dhat_x, "Dhat_x")
        self.D_y = Derivation(self, self._d_y, "D_y")
        self.D_p = Derivation(self, self._d_p, "D_p")
        self.D_x = Derivation(self, self._d_x, "D_x")
        self.frame = (self.Dhat_x, self.D_y, self.D_p)

    def jet(self, l: int, m: int, k: int) -> Poly:
        if l + m + k > self.max_order:
            raise JetOrderError(
                f"Jet u^{k}_{{{l}{m}}} exceeds the maximum order {self.max_order}"
            )
        return self.gens[self.jet_index[(l, m, k)]]

    def jet_of(self, i: int) -> tuple[int, int, int] | None:
        return self.jets[i - 3] if i >= 3 else None

    def order(self, f: Poly) -> int:
        orders = [sum(self.jets[i - 3]) for i in self.support(f) if i >= 3]
        return max(orders, default=0)

    def _dhat_x(self, i: int) -> Poly:
        if i < 3:
            return (self.one, self.p, self.zero)[i]
        l, m, k = self.jets[i - 3]
        return self.jet(l + 1, m, k)

    def _d_y(self, i: int) -> Poly:
        if i < 3:
            return (self.zero, self.one, self.zero)[i]
        l, m, k = self.jets[i - 3]
        return self.jet(l, m + 1, k)

    def _d_p(self, i: int) -> Poly:
        if i < 3:
            return (self.zero, self.zero, self.one)[i]
        l, m, k = self.jets[i - 3]
        # [Dp, D̂x] = Dy
        image = self.jet(l, m, k + 1)
        if l:
            image += l * self.jet(l - 1, m + 1, k)
        return image

    def _d_x(self, i: int) -> Poly:
        if i < 3:
            return (self.one, self.zero, self.zero)[i]
        l, m, k = self.jets[i - 3]
        return self.jet(l + 1, m, k) - self.p * self.jet(l, m + 1, k)

    def base_dx(self, f: Poly) -> Poly:
        """Dx = ∂x + p∂y on functions of (x, y, p)."""
        return f.diff(self.x) + self.p * f.diff(self.y)


@dataclass
class FieldData:
    """Prolongation data of ξ0 = a∂x + b∂y as ring polynomials."""

    a: Poly
    b: Poly
    phi: Poly
    A: Poly
    B0: Poly
    B1: Poly


def field_data(ring: JetRing, a: Poly, b: Poly) -> FieldData:
    phi = b - ring.p * a
    A = ring.base_dx(phi)
    B0 = ring.base_dx(A)
    B1 = phi.diff(ring.y) - 2 * ring.base_dx(a)
    return FieldData(a, b, phi, A, B0, B1)


def prolongation(ring: JetRing, a: Poly, b: Poly, name: str = "xi") -> Derivation:
    """The prolonged field ξ̂ as a derivation of the jet ring.

    ξ̂ = a·Dx + b·Dy + A·Dp + E_Q with Q = B0 + B1·u − a·Dx(u) − b·Dy(u) − A·Dp(u),
    where the evolutionary part sends u^k_{lm} to D̂x^l Dy^m Dp^k(Q).
    """
    data = field_data(ring, a, b)
    u = ring.jet(0, 0, 0)
    Q = (
        data.B0
        + data.B1 * u
        - data.a * ring.D_x.image(ring.jet_index[(0, 0, 0)])
        - data.b * ring.jet(0, 1, 0)
        - data.A * ring.jet(0, 0, 1)
    )
    chain: dict[tuple[int, int, int], Poly] = {(0, 0, 0): Q}

    def evolved(l: int, m: int, k: int) -> Poly:
        key = (l, m, k)
        if key not in chain:
            if l:
                chain[key] = ring.Dhat_x(evolved(l - 1, m, k))
            elif m:
                chain[key] = ring.D_y(evolved(0, m - 1, k))
            else:
                chain[key] = ring.D_p(evolved(0, 0, k - 1))
        return chain[key]

    def image(i: int) -> Poly:
        if i < 3:
            return (data.a, data.b, data.A)[i]
        l, m, k = ring.jets[i - 3]
        return (
            data.a * ring.D_x.image(i)
            + data.b * ring.D_y.image(i)
            + data.A * ring.D_p.image(i)
            + evolved(l, m, k)
        )

    derivation = Derivation(ring, image, name)
    derivation.field = data  # type: ignore[attr-defined]
    return derivation


def _frac(value: Number | float) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


def _class_key(a: Fraction, b: Fraction) -> tuple[Fraction, Fraction]:
    return a - floor(a), b - floor(b)


@dataclass
class FactorContext:
    """The named factors I = u⁴ and H of weighted fractions."""

    ring: JetRing
    I: Poly
    H: Poly | None = None

    def require_h(self) -> Poly:
        if self.H is None:
            raise RuntimeError("H has not been registered in the factor context")
        return self.H


@dataclass
class Term:
    num: Poly
    a: Fraction
    b: Fraction


@dataclass
class WFrac:
    """Weighted fraction ``sum(num * I**a * H**b)``.

    Terms are grouped by the class of (a, b) mod 1; within a class a single
    term with minimal exponents is kept, with every power of I stripped from
    the numerator. Distinct classes are independent functions, so the value is
    zero iff every numerator is zero.
    """

    ctx: FactorContext
    terms: dict[tuple[Fraction, Fraction], Term] = field(default_factory=dict)

    @classmethod
    def of(cls, ctx: FactorContext, num: Poly, a: Number = 0, b: Number = 0) -> "WFrac":
        result = cls(ctx)
        result._add_term(num, _frac(a), _frac(b))
        return result

    @classmethod
    def const(cls, ctx: FactorContext, c: Number) -> "WFrac":
        return cls.of(ctx, ctx.ring.const(_frac(c)))

    def copy(self) -> "WFrac":
        return WFrac(self.ctx, {k: Term(t.num, t.a, t.b) for k, t in self.terms.items()})

    def __iter__(self) -> Iterator[Term]:
        return iter(self.terms.values())

    def _strip_i(self, term: Term) -> Term:
        idx = self.ctx.ring.jet_index[(0, 0, 4)]
        if not term.num:
            return term
        e = min(monom[idx] for monom in term.num.keys())
        if e <= 0:
            return term
        stripped = {
            monom[:idx] + (monom[idx] - e,) + monom[idx + 1 :]: coeff
            for monom, coeff in term.num.items()
        }
        return Term(self.ctx.ring.ring.from_dict(stripped), term.a + e, term.b)

    def _add_term(self, num: Poly, a: Fraction, b: Fraction) -> None:
        if not num:
            return
        key = _class_key(a, b)
        existing = self.terms.get(key)
        if existing is None:
            self.terms[key] = self._strip_i(Term(num, a, b))
            return
        lo_a = min(existing.a, a)
        lo_b = min(existing.b, b)
        merged = self._lift(existing.num, existing.a - lo_a, existing.b - lo_b) + self._lift(
            num, a - lo_a, b - lo_b
        )
        if merged:
            self.terms[key] = self._strip_i(Term(merged, lo_a, lo_b))
        else:
            del self.terms[key]

    def _lift(self, num: Poly, da: Fraction, db: Fraction) -> Poly:
        if da:
            num = num * self.ctx.I ** int(da)
        if db:
            num = num * self.ctx.require_h() ** int(db)
        return num

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "WFrac | Number") -> "WFrac":
        other = self._coerce(other)
        result = self.copy()
        for t in other:
            result._add_term(t.num, t.a, t.b)
        return result

    __radd__ = __add__

    def __neg__(self) -> "WFrac":
        return WFrac(self.ctx, {k: Term(-t.num, t.a, t.b) for k, t in self.terms.items()})

    def __sub__(self, other: "WFrac | Number") -> "WFrac":
        return self + (-self._coerce(other))

    def __rsub__(self, other: "WFrac | Number") -> "WFrac":
        return self._coerce(other) - self

    def __mul__(self, other: "WFrac | Number") -> "WFrac":
        if isinstance(other, int | Fraction):
            if other == 0:
                return WFrac(self.ctx)
            c = self.ctx.ring.const(_frac(other))
            return WFrac(self.ctx, {k: Term(t.num * c, t.a, t.b) for k, t in self.terms.items()})
        result = WFrac(self.ctx)
        for s in self:
            for t in other:
                result._add_term(s.num * t.num, s.a + t.a, s.b + t.b)
        return result

    __rmul__ = __mul__

    def __truediv__(self, other: "WFrac | Number") -> "WFrac":
        if isinstance(other, int | Fraction):
            return self * (1 / _frac(other))
        return self * other.inverse()

    def __pow__(self, n: int) -> "WFrac":
        if n < 0:
            return self.inverse() ** (-n)
        result = WFrac.const(self.ctx, 1)
        for _ in range(n):
            result = result * self
        return result

    def _coerce(self, other: "WFrac | Number") -> "WFrac":
        if isinstance(other, WFrac):
            return other
        return WFrac.const(self.ctx, _frac(other))

    def monomial_factor(self) -> tuple[Fraction, Fraction, Fraction] | None:
        """(c, a, b) when the value is c·I^a·H^b, else None."""
        if len(self.terms) != 1:
            return None
        (t,) = self.terms.values()
        if t.num.is_ground:
            return Fraction(str(t.num.LC)), t.a, t.b
        H = self.ctx.H
        if H is not None:
            lc = t.num.LC / H.LC
            if t.num == H * lc:
                return Fraction(str(lc)), t.a, t.b + 1
        return None

    def inverse(self) -> "WFrac":
        """Inverse of c·I^a·H^b; other values have no weighted-fraction inverse."""
        mono = self.monomial_factor()
        if mono is None or mono[0] == 0:
            raise ZeroDivisionError("only c·I^a·H^b can be inverted")
        c, a, b = mono
        return WFrac.of(self.ctx, self.ctx.ring.const(1 / c), -a, -b)

    def power(self, e: Fraction) -> "WFrac":
        """Rational power of c·I^a·H^b with c = 1."""
        mono = self.monomial_factor()
        if mono is None or mono[0] != 1:
            raise ValueError("rational powers need a unit monomial in I and H")
        _, a, b = mono
        return WFrac.of(self.ctx, self.ctx.ring.one, a * e, b * e)

    def derive(self, D: Derivation) -> "WFrac":
        """D(num·I^a·H^b) = D(num)·I^a·H^b + a·num·D(I)·I^(a-1)·H^b + b·num·D(H)·I^a·H^(b-1)."""
        result = WFrac(self.ctx)
        for t in self:
            result._add_term(D(t.num), t.a, t.b)
            if t.a:
                DI = D.cached("I", self.ctx.I)
                result._add_term(t.num * DI * self.ctx.ring.const(t.a), t.a - 1, t.b)
            if t.b:
                DH = D.cached("H", self.ctx.require_h())
                result._add_term(t.num * DH * self.ctx.ring.const(t.b), t.a, t.b - 1)
        return result

    def reduce_h(self) -> "WFrac":
        """Divide numerators by H where the division is exact."""
        H = self.ctx.H
        if H is None:
            return self
        result = WFrac(self.ctx)
        for t in self:
            num, b = t.num, t.b
            while num:
                q, r = num.div(H)
                if r:
                    break
                num, b = q, b + 1
            result._add_term(num, t.a, b)
        return result

    def order(self) -> int:
        return max((self.ctx.ring.order(t.num) for t in self), default=0)

    def size(self) -> int:
        return sum(len(t.num) for t in self)

    def as_expr(self, symbolic_factors: bool = False) -> sympy.Expr:
        """Convert to sympy; H appears as the symbol H when symbolic_factors is set."""
        ring = self.ctx.ring
        i_expr = jet_symbol(0, 0, 4)
        if symbolic_factors:
            h_expr: sympy.Expr = sympy.Symbol("H")
        else:
            h_expr = ring.to_expr(self.ctx.H) if self.ctx.H is not None else sympy.Symbol("H")
        total: sympy.Expr = sympy.Integer(0)
        for t in self:
            term = ring.to_expr(t.num) * i_expr ** sympy.Rational(t.a.numerator, t.a.denominator)
            if t.b:
                term *= h_expr ** sympy.Rational(t.b.numerator, t.b.denominator)
            total += term
        return total


@dataclass
class Operator:
    """First-order operator c0·D̂x + c1·Dy + c2·Dp + zero."""

    coeffs: tuple[WFrac, WFrac, WFrac]
    zero: WFrac

    @classmethod
    def build(
        cls,
        ctx: FactorContext,
        dhat_x: WFrac | Number = 0,
        d_y: WFrac | Number = 0,
        d_p: WFrac | Number = 0,
        zero: WFrac | Number = 0,
    ) -> "Operator":
        def lift(v: WFrac | Number) -> WFrac:
            return v if isinstance(v, WFrac) else WFrac.const(ctx, _frac(v))

        return cls((lift(dhat_x), lift(d_y), lift(d_p)), lift(zero))

    @property
    def ctx(self) -> FactorContext:
        return self.zero.ctx

    def vector(self, F: WFrac) -> WFrac:
        """The first-order part applied to F."""
        frame = self.ctx.ring.frame
        result = WFrac(self.ctx)
        for c, D in zip(self.coeffs, frame, strict=True):
            if not c.is_zero():
                result = result + c * F.derive(D)
        return result

    def __call__(self, F: WFrac) -> WFrac:
        result = self.vector(F)
        if not self.zero.is_zero():
            result = result + self.zero * F
        return result

    def apply_poly(self, f: Poly) -> WFrac:
        return self(WFrac.of(self.ctx, f))

    def __add__(self, other: "Operator") -> "Operator":
        return Operator(
            tuple(a + b for a, b in zip(self.coeffs, other.coeffs, strict=True)),  # type: ignore[arg-type]
            self.zero + other.zero,
        )

    def __neg__(self) -> "Operator":
        return Operator(tuple(-c for c in self.coeffs), -self.zero)  # type: ignore[arg-type]

    def __sub__(self, other: "Operator") -> "Operator":
        return self + (-other)

    def scaled(self, factor: WFrac | Number) -> "Operator":
        return Operator(tuple(factor * c for c in self.coeffs), factor * self.zero)  # type: ignore[arg-type]

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs) and self.zero.is_zero()

    def residual_on(self, generators: Iterable[Poly]) -> Iterator[tuple[Poly, WFrac]]:
        """Values on generators where the operator does not vanish."""
        for g in generators:
            value = self.apply_poly(g)
            if not value.is_zero():
                yield g, value


def commutator(P: Operator, Q: Operator, R: Operator, S: Operator) -> Operator:
    """The first-order operator P∘Q − R∘S, for P, S and Q, R with equal principal parts.

    With frame brackets [Dp, D̂x] = Dy and all others zero.
    """
    ctx = P.ctx
    for lhs, rhs in ((P, S), (Q, R)):
        for c1, c2 in zip(lhs.coeffs, rhs.coeffs, strict=True):
            if not (c1 - c2).is_zero():
                raise ValueError("commutator operands must share principal parts")
    coeffs = []
    for j in range(3):
        value = P.vector(Q.coeffs[j]) - R.vector(S.coeffs[j])
        value = value + (Q.zero - R.zero) * P.coeffs[j] + (P.zero - S.zero) * Q.coeffs[j]
        coeffs.append(value)
    # [Dp, D̂x] = Dy
    coeffs[1] = coeffs[1] + P.coeffs[2] * Q.coeffs[0] - P.coeffs[0] * Q.coeffs[2]
    zero = P.vector(Q.zero) - R.vector(S.zero) + P.zero * Q.zero - R.zero * S.zero
    return Operator((coeffs[0], coeffs[1], coeffs[2]), zero)


class PolyEvaluator:
    """Vectorized numeric evaluation of a ring polynomial."""

    def __init__(self, ring: DerivationRing, poly: Poly) -> None:
        monoms = list(poly.keys())
        self.columns = np.array(ring.support(poly), dtype=int)
        if monoms:
            exps = np.array(monoms, dtype=np.int64)
            self.exponents = exps[:, self.columns] if self.columns.size else exps[:, :0]
            self.coeffs = np.array([float(Fraction(str(c))) for c in poly.values()])
        else:
            self.exponents = np.zeros((0, 0), dtype=np.int64)
            self.coeffs = np.zeros(0)

    def __call__(self, values: np.ndarray) -> Any:
        """Evaluate at points; ``values`` has shape (..., ngens)."""
        if not self.coeffs.size:
            return np.zeros(values.shape[:-1], dtype=values.dtype)
        if not self.columns.size:
            return np.full(values.shape[:-1], self.coeffs.sum(), dtype=values.dtype)
        sub = values[..., self.columns]
        powers = sub[..., None, :] ** self.exponents
        return (self.coeffs * powers.prod(axis=-1)).sum(axis=-1)

    def magnitude(self, values: np.ndarray) -> Any:
        """Sum of the absolute values of the terms; the cancellation scale of ``self(values)``."""
        if not self.coeffs.size:
            return np.zeros(values.shape[:-1])
        if not self.columns.size:
            return np.full(values.shape[:-1], np.abs(self.coeffs).sum())
        sub = np.abs(values[..., self.columns])
        return (np.abs(self.coeffs) * (sub[..., None, :] ** self.exponents).prod(axis=-1)).sum(axis=-1)


class CompiledWFrac:
    """Numeric evaluator of a weighted fraction.

    With ``real=True`` fractional factor powers are taken of |I| and |H|
    (integer parts keep their sign), which is a smooth real branch on I·H != 0.
    Otherwise principal complex powers are used.
    """

    def __init__(self, value: WFrac) -> None:
        ring = value.ctx.ring
        self.i_col = value.ctx.ring.jet_index[(0, 0, 4)]
        self.h_eval = PolyEvaluator(ring, value.ctx.H) if value.ctx.H is not None else None
        self.parts = [(PolyEvaluator(ring, t.num), t.a, t.b) for t in value]

    def __call__(self, values: np.ndarray, real: bool = True) -> Any:
        I = values[..., self.i_col]
        H = self.h_eval(values) if self.h_eval is not None else None
        total: Any = 0
        for num, a, b in self.parts:
            term = num(values) * _factor_power(I, a, real)
            if b:
                assert H is not None
                term = term * _factor_power(H, b, real)
            total = total + term
        return total


def _factor_power(base: Any, e: Fraction, real: bool) -> Any:
    whole = floor(e)
    frac = e - whole
    value = base ** float(whole) if whole else 1.0
    if frac:
        if real:
            value = value * np.abs(base) ** float(frac)
        else:
            value = value * np.asarray(base, dtype=complex) ** float(frac)
    return value
