"""Invariants of the stabilizer algebra acting on curves u(p) in a fiber.

The stabilizer of a point of the base is an 8-dimensional algebra of vector
fields A(p)∂p + B(p, u)∂u. Its relative invariants on curve jets are G4 and
G6, the relative derivation is ◇p and the first absolute invariant is I7 at
order 7. The (r, s) grading here belongs to this action only and is never
mixed with the grading of the invariants of the equation.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import sympy

from tresse.core.invariants import ABSOLUTE, Weight, algebra
from tresse.core.symbols import P, jet_symbol
from tresse.core.symcore import Expr, is_zero, normalize
from tresse.exceptions import DegenerateCurveError, ParseError, UnknownInvariantError
from tresse.models.config import SamplingConfig

logger = logging.getLogger(__name__)

DEFAULT_CURVE_ORDER = 9

U_JETS = sympy.symbols(f"u0:{DEFAULT_CURVE_ORDER + 2}")
Ucoord = U_JETS[0]


def uj(k: int) -> sympy.Symbol:
    """The curve jet d^k u/dp^k."""
    if k >= len(U_JETS):
        raise ValueError(f"Curve jets are available up to order {len(U_JETS) - 1}")
    return U_JETS[k]


def curve_order(e: Expr) -> int:
    orders = [U_JETS.index(s) for s in e.free_symbols if s in U_JETS]
    return max(orders, default=0)


def total_p(e: Expr) -> Expr:
    """Dp = ∂p + Σ u_{k+1} ∂u_k."""
    result = sympy.diff(e, P)
    for k in range(curve_order(e) + 1):
        result += uj(k + 1) * sympy.diff(e, uj(k))
    return result


@dataclass(frozen=True)
class FiberInvariant:
    name: str
    expr: Expr
    weight: Weight


G4 = uj(4)
G6 = 5 * uj(4) * uj(6) - 6 * uj(5) ** 2
I7_NUMERATOR = 25 * uj(4) ** 2 * uj(7) + 84 * uj(5) ** 3 - 105 * uj(4) * uj(5) * uj(6)

FIBER_INVARIANTS = {
    "G4": FiberInvariant("G4", G4, Weight.of(4, -1)),
    "G6": FiberInvariant("G6", G6, Weight.of(10, -2)),
    "I7num": FiberInvariant("I7num", I7_NUMERATOR, Weight.of(15, -3)),
}


def fiber_invariant(name: str) -> FiberInvariant:
    """G4 or G6 (or the numerator of I7) with its weight."""
    try:
        return FIBER_INVARIANTS[name]
    except KeyError:
        raise UnknownInvariantError(
            f"Unknown fiber invariant '{name}'. Known: {', '.join(FIBER_INVARIANTS)}"
        ) from None


def diamond_p(weight: Weight, e: Expr) -> Expr:
    """◇p = Dp − ((2r + 3s)/5)·u⁵/u⁴, from weight (r, s) to (r + 1, s)."""
    c = (2 * weight.r + 3 * weight.s) / 5
    return total_p(e) - sympy.Rational(c.numerator, c.denominator) * uj(5) / uj(4) * e


def i7() -> Expr:
    """I7 with the principal branch of G6^{3/2}."""
    return I7_NUMERATOR / G6 ** sympy.Rational(3, 2)


def g4_over_root_g6() -> Expr:
    return G4 / sympy.sqrt(G6)


def i7_via_diamond() -> Expr:
    """−10·◇p(G4/√G6), at weight (−1, 0)."""
    return -10 * diamond_p(Weight.of(-1, 0), g4_over_root_g6())


def box_p(e: Expr) -> Expr:
    """□p = (u⁴/√G6)·Dp on absolute invariants."""
    return G4 / sympy.sqrt(G6) * total_p(e)


def invariant_chain(length: int) -> list[Expr]:
    """I7, □p(I7), □p²(I7), ..."""
    chain = [i7()]
    for _ in range(length - 1):
        chain.append(box_p(chain[-1]))
    return chain


# Curves


def curve_jets(u: Expr, order: int = DEFAULT_CURVE_ORDER) -> dict[sympy.Symbol, Expr]:
    """u_k ↦ d^k u/dp^k for a curve u(p)."""
    stray = [s for s in u.free_symbols if s != P]
    if stray:
        raise ParseError(f"A curve u(p) may only use p (found {', '.join(sorted(map(str, stray)))})")
    out = {}
    derivative = u
    for k in range(order + 1):
        out[uj(k)] = derivative
        derivative = sympy.diff(derivative, P)
    return out


def on_curve(e: Expr, u: Expr) -> Expr:
    return e.xreplace(curve_jets(u, max(curve_order(e), 0)))


def on_curve_value(e: Expr, u: Expr, p0: complex) -> complex:
    """Complex value of a curve-jet expression along u(p) at p0, principal branches."""
    jets = curve_jets(u, curve_order(e))
    values = {s: complex(sympy.N(d.subs(P, p0))) for s, d in jets.items()}
    fn = sympy.lambdify([P, *values], e, "numpy")
    with np.errstate(all="raise"):
        try:
            result = complex(fn(np.complex128(p0), *(np.complex128(v) for v in values.values())))
        except FloatingPointError as err:
            raise ZeroDivisionError(str(err)) from err
    return result


def i7_on_curve(u: Expr, p0: complex, config: SamplingConfig | None = None) -> complex:
    """I7 along a curve at p0.

    Raises:
        DegenerateCurveError: If the curve lies in S1 (u⁴ ≡ 0) or S2 (G6 ≡ 0).
    """
    membership = singular_orbit(u, config)
    if membership is not None:
        raise DegenerateCurveError(f"Curve lies in the singular orbit {membership}")
    return on_curve_value(i7(), u, p0)


def singular_orbit(u: Expr, config: SamplingConfig | None = None) -> str | None:
    """'S1' when u⁴ ≡ 0, 'S2' when G6 ≡ 0, else None."""
    if is_zero(on_curve(G4, u), config).is_zero:
        return "S1"
    if is_zero(on_curve(G6, u), config).is_zero:
        return "S2"
    return None


def s2_curve(a: tuple[Expr, Expr, Expr, Expr], b: Expr, c: Expr) -> Expr:
    """u = a0 + a1 p + a2 p² + a3 p³ + b/(p − c); G6 vanishes along it."""
    return sum((coeff * P**k for k, coeff in enumerate(a)), sympy.Integer(0)) + b / (P - c)


# The stabilizer algebra


@dataclass(frozen=True)
class L8Field:
    """A(p)∂p + B(p, u)∂u."""

    name: str
    A: Expr
    B: Expr

    @cached_property
    def characteristic(self) -> Expr:
        return sympy.expand(self.B - self.A * uj(1))

    def bracket(self, other: "L8Field") -> "L8Field":
        def apply(v: L8Field, g: Expr) -> Expr:
            return v.A * sympy.diff(g, P) + v.B * sympy.diff(g, Ucoord)

        return L8Field(
            f"[{self.name},{other.name}]",
            sympy.expand(apply(self, other.A) - apply(other, self.A)),
            sympy.expand(apply(self, other.B) - apply(other, self.B)),
        )

    def prolonged_coefficient(self, k: int) -> Expr:
        """Coefficient of ∂u_k in the prolongation: Dp^k(Q) + A·u_{k+1}."""
        q = self.characteristic
        for _ in range(k):
            q = total_p(q)
        return sympy.expand(q + self.A * uj(k + 1))

    def lie_derivative(self, e: Expr) -> Expr:
        result = self.A * sympy.diff(e, P)
        for k in range(curve_order(e) + 1):
            d = sympy.diff(e, uj(k))
            if d != 0:
                result += self.prolonged_coefficient(k) * d
        return result

    def cocycles(self) -> tuple[Expr, Expr]:
        """(C^r, C^s) = (div_ω0 − ½·div_Ω, ½·div_Ω) with ω0 = dp∧du and Ω = dp∧du∧du_p.

        The divergences are sums of coordinate partials of ξ and of its contact
        lift ξ1 = A∂p + B∂u + (Dp(B) − A_p·u_p)∂u_p.
        """
        u1 = uj(1)
        div_w0 = sympy.diff(self.A, P) + sympy.diff(self.B, Ucoord)
        lifted = sympy.diff(self.B, P) + sympy.diff(self.B, Ucoord) * u1 - sympy.diff(self.A, P) * u1
        div_omega = div_w0 + sympy.diff(lifted, u1)
        half = sympy.Rational(1, 2)
        return sympy.expand(div_w0 - half * div_omega), sympy.expand(half * div_omega)

    def multiplier(self, weight: Weight) -> Expr:
        cr, cs = self.cocycles()
        return sympy.expand(
            sympy.Rational(weight.r.numerator, weight.r.denominator) * cr
            + sympy.Rational(weight.s.numerator, weight.s.denominator) * cs
        )


L8_GENERATORS: tuple[L8Field, ...] = (
    L8Field("d_p", sympy.Integer(1), sympy.Integer(0)),
    L8Field("d_u", sympy.Integer(0), sympy.Integer(1)),
    L8Field("p d_p", P, sympy.Integer(0)),
    L8Field("u d_u", sympy.Integer(0), Ucoord),
    L8Field("p d_u", sympy.Integer(0), P),
    L8Field("p^2 d_u", sympy.Integer(0), P**2),
    L8Field("p^3 d_u", sympy.Integer(0), P**3),
    L8Field("p^2 d_p + 3pu d_u", P**2, 3 * P * Ucoord),
)


def _coefficient_vector(fields: list[L8Field]) -> np.ndarray:
    polys = [sympy.Poly(f.A, P, Ucoord) for f in fields] + [sympy.Poly(f.B, P, Ucoord) for f in fields]
    monomials = sorted({m for poly in polys for m in poly.monoms()})
    rows = []
    for f in fields:
        pa, pb = sympy.Poly(f.A, P, Ucoord), sympy.Poly(f.B, P, Ucoord)
        rows.append(
            [float(pa.coeff_monomial(m)) for m in monomials] + [float(pb.coeff_monomial(m)) for m in monomials]
        )
    return np.array(rows)


def l8_closure() -> tuple[int, int]:
    """(rank of the generators, rank of generators plus all brackets); both 8 when closed."""
    gens = list(L8_GENERATORS)
    brackets = [f.bracket(g) for i, f in enumerate(gens) for g in gens[i + 1 :]]
    rank_gens = int(np.linalg.matrix_rank(_coefficient_vector(gens)))
    rank_all = int(np.linalg.matrix_rank(_coefficient_vector(gens + brackets)))
    return rank_gens, rank_all


@dataclass
class FiberCheck:
    generator: str
    invariant: str
    passed: bool
    residual: str = ""


@dataclass
class FiberReport:
    checks: list[FiberCheck] = field(default_factory=list)
    closure: tuple[int, int] = (0, 0)

    @property
    def passed(self) -> bool:
        return self.closure == (8, 8) and all(c.passed for c in self.checks)


def relative_residual(xi: L8Field, inv: FiberInvariant) -> Expr:
    """L_ξ̂(F) + (r·C^r + s·C^s)·F, identically zero for a relative invariant."""
    return sympy.expand(xi.lie_derivative(inv.expr) + xi.multiplier(inv.weight) * inv.expr)


def l8_invariance_check(config: SamplingConfig | None = None) -> FiberReport:
    """Weights of G4, G6, I7's numerator and ◇p(G6) for all eight generators, plus I7 absoluteness."""
    cfg = config or SamplingConfig()
    report = FiberReport(closure=l8_closure())
    diamond_g6 = FiberInvariant("dp(G6)", sympy.expand(diamond_p(Weight.of(10, -2), G6) * uj(4)), Weight.of(15, -3))
    invariants = [*FIBER_INVARIANTS.values(), diamond_g6]
    for xi in L8_GENERATORS:
        for inv in invariants:
            residual = normalize(relative_residual(xi, inv))
            report.checks.append(FiberCheck(xi.name, inv.name, residual == 0, "" if residual == 0 else str(residual)))
        absolute = _absolute_residual(xi, cfg)
        report.checks.append(FiberCheck(xi.name, "I7", absolute <= 1e-8, f"{absolute:.3e}"))
    return report


def _absolute_residual(xi: L8Field, config: SamplingConfig) -> float:
    """max |L_ξ̂(I7)| over random complex jet points."""
    derivative = xi.lie_derivative(i7())
    variables = [P, *U_JETS[:9]]
    fn = sympy.lambdify(variables, derivative, "numpy")
    scale_fn = sympy.lambdify(variables, i7(), "numpy")
    rng = np.random.default_rng(config.seed)
    worst = 0.0
    for _ in range(config.zero_samples):
        point = rng.uniform(*config.box, size=len(variables)) + 1j * rng.uniform(-0.5, 0.5, size=len(variables))
        with np.errstate(all="ignore"):
            value = complex(fn(*point))
            scale = abs(complex(scale_fn(*point)))
        if np.isfinite(value):
            worst = max(worst, abs(value) / (1.0 + scale))
    return worst


def diamond_identity_residual() -> Expr:
    """−10·◇p(G4/√g)·g^{3/2} − (I7 numerator) with g = G6, which normalizes to 0.

    G6 is kept as a positive symbol g while differentiating, so the root
    powers combine without branch choices; squaring both sides shows the
    identity for the principal branch as well.
    """
    g = sympy.Symbol("g", positive=True)
    F = G4 / sympy.sqrt(g)
    dp_f = total_p(F) + sympy.diff(F, g) * total_p(G6)
    lhs = -10 * (dp_f + sympy.Rational(2, 5) * uj(5) / uj(4) * F)
    scaled = sympy.expand(lhs * g ** sympy.Rational(3, 2))
    return normalize(sympy.expand(scaled.subs(g, G6)) - I7_NUMERATOR)


def box_nabla_ratio(samples: int = 6, seed: int = 11) -> list[tuple[float, float]]:
    """□p against (1/√(5Ω⁶))·∇p with u^k_{00} identified with the curve jets u_k.

    Both are multiples of Dp; returns pairs (ratio, I^{7/8}·H^{-1/8}) at
    random real jet points where every root is real.
    """
    alg = algebra()
    ring = alg.ring
    om6 = alg.rel("Om6").expr
    coefficient = alg.nabla_operator("p", ABSOLUTE).coeffs[2].as_expr()
    H = ring.to_expr(alg.ctx.require_h())
    identify = {uj(k): jet_symbol(0, 0, k) for k in range(4, 7)}
    box = (G4 / sympy.sqrt(G6)).xreplace(identify)
    nabla = coefficient / sympy.sqrt(5 * om6)
    I = jet_symbol(0, 0, 4)
    variables = sorted((box / nabla).free_symbols | H.free_symbols, key=lambda s: s.name)
    ratio_fn = sympy.lambdify(variables, box / nabla, "numpy")
    expected_fn = sympy.lambdify(variables, I ** sympy.Rational(7, 8) * H ** sympy.Rational(-1, 8), "numpy")
    g6_fn = sympy.lambdify(variables, G6.xreplace(identify), "numpy")
    h_fn = sympy.lambdify(variables, H, "numpy")
    rng = np.random.default_rng(seed)
    out: list[tuple[float, float]] = []
    for _ in range(samples * 50):
        if len(out) >= samples:
            break
        point = rng.uniform(0.2, 2.0, size=len(variables))
        with np.errstate(all="ignore"):
            if g6_fn(*point) <= 0 or h_fn(*point) <= 0:
                continue
            out.append((float(ratio_fn(*point)), float(expected_fn(*point))))
    return out


@dataclass
class CurveReport:
    """Fiber invariants along one curve."""

    u: Expr
    orbit: str | None
    G4: Expr
    G6: Expr
    i7_values: list[tuple[float, complex]] = field(default_factory=list)
    diamond_values: list[tuple[float, complex]] = field(default_factory=list)
    box_values: list[tuple[float, complex]] = field(default_factory=list)


def analyze_curve(u: Expr, points: list[float], config: SamplingConfig | None = None) -> CurveReport:
    """G4, G6, orbit membership and, off the singular orbits, I7 and □p(I7) at the points."""
    orbit = singular_orbit(u, config)
    report = CurveReport(u, orbit, normalize(on_curve(G4, u)), normalize(on_curve(G6, u)))
    if orbit is not None:
        return report
    box_i7 = box_p(i7())
    for p0 in points:
        try:
            report.i7_values.append((p0, on_curve_value(i7(), u, p0)))
            report.diamond_values.append((p0, on_curve_value(i7_via_diamond(), u, p0)))
            report.box_values.append((p0, on_curve_value(box_i7, u, p0)))
        except ZeroDivisionError as err:
            logger.debug("Skipped p = %s: %s", p0, err)
    return report


__all__ = [
    "FIBER_INVARIANTS",
    "G4",
    "G6",
    "I7_NUMERATOR",
    "L8_GENERATORS",
    "CurveReport",
    "FiberCheck",
    "FiberInvariant",
    "FiberReport",
    "L8Field",
    "analyze_curve",
    "box_nabla_ratio",
    "box_p",
    "curve_jets",
    "diamond_identity_residual",
    "diamond_p",
    "fiber_invariant",
    "i7",
    "i7_on_curve",
    "i7_via_diamond",
    "invariant_chain",
    "l8_closure",
    "l8_invariance_check",
    "on_curve",
    "on_curve_value",
    "relative_residual",
    "s2_curve",
    "singular_orbit",
    "total_p",
    "uj",
]
