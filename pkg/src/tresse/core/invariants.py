"""Relative and absolute point invariants of y'' = u(x, y, p).

Relative invariants carry a weight (r, s): ξ̂(ψ) = −(r·Dx(a) + s·∂yφ)ψ. They
are generated from I = u⁴ and H by the weighted derivations Δp, Δx, Δy;
normalizing by J1 = I^{-1/8}H^{3/8} and J2 = I^{1/4}H^{1/4} gives absolute
invariants and the absolute derivations ∇p, ∇x, ∇y.

All constructions are exact over the jet ring (see ``jetalgebra``) and are
memoized per maximal order in a thread-safe registry.
"""

import logging
import threading
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Literal

import sympy

from tresse.core.jetalgebra import (
    CompiledWFrac,
    FactorContext,
    JetRing,
    Operator,
    WFrac,
    commutator,
    prolongation,
)
from tresse.core.jetspace import DEFAULT_MAX_ORDER, PointField
from tresse.exceptions import UnknownInvariantError, WeightError

logger = logging.getLogger(__name__)

DeltaDirection = Literal["p", "x", "y"]


@dataclass(frozen=True)
class Weight:
    """Weight (r, s) of a relative invariant."""

    r: Fraction
    s: Fraction

    @classmethod
    def of(cls, r: int | Fraction, s: int | Fraction) -> "Weight":
        return cls(Fraction(r), Fraction(s))

    def __add__(self, other: "Weight") -> "Weight":
        return Weight(self.r + other.r, self.s + other.s)

    def __sub__(self, other: "Weight") -> "Weight":
        return Weight(self.r - other.r, self.s - other.s)

    def __mul__(self, factor: int | Fraction) -> "Weight":
        return Weight(self.r * factor, self.s * factor)

    __rmul__ = __mul__

    @property
    def is_absolute(self) -> bool:
        return self.r == 0 and self.s == 0

    def as_tuple(self) -> tuple[str, str]:
        return str(self.r), str(self.s)

    def __str__(self) -> str:
        return f"({self.r}, {self.s})"


ABSOLUTE = Weight.of(0, 0)

# weight shift of each Δ
SHIFT: dict[str, Weight] = {
    "p": Weight.of(-1, 1),
    "x": Weight.of(1, 0),
    "y": Weight.of(0, 1),
}


@dataclass
class RelInvariant:
    """A named relative invariant ``value ∈ R^{weight}``."""

    name: str
    value: WFrac
    weight: Weight

    @property
    def order(self) -> int:
        return self.value.order()

    @property
    def size(self) -> int:
        return self.value.size()

    @cached_property
    def expr(self) -> sympy.Expr:
        return self.value.as_expr()

    def compiled(self) -> CompiledWFrac:
        return CompiledWFrac(self.value)


RELATIVE_NAMES = (
    "I",
    "H",
    "K",
    "H10",
    "H01",
    "H20",
    "H11",
    "H02",
    "K10",
    "K01",
    "Om4_20",
    "Om4_11",
    "Om4_02",
    "Om5_10",
    "Om5_01",
    "Om6",
)

ABSOLUTE_NAMES = (
    "J1",
    "J2",
    "Jt1",
    "Jt2",
    "Hb10",
    "Hb01",
    "Kb",
    "Hb20",
    "Hb11",
    "Hb02",
    "Kb10",
    "Kb01",
    "Ob4_20",
    "Ob4_11",
    "Ob4_02",
    "Ob5_10",
    "Ob5_01",
    "Ob6",
)

BARRED = {
    "Hb10": "H10",
    "Hb01": "H01",
    "Kb": "K",
    "Hb20": "H20",
    "Hb11": "H11",
    "Hb02": "H02",
    "Kb10": "K10",
    "Kb01": "K01",
    "Ob4_20": "Om4_20",
    "Ob4_11": "Om4_11",
    "Ob4_02": "Om4_02",
    "Ob5_10": "Om5_10",
    "Ob5_01": "Om5_01",
    "Ob6": "Om6",
}

# coordinates and signature values of the generic equivalence problem
COORDINATE_NAMES = ("Hb10", "Hb01", "Kb")
SIGNATURE_NAMES = ("Hb20", "Hb11", "Hb02", "Kb10", "Kb01", "Ob6", "Ob5_10", "Ob4_20")
WIDE_LIST = COORDINATE_NAMES + SIGNATURE_NAMES
# all basic absolute invariants of order <= 6
RANK_LIST = WIDE_LIST + ("Ob4_11", "Ob4_02", "Ob5_01")


@dataclass
class SyzygyResult:
    """Outcome of one exact identity check."""

    name: str
    passed: bool
    residual_terms: int = 0
    witness: str | None = None


@dataclass
class SyzygyReport:
    results: list[SyzygyResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)


class InvariantAlgebra:
    """The invariant calculus over a jet ring of fixed maximal order."""

    def __init__(self, max_order: int = DEFAULT_MAX_ORDER) -> None:
        self.ring = JetRing(max_order)
        ring = self.ring
        self.ctx = FactorContext(ring, ring.jet(0, 0, 4))
        self.ctx.H = self._h_numerator()
        self._lock = threading.RLock()
        self._relative: dict[str, RelInvariant] = {}
        self._operators: dict[tuple[str, Weight], Operator] = {}
        self._builders: dict[str, Callable[[], RelInvariant]] = {
            "I": lambda: RelInvariant("I", self.w(ring.jet(0, 0, 4)), Weight.of(-2, 3)),
            "H": lambda: RelInvariant("H", self.w(self.ctx.require_h()), Weight.of(2, 1)),
            "K": lambda: self.delta("p", self.rel("H"), "K"),
            "H10": lambda: self.delta("x", self.rel("H"), "H10"),
            "H01": lambda: self.delta("y", self.rel("H"), "H01"),
            "H20": lambda: self.delta("x", self.rel("H10"), "H20"),
            "H11": lambda: self.delta("x", self.rel("H01"), "H11"),
            "H02": lambda: self.delta("y", self.rel("H01"), "H02"),
            "K10": lambda: self.delta("x", self.rel("K"), "K10"),
            "K01": lambda: self.delta("y", self.rel("K"), "K01"),
            "Om6": self._omega6,
            "Om5_10": self._omega5_10,
            "Om5_01": self._omega5_01,
            "Om4_20": self._omega4_20,
            "Om4_11": self._omega4_11,
            "Om4_02": self._omega4_02,
        }

    # -- construction helpers

    def w(self, poly: object, a: int | Fraction = 0, b: int | Fraction = 0) -> WFrac:
        return WFrac.of(self.ctx, poly, a, b)  # type: ignore[arg-type]

    def const(self, c: int | Fraction) -> WFrac:
        return WFrac.const(self.ctx, c)

    def u(self, l: int, m: int, k: int) -> WFrac:
        return self.w(self.ring.jet(l, m, k))

    def over_i(self, poly: object, power: int = 1) -> WFrac:
        return self.w(poly, -power)

    def _h_numerator(self) -> object:
        j = self.ring.jet
        u = j(0, 0, 0)
        return (
            j(2, 0, 2)
            - 4 * j(1, 1, 1)
            + 6 * j(0, 2, 0)
            + u * (2 * j(1, 0, 3) - 3 * j(0, 1, 2))
            - j(0, 0, 1) * (j(1, 0, 2) - 4 * j(0, 1, 1))
            + j(0, 0, 3) * j(1, 0, 0)
            - 3 * j(0, 0, 2) * j(0, 1, 0)
            + u * u * j(0, 0, 4)
        )

    # -- weighted derivations

    def _zero_x(self, weight: Weight) -> WFrac:
        j = self.ring.jet
        r, s = weight.r, weight.s
        return self.u(0, 0, 1) * (3 * r + 2 * s) + self.over_i(
            j(0, 0, 0) * j(0, 0, 5) + j(1, 0, 4)
        ) * (2 * r + s)

    def _zero_p(self, weight: Weight) -> WFrac:
        return self.over_i(self.ring.jet(0, 0, 5)) * ((weight.r - weight.s) / 5)

    def operator(self, direction: DeltaDirection, weight: Weight) -> Operator:
        """Δp, Δx or Δy acting on R^{weight}, over the frame (D̂x, Dy, Dp)."""
        key = (direction, weight)
        with self._lock:
            if key not in self._operators:
                self._operators[key] = self._build_operator(direction, weight)
            return self._operators[key]

    def _build_operator(self, direction: str, weight: Weight) -> Operator:
        j = self.ring.jet
        ctx = self.ctx
        r, s = weight.r, weight.s
        if direction == "p":
            return Operator.build(ctx, d_p=1, zero=self._zero_p(weight))
        if direction == "x":
            return Operator.build(ctx, dhat_x=1, d_p=self.u(0, 0, 0), zero=self._zero_x(weight))
        if direction != "y":
            raise ValueError(f"Unknown direction '{direction}'")
        u = j(0, 0, 0)
        q = self.over_i(j(0, 0, 5)) * Fraction(1, 5)
        w = self.u(0, 0, 1) * 2 + self.over_i(j(1, 0, 4) + u * j(0, 0, 5))
        bracket = self.over_i(j(0, 1, 4)) * ((r + 2 * s) / 4) + (
            self.u(0, 0, 2) * Fraction(1, 8)
            + self.over_i(j(0, 0, 5) * (j(1, 0, 4) + u * j(0, 0, 5) + 2 * j(0, 0, 1) * j(0, 0, 4)), 2)
            * Fraction(3, 20)
        ) * (3 * r + 2 * s)
        zero = q * self._zero_x(weight) + w * self._zero_p(weight) - bracket
        return Operator.build(ctx, dhat_x=q, d_y=1, d_p=w + q * self.u(0, 0, 0), zero=zero)

    def delta(self, direction: DeltaDirection, F: RelInvariant, name: str | None = None) -> RelInvariant:
        """Apply Δ at the weight of F; the weight shifts accordingly."""
        value = self.operator(direction, F.weight)(F.value)
        return RelInvariant(name or f"D{direction}({F.name})", value, F.weight + SHIFT[direction])

    # -- named relative invariants

    def rel(self, name: str) -> RelInvariant:
        """The named relative invariant (memoized)."""
        if name not in self._builders:
            raise UnknownInvariantError(
                f"Unknown relative invariant '{name}'. Known: {', '.join(RELATIVE_NAMES)}"
            )
        with self._lock:
            if name not in self._relative:
                logger.debug("Building relative invariant %s", name)
                self._relative[name] = self._builders[name]()
            return self._relative[name]

    def _omega6(self) -> RelInvariant:
        j = self.ring.jet
        value = self.u(0, 0, 6) - self.over_i(j(0, 0, 5) ** 2) * Fraction(6, 5)
        return RelInvariant("Om6", value, Weight.of(-4, 5))

    def commutator_px(self, weight: Weight) -> Operator:
        """[Δp, Δx] on R^{weight}."""
        return commutator(
            self.operator("p", weight + SHIFT["x"]),
            self.operator("x", weight),
            self.operator("x", weight + SHIFT["p"]),
            self.operator("p", weight),
        )

    def commutator_py(self, weight: Weight) -> Operator:
        return commutator(
            self.operator("p", weight + SHIFT["y"]),
            self.operator("y", weight),
            self.operator("y", weight + SHIFT["p"]),
            self.operator("p", weight),
        )

    def commutator_xy(self, weight: Weight) -> Operator:
        return commutator(
            self.operator("x", weight + SHIFT["y"]),
            self.operator("y", weight),
            self.operator("y", weight + SHIFT["x"]),
            self.operator("x", weight),
        )

    def zero_order_commutator(self, weight: Weight) -> WFrac:
        """Z(r, s) = ([Δp, Δx] − Δy)(1) on R^{weight}; equals 3(3r+2s)Ω⁵10/(5I)."""
        return (self.commutator_px(weight) - self.operator("y", weight)).zero

    def _omega5_10(self) -> RelInvariant:
        H = self.rel("H")
        bracket = self.commutator_px(H.weight)(H.value) - self.operator("y", H.weight)(H.value)
        scale = self.w(self.ring.one, 1, -1) * Fraction(5, 24)
        value = (scale * bracket).reduce_h()
        return RelInvariant("Om5_10", value, Weight.of(-2, 4))

    def _omega5_01(self) -> RelInvariant:
        om5 = self.rel("Om5_10")
        value = (self.delta("p", om5).value - self.delta("x", self.rel("Om6")).value) * Fraction(4, 9)
        return RelInvariant("Om5_01", value, Weight.of(-3, 5))

    def _omega4_20(self) -> RelInvariant:
        H = self.rel("H")
        second = self.delta("p", self.delta("p", H)).value
        value = second - self.rel("Om6").value * H.value * self.w(self.ring.one, -1) * Fraction(1, 5)
        return RelInvariant("Om4_20", value, Weight.of(0, 3))

    def _omega4_11(self) -> RelInvariant:
        value = (
            self.delta("p", self.rel("Om4_20")).value - self.delta("x", self.rel("Om5_10")).value
        ) * Fraction(4, 3)
        return RelInvariant("Om4_11", value, Weight.of(-1, 4))

    def _omega4_02(self) -> RelInvariant:
        om6 = self.rel("Om6").value
        om5_10 = self.rel("Om5_10")
        om5_01 = self.rel("Om5_01")
        om4_20 = self.rel("Om4_20").value
        inv_i = self.w(self.ring.one, -1)
        value = (
            self.delta("y", om5_10).value
            - self.delta("x", om5_01).value
            + (om4_20 * om6 * 5 + om5_10.value * om5_01.value) * inv_i * Fraction(1, 5)
        ) * Fraction(4, 5)
        return RelInvariant("Om4_02", value, Weight.of(-2, 5))

    # -- absolute invariants

    def normalizer(self, weight: Weight) -> WFrac:
        """1/(J1^r J2^s) = I^{(r-2s)/8} H^{-(3r+2s)/8}."""
        r, s = weight.r, weight.s
        return self.w(self.ring.one, (r - 2 * s) / 8, -(3 * r + 2 * s) / 8)

    def bar(self, F: RelInvariant, name: str | None = None) -> RelInvariant:
        return RelInvariant(name or f"bar({F.name})", F.value * self.normalizer(F.weight), ABSOLUTE)

    def abs_invariant(self, name: str) -> RelInvariant:
        """The named normalized invariant; J1, J2, Jt1, Jt2 keep their weights."""
        if name == "J1":
            return RelInvariant("J1", self.w(self.ring.one, Fraction(-1, 8), Fraction(3, 8)), Weight.of(1, 0))
        if name == "J2":
            return RelInvariant("J2", self.w(self.ring.one, Fraction(1, 4), Fraction(1, 4)), Weight.of(0, 1))
        if name in ("Jt1", "Jt2"):
            top = self.rel("H10" if name == "Jt1" else "H01")
            weight = Weight.of(1, 0) if name == "Jt1" else Weight.of(0, 1)
            return RelInvariant(name, top.value * self.w(self.ring.one, 0, -1), weight)
        if name in BARRED:
            return self.bar(self.rel(BARRED[name]), name)
        raise UnknownInvariantError(f"Unknown absolute invariant '{name}'. Known: {', '.join(ABSOLUTE_NAMES)}")

    def nabla_operator(self, direction: DeltaDirection, weight: Weight = ABSOLUTE) -> Operator:
        """∇ = J-scaling · Δ at the given weight; at weight 0 the absolute derivations."""
        scale = {
            "p": self.w(self.ring.one, Fraction(-3, 8), Fraction(1, 8)),
            "x": self.w(self.ring.one, Fraction(1, 8), Fraction(-3, 8)),
            "y": self.w(self.ring.one, Fraction(-1, 4), Fraction(-1, 4)),
        }[direction]
        return self.operator(direction, weight).scaled(scale)

    def nabla(self, direction: DeltaDirection, F: RelInvariant, extended: bool = False) -> RelInvariant:
        """Apply ∇ to F; relative inputs need ``extended``, which keeps the weight.

        Raises:
            WeightError: If F is relative and ``extended`` is not set.
        """
        if not F.weight.is_absolute and not extended:
            raise WeightError(f"∇{direction} needs an absolute invariant; {F.name} has weight {F.weight}")
        value = self.nabla_operator(direction, F.weight)(F.value)
        return RelInvariant(f"N{direction}({F.name})", value, F.weight)

    # -- checks

    def relative_invariance_residual(self, F: RelInvariant, field_: PointField) -> WFrac:
        """ξ̂(F) + (r·Dx(a) + s·∂yφ)·F, exactly zero for relative invariants."""
        ring = self.ring
        a = ring.from_expr(field_.a)
        b = ring.from_expr(field_.b)
        xi = prolongation(ring, a, b)
        phi = b - ring.p * a
        multiplier = F.weight.r * self.w(ring.base_dx(a)) + F.weight.s * self.w(phi.diff(ring.y))
        return F.value.derive(xi) + multiplier * F.value

    def _operator_check(self, name: str, difference: Operator) -> SyzygyResult:
        if difference.is_zero():
            return SyzygyResult(name, True)
        parts = [*difference.coeffs, difference.zero]
        labels = ["Dhat_x", "D_y", "D_p", "1"]
        terms = sum(p.size() for p in parts)
        witness = next(label for label, p in zip(labels, parts, strict=True) if not p.is_zero())
        return SyzygyResult(name, False, terms, f"nonzero coefficient of {witness}")

    def _value_check(self, name: str, difference: WFrac) -> SyzygyResult:
        if difference.is_zero():
            return SyzygyResult(name, True)
        return SyzygyResult(name, False, difference.size(), sympy.sstr(difference.as_expr(True))[:200])

    def check_delta_syzygies(self, weights: Iterable[Weight]) -> list[SyzygyResult]:
        """The three [Δ, Δ] relations at each weight."""
        om6 = self.rel("Om6").value
        om5_10 = self.rel("Om5_10").value
        om5_01 = self.rel("Om5_01").value
        om4_20 = self.rel("Om4_20").value
        om4_11 = self.rel("Om4_11").value
        inv_i = self.w(self.ring.one, -1)
        ctx = self.ctx
        results = []
        for wt in weights:
            c = 3 * wt.r + 2 * wt.s
            rhs_px = self.operator("y", wt) + Operator.build(ctx, zero=om5_10 * inv_i * (Fraction(3, 5) * c))
            rhs_py = (
                self.operator("x", wt).scaled(om6 * inv_i * Fraction(1, 5))
                + self.operator("p", wt).scaled(om5_10 * inv_i)
                + Operator.build(ctx, zero=om5_01 * inv_i * (-Fraction(3, 20) * c))
            )
            rhs_xy = (
                self.operator("x", wt).scaled(om5_10 * inv_i * Fraction(1, 5))
                + self.operator("p", wt).scaled(om4_20 * inv_i)
                + Operator.build(ctx, zero=om4_11 * inv_i * (-Fraction(3, 4) * c))
            )
            results.append(self._operator_check(f"[Dp,Dx] at {wt}", self.commutator_px(wt) - rhs_px))
            results.append(self._operator_check(f"[Dp,Dy] at {wt}", self.commutator_py(wt) - rhs_py))
            results.append(self._operator_check(f"[Dx,Dy] at {wt}", self.commutator_xy(wt) - rhs_xy))
        return results

    def check_nabla_syzygies(self) -> list[SyzygyResult]:
        """The three [∇, ∇] relations on absolute functions."""
        np_, nx, ny = (self.nabla_operator(d) for d in ("p", "x", "y"))  # type: ignore[arg-type]
        hb10 = self.abs_invariant("Hb10").value
        hb01 = self.abs_invariant("Hb01").value
        kb = self.abs_invariant("Kb").value
        ob6 = self.abs_invariant("Ob6").value
        ob5_10 = self.abs_invariant("Ob5_10").value
        ob4_20 = self.abs_invariant("Ob4_20").value
        rhs_px = np_.scaled(hb10 * Fraction(-1, 8)) + nx.scaled(kb * Fraction(-3, 8)) + ny
        rhs_py = (
            np_.scaled(ob5_10 - hb01 * Fraction(1, 8))
            + nx.scaled(ob6 * Fraction(1, 5))
            + ny.scaled(kb * Fraction(-1, 4))
        )
        rhs_xy = (
            np_.scaled(ob4_20)
            + nx.scaled(ob5_10 * Fraction(1, 5) + hb01 * Fraction(3, 8))
            + ny.scaled(hb10 * Fraction(-1, 4))
        )
        return [
            self._operator_check("[Np,Nx]", commutator(np_, nx, nx, np_) - rhs_px),
            self._operator_check("[Np,Ny]", commutator(np_, ny, ny, np_) - rhs_py),
            self._operator_check("[Nx,Ny]", commutator(nx, ny, ny, nx) - rhs_xy),
        ]

    def check_omega_relations(self) -> list[SyzygyResult]:
        """Consistency of the Ω constructions with the zero-order commutator and I."""
        I = self.rel("I")
        results = [
            self._value_check(f"D{d}(I) = 0", self.delta(d, I).value)  # type: ignore[arg-type]
            for d in ("p", "x", "y")
        ]
        wt = Weight.of(1, 0)
        z = self.zero_order_commutator(wt)
        expected = self.rel("Om5_10").value * self.w(self.ring.one, -1) * Fraction(9, 5)
        results.append(self._value_check("Z(1,0) = 9*Om5_10/(5I)", z - expected))
        # Ω^l_ij = u^l_ij + lower terms
        for name, lead in (("Om5_10", (1, 0, 5)), ("Om4_20", (2, 0, 4)), ("Om6", (0, 0, 6))):
            idx = self.ring.jet_index[lead]
            value = self.rel(name).value
            present = any(monom[idx] for t in value for monom in t.num.keys())
            results.append(SyzygyResult(f"{name} has leading jet {lead}", present and value.order() == 6))
        return results

    def check_syzygies(self, weights: Iterable[Weight] | None = None) -> SyzygyReport:
        """Exact verification of the Δ and ∇ commutator relations and Ω identities."""
        chosen = list(weights) if weights is not None else [
            Weight.of(0, 0),
            Weight.of(1, 0),
            Weight.of(0, 1),
            Weight.of(2, 1),
            Weight.of(-2, 3),
            Weight.of(1, 2),
        ]
        report = SyzygyReport()
        report.results.extend(self.check_omega_relations())
        report.results.extend(self.check_delta_syzygies(chosen))
        report.results.extend(self.check_nabla_syzygies())
        for r in report.results:
            logger.info("%s: %s", r.name, "ok" if r.passed else "FAILED")
        return report


_ALGEBRAS: dict[int, InvariantAlgebra] = {}
_ALGEBRAS_LOCK = threading.Lock()


def algebra(max_order: int = DEFAULT_MAX_ORDER) -> InvariantAlgebra:
    """Process-wide invariant algebra for the given maximal order."""
    with _ALGEBRAS_LOCK:
        if max_order not in _ALGEBRAS:
            _ALGEBRAS[max_order] = InvariantAlgebra(max_order)
        return _ALGEBRAS[max_order]


def rel_invariant(name: str, max_order: int = DEFAULT_MAX_ORDER) -> RelInvariant:
    return algebra(max_order).rel(name)


def abs_invariant(name: str, max_order: int = DEFAULT_MAX_ORDER) -> RelInvariant:
    return algebra(max_order).abs_invariant(name)


def delta(direction: DeltaDirection, F: RelInvariant, max_order: int = DEFAULT_MAX_ORDER) -> RelInvariant:
    return algebra(max_order).delta(direction, F)


def nabla(
    direction: DeltaDirection, F: RelInvariant, extended: bool = False, max_order: int = DEFAULT_MAX_ORDER
) -> RelInvariant:
    return algebra(max_order).nabla(direction, F, extended)


def check_syzygies(max_order: int = DEFAULT_MAX_ORDER) -> SyzygyReport:
    return algebra(max_order).check_syzygies()
