"""Truncated Taylor arithmetic in (x, y, p) and numeric jet evaluation.

An ODE right-hand side is expanded at a point to a fixed total order by
walking its sympy tree with series arithmetic; the jets u^k_{lm} of the
section u = f then follow from the Taylor coefficients without any symbolic
differentiation.
"""

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from functools import lru_cache
from typing import Any

import numpy as np
import sympy

from tresse.core.jetalgebra import JetRing
from tresse.core.symbols import P, X, Y
from tresse.exceptions import SamplingError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TaylorBasis:
    """Monomials dx^i dy^j dp^k of total degree <= order and their product table."""

    order: int
    monomials: tuple[tuple[int, int, int], ...]
    index: dict[tuple[int, int, int], int]
    left: np.ndarray
    right: np.ndarray
    target: np.ndarray

    @property
    def size(self) -> int:
        return len(self.monomials)


@lru_cache(maxsize=8)
def basis(order: int) -> TaylorBasis:
    monomials = tuple(
        (i, j, d - i - j) for d in range(order + 1) for i in range(d, -1, -1) for j in range(d - i, -1, -1)
    )
    index = {m: n for n, m in enumerate(monomials)}
    left, right, target = [], [], []
    for a, ma in enumerate(monomials):
        for b, mb in enumerate(monomials):
            if sum(ma) + sum(mb) <= order:
                left.append(a)
                right.append(b)
                target.append(index[(ma[0] + mb[0], ma[1] + mb[1], ma[2] + mb[2])])
    return TaylorBasis(
        order,
        monomials,
        index,
        np.array(left, dtype=np.intp),
        np.array(right, dtype=np.intp),
        np.array(target, dtype=np.intp),
    )


class Taylor:
    """A truncated Taylor polynomial with complex coefficients."""

    __slots__ = ("basis", "coeffs")

    def __init__(self, tb: TaylorBasis, coeffs: np.ndarray) -> None:
        self.basis = tb
        self.coeffs = coeffs

    @classmethod
    def constant(cls, tb: TaylorBasis, value: complex) -> "Taylor":
        coeffs = np.zeros(tb.size, dtype=complex)
        coeffs[0] = value
        return cls(tb, coeffs)

    @classmethod
    def variable(cls, tb: TaylorBasis, axis: int, value: complex) -> "Taylor":
        series = cls.constant(tb, value)
        if tb.order >= 1:
            unit = [0, 0, 0]
            unit[axis] = 1
            series.coeffs[tb.index[(unit[0], unit[1], unit[2])]] = 1.0
        return series

    @property
    def value(self) -> complex:
        return complex(self.coeffs[0])

    def _lift(self, other: "Taylor | complex | float | int") -> "Taylor":
        if isinstance(other, Taylor):
            return other
        return Taylor.constant(self.basis, complex(other))

    def __add__(self, other: "Taylor | complex | float | int") -> "Taylor":
        return Taylor(self.basis, self.coeffs + self._lift(other).coeffs)

    __radd__ = __add__

    def __neg__(self) -> "Taylor":
        return Taylor(self.basis, -self.coeffs)

    def __sub__(self, other: "Taylor | complex | float | int") -> "Taylor":
        return Taylor(self.basis, self.coeffs - self._lift(other).coeffs)

    def __rsub__(self, other: "Taylor | complex | float | int") -> "Taylor":
        return Taylor(self.basis, self._lift(other).coeffs - self.coeffs)

    def __mul__(self, other: "Taylor | complex | float | int") -> "Taylor":
        if not isinstance(other, Taylor):
            return Taylor(self.basis, self.coeffs * complex(other))
        tb = self.basis
        out = np.zeros(tb.size, dtype=complex)
        np.add.at(out, tb.target, self.coeffs[tb.left] * other.coeffs[tb.right])
        return Taylor(tb, out)

    __rmul__ = __mul__

    def __truediv__(self, other: "Taylor | complex | float | int") -> "Taylor":
        if not isinstance(other, Taylor):
            return Taylor(self.basis, self.coeffs / complex(other))
        return self * other.power(-1.0)

    def __rtruediv__(self, other: "Taylor | complex | float | int") -> "Taylor":
        return self._lift(other) * self.power(-1.0)

    def __pow__(self, exponent: "int | float | Taylor") -> "Taylor":
        if isinstance(exponent, Taylor):
            return exp(exponent * log(self))
        if isinstance(exponent, int) or float(exponent).is_integer():
            n = int(exponent)
            if n < 0:
                return self.power(-1.0) ** (-n)
            result = Taylor.constant(self.basis, 1.0)
            base = self
            while n:
                if n & 1:
                    result = result * base
                base = base * base
                n >>= 1
            return result
        return self.power(float(exponent))

    def compose(self, derivatives: Sequence[complex]) -> "Taylor":
        """g(self) from the scaled derivatives ``g^(n)(a0)/n!``, n = 0..order."""
        nilpotent = Taylor(self.basis, self.coeffs.copy())
        nilpotent.coeffs[0] = 0.0
        result = Taylor.constant(self.basis, derivatives[0])
        term = Taylor.constant(self.basis, 1.0)
        for n in range(1, self.basis.order + 1):
            term = term * nilpotent
            result = result + term * derivatives[n]
        return result

    def power(self, alpha: float) -> "Taylor":
        a0 = self.value
        if a0 == 0:
            raise ZeroDivisionError("power of a series with zero constant term")
        scaled = []
        binom = 1.0
        for n in range(self.basis.order + 1):
            scaled.append(binom * a0 ** (alpha - n))
            binom *= (alpha - n) / (n + 1)
        return self.compose(scaled)


def exp(a: Taylor) -> Taylor:
    e0 = np.exp(a.value)
    return a.compose([e0 / math.factorial(n) for n in range(a.basis.order + 1)])


def log(a: Taylor) -> Taylor:
    a0 = a.value
    if a0 == 0:
        raise ZeroDivisionError("log of a series with zero constant term")
    scaled: list[complex] = [np.log(a0)]
    scaled += [(-1) ** (n + 1) / (n * a0**n) for n in range(1, a.basis.order + 1)]
    return a.compose(scaled)


@lru_cache(maxsize=32)
def _generic_derivatives(func: type, order: int) -> Callable[[complex], list[complex]]:
    t = sympy.Dummy("t")
    table = [sympy.lambdify(t, sympy.diff(func(t), t, n) / math.factorial(n), "numpy") for n in range(order + 1)]
    return lambda a0: [complex(fn(a0)) for fn in table]


def expand(expr: sympy.Expr, point: Sequence[complex], order: int) -> Taylor:
    """Taylor polynomial of ``expr(x, y, p)`` at ``point`` to total ``order``."""
    tb = basis(order)
    variables = {X: Taylor.variable(tb, 0, point[0]), Y: Taylor.variable(tb, 1, point[1]), P: Taylor.variable(tb, 2, point[2])}
    memo: dict[sympy.Basic, Taylor] = {}

    def walk(node: sympy.Basic) -> Taylor:
        if node in memo:
            return memo[node]
        result: Taylor
        if node.is_Symbol:
            if node not in variables:
                raise SamplingError(f"Variable '{node}' cannot be sampled")
            result = variables[node]  # type: ignore[index]
        elif node.is_number:
            result = Taylor.constant(tb, complex(node))
        elif node.is_Add:
            result = walk(node.args[0])
            for arg in node.args[1:]:
                result = result + walk(arg)
        elif node.is_Mul:
            result = walk(node.args[0])
            for arg in node.args[1:]:
                result = result * walk(arg)
        elif node.is_Pow:
            base, exponent = node.args
            if exponent.is_number:
                e: Any = int(exponent) if exponent.is_Integer else float(exponent)
                result = walk(base) ** e
            else:
                result = exp(walk(exponent) * log(walk(base)))
        elif isinstance(node, sympy.exp):
            result = exp(walk(node.args[0]))
        elif isinstance(node, sympy.log):
            result = log(walk(node.args[0]))
        elif isinstance(node, sympy.Function) and len(node.args) == 1:
            inner = walk(node.args[0])
            result = inner.compose(_generic_derivatives(type(node), order)(inner.value))
        else:
            raise SamplingError(f"Cannot expand '{node}' in Taylor arithmetic")
        memo[node] = result
        return result

    return walk(sympy.sympify(expr))


class JetEvaluator:
    """Numeric values of all jet ring generators on the section u = f."""

    def __init__(self, f: sympy.Expr, ring: JetRing) -> None:
        self.f = f
        self.ring = ring

    def __call__(self, point: Sequence[float]) -> np.ndarray:
        """Values at (x, y, p) in ring generator order.

        Raises:
            ZeroDivisionError: If f is singular at the point.
        """
        ring = self.ring
        order = ring.max_order
        with np.errstate(all="raise"):
            try:
                series = expand(self.f, point, order)
            except FloatingPointError as err:
                raise ZeroDivisionError(str(err)) from err
        coeffs = series.coeffs
        tb = series.basis
        if not np.all(np.isfinite(coeffs)):
            raise ZeroDivisionError("non-finite Taylor coefficients")

        def partial(i: int, j: int, k: int) -> complex:
            return coeffs[tb.index[(i, j, k)]] * math.factorial(i) * math.factorial(j) * math.factorial(k)

        p = complex(point[2])
        values = np.zeros(len(ring.gens), dtype=complex)
        values[:3] = [complex(c) for c in point]
        for (l, m, k), col in ring.jet_index.items():
            # (∂x + p∂y)^l ∂y^m ∂p^k f
            values[col] = sum(
                math.comb(l, i) * p**i * partial(l - i, i + m, k) for i in range(l + 1)
            )
        return values
