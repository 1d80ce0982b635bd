"""Shared symbols: base coordinates and non-holonomic jet coordinates."""

import re
from functools import lru_cache

import sympy

X, Y, P = sympy.symbols("x y p")
U = sympy.Symbol("u")

BASE_SYMBOLS = (X, Y, P)

_JET_NAME = re.compile(r"^u(?:\^(\d+))?(?:_\{(\d)(\d)\})?$")


def jet_name(l: int, m: int, k: int) -> str:
    """Printing convention: u, u^k, u_{lm}, u^k_{lm}."""
    name = "u"
    if k:
        name += f"^{k}"
    if l or m:
        name += f"_{{{l}{m}}}"
    return name


@lru_cache(maxsize=None)
def jet_symbol(l: int, m: int, k: int) -> sympy.Symbol:
    """Interned sympy symbol for the jet coordinate u^k_{lm}."""
    if (l, m, k) == (0, 0, 0):
        return U
    return sympy.Symbol(jet_name(l, m, k))


def parse_jet_name(name: str) -> tuple[int, int, int] | None:
    """Inverse of jet_name; None when the name is not a jet coordinate."""
    match = _JET_NAME.match(name)
    if match is None:
        return None
    k = int(match.group(1)) if match.group(1) else 0
    l = int(match.group(2)) if match.group(2) else 0
    m = int(match.group(3)) if match.group(3) else 0
    return l, m, k


def jet_index(symbol: sympy.Basic) -> tuple[int, int, int] | None:
    """Jet triple (l, m, k) of a symbol, or None for non-jet symbols."""
    if not isinstance(symbol, sympy.Symbol):
        return None
    return parse_jet_name(symbol.name)
