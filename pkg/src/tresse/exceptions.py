"""Tresse exception hierarchy."""


class TresseError(Exception):
    """Base exception for Tresse errors."""

    pass


class ConfigError(TresseError):
    """Configuration-related errors."""

    pass


class ParseError(TresseError):
    """Expression syntax errors.

    Attributes:
        position: Zero-based character offset of the offending token.
        text: The source text being parsed.
    """

    def __init__(self, message: str, position: int = 0, text: str = "") -> None:
        self.position = position
        self.text = text
        if text:
            message = f"{message} at position {position}\n  {text}\n  {' ' * position}^"
        super().__init__(message)


class SamplingError(TresseError):
    """Every sample point was singular (pole, zero denominator, log of zero)."""

    pass


class JetOrderError(TresseError):
    """A jet coordinate beyond the configured maximum order was requested."""

    pass


class UnknownInvariantError(TresseError):
    """Unknown invariant name."""

    pass


class WeightError(TresseError):
    """Weight mismatch, e.g. an absolute derivation applied to a relative invariant."""

    pass


class StratumError(TresseError):
    """The equation lies on a stratum where the requested pipeline is undefined."""

    pass


class NotCubicError(TresseError):
    """The right-hand side is not a polynomial of degree at most 3 in p."""

    pass


class MapError(TresseError):
    """Point map errors: degenerate Jacobian or no symbolic inverse."""

    pass


class DegenerateCurveError(TresseError):
    """Fiber curve lies in a singular orbit (u⁴ or G6 vanishes)."""

    pass
