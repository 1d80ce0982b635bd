"""Oracle suite: exact and numeric checks that the invariant machinery is sound.

Each oracle returns ``(passed, detail)``; the runner times it and logs the
outcome. Oracles marked informational are reported but never fail the run.
"""

import logging
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
import sympy

from tresse.core.classify import Verdict, equivalent_under_map, h_null_profile, orbit_codim, symmetry_dimension
from tresse.core.fiber import (
    G4,
    diamond_identity_residual,
    diamond_p,
    i7_on_curve,
    l8_invariance_check,
    s2_curve,
    singular_orbit,
)
from tresse.core.invariants import Weight, algebra
from tresse.core.jetspace import ODE, PointField, PointMap
from tresse.core.projective import (
    CubicODE,
    LinearizationVerdict,
    f3_variant,
    h_proportionality,
    linearizable,
    liouville,
    tensor_law_residuals,
)
from tresse.core.symbols import P, X, Y
from tresse.core.symcore import normalize
from tresse.exceptions import StratumError, TresseError
from tresse.models.config import TresseConfig

logger = logging.getLogger(__name__)

OracleFn = Callable[[TresseConfig], tuple[bool, str]]

PROPORTIONALITY_RTOL = 1e-8
PROFILE_RTOL = 1e-6


@dataclass
class OracleResult:
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0
    required: bool = True


@dataclass
class SelftestReport:
    results: list[OracleResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results if r.required)

    @property
    def failed(self) -> list[OracleResult]:
        return [r for r in self.results if r.required and not r.passed]


def _rng(config: TresseConfig, salt: int) -> np.random.Generator:
    return np.random.default_rng([config.sampling.seed, salt])


def check_relative_invariance(config: TresseConfig, fields: int = 5) -> tuple[bool, str]:
    """I and H against random polynomial fields of degree <= 3."""
    alg = algebra(config.max_order)
    rng = _rng(config, 1)
    failures = []
    for i in range(fields):
        xi = PointField.random(rng, degree=3)
        for name in ("I", "H"):
            if not alg.relative_invariance_residual(alg.rel(name), xi).is_zero():
                failures.append(f"{name} field #{i}")
    return not failures, "; ".join(failures) or f"I, H exact for {fields} fields"


def check_syzygies(config: TresseConfig) -> tuple[bool, str]:
    report = algebra(config.max_order).check_syzygies()
    bad = [r.name for r in report.results if not r.passed]
    return report.passed, ", ".join(bad) or f"{len(report.results)} relations exact"


def check_orbit_codim(config: TresseConfig) -> tuple[bool, str]:
    parts, ok = [], True
    for k in (4, 5, 6):
        try:
            measured = orbit_codim(k, 3, config)
        except ValueError as err:
            ok = False
            parts.append(f"k={k}: {err}")
            continue
        ok = ok and measured.matches
        parts.append(f"k={k}: {measured.codim} (expected {measured.expected})")
    return ok, "; ".join(parts)


def linearization_corpus(config: TresseConfig) -> list[tuple[str, bool]]:
    """(f, linearizable) pairs, including three random a(x)y + b(x)p + c(x)."""
    rng = _rng(config, 2)

    def poly() -> sympy.Expr:
        coeffs = rng.integers(-3, 4, size=3)
        return sympy.Add(*(int(c) * X**k for k, c in enumerate(coeffs)))

    linear = [sympy.sstr(sympy.expand(poly() * Y + poly() * P + poly())) for _ in range(3)]
    return [
        ("0", True),
        ("y", True),
        ("p", True),
        ("p^2", True),
        *((text, True) for text in linear),
        ("y^2", False),
        ("y^2 + p", False),
    ]


def check_linearization(config: TresseConfig) -> tuple[bool, str]:
    """Lie's L1/L2 test on the corpus, cross-checked with the Frobenius conditions."""
    failures = []
    for text, expected in linearization_corpus(config):
        report = linearizable(ODE.from_text(text), config, cross_check=True)
        got = report.verdict is LinearizationVerdict.LINEARIZABLE
        if got != expected or not report.consistent:
            failures.append(f"{text}: {report.verdict} (frobenius {report.frobenius_integrable})")
    return not failures, "; ".join(failures) or "all verdicts match and agree with Frobenius"


def check_h_proportionality(config: TresseConfig, count: int = 3) -> tuple[bool, str]:
    """restrict(H)/(L1 + p·L2) is constant on random cubic equations."""
    rng = _rng(config, 3)
    spreads: list[float] = []
    attempts = 0
    while len(spreads) < count and attempts < 4 * count:
        attempts += 1
        C = CubicODE.random(rng)
        try:
            ratio = h_proportionality(C.ode, config, count=10)
        except StratumError:
            continue
        spreads.append(ratio.spread)
    if len(spreads) < count:
        return False, f"only {len(spreads)} non-linearizable cubics drawn"
    worst = max(spreads)
    return worst <= PROPORTIONALITY_RTOL, f"max relative spread {worst:.2e}"


def check_f3(config: TresseConfig) -> tuple[bool, str]:
    """The consistent F3 is selected and V1 ∧ V2 = 3·F3 on a random cubic."""
    variant = f3_variant()
    data = liouville(CubicODE.random(_rng(config, 4)), "consistent")
    wedge = normalize(data.L1 * data.Psi2 - data.L2 * data.Psi1 - 3 * data.F3_consistent)
    ok = variant == "consistent" and wedge == 0
    return ok, f"variant {variant}; V1^V2 - 3F3 = {wedge}"


def check_tensor_law(config: TresseConfig, fields: int = 3) -> tuple[bool, str]:
    rng = _rng(config, 5)
    C = CubicODE.random(rng)
    bad = 0
    for _ in range(fields):
        xi = PointField.random(rng, degree=2)
        bad += sum(normalize(r) != 0 for r in tensor_law_residuals(C, xi))
    return bad == 0, f"{bad} nonzero residuals over {fields} fields"


def check_cubic_symmetries(config: TresseConfig) -> tuple[bool, str]:
    """Symmetry counts on the cubic stratum, including the F3 = 0 class."""
    corpus = [("0", 8), ("y^(-3)", 3), ("(x*p - y)^3", 3), ("-(x*p - y)^3", 3), ("y^2", 2)]
    parts, ok = [], True
    for text, expected in corpus:
        got = symmetry_dimension(ODE.from_text(text), config).dimension
        ok = ok and got == expected
        parts.append(f"{text}: {got}")
    return ok, "; ".join(parts)


EQUIVALENCE_CORPUS = ("exp(p)", "(p^4 + p^6)/x", "p^4 + x", "p^4 + x*y", "exp(p) + y^2")


def check_equivalence_maps(config: TresseConfig, maps: int = 3) -> tuple[bool, str]:
    """Each corpus equation is Equivalent to its image under random degree-2 point maps."""
    rng = _rng(config, 6)
    point_maps = [PointMap.random(rng, degree=2) for _ in range(maps)]
    failures = []
    worst = 0.0
    for text in EQUIVALENCE_CORPUS:
        ode = ODE.from_text(text)
        for i, point_map in enumerate(point_maps):
            _, report = equivalent_under_map(ode, point_map, config)
            discrepancy = report.max_discrepancy if report.max_discrepancy is not None else float("inf")
            if report.verdict is not Verdict.EQUIVALENT or discrepancy > config.classify.match_rtol:
                failures.append(f"{text} map #{i}: {report.verdict} ({report.reason})")
            else:
                worst = max(worst, discrepancy)
    if failures:
        return False, "; ".join(failures)
    return True, f"{len(EQUIVALENCE_CORPUS) * maps} images equivalent, max discrepancy {worst:.1e}"


def check_fiber(config: TresseConfig) -> tuple[bool, str]:
    """l8 closure and weights, ◇p(G4) = 0, the I7 identity, I7(e^p) = 4i and S2 membership."""
    report = l8_invariance_check(config.sampling)
    trivial = normalize(diamond_p(Weight.of(4, -1), G4)) == 0
    identity = diamond_identity_residual() == 0
    value = i7_on_curve(sympy.exp(P), 0.3, config.sampling)
    exp_ok = abs(value - 4j) <= 1e-9
    one, two, zero = sympy.Integer(1), sympy.Integer(2), sympy.Integer(0)
    curve = s2_curve((one, two, zero, one), sympy.Integer(3), -two)
    s2_ok = singular_orbit(curve, config.sampling) == "S2"
    ok = report.passed and trivial and identity and exp_ok and s2_ok
    detail = (
        f"closure {report.closure}, weights {'ok' if report.passed else 'FAILED'}, "
        f"dp(G4)=0 {trivial}, identity {identity}, I7(e^p) = {value:.6g}, S2 {s2_ok}"
    )
    return ok, detail


def check_profile_derived(config: TresseConfig) -> tuple[bool, str]:
    report = h_null_profile("derived")
    return report.max_residual <= PROFILE_RTOL, f"max relative H {report.max_residual:.2e}"


def check_profile_printed(config: TresseConfig) -> tuple[bool, str]:
    report = h_null_profile("printed")
    return report.max_residual <= PROFILE_RTOL, f"max relative H {report.max_residual:.2e}"


# name -> (oracle, required, slow)
ORACLES: dict[str, tuple[OracleFn, bool, bool]] = {
    "relative-invariance": (check_relative_invariance, True, False),
    "syzygies": (check_syzygies, True, True),
    "orbit-codim": (check_orbit_codim, True, False),
    "linearization": (check_linearization, True, False),
    "h-proportionality": (check_h_proportionality, True, False),
    "f3": (check_f3, True, False),
    "tensor-law": (check_tensor_law, True, False),
    "cubic-symmetries": (check_cubic_symmetries, True, True),
    "equivalence-maps": (check_equivalence_maps, True, True),
    "fiber": (check_fiber, True, False),
    "profile-derived": (check_profile_derived, True, False),
    "profile-printed": (check_profile_printed, False, False),
}


def run_selftest(
    config: TresseConfig | None = None,
    only: Sequence[str] | None = None,
    quick: bool = False,
) -> SelftestReport:
    """Run the oracles in order. ``quick`` skips the slow ones.

    Raises:
        ValueError: If ``only`` names an unknown oracle.
    """
    cfg = config or TresseConfig()
    names = list(only) if only else list(ORACLES)
    unknown = [n for n in names if n not in ORACLES]
    if unknown:
        raise ValueError(f"Unknown oracle(s): {', '.join(unknown)}")
    report = SelftestReport()
    for name in names:
        fn, required, slow = ORACLES[name]
        if quick and slow:
            logger.info("Skipping slow oracle %s", name)
            continue
        start = time.perf_counter()
        try:
            passed, detail = fn(cfg)
        except TresseError as e:
            passed, detail = False, f"{type(e).__name__}: {e}"
        seconds = time.perf_counter() - start
        result = OracleResult(name, passed, detail, seconds, required)
        report.results.append(result)
        level = logging.INFO if passed or not required else logging.ERROR
        logger.log(level, "%s: %s (%.1fs) %s", name, "ok" if passed else "FAILED", seconds, detail)
    return report


__all__ = [
    "ORACLES",
    "OracleResult",
    "SelftestReport",
    "EQUIVALENCE_CORPUS",
    "check_cubic_symmetries",
    "check_equivalence_maps",
    "check_f3",
    "check_fiber",
    "check_h_proportionality",
    "check_linearization",
    "check_orbit_codim",
    "check_relative_invariance",
    "check_syzygies",
    "check_tensor_law",
    "linearization_corpus",
    "run_selftest",
]
