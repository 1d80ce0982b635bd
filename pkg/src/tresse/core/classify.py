"""Equivalence signatures, symmetry dimension and orbit codimension.

Absolute invariants are evaluated numerically on an equation at sampled
points (x, y, p): jets come from Taylor arithmetic, relative invariants from
their exact numerators, and the normalization |I|^a |H|^b is applied last so
that a normalized invariant of underlying weight (r, s) changes at most by the
sign σ1^r σ2^s under a point transformation.
"""

import logging
import math
from collections import Counter
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from enum import StrEnum
from itertools import product
from typing import Literal

import numpy as np
import sympy

from tresse.core.invariants import (
    BARRED,
    COORDINATE_NAMES,
    RANK_LIST,
    SIGNATURE_NAMES,
    WIDE_LIST,
    InvariantAlgebra,
    algebra,
)
from tresse.core.jetalgebra import CompiledWFrac, JetRing, PolyEvaluator, prolongation
from tresse.core.jetspace import ODE, PointMap, TransformResult, restrict, transform_ode
from tresse.core.symbols import P, X, Y
from tresse.core.symcore import is_zero, normalize, tree_size
from tresse.core.taylor import JetEvaluator
from tresse.exceptions import MapError, SamplingError, StratumError
from tresse.models.config import TresseConfig

logger = logging.getLogger(__name__)

Box = tuple[tuple[float, float], tuple[float, float], tuple[float, float]]

SINGULAR_EPS = 1e-12


class Stratum(StrEnum):
    """Invariant strata of the equation space."""

    GENERIC = "generic"
    H_NULL = "H=0"
    CUBIC = "cubic"


class Verdict(StrEnum):
    """Outcome of an equivalence test."""

    EQUIVALENT = "Equivalent"
    NOT_EQUIVALENT = "NotEquivalent"
    INCONCLUSIVE = "Inconclusive"


def default_box(config: TresseConfig) -> Box:
    lo, hi = config.sampling.box
    return ((lo, hi), (lo, hi), (lo, hi))


def sample_box(box: Box, count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    lows = np.array([b[0] for b in box])
    highs = np.array([b[1] for b in box])
    return lows + (highs - lows) * rng.random((count, 3))


def stratum(ode: ODE, config: TresseConfig | None = None, box: Box | None = None) -> Stratum:
    """Generic, cubic (I ≡ 0) or H ≡ 0.

    Small right-hand sides are tested symbolically; larger ones (typically the
    image of a nonlinear point map) from Taylor-mode jets at sampled points.
    ``box`` is the sampling region of the numeric test.

    Raises:
        SamplingError: If every sample point is singular.
    """
    cfg = config or TresseConfig()
    if tree_size(ode.f) > cfg.classify.symbolic_stratum_nodes:
        return numeric_stratum(ode, cfg, box)
    if is_zero(sympy.diff(ode.f, P, 4), cfg.sampling).is_zero:
        return Stratum.CUBIC
    H = algebra(cfg.max_order).rel("H")
    if is_zero(restrict(H.expr, ode), cfg.sampling).is_zero:
        return Stratum.H_NULL
    return Stratum.GENERIC


def numeric_stratum(ode: ODE, config: TresseConfig | None = None, box: Box | None = None) -> Stratum:
    """Stratum from restricted I and H at ``zero_samples`` regular points of the box.

    A value counts as zero when ``|v| <= zero_tol·(1 + scale)``: for I the
    scale is the largest jet of order <= 4, for H the sum of its term
    magnitudes.

    Raises:
        SamplingError: If every sample point is singular.
    """
    cfg = config or TresseConfig()
    alg = algebra(cfg.max_order)
    ring = alg.ring
    jets = JetEvaluator(ode.f, ring)
    i_col = ring.jet_index[(0, 0, 4)]
    low = [col for jet, col in ring.jet_index.items() if sum(jet) <= 4]
    h_eval = PolyEvaluator(ring, alg.ctx.require_h())
    tol = cfg.sampling.zero_tol
    i_zero = h_zero = True
    usable = 0
    for z in sample_box(box or default_box(cfg), cfg.sampling.zero_samples * 4, cfg.sampling.seed):
        try:
            values = jets(z)
        except (ZeroDivisionError, SamplingError, OverflowError, ValueError) as err:
            logger.debug("Stratum sample skipped: %s", err)
            continue
        if not np.all(np.isfinite(values)):
            continue
        usable += 1
        if i_zero and abs(values[i_col]) > tol * (1.0 + float(np.max(np.abs(values[low])))):
            i_zero = False
        if h_zero and abs(h_eval(values)) > tol * (1.0 + float(h_eval.magnitude(values))):
            h_zero = False
        if usable >= cfg.sampling.zero_samples or not (i_zero or h_zero):
            break
    if usable == 0:
        raise SamplingError("All sample points are singular")
    found = Stratum.CUBIC if i_zero else Stratum.H_NULL if h_zero else Stratum.GENERIC
    logger.debug("Numeric stratum of %s from %d samples: %s", ode, usable, found)
    return found


class RestrictedInvariants:
    """Numeric values of normalized invariants on an equation.

    ``values(z)`` returns the listed invariants at z = (x, y, p);
    ``jacobian(z)`` their derivatives along (∂x, ∂y, ∂p) by a fourth-order
    central stencil.

    Raises ``ZeroDivisionError`` at singular points (poles of f, I = 0 or H = 0).
    """

    def __init__(self, ode: ODE, names: Sequence[str], alg: InvariantAlgebra | None = None) -> None:
        self.alg = alg or algebra()
        self.ode = ode
        self.names = tuple(names)
        ring = self.alg.ring
        rels = [self.alg.rel(BARRED[name]) for name in self.names]
        self.weights = [rel.weight for rel in rels]
        self.compiled = [CompiledWFrac(rel.value) for rel in rels]
        self.exponents = [((w.r - 2 * w.s) / 8, -(3 * w.r + 2 * w.s) / 8) for w in self.weights]
        self.jets = JetEvaluator(ode.f, ring)
        self.i_col = ring.jet_index[(0, 0, 4)]
        self.h_eval = PolyEvaluator(ring, self.alg.ctx.require_h())

    def values(self, z: Sequence[float]) -> np.ndarray:
        jets = self.jets(z)
        I = jets[self.i_col]
        H = self.h_eval(jets)
        if abs(I) < SINGULAR_EPS or abs(H) < SINGULAR_EPS:
            raise ZeroDivisionError("I or H vanishes at the sample point")
        with np.errstate(all="raise"):
            try:
                raw = [
                    complex(c(jets)) * abs(I) ** float(a) * abs(H) ** float(b)
                    for c, (a, b) in zip(self.compiled, self.exponents, strict=True)
                ]
            except FloatingPointError as err:
                raise ZeroDivisionError(str(err)) from err
        out = np.array([v.real for v in raw])
        if not np.all(np.isfinite(out)):
            raise ZeroDivisionError("non-finite invariant value")
        return out

    def jacobian(self, z: Sequence[float]) -> np.ndarray:
        return stencil_jacobian(self.values, np.asarray(z, dtype=float))

    def sign_factors(self, sigma: tuple[int, int]) -> np.ndarray:
        """σ1^r σ2^s per listed invariant."""
        return np.array([sigma[0] ** int(w.r) * sigma[1] ** int(w.s) for w in self.weights], dtype=float)


def stencil_jacobian(fn: Callable[[Sequence[float]], np.ndarray], z: np.ndarray) -> np.ndarray:
    """Jacobian of fn at z by a fourth-order central stencil, one column per coordinate."""
    columns = []
    for axis in range(len(z)):
        h = 1e-3 * max(1.0, abs(z[axis]))
        e = np.zeros(len(z))
        e[axis] = h
        f2, f1 = fn(z + 2 * e), fn(z + e)
        b1, b2 = fn(z - e), fn(z - 2 * e)
        columns.append((-f2 + 8 * f1 - 8 * b1 + b2) / (12 * h))
    return np.stack(columns, axis=1)


def numeric_rank(matrix: np.ndarray, rtol: float) -> tuple[int, list[float]]:
    """Rank by singular values with threshold rtol·σ_max."""
    if matrix.size == 0:
        return 0, []
    s = np.linalg.svd(matrix, compute_uv=False)
    if s[0] == 0:
        return 0, s.tolist()
    return int(np.sum(s > rtol * s[0])), s.tolist()


def row_scaled(matrix: np.ndarray, values: np.ndarray) -> np.ndarray:
    # relative derivatives, so rank does not depend on the size of each invariant
    scale = 1.0 + np.abs(values)
    return matrix / scale[:, None]


def _evaluate_samples(
    evaluator: RestrictedInvariants,
    points: np.ndarray,
    workers: int,
    with_jacobian: bool,
) -> list[tuple[int, np.ndarray, np.ndarray | None]]:
    def task(i: int) -> tuple[int, np.ndarray, np.ndarray | None]:
        z = points[i]
        vals = evaluator.values(z)
        jac = evaluator.jacobian(z) if with_jacobian else None
        return i, vals, jac

    results: list[tuple[int, np.ndarray, np.ndarray | None]] = []
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        futures = {executor.submit(task, i): i for i in range(len(points))}
        for future in as_completed(futures):
            try:
                results.append(future.result())
            except (ZeroDivisionError, SamplingError, OverflowError, ValueError) as err:
                logger.debug("Discarded singular sample %d: %s", futures[future], err)
    results.sort(key=lambda item: item[0])
    return results


@dataclass
class Signature:
    """Sampled signature of a generic equation."""

    ode: ODE
    names: tuple[str, ...]
    points: np.ndarray
    values: np.ndarray
    rank: int
    ranks: list[int] = field(default_factory=list)
    singular_values: list[list[float]] = field(default_factory=list)

    @property
    def coordinates(self) -> np.ndarray:
        return self.values[:, : len(COORDINATE_NAMES)]

    @property
    def signature_values(self) -> np.ndarray:
        n = len(COORDINATE_NAMES)
        return self.values[:, n : n + len(SIGNATURE_NAMES)]


def _require_generic(ode: ODE, config: TresseConfig, box: Box | None = None) -> None:
    found = stratum(ode, config, box)
    if found is Stratum.CUBIC:
        raise StratumError("I vanishes identically (cubic stratum); use the linearize pipeline")
    if found is Stratum.H_NULL:
        raise StratumError("H vanishes identically; normalized invariants are undefined")


def modal_rank(jacobians: list[np.ndarray], values: list[np.ndarray], rtol: float) -> tuple[int, list[int], list[list[float]]]:
    ranks: list[int] = []
    svals: list[list[float]] = []
    for jac, vals in zip(jacobians, values, strict=True):
        rank, s = numeric_rank(row_scaled(jac, vals), rtol)
        ranks.append(rank)
        svals.append(s)
    if not ranks:
        raise SamplingError("All sample points are singular")
    modal = Counter(ranks).most_common(1)[0][0]
    logger.info("Rank votes %s -> %d", dict(Counter(ranks)), modal)
    return modal, ranks, svals


def signature(
    ode: ODE,
    config: TresseConfig | None = None,
    names: Sequence[str] = WIDE_LIST,
    box: Box | None = None,
) -> Signature:
    """Sample the invariant collection of a generic equation.

    Raises:
        StratumError: On the cubic or H = 0 strata.
        SamplingError: If every sample is singular.
    """
    cfg = config or TresseConfig()
    _require_generic(ode, cfg, box)
    evaluator = RestrictedInvariants(ode, names, algebra(cfg.max_order))
    points = sample_box(box or default_box(cfg), cfg.classify.samples, cfg.sampling.seed)
    samples = _evaluate_samples(evaluator, points, cfg.classify.workers, with_jacobian=False)
    if not samples:
        raise SamplingError("All sample points are singular")
    kept = np.array([points[i] for i, _, _ in samples])
    values = np.array([v for _, v, _ in samples])
    rank_n = min(cfg.classify.rank_samples, len(samples))
    coord_idx = [names.index(n) for n in COORDINATE_NAMES]
    jacobians = []
    rank_values = []
    for row in range(rank_n):
        try:
            jacobians.append(evaluator.jacobian(kept[row])[coord_idx])
            rank_values.append(values[row][coord_idx])
        except ZeroDivisionError as err:
            logger.debug("Rank sample skipped: %s", err)
    rank, ranks, svals = modal_rank(jacobians, rank_values, cfg.classify.svd_rtol)
    logger.info("Signature of %s: %d samples, coordinate rank %d", ode, len(samples), rank)
    return Signature(ode, tuple(names), kept, values, rank, ranks, svals)


@dataclass
class RankReport:
    """Functional rank of the order <= 6 invariants and the symmetry dimension."""

    rank: int
    dimension: int
    stratum: Stratum
    names: tuple[str, ...] = ()
    ranks: list[int] = field(default_factory=list)
    singular_values: list[list[float]] = field(default_factory=list)
    note: str = ""


RANK_TO_DIMENSION = {0: 3, 1: 2, 2: 1, 3: 0}


def symmetry_dimension(ode: ODE, config: TresseConfig | None = None, box: Box | None = None) -> RankReport:
    """Dimension of the point symmetry algebra from the functional rank.

    Raises:
        StratumError: On the H = 0 stratum off the cubic class.
        SamplingError: If every sample is singular.
    """
    cfg = config or TresseConfig()
    found = stratum(ode, cfg, box)
    if found is Stratum.CUBIC:
        from tresse.core.projective import cubic_symmetry_dimension

        return cubic_symmetry_dimension(ode, cfg)
    if found is Stratum.H_NULL:
        raise StratumError("H vanishes identically; the normalized invariants are undefined")
    evaluator = RestrictedInvariants(ode, RANK_LIST, algebra(cfg.max_order))
    points = sample_box(box or default_box(cfg), cfg.classify.samples, cfg.sampling.seed)[: max(cfg.classify.rank_samples * 3, 1)]
    samples = _evaluate_samples(evaluator, points, cfg.classify.workers, with_jacobian=True)[: cfg.classify.rank_samples]
    jacobians = [jac for _, _, jac in samples if jac is not None]
    values = [vals for _, vals, _ in samples]
    rank, ranks, svals = modal_rank(jacobians, values, cfg.classify.svd_rtol)
    return RankReport(rank, RANK_TO_DIMENSION[rank], found, tuple(RANK_LIST), ranks, svals)


def _pivot_columns(jacobian: np.ndarray, values: np.ndarray, rank: int) -> list[int]:
    """Greedy choice of ``rank`` invariants with independent differentials."""
    scaled = row_scaled(jacobian, values)
    chosen: list[int] = []
    for _ in range(rank):
        best, best_norm = -1, -1.0
        for i in range(len(scaled)):
            if i in chosen:
                continue
            trial = scaled[chosen + [i]]
            norm = np.linalg.svd(trial, compute_uv=False)[-1]
            if norm > best_norm:
                best, best_norm = i, norm
        chosen.append(best)
    return chosen


@dataclass
class EquivalenceReport:
    verdict: Verdict
    reason: str
    rank: int | None = None
    sign_pattern: tuple[int, int] | None = None
    compared: int = 0
    matched: int = 0
    max_discrepancy: float | None = None
    coordinates: tuple[str, ...] = ()


@dataclass
class _Direction:
    compared: int
    mismatched: int
    max_discrepancy: float


class _Matcher:
    """Locates points of a target equation with prescribed coordinate values."""

    def __init__(self, target: RestrictedInvariants, sig: Signature, coords: list[int], config: TresseConfig) -> None:
        self.target = target
        self.sig = sig
        self.coords = coords
        self.cfg = config

    def solve(self, wanted: np.ndarray, start: np.ndarray) -> np.ndarray | None:
        """Damped Gauss–Newton on the coordinate equations."""
        w = start.astype(float)
        tol = 1e-9 * (1.0 + float(np.max(np.abs(wanted))))
        try:
            residual = self.target.values(w)[self.coords] - wanted
        except ZeroDivisionError:
            return None
        for _ in range(self.cfg.classify.newton_max_iter):
            norm = float(np.max(np.abs(residual)))
            if norm <= tol:
                return w
            try:
                jac = self.target.jacobian(w)[self.coords]
            except ZeroDivisionError:
                return None
            step = -np.linalg.pinv(jac) @ residual
            damping = 1.0
            while damping > 1e-4:
                trial = w + damping * step
                try:
                    trial_res = self.target.values(trial)[self.coords] - wanted
                except ZeroDivisionError:
                    damping /= 2
                    continue
                if float(np.max(np.abs(trial_res))) < norm:
                    w, residual = trial, trial_res
                    break
                damping /= 2
            else:
                logger.debug("Gauss-Newton stalled at residual %.3e", norm)
                return None
        return w if float(np.max(np.abs(residual))) <= tol else None


def _compare_direction(
    source: Signature,
    source_eval: RestrictedInvariants,
    target: Signature,
    target_eval: RestrictedInvariants,
    coords: list[int],
    sigma: tuple[int, int],
    config: TresseConfig,
) -> _Direction:
    signs = source_eval.sign_factors(sigma)
    matcher = _Matcher(target_eval, target, coords, config)
    compared = mismatched = 0
    worst = 0.0
    target_coords = target.values[:, coords]
    for row in source.values:
        wanted_all = row * signs
        wanted = wanted_all[coords]
        order = np.argsort(np.max(np.abs(target_coords - wanted), axis=1))
        best: float | None = None
        for start_idx in order[:3]:
            found = matcher.solve(wanted, target.points[start_idx])
            if found is None:
                continue
            try:
                got = target_eval.values(found)
            except ZeroDivisionError:
                continue
            discrepancy = float(np.max(np.abs(got - wanted_all)) / (1.0 + np.max(np.abs(wanted_all))))
            best = discrepancy if best is None else min(best, discrepancy)
            if discrepancy <= config.classify.match_rtol:
                break
        if best is None:
            continue
        compared += 1
        worst = max(worst, best)
        if best > config.classify.match_rtol:
            mismatched += 1
    return _Direction(compared, mismatched, worst)


SIGN_PATTERNS = tuple(product((1, -1), repeat=2))


def equivalent(
    e1: ODE,
    e2: ODE,
    config: TresseConfig | None = None,
    box2: Box | None = None,
) -> EquivalenceReport:
    """Point equivalence by coincidence of the signature manifolds.

    ``box2`` is the sampling region of the second equation (defaults to the
    configured box).
    """
    cfg = config or TresseConfig()
    s1, s2 = stratum(e1, cfg), stratum(e2, cfg, box2)
    if s1 is not s2:
        return EquivalenceReport(Verdict.NOT_EQUIVALENT, f"strata differ: {s1} vs {s2}")
    if s1 is Stratum.CUBIC:
        from tresse.core.projective import cubic_equivalence

        return cubic_equivalence(e1, e2, cfg)
    if s1 is Stratum.H_NULL:
        return EquivalenceReport(Verdict.INCONCLUSIVE, "both equations lie on the H = 0 stratum")

    alg = algebra(cfg.max_order)
    sig1 = signature(e1, cfg)
    sig2 = signature(e2, cfg, box=box2)
    if sig1.rank != sig2.rank:
        return EquivalenceReport(Verdict.NOT_EQUIVALENT, f"coordinate ranks differ: {sig1.rank} vs {sig2.rank}")
    ev1 = RestrictedInvariants(e1, WIDE_LIST, alg)
    ev2 = RestrictedInvariants(e2, WIDE_LIST, alg)
    wide1 = _wide_rank(ev1, sig1, cfg)
    wide2 = _wide_rank(ev2, sig2, cfg)
    if wide1 != wide2:
        return EquivalenceReport(Verdict.NOT_EQUIVALENT, f"invariant ranks differ: {wide1} vs {wide2}", wide1)
    rank = wide1
    if rank == 0:
        return _compare_constants(sig1, sig2, ev1, cfg)
    coords = _pivot_columns(ev1.jacobian(sig1.points[0]), sig1.values[0], rank)
    names = tuple(WIDE_LIST[i] for i in coords)
    logger.info("Matching on coordinates %s", ", ".join(names))
    needed = cfg.classify.min_match_fraction
    best_report: EquivalenceReport | None = None
    all_refuted = True
    for sigma in SIGN_PATTERNS:
        forward = _compare_direction(sig1, ev1, sig2, ev2, coords, sigma, cfg)
        backward = _compare_direction(sig2, ev2, sig1, ev1, coords, sigma, cfg)
        compared = forward.compared + backward.compared
        mismatched = forward.mismatched + backward.mismatched
        worst = max(forward.max_discrepancy, backward.max_discrepancy)
        enough = (
            forward.compared >= needed * len(sig1.values) and backward.compared >= needed * len(sig2.values)
        )
        logger.info("Sign pattern %s: compared %d, mismatched %d", sigma, compared, mismatched)
        if mismatched == 0 and enough:
            return EquivalenceReport(
                Verdict.EQUIVALENT, "signature manifolds coincide", rank, sigma, compared, compared, worst, names
            )
        if mismatched == 0:
            all_refuted = False
        if best_report is None or compared - mismatched > best_report.matched:
            best_report = EquivalenceReport(
                Verdict.INCONCLUSIVE, "", rank, sigma, compared, compared - mismatched, worst, names
            )
    assert best_report is not None
    if all_refuted:
        best_report.verdict = Verdict.NOT_EQUIVALENT
        best_report.reason = "matched coordinates carry different invariant values"
    else:
        best_report.reason = "too few coordinate matches"
    return best_report


def _wide_rank(evaluator: RestrictedInvariants, sig: Signature, config: TresseConfig) -> int:
    jacobians, values = [], []
    for z, vals in list(zip(sig.points, sig.values, strict=True))[: config.classify.rank_samples]:
        try:
            jacobians.append(evaluator.jacobian(z))
            values.append(vals)
        except ZeroDivisionError:
            continue
    return modal_rank(jacobians, values, config.classify.svd_rtol)[0]


def _compare_constants(
    sig1: Signature, sig2: Signature, evaluator: RestrictedInvariants, config: TresseConfig
) -> EquivalenceReport:
    c1 = np.median(sig1.values, axis=0)
    c2 = np.median(sig2.values, axis=0)
    best = math.inf
    for sigma in SIGN_PATTERNS:
        diff = float(np.max(np.abs(c1 * evaluator.sign_factors(sigma) - c2)) / (1.0 + np.max(np.abs(c1))))
        if diff <= config.classify.match_rtol:
            return EquivalenceReport(Verdict.EQUIVALENT, "constant invariants coincide", 0, sigma, 1, 1, diff)
        best = min(best, diff)
    return EquivalenceReport(Verdict.NOT_EQUIVALENT, "constant invariants differ", 0, None, 1, 0, best)


@dataclass(frozen=True)
class OrbitCodim:
    """Measured codimension of a generic orbit in J^k next to the closed form."""

    k: int
    codim: int
    expected: int
    ranks: list[int] = field(default_factory=list)

    @property
    def matches(self) -> bool:
        return self.codim == self.expected


def orbit_codim(
    k: int,
    trials: int = 3,
    config: TresseConfig | None = None,
) -> OrbitCodim:
    """Codimension of a generic orbit in J^k from the rank of the prolonged action.

    The common codimension over the trials is compared with
    ``expected_codim(k)``; a mismatch is logged as a warning.

    Raises:
        ValueError: If k is outside 4..6 or ranks disagree across trials.
    """
    if not 4 <= k <= 6:
        raise ValueError("orbit_codim supports 4 <= k <= 6")
    cfg = config or TresseConfig()
    ring = JetRing(k + 1)
    columns = [0, 1, 2] + [ring.jet_index[jet] for jet in ring.jets if sum(jet) <= k]
    fields = []
    for deg in range(k + 3):
        for i in range(deg + 1):
            monomial = ring.x ** (deg - i) * ring.y**i
            fields.append((monomial, ring.zero))
            fields.append((ring.zero, monomial))
    rng = np.random.default_rng(cfg.sampling.seed)
    dim = len(columns)
    ranks = []
    for trial in range(trials):
        point = np.zeros(len(ring.gens))
        point[:] = rng.integers(-9, 10, size=len(ring.gens)) / rng.integers(1, 5, size=len(ring.gens))
        point[ring.jet_index[(0, 0, 4)]] = 1.0 + abs(point[ring.jet_index[(0, 0, 4)]])
        rows = []
        for a, b in fields:
            xi = prolongation(ring, a, b)
            rows.append([PolyEvaluator(ring, xi.image(c))(point) for c in columns])
        matrix = np.array(rows, dtype=float)
        scale = np.max(np.abs(matrix), axis=0)
        scale[scale == 0] = 1.0
        rank, _ = numeric_rank(matrix / scale, cfg.classify.svd_rtol)
        logger.info("orbit_codim k=%d trial %d: rank %d of %d", k, trial, rank, dim)
        ranks.append(rank)
    if len(set(ranks)) != 1:
        raise ValueError(f"Rank unstable across trials: {ranks}")
    result = OrbitCodim(k, dim - ranks[0], expected_codim(k), ranks)
    if not result.matches:
        logger.warning("Orbit codimension in J^%d is %d, expected %d", k, result.codim, result.expected)
    return result


def expected_codim(k: int) -> int:
    """max(0, (k³ − 25k + 18)/6)."""
    return max(0, (k**3 - 25 * k + 18) // 6)


def tresse_derivatives(
    ode: ODE,
    z: Sequence[float],
    coords: Sequence[str] = COORDINATE_NAMES,
    config: TresseConfig | None = None,
) -> np.ndarray:
    """The derivations ∂/∂J_i in the frame (∂x, ∂y, ∂p) at z.

    Row i holds the components of ∂/∂J_i, i.e. the inverse of [∂_a J_b].

    Raises:
        StratumError: If the coordinates are dependent at z.
    """
    cfg = config or TresseConfig()
    if len(coords) != 3:
        raise ValueError("Tresse derivatives need three coordinates")
    evaluator = RestrictedInvariants(ode, coords, algebra(cfg.max_order))
    jac = evaluator.jacobian(z)
    if abs(np.linalg.det(jac)) <= cfg.classify.svd_rtol * np.max(np.abs(jac)) ** 3:
        raise StratumError("Coordinate invariants are dependent at the point")
    return np.linalg.inv(jac).T


def image_box(point_map_x: sympy.Expr, point_map_y: sympy.Expr, p_new: sympy.Expr, box: Box, seed: int) -> Box:
    """Bounding box of the image of sampled points under Φ₂."""
    pts = sample_box(box, 64, seed)
    fx = sympy.lambdify((X, Y), point_map_x, "numpy")
    fy = sympy.lambdify((X, Y), point_map_y, "numpy")
    fp = sympy.lambdify((X, Y, P), p_new, "numpy")
    xs = np.array([complex(fx(x, y)).real for x, y, _ in pts])
    ys = np.array([complex(fy(x, y)).real for x, y, _ in pts])
    ps = np.array([complex(fp(x, y, p)).real for x, y, p in pts])
    finite = np.isfinite(ps)
    return (
        (float(xs.min()), float(xs.max())),
        (float(ys.min()), float(ys.max())),
        (float(ps[finite].min()), float(ps[finite].max())),
    )


def equivalent_under_map(
    ode: ODE, point_map: PointMap, config: TresseConfig | None = None
) -> tuple[TransformResult, EquivalenceReport]:
    """Compare E with its image under a point map, sampling the image of the box.

    Raises:
        MapError: If the map has no symbolic inverse or a vanishing Jacobian.
    """
    cfg = config or TresseConfig()
    moved = transform_ode(point_map, ode, cfg.sampling)
    if moved.ode is None:
        raise MapError(f"Point map ({point_map.X}, {point_map.Y}) has no symbolic inverse")
    box2 = image_box(point_map.X, point_map.Y, moved.p_new, default_box(cfg), cfg.sampling.seed)
    return moved, equivalent(ode, moved.ode, cfg, box2)


# The H = 0 profile family y'' = φ(p)/x

ProfileKind = Literal["printed", "derived"]

_F = sympy.symbols("f0:4")


def _printed_third(f0: float, f1: float, f2: float) -> float:
    # φ'''·φ·(φ − 1) = φ''·(2φ − 2 − φ')
    return f2 * (2 * f0 - 2 - f1) / (f0 * (f0 - 1))


_PRINTED_RHS = _F[2] * (2 * _F[0] - 2 - _F[1]) / (_F[0] * (_F[0] - 1))
# φ'''' along the printed flow, by the chain rule
_printed_fourth = sympy.lambdify(
    _F[:3],
    sympy.diff(_PRINTED_RHS, _F[0]) * _F[1] + sympy.diff(_PRINTED_RHS, _F[1]) * _F[2]
    + sympy.diff(_PRINTED_RHS, _F[2]) * _PRINTED_RHS,
    "numpy",
)


def _derived_fourth(f0: float, f1: float, f2: float, f3: float) -> float:
    return (3 * f0 * f3 - f1 * f2 - 2 * f2) / f0**2


@dataclass
class ProfileReport:
    """Restricted H along a numerically integrated profile φ."""

    kind: str
    points: list[float] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=math.inf)


def _profile_jets(ring: JetRing, x: float, p: float, phi: Sequence[float]) -> np.ndarray:
    """Jets of f = φ(p)/x: u^k_{l0} = (−1)^l l!·φ^(k)/x^{l+1}, zero for m > 0."""
    values = np.zeros(len(ring.gens))
    values[:3] = [x, 1.0, p]
    for (l, m, k), col in ring.jet_index.items():
        if m == 0 and k < len(phi):
            values[col] = (-1) ** l * math.factorial(l) * phi[k] / x ** (l + 1)
    return values


def h_null_profile(
    kind: ProfileKind = "derived",
    initial: Sequence[float] = (2.0, 0.5, 0.3, 0.1),
    span: tuple[float, float] = (0.0, 0.5),
    count: int = 10,
    x: float = 1.3,
) -> ProfileReport:
    """Integrate a profile ODE for φ and evaluate the relative size of H on y'' = φ(p)/x.

    ``derived`` integrates φ'''' = (3φφ''' − φ'φ'' − 2φ'')/φ², along which H
    vanishes; ``printed`` integrates the third-order equation
    φ'''φ(φ − 1) = φ''(2φ − 2 − φ').
    """
    from scipy.integrate import solve_ivp

    if kind == "derived":
        def rhs(_: float, s: np.ndarray) -> list[float]:
            return [s[1], s[2], s[3], _derived_fourth(*s)]

        state0 = list(initial[:4])
    else:
        def rhs(_: float, s: np.ndarray) -> list[float]:
            return [s[1], s[2], _printed_third(*s)]

        state0 = list(initial[:3])
    grid = np.linspace(span[0], span[1], count)
    solution = solve_ivp(rhs, span, state0, t_eval=grid, rtol=1e-11, atol=1e-12, method="DOP853")
    if not solution.success:
        raise SamplingError(f"Profile integration failed: {solution.message}")
    alg = algebra()
    ring = alg.ring
    H = alg.ctx.require_h()
    h_eval = PolyEvaluator(ring, H)
    scale_eval = PolyEvaluator(ring, ring.ring.from_dict({m: abs(c) for m, c in H.items()}))
    report = ProfileReport(kind)
    for i, p in enumerate(solution.t):
        s = solution.y[:, i]
        if kind == "derived":
            phi = [*s, _derived_fourth(*s)]
        else:
            third = _printed_third(*s)
            phi = [*s, third, float(_printed_fourth(*s))]
        values = _profile_jets(ring, x, float(p), phi)
        h = float(h_eval(values))
        scale = float(scale_eval(np.abs(values)))
        report.points.append(float(p))
        report.residuals.append(abs(h) / max(scale, 1e-300))
    logger.info("Profile %s: max relative H %.3e", kind, report.max_residual)
    return report


# Invariant summary of one equation

SYMBOLIC_NAMES = ("I", "H", "K")


@dataclass
class InvariantSummary:
    """One invariant restricted to an equation: expression (when computed) and sampled values."""

    name: str
    weight: str | None
    expr: sympy.Expr | None
    values: list[float] = field(default_factory=list)


@dataclass
class Description:
    ode: ODE
    stratum: Stratum
    points: list[tuple[float, float, float]]
    invariants: list[InvariantSummary] = field(default_factory=list)
    rank: RankReport | None = None
    note: str = ""


def _sampled(e: sympy.Expr, points: Sequence[tuple[float, float, float]]) -> list[float]:
    fn = sympy.lambdify((X, Y, P), e, "numpy")
    out = []
    for z in points:
        with np.errstate(all="ignore"):
            value = complex(fn(*z))
        out.append(value.real if np.isfinite(value) else math.nan)
    return out


def describe(ode: ODE, config: TresseConfig | None = None, count: int = 3) -> Description:
    """Restricted I, H, K and the barred invariants of a generic equation.

    On the cubic stratum the Liouville quantities L1, L2 and F3 replace the
    barred invariants; on H = 0 only I and H are reported.
    """
    cfg = config or TresseConfig()
    alg = algebra(cfg.max_order)
    found = stratum(ode, cfg)
    points = [tuple(float(c) for c in z) for z in sample_box(default_box(cfg), count, cfg.sampling.seed)]
    result = Description(ode, found, points)  # type: ignore[arg-type]
    names = SYMBOLIC_NAMES if found is Stratum.GENERIC else SYMBOLIC_NAMES[:2]
    for name in names:
        rel = alg.rel(name)
        expr = normalize(restrict(rel.expr, ode))
        result.invariants.append(InvariantSummary(name, str(rel.weight), expr, _sampled(expr, points)))
    if found is Stratum.CUBIC:
        from tresse.core.projective import F3_WEIGHT, LinearizationVerdict, linearizable

        report = linearizable(ode, cfg)
        assert report.data is not None
        data = report.data
        result.invariants.append(InvariantSummary("L1", "tensor", data.L1, _sampled(data.L1, points)))
        result.invariants.append(InvariantSummary("L2", "tensor", data.L2, _sampled(data.L2, points)))
        result.invariants.append(InvariantSummary("F3", f"density {F3_WEIGHT}", data.F3, _sampled(data.F3, points)))
        if report.verdict is LinearizationVerdict.LINEARIZABLE:
            result.note = "trivial stratum I=H=0 (equivalent to y'' = 0)"
        else:
            result.note = "cubic stratum I=0"
        result.rank = symmetry_dimension(ode, cfg)
        return result
    if found is Stratum.H_NULL:
        result.note = "H=0 stratum; normalized invariants are undefined"
        return result
    evaluator = RestrictedInvariants(ode, WIDE_LIST, alg)
    columns: list[list[float]] = [[] for _ in WIDE_LIST]
    for z in points:
        try:
            row = evaluator.values(z)
        except ZeroDivisionError as err:
            logger.debug("Singular point %s: %s", z, err)
            row = np.full(len(WIDE_LIST), math.nan)
        for column, value in zip(columns, row, strict=True):
            column.append(float(value))
    for name, column in zip(WIDE_LIST, columns, strict=True):
        result.invariants.append(InvariantSummary(name, str(alg.rel(BARRED[name]).weight) + " barred", None, column))
    result.rank = symmetry_dimension(ode, cfg)
    return result


__all__ = [
    "Box",
    "Description",
    "EquivalenceReport",
    "InvariantSummary",
    "OrbitCodim",
    "RankReport",
    "RestrictedInvariants",
    "Signature",
    "Stratum",
    "Verdict",
    "describe",
    "equivalent",
    "equivalent_under_map",
    "expected_codim",
    "h_null_profile",
    "image_box",
    "orbit_codim",
    "numeric_stratum",
    "signature",
    "stratum",
    "symmetry_dimension",
    "tresse_derivatives",
]
