import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate

from horolab import seeding
from horolab import utils
from horolab.exceptions import (
    NoNegativeWeightError,
    NoPositiveWeightError,
    ZeroVectorError,
)
from horolab.linalg import CartanFlow, HorosphericalChart, horospherical_chart
from horolab.quadrature import QuadratureScheme
from horolab.representation import (
    RepSpace,
    WeightVectorCoeffs,
    orbit_matrices,
    orbit_norm_floor,
    sample_unit_vectors,
    weight_decomposition,
    weight_string_order,
)

logger = logging.getLogger("django-horolab.horolab.contraction")

# Upper bound on vectors x nodes x dim floats held at once while integrating.
RATIO_BLOCK = 4_000_000
# Relative slack allowed when checking that C(delta) is non-increasing in R.
MONOTONE_TOLERANCE = 0.02


@dataclass(frozen=True)
class TheoreticalBound:
    alpha: float
    tau_exponent: float
    decay_exponent: float
    tau: float
    bound: float


@dataclass(frozen=True)
class ContractionReport:
    rep: str
    k: int
    R: float
    delta: float
    empirical_c: float
    theoretical_c: float
    tau: float
    delta_max: float
    decay_exponent: float
    witness: Tuple[float, ...]


@dataclass
class EMConditionReport:
    delta: float
    R_values: Tuple[float, ...]
    reports: List[ContractionReport]
    global_c: Tuple[float, ...]
    threshold: Optional[float]
    monotone: bool
    orbit_floor: Dict[str, float]
    delta_max: Dict[str, float]
    warnings: List[str] = field(default_factory=list)

    @property
    def contracts(self) -> bool:
        return self.threshold is not None


def _extreme_weights(rep: RepSpace) -> Tuple[float, float]:
    if not rep.negative:
        raise NoNegativeWeightError()
    if not rep.positive:
        raise NoPositiveWeightError()
    beta = max(rep.exact_weights[i] for i in rep.positive)
    lowest = min(rep.exact_weights[i] for i in rep.negative)
    return float(beta), float(lowest)


def delta_max(rep: RepSpace, alpha: float) -> float:
    beta, lowest = _extreme_weights(rep)
    return alpha * (-lowest) / beta


def theoretical_bound(rep: RepSpace, delta: float, alpha: float, R: float = 1.0):
    """
    Decay of the tau-optimized estimate. chi_a is linear in log R, so both tau and the
    bound are powers of R; the absolute constants are left at 1 here and fitted from
    measured ratios by the caller.
    """
    beta, lowest = _extreme_weights(rep)
    share = delta / (delta + alpha)
    tau_exponent = share * (lowest - beta)
    decay_exponent = -delta * ((1.0 - share) * beta + share * lowest)
    return TheoreticalBound(
        alpha=alpha,
        tau_exponent=tau_exponent,
        decay_exponent=decay_exponent,
        tau=R ** tau_exponent,
        bound=R ** decay_exponent,
    )


def improved_decay_exponent(rep: RepSpace, delta: float, p: int) -> float:
    return theoretical_bound(rep, delta, 1.0 / p).decay_exponent


def _coefficients(rep: RepSpace, v: Union[WeightVectorCoeffs, Sequence[float]]):
    coeffs = v.coeffs if isinstance(v, WeightVectorCoeffs) else np.asarray(v, dtype=float)
    if not np.any(coeffs):
        raise ZeroVectorError()
    return coeffs


def _ratio_table(
    rep: RepSpace,
    matrices: np.ndarray,
    scheme: QuadratureScheme,
    R_values: Sequence[float],
    delta: float,
    vectors: np.ndarray,
) -> np.ndarray:
    """
    Normalized integrals of |rho(a_{log R} h) v|^{-delta}, shape (len(R_values), len(vectors)).
    """
    table = np.empty((len(R_values), vectors.shape[0]))
    block = max(1, RATIO_BLOCK // (matrices.shape[0] * rep.dim))
    scales = [np.asarray(R, dtype=float) ** rep.weights for R in R_values]
    for start in range(0, vectors.shape[0], block):
        chunk = vectors[start : start + block]
        images = np.einsum("mij,sj->smi", matrices, chunk)
        normalizer = np.linalg.norm(chunk, axis=1) ** delta
        for row, scale in enumerate(scales):
            integrand = np.linalg.norm(images * scale, axis=-1) ** (-delta)
            table[row, start : start + block] = (
                integrand @ scheme.weights / scheme.total
            ) * normalizer
    return table


def empirical_ratio(
    rep: RepSpace,
    chart: HorosphericalChart,
    flow: CartanFlow,
    R: float,
    delta: float,
    v: Union[WeightVectorCoeffs, Sequence[float]],
    scheme: Optional[QuadratureScheme] = None,
) -> float:
    coeffs = _coefficients(rep, v)
    if scheme is None:
        scheme = QuadratureScheme.default(chart.dim)
    matrices = orbit_matrices(rep, chart, scheme.nodes)
    return float(_ratio_table(rep, matrices, scheme, [R], delta, coeffs[None])[0, 0])


def adaptive_empirical_ratio(
    rep: RepSpace,
    chart: HorosphericalChart,
    flow: CartanFlow,
    R: float,
    delta: float,
    v: Union[WeightVectorCoeffs, Sequence[float]],
) -> float:
    """
    The same ratio through scipy's adaptive quadrature, for one-dimensional charts.
    """
    if chart.dim != 1:
        raise ValueError("Adaptive ratios need a one-dimensional chart.")
    coeffs = _coefficients(rep, v)
    scale = float(R) ** rep.weights

    def integrand(t):
        image = orbit_matrices(rep, chart, [[t]])[0] @ coeffs
        return float(np.linalg.norm(image * scale) ** (-delta))

    # Point the integrator at the near-zero of the orbit, if any.
    grid = np.linspace(0.0, 1.0, 2049)
    norms = np.linalg.norm(orbit_matrices(rep, chart, grid[:, None]) @ coeffs * scale, axis=1)
    hint = float(grid[int(norms.argmin())])
    points = [hint] if 0.0 < hint < 1.0 else None
    value, _ = integrate.quad(
        integrand, 0.0, 1.0, points=points, epsabs=1e-13, epsrel=1e-12, limit=500
    )
    return value * float(np.linalg.norm(coeffs)) ** delta


def expansion_envelope(
    flow: CartanFlow,
    chart: HorosphericalChart,
    R: float,
    scheme: Optional[QuadratureScheme] = None,
    ks: Optional[Sequence[int]] = None,
) -> float:
    """
    max over wedge reps and nodes of the operator norm of rho(a_{log R} h).
    """
    if scheme is None:
        scheme = QuadratureScheme.default(chart.dim)
    envelope = 0.0
    for k in ks or range(1, flow.n):
        rep = weight_decomposition(k, flow)
        matrices = orbit_matrices(rep, chart, scheme.nodes)
        scaled = matrices * (float(R) ** rep.weights)[None, :, None]
        envelope = max(envelope, float(np.linalg.norm(scaled, ord=2, axis=(1, 2)).max()))
    return envelope


def probe_vectors(rep: RepSpace, samples: int, seed: int) -> np.ndarray:
    """
    Sphere samples, the weight basis, and random unit vectors inside V_-.
    """
    blocks = [sample_unit_vectors(rep.dim, samples, seed), np.eye(rep.dim)]
    if len(rep.negative) > 1:
        rng = seeding.generator(seed, "negative", rep.k)
        inside = np.zeros((max(1, samples // 10), rep.dim))
        inside[:, list(rep.negative)] = rng.standard_normal(
            (inside.shape[0], len(rep.negative))
        )
        blocks.append(inside / np.linalg.norm(inside, axis=1, keepdims=True))
    return np.concatenate(blocks)


def _rep_reports(rep, chart, R_values, delta, samples, seed, scheme):
    vectors = probe_vectors(rep, samples, seed)
    matrices = orbit_matrices(rep, chart, scheme.nodes)
    table = _ratio_table(rep, matrices, scheme, R_values, delta, vectors)

    p = weight_string_order(rep, chart)
    dmax = delta_max(rep, 1.0 / p)
    bound = theoretical_bound(rep, delta, 1.0 / p)

    # Envelope constant fitted on the two largest R values.
    tail = np.argsort(R_values)[-2:]
    constant = max(
        float(table[j].max()) / float(R_values[j]) ** bound.decay_exponent for j in tail
    )

    reports = []
    for row, R in enumerate(R_values):
        worst = int(table[row].argmax())
        reports.append(
            ContractionReport(
                rep=rep.name,
                k=rep.k,
                R=float(R),
                delta=float(delta),
                empirical_c=float(table[row, worst]),
                theoretical_c=constant * float(R) ** bound.decay_exponent,
                tau=float(R) ** bound.tau_exponent,
                delta_max=dmax,
                decay_exponent=bound.decay_exponent,
                witness=tuple(float(c) for c in vectors[worst]),
            )
        )
    return rep, dmax, reports


def find_threshold(R_values: Sequence[float], constants: Sequence[float]) -> Optional[float]:
    """
    Smallest R such that C < 1 at that R and at every larger R in the list.
    """
    threshold = None
    for R, c in sorted(zip(R_values, constants), reverse=True):
        if c >= 1.0:
            break
        threshold = R
    return threshold


def verify_em_condition(
    flow: CartanFlow,
    R_values: Sequence[float],
    delta: float,
    samples: int = 100,
    scheme: Optional[QuadratureScheme] = None,
    seed: int = 0,
    ks: Optional[Sequence[int]] = None,
) -> EMConditionReport:
    chart = horospherical_chart(flow)
    if scheme is None:
        scheme = QuadratureScheme.default(chart.dim, seed)
    R_values = tuple(float(R) for R in R_values)
    reps = [weight_decomposition(k, flow) for k in (ks or range(1, flow.n))]

    with ThreadPoolExecutor(max_workers=utils.get_threads()) as executor:
        results = list(
            executor.map(
                lambda rep: _rep_reports(rep, chart, R_values, delta, samples, seed, scheme),
                reps,
            )
        )

    reports, warnings, dmax_by_rep, floors = [], [], {}, {}
    for rep, dmax, rep_reports in results:
        reports.extend(rep_reports)
        dmax_by_rep[rep.name] = dmax
        floors[rep.name] = orbit_norm_floor(rep, chart, seed=seed)
        if delta >= dmax:
            message = "delta={} is not below delta_max={} for {}".format(
                delta, dmax, rep.name
            )
            warnings.append(message)
            logger.warning(message, extra={"rep": rep.name, "delta": delta})

    global_c = tuple(
        max(r.empirical_c for r in reports if r.R == R) for R in R_values
    )
    ordered = [c for _, c in sorted(zip(R_values, global_c))]
    monotone = all(
        later <= earlier * (1.0 + MONOTONE_TOLERANCE)
        for earlier, later in zip(ordered, ordered[1:])
    )
    threshold = find_threshold(R_values, global_c)
    logger.debug(
        "C(%s) over R=%s: %s",
        delta,
        R_values,
        global_c,
        extra={"delta": delta, "threshold": threshold},
    )
    return EMConditionReport(
        delta=float(delta),
        R_values=R_values,
        reports=reports,
        global_c=global_c,
        threshold=threshold,
        monotone=monotone,
        orbit_floor=floors,
        delta_max=dmax_by_rep,
        warnings=warnings,
    )
