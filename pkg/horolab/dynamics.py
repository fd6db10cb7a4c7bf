import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Number
from typing import List, Optional, Sequence, Tuple

import numpy as np

from horolab import seeding
from horolab import utils
from horolab.exceptions import (
    BadParamsError,
    BudgetExceededError,
    ContractionNotEstablishedError,
    NoDecayWindowError,
)
from horolab.lattice import (
    DriftParameters,
    Lattice,
    injectivity_proxy,
    lattice_minima,
    minima_many,
    reduce_many,
)
from horolab.linalg import (
    CartanFlow,
    cartan_matrix,
    conjugate_coordinates,
    exp_nilpotent_many,
    horospherical_chart,
)
from horolab.observables import MargulisObservable, Observable
from horolab.quadrature import QuadratureScheme

logger = logging.getLogger("django-horolab.horolab.dynamics")

# Errors at or below this level count as exact; no decay is fitted to them.
EXACT_ERROR = 1e-12
# Relative slack on the drift comparison for quadrature and sampling error.
DRIFT_TOLERANCE = 0.01
DEFAULT_PATHS = 4096
# Outer nodes per block in the two-stage average.
SPLIT_BLOCK = 64
# Largest outer x inner node product evaluated for one two-stage average.
SPLIT_BUDGET = 4_000_000


@dataclass(frozen=True)
class DriftStep:
    m: int
    measured: float
    bound: float
    mass_in_k: float

    @property
    def holds(self) -> bool:
        return self.measured <= self.bound * (1.0 + DRIFT_TOLERANCE)


@dataclass
class DriftCertificate:
    x0: Lattice
    R: float
    params: DriftParameters
    u0: float
    k_threshold: float
    recurrence_time: float
    epsilon_tail: float
    per_step: List[DriftStep] = field(default_factory=list)
    complete: bool = True

    @property
    def mass_in_k(self) -> Optional[float]:
        return self.per_step[-1].mass_in_k if self.per_step else None

    @property
    def bound_holds(self) -> bool:
        return all(step.holds for step in self.per_step)

    @property
    def tight(self) -> bool:
        return all(
            step.mass_in_k > 1.0 - self.epsilon_tail
            for step in self.per_step
            if step.m > self.recurrence_time
        )

    @property
    def passes(self) -> bool:
        return self.bound_holds and self.tight


@dataclass(frozen=True)
class FolnerComposition:
    r: Fraction
    t: Fraction
    m: int
    radius: Fraction
    closed_form: Fraction
    contained: Optional[bool]


@dataclass(frozen=True)
class BadSetMeasure:
    markov_bound: float
    empirical: float
    contraction_bound: Optional[float]
    nodes: int

    @property
    def holds(self) -> bool:
        return self.empirical <= self.markov_bound


@dataclass(frozen=True)
class DecayRow:
    R: float
    value: float
    error: float
    in_window: bool
    split_error: Optional[float] = None


@dataclass
class EquidistReport:
    mean: float
    rows: List[DecayRow]
    gamma: Optional[float]
    window: Tuple[float, ...]
    residual: Optional[float]
    split_exponent: Optional[float] = None


@dataclass(frozen=True)
class MassCondition:
    lhs: float
    rhs: float
    holds: bool


def default_flow(n: int) -> CartanFlow:
    """
    diag(e^{t/2}, 1, ..., 1, e^{-t/2}); for SL_2 the standard geodesic flow.
    """
    return CartanFlow.from_weights([Fraction(1, 2)] + [0] * (n - 2) + [Fraction(-1, 2)])


def _chart_and_scheme(x: Lattice, flow, scheme):
    flow = flow or default_flow(x.n)
    chart = horospherical_chart(flow)
    if scheme is None:
        scheme = QuadratureScheme.default(chart.dim)
    return flow, chart, scheme


def translated_average(
    f: Observable,
    x: Lattice,
    R: float,
    scheme: Optional[QuadratureScheme] = None,
    flow: Optional[CartanFlow] = None,
) -> float:
    """
    A_R f(x): the average of f(a_{log R} h x) over the unit horospherical box.
    """
    flow, chart, scheme = _chart_and_scheme(x, flow, scheme)
    matrices = cartan_matrix(flow, math.log(R)) @ exp_nilpotent_many(chart, scheme.nodes)
    return scheme.integrate(f.evaluate_many(matrices @ x.basis))


def horospherical_average(
    f: Observable,
    x: Lattice,
    R: float,
    scheme: Optional[QuadratureScheme] = None,
    flow: Optional[CartanFlow] = None,
) -> float:
    """
    B_R f(x): the average of f(h x) over the box a_{log R} B_1 a_{-log R}, computed in
    the conjugated Lie coordinates rather than through a_{-log R} x.
    """
    flow, chart, scheme = _chart_and_scheme(x, flow, scheme)
    points = conjugate_coordinates(chart, scheme.nodes, math.log(R))
    return scheme.integrate(f.evaluate_many(exp_nilpotent_many(chart, points) @ x.basis))


def horocycle_scheme(R: float, nodes_per_unit: int, order: int = 64) -> QuadratureScheme:
    """
    One-dimensional rule whose node density along the horocycle of length R is at
    least `nodes_per_unit`.
    """
    panels = max(1, int(math.ceil(R * nodes_per_unit / order)))
    return QuadratureScheme.gauss_legendre(1, order, panels)


def _drift_bound(params: DriftParameters, u0: float, m: int) -> float:
    if m == 1:
        return params.c1 * u0 + params.b
    return params.c1 ** m * u0 + params.b / (1.0 - params.c1)


def verify_drift(
    x: Lattice,
    R: float,
    params: DriftParameters,
    steps: int,
    scheme: Optional[QuadratureScheme] = None,
    flow: Optional[CartanFlow] = None,
    paths: int = DEFAULT_PATHS,
    seed: int = 0,
    epsilon_tail: float = 0.1,
) -> DriftCertificate:
    """
    Compare iterated averages A_R^(m) u against the geometric drift bound.

    The first step is a quadrature over the box. Later steps follow `paths` sample
    paths whose level-m box points come from the stream (seed, "drift", m), so every
    base point sees the same draws. Bases are reduced after each step.
    If steps * dim H exceeds the drift budget, the steps that fit are measured and
    BudgetExceededError carries the partial certificate.
    """
    if params.c1 >= 1.0:
        raise ContractionNotEstablishedError()
    flow, chart, scheme = _chart_and_scheme(x, flow, scheme)
    u = MargulisObservable(params.epsilon, params.delta)
    u0 = u(x)

    budget = utils.get_drift_budget()
    allowed = min(steps, budget // chart.dim)
    certificate = DriftCertificate(
        x0=x,
        R=float(R),
        params=params,
        u0=u0,
        k_threshold=params.k_threshold(epsilon_tail),
        recurrence_time=params.recurrence_time(u0),
        epsilon_tail=epsilon_tail,
        complete=allowed == steps,
    )

    a = cartan_matrix(flow, math.log(R))
    single = a @ exp_nilpotent_many(chart, scheme.nodes) @ x.basis
    single_values = u.evaluate_many(single)
    if allowed >= 1:
        certificate.per_step.append(
            DriftStep(
                m=1,
                measured=scheme.integrate(single_values),
                bound=_drift_bound(params, u0, 1),
                mass_in_k=scheme.integrate(single_values < certificate.k_threshold),
            )
        )

    bases = np.broadcast_to(x.basis, (paths, x.n, x.n)).copy()
    for m in range(1, allowed + 1):
        rng = seeding.generator(seed, "drift", m)
        nodes = rng.random((paths, chart.dim))
        bases = reduce_many(a @ exp_nilpotent_many(chart, nodes) @ bases)
        if m == 1:
            continue
        values = u.evaluate_many(bases)
        certificate.per_step.append(
            DriftStep(
                m=m,
                measured=float(values.mean()),
                bound=_drift_bound(params, u0, m),
                mass_in_k=float(np.mean(values < certificate.k_threshold)),
            )
        )
        logger.debug(
            "Drift step %s: %s <= %s",
            m,
            certificate.per_step[-1].measured,
            certificate.per_step[-1].bound,
            extra={"R": R, "step": m},
        )

    if not certificate.complete:
        logger.warning(
            "Drift verification truncated to %s of %s steps",
            allowed,
            steps,
            extra={"R": R, "budget": budget},
        )
        raise BudgetExceededError(certificate=certificate)
    return certificate


def folner_compose(r: Number, t: Number, m: int) -> FolnerComposition:
    """
    B_r a_{log t} B_r a_{log t} ... (m factors) lies in a_{m log t} B_rho with
    rho = r * sum_{i<m} t^{-i}; for t >= 2, rho <= 2r.
    """
    r, t = Fraction(r), Fraction(t)
    if t <= 1:
        raise BadParamsError("Folner composition needs t > 1, got {}.".format(t))
    if m < 1:
        raise BadParamsError("Folner composition needs m >= 1, got {}.".format(m))
    radius = r * sum(t ** -i for i in range(m))
    closed_form = r * (1 - t ** -m) / (1 - 1 / t)
    return FolnerComposition(
        r=r,
        t=t,
        m=m,
        radius=radius,
        closed_form=closed_form,
        contained=radius <= 2 * r if t >= 2 else None,
    )


def bad_set_measure(
    y: Lattice,
    r: float,
    delta: float,
    epsilon: float,
    i: int,
    cdelta: Optional[float] = None,
    scheme: Optional[QuadratureScheme] = None,
    flow: Optional[CartanFlow] = None,
) -> BadSetMeasure:
    """
    Measure of {h : alpha_i(a_{log r} h y)^{-delta} > epsilon} against the Markov
    bound A_r g / epsilon for g = alpha_i^{-delta}. With `cdelta` the bound
    C alpha_i(y)^{-delta} / epsilon is reported next to it.
    """
    if epsilon <= 0.0:
        raise BadParamsError("Bad-set threshold must be positive.")
    flow, chart, scheme = _chart_and_scheme(y, flow, scheme)
    matrices = cartan_matrix(flow, math.log(r)) @ exp_nilpotent_many(chart, scheme.nodes)
    values = minima_many(matrices @ y.basis, i) ** (-delta)
    contraction_bound = None
    if cdelta is not None:
        contraction_bound = cdelta * lattice_minima(y, i) ** (-delta) / epsilon
    return BadSetMeasure(
        markov_bound=scheme.integrate(values) / epsilon,
        empirical=scheme.integrate(values > epsilon),
        contraction_bound=contraction_bound,
        nodes=scheme.size,
    )


def fit_decay_window(
    R_values: Sequence[float],
    errors: Sequence[float],
    min_window: int = 3,
    max_residual: float = 0.1,
    min_decay: float = 0.05,
) -> Optional[Tuple[int, int, float, float]]:
    """
    Contiguous window of the R grid with the widest log R span whose log-log fit has
    RMS residual below `max_residual` and slope at most -min_decay. Returns
    (start, stop, gamma, residual) or None.
    """
    log_R = np.log(np.asarray(R_values, dtype=float))
    errors = np.asarray(errors, dtype=float)
    best = None
    for start in range(len(log_R)):
        for stop in range(start + min_window, len(log_R) + 1):
            window = errors[start:stop]
            if np.any(window <= 0.0):
                continue
            slope, intercept = np.polyfit(log_R[start:stop], np.log(window), 1)
            fitted = slope * log_R[start:stop] + intercept
            residual = float(np.sqrt(np.mean((np.log(window) - fitted) ** 2)))
            if residual >= max_residual or slope > -min_decay:
                continue
            span = log_R[stop - 1] - log_R[start]
            if best is None or (span, -residual) > (best[0], -best[4]):
                best = (span, start, stop, -float(slope), residual)
    if best is None:
        return None
    return best[1], best[2], best[3], best[4]


def split_average(
    f: Observable,
    x: Lattice,
    R: float,
    tau: float,
    outer: Optional[QuadratureScheme] = None,
    inner: Optional[QuadratureScheme] = None,
    flow: Optional[CartanFlow] = None,
) -> float:
    """
    The two-stage average of f(a_{(1-tau) log R} u a_{tau log R} h a_{-log R} x) over
    u and h in the unit box, written as (u' h') x with u' in B_{R^(1-tau)} and h' in B_R.
    """
    if not 0.0 < tau < 1.0:
        raise BadParamsError("Splitting exponent must lie strictly between 0 and 1.")
    flow, chart, outer = _chart_and_scheme(x, flow, outer)
    inner = inner or outer
    log_R = math.log(R)
    shifted = exp_nilpotent_many(chart, conjugate_coordinates(chart, inner.nodes, log_R))
    shifted = shifted @ x.basis
    outer_matrices = exp_nilpotent_many(
        chart, conjugate_coordinates(chart, outer.nodes, (1.0 - tau) * log_R)
    )

    total = 0.0
    for start in range(0, outer.size, SPLIT_BLOCK):
        block = outer_matrices[start : start + SPLIT_BLOCK]
        bases = np.einsum("bij,hjk->bhik", block, shifted).reshape(-1, x.n, x.n)
        values = f.evaluate_many(bases).reshape(block.shape[0], inner.size)
        total += float(outer.weights[start : start + SPLIT_BLOCK] @ values @ inner.weights)
    return total / (outer.total * inner.total)


def equidist_error(
    f: Observable,
    x: Lattice,
    R_values: Sequence[float],
    mean: Optional[float] = None,
    nodes_per_unit: int = 16,
    order: int = 64,
    min_window: int = 3,
    max_residual: float = 0.1,
    min_decay: float = 0.05,
    tau: Optional[float] = None,
    flow: Optional[CartanFlow] = None,
) -> EquidistReport:
    """
    |B_R f(x) - mean| over the R grid with the fitted decay exponent. Raises
    NoDecayWindowError carrying the raw table when no window decays cleanly.
    """
    if mean is None:
        mean = f.exact_mean
    if mean is None:
        raise BadParamsError("Equidistribution errors need the Haar mean of the observable.")
    flow = flow or default_flow(x.n)
    chart = horospherical_chart(flow)
    R_values = sorted(float(R) for R in R_values)

    values, split_errors = [], []
    for R in R_values:
        if chart.dim == 1:
            scheme = horocycle_scheme(R, nodes_per_unit, order)
        else:
            scheme = QuadratureScheme.default(chart.dim)
        value = horospherical_average(f, x, R, scheme, flow)
        values.append(value)
        if tau is not None:
            outer = inner = scheme
            if chart.dim == 1:
                outer = horocycle_scheme(R ** (1.0 - tau), nodes_per_unit, order)
                inner = horocycle_scheme(R, nodes_per_unit, order)
            if outer.size * inner.size <= SPLIT_BUDGET:
                split = split_average(f, x, R, tau, outer, inner, flow)
                split_errors.append(abs(value - split))
            else:
                split_errors.append(None)
        logger.debug("B_R f at R=%s: %s", R, value, extra={"R": R, "observable": f.kind})

    errors = [abs(value - mean) for value in values]
    split_exponent = None
    measured = [(R, e) for R, e in zip(R_values, split_errors) if e]
    if len(measured) >= 2:
        slope, _ = np.polyfit(*np.log(np.array(measured)).T, 1)
        split_exponent = -float(slope)

    if max(errors) <= EXACT_ERROR:
        rows = [
            DecayRow(R, value, error, False, split_errors[j] if split_errors else None)
            for j, (R, value, error) in enumerate(zip(R_values, values, errors))
        ]
        return EquidistReport(mean, rows, None, (), None, split_exponent)

    fit = fit_decay_window(R_values, errors, min_window, max_residual, min_decay)
    rows = [
        DecayRow(
            R,
            value,
            error,
            fit is not None and fit[0] <= j < fit[1],
            split_errors[j] if split_errors else None,
        )
        for j, (R, value, error) in enumerate(zip(R_values, values, errors))
    ]
    if fit is None:
        logger.warning(
            "No decay window in %s equidistribution errors",
            len(errors),
            extra={"observable": f.kind},
        )
        raise NoDecayWindowError(table=rows)

    start, stop, gamma, residual = fit
    return EquidistReport(
        mean=mean,
        rows=rows,
        gamma=gamma,
        window=(R_values[start], R_values[stop - 1]),
        residual=residual,
        split_exponent=split_exponent,
    )


def mean_ergodic_bound(epsilon: float, R: float, s: float) -> float:
    """
    Chebyshev bound eps^-2 R^-2s on the measure of {|A_R f - mean| > eps} for a
    spectral gap exponent s.
    """
    return epsilon ** -2 * R ** (-2.0 * s)


def mass_condition(
    x: Lattice,
    R: float,
    gamma: float,
    s: float,
    radius: float,
    flow: Optional[CartanFlow] = None,
) -> MassCondition:
    """
    Proxy for m(B_radius(a_{-log R} x)) > R^{2 gamma - 2 s}: the ball is measured as
    min(radius, shortest vector)^{dim G}.
    """
    flow = flow or default_flow(x.n)
    translated = x.transformed(cartan_matrix(flow, -math.log(R)))
    proxy = min(radius, injectivity_proxy(translated))
    lhs = proxy ** (x.n * x.n - 1)
    rhs = R ** (2.0 * gamma - 2.0 * s)
    return MassCondition(lhs=lhs, rhs=rhs, holds=lhs > rhs)
