"""
The experiment kinds run by `horolab <kind>`. Each takes a validated ExperimentConfig
and returns an ExperimentOutcome; the runner turns that into a report.
"""
import logging
import math
from fractions import Fraction

import numpy as np

from horolab import seeding
from horolab.config import resolve_base_point
from horolab.contraction import (
    MONOTONE_TOLERANCE,
    adaptive_empirical_ratio,
    expansion_envelope,
    theoretical_bound,
    verify_em_condition,
)
from horolab.decorators import cached, experiment, uncached
from horolab.diophantine import (
    GOLDEN_RATIO,
    convergent_oracle,
    diophantine_exponent,
    liouville_bound,
    liouville_constant,
    liouville_sweep,
    parabolic_height,
    sl2_exponent_bound,
)
from horolab.dynamics import (
    bad_set_measure,
    equidist_error,
    folner_compose,
    mass_condition,
    mean_ergodic_bound,
    verify_drift,
)
from horolab.exceptions import BudgetExceededError, NoDecayWindowError
from horolab.lattice import Lattice, drift_parameters, lattice_minima
from horolab.linalg import cartan_matrix, horospherical_chart
from horolab.observables import build_observable
from horolab.quadrature import GAUSS, QuadratureScheme
from horolab.reports import ExperimentOutcome, Table
from horolab.representation import anchor_constant, orbit_norm_floor, weight_decomposition
from horolab.status import CERTIFICATE_BUDGET_EXCEEDED, CERTIFICATE_COMPLETE
from horolab.sublevel import (
    SublevelQuery,
    ladder_fractions,
    random_polynomial,
    remez_sup_bound,
    sublevel_bound,
)

logger = logging.getLogger("django-horolab.horolab.experiments")

ORACLE_TOLERANCE = 1e-6
SL2_STANDARD_ANCHOR = 5.0 ** -0.5
ANCHOR_TOLERANCE = 1e-3
SUP_RESOLUTION = 64
FOLNER_FACTORS = (2, 3, 4, 10)
FOLNER_DEPTH = 50
CONVERGENT_FLOOR = 10.0


def _scheme(config, dim):
    return QuadratureScheme.from_spec(dim, config.quadrature, config.seed)


def _tail_monotone(R_values, constants):
    """
    Non-increasing, within the usual slack, from the largest constant onwards.
    """
    ordered = [c for _, c in sorted(zip(R_values, constants))]
    peak = int(np.argmax(ordered))
    tail = ordered[peak:]
    return all(
        later <= earlier * (1.0 + MONOTONE_TOLERANCE)
        for earlier, later in zip(tail, tail[1:])
    )


@experiment("contraction")
@cached
def contraction(config):
    flow = config.flow
    chart = horospherical_chart(flow)
    scheme = _scheme(config, chart.dim)
    delta = config["delta"]
    report = verify_em_condition(
        flow,
        config["R"],
        delta,
        samples=config["samples"],
        scheme=scheme,
        seed=config.seed,
        ks=config["ks"],
    )

    outcome = ExperimentOutcome(warnings=list(report.warnings))
    table = Table(["R", "empiricalC", "theoreticalExponent", "rep", "theoreticalC", "tau"])
    for r in report.reports:
        table.add(r.R, r.empirical_c, r.decay_exponent, r.rep, r.theoretical_c, r.tau)
    outcome.tables["contraction_CvsR"] = table

    reps = {r.rep: weight_decomposition(r.k, flow) for r in report.reports}
    outcome.values.update(
        {
            "global_c": list(report.global_c),
            "threshold": report.threshold,
            "monotone": report.monotone,
            "delta_max": report.delta_max,
            "orbit_floor": report.orbit_floor,
            "lipschitz_exponent": {
                name: theoretical_bound(rep, delta, 1.0).decay_exponent
                for name, rep in reps.items()
            },
            "quadrature": scheme.describe(),
        }
    )
    outcome.assertions["contracts"] = report.contracts
    outcome.assertions["tail_monotone"] = _tail_monotone(report.R_values, report.global_c)

    if chart.dim == 1 and scheme.kind == GAUSS:
        worst = 0.0
        for r in report.reports:
            oracle = adaptive_empirical_ratio(reps[r.rep], chart, flow, r.R, delta, r.witness)
            worst = max(worst, abs(oracle - r.empirical_c) / max(1.0, abs(oracle)))
        outcome.values["oracle_deviation"] = worst
        outcome.assertions["oracle_agreement"] = worst <= ORACLE_TOLERANCE
    return outcome


@experiment("anchor")
@cached
def anchor(config):
    flow = config.flow
    chart = horospherical_chart(flow)
    outcome = ExperimentOutcome()
    table = Table(["rep", "lower", "upper", "orbitFloor"])
    estimates = {}
    for k in config["ks"] or range(1, config.n):
        rep = weight_decomposition(k, flow)
        estimate = anchor_constant(
            rep, chart, samples=config["samples"], grid=config["grid"], seed=config.seed
        )
        floor = orbit_norm_floor(rep, chart, seed=config.seed)
        table.add(rep.name, estimate.lower, estimate.upper, floor)
        estimates[k] = estimate
        outcome.values["witness_" + rep.name] = list(estimate.witness)
    outcome.tables["anchor_constants"] = table

    outcome.assertions["anchor_positive"] = all(e.lower > 0.0 for e in estimates.values())
    if config.n == 2 and 1 in estimates:
        outcome.assertions["sl2_standard_anchor"] = (
            abs(estimates[1].lower - SL2_STANDARD_ANCHOR) < ANCHOR_TOLERANCE
        )
    return outcome


@experiment("remez")
@uncached
def remez(config):
    """
    Seeded random polynomials on the box against the sub-level bound at every
    threshold ratio * sup of the ladder. The direct Remez form is cross-checked and
    reported.
    """
    dims, degrees, ladder = config["dims"], config["degrees"], config["ladder"]
    counts = {}
    remez_misses = 0
    for index in range(config["count"]):
        dim = dims[index % len(dims)]
        degree = degrees[(index // len(dims)) % len(degrees)]
        rng = seeding.generator(config.seed, "remez", index)
        poly = random_polynomial(rng, dim, degree)
        sup, epsilons, fractions = ladder_fractions(
            poly, ladder, config["resolutions"][dim - 1], dim, SUP_RESOLUTION
        )

        entry = counts.setdefault((dim, degree), [0, 0, 0.0])
        entry[0] += 1
        for epsilon, fraction in zip(epsilons, fractions):
            bound = sublevel_bound(SublevelQuery(dim, degree, epsilon, sup.value))
            entry[2] = max(entry[2], float(fraction) / bound)
            if fraction > bound:
                entry[1] += 1
                logger.warning(
                    "Sub-level fraction %s above bound %s",
                    fraction,
                    bound,
                    extra={"dim": dim, "degree": degree, "epsilon": epsilon},
                )
            if 0.0 < fraction < 1.0:
                if remez_sup_bound(epsilon, fraction, dim, degree) < sup.value:
                    remez_misses += 1

    outcome = ExperimentOutcome()
    table = Table(["dim", "degree", "polynomials", "violations", "worstRatio"])
    for (dim, degree), (polynomials, violations, worst) in sorted(counts.items()):
        table.add(dim, degree, polynomials, violations, worst)
    outcome.tables["remez_sublevel"] = table

    violations = sum(entry[1] for entry in counts.values())
    outcome.values.update({"violations": violations, "remez_misses": remez_misses})
    if remez_misses:
        outcome.warnings.append(
            "{} Remez sup bounds fall below the measured sup".format(remez_misses)
        )
    outcome.assertions["sublevel_bound"] = violations == 0
    return outcome


def _rotation(n, angle):
    matrix = np.eye(n)
    matrix[:2, :2] = [[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]]
    return matrix


def drift_lattices(n, count, cusp_heights, seed):
    """
    Z^n, one rotated cusp lattice per height, then seeded random unimodular lattices
    until there are `count` in all.
    """
    lattices = [Lattice.standard(n)]
    for j, s in enumerate(cusp_heights):
        rng = seeding.generator(seed, "cusp", j)
        diagonal = np.diag([s, 1.0 / s] + [1.0] * (n - 2))
        lattices.append(Lattice(_rotation(n, rng.uniform(0.0, 2.0 * math.pi)) @ diagonal))
    j = 0
    while len(lattices) < count:
        rng = seeding.generator(seed, "lattice", j)
        matrix = rng.standard_normal((n, n))
        det = np.linalg.det(matrix)
        if det < 0.0:
            matrix[:, 0] = -matrix[:, 0]
        lattices.append(Lattice(matrix / abs(det) ** (1.0 / n)))
        j += 1
    return lattices[: max(count, 1)]


@experiment("drift")
@cached
def drift(config):
    n, flow = config.n, config.flow
    chart = horospherical_chart(flow)
    scheme = _scheme(config, chart.dim)
    R = config["R"]
    delta = config["delta0"] / n
    outcome = ExperimentOutcome()

    cdelta = config["cdelta"]
    if cdelta is None:
        em = verify_em_condition(flow, [R], delta, scheme=scheme, seed=config.seed)
        cdelta = em.global_c[0]
        outcome.warnings.extend(em.warnings)
    omega = config["omega"]
    if omega is None:
        omega = expansion_envelope(flow, chart, R, scheme)
    params = drift_parameters(n, cdelta, config["delta0"], omega)
    outcome.values["params"] = {
        "cdelta": params.cdelta,
        "omega": params.omega,
        "delta": params.delta,
        "epsilon": params.epsilon,
        "c1": params.c1,
        "b": params.b,
    }

    table = Table(
        ["lattice", "shortest", "u0", "m", "measured", "bound", "massInK", "holds", "status"]
    )
    certificates = []
    for index, lat in enumerate(
        drift_lattices(n, config["lattices"], config["cusp_heights"], config.seed)
    ):
        try:
            certificate = verify_drift(
                lat,
                R,
                params,
                config["steps"],
                scheme=scheme,
                flow=flow,
                paths=config["paths"],
                seed=config.seed,
                epsilon_tail=config["epsilon_tail"],
            )
            state = CERTIFICATE_COMPLETE
        except BudgetExceededError as e:
            certificate = e.certificate
            state = CERTIFICATE_BUDGET_EXCEEDED
            outcome.warnings.append("lattice {}: {}".format(index, e))
        shortest = 1.0 / lattice_minima(lat, 1)
        if certificate is None:
            table.add(index, shortest, None, None, None, None, None, None, state)
            continue
        certificates.append(certificate)
        if not certificate.per_step:
            table.add(index, shortest, certificate.u0, None, None, None, None, None, state)
        for step in certificate.per_step:
            table.add(
                index,
                shortest,
                certificate.u0,
                step.m,
                step.measured,
                step.bound,
                step.mass_in_k,
                step.holds,
                state,
            )
    outcome.tables["drift_certificate"] = table

    folner = Table(["t", "m", "radius", "closedForm", "contained"])
    for t in FOLNER_FACTORS:
        for m in range(1, FOLNER_DEPTH + 1):
            composition = folner_compose(Fraction(1), t, m)
            folner.add(
                t,
                m,
                float(composition.radius),
                float(composition.closed_form),
                composition.contained,
            )
    outcome.tables["folner_composition"] = folner

    bad = bad_set_measure(
        Lattice.standard(n), R, delta, 1.0, 1, cdelta=cdelta, scheme=scheme, flow=flow
    )
    outcome.values["bad_set"] = {
        "markov_bound": bad.markov_bound,
        "empirical": bad.empirical,
        "contraction_bound": bad.contraction_bound,
    }

    steps = [step for certificate in certificates for step in certificate.per_step]
    outcome.assertions["single_step"] = all(step.holds for step in steps if step.m == 1)
    outcome.assertions["iterated"] = all(step.holds for step in steps)
    outcome.assertions["tight"] = all(certificate.tight for certificate in certificates)
    outcome.assertions["folner_contained"] = all(row[4] for row in folner.rows)
    outcome.assertions["bad_set_markov"] = bad.holds
    return outcome


@experiment("equidist")
@cached
def equidist(config):
    n, flow = config.n, config.flow
    point, _ = resolve_base_point(config["base_point"], n)
    x = Lattice(point.entries)
    f = build_observable(config["observable"], n)
    outcome = ExperimentOutcome()

    report = None
    try:
        report = equidist_error(
            f,
            x,
            config["R"],
            nodes_per_unit=config["nodes_per_unit"],
            min_window=config["min_window"],
            max_residual=config["max_residual"],
            tau=config["tau"],
            flow=flow,
        )
        rows = report.rows
    except NoDecayWindowError as e:
        rows = e.table
        outcome.warnings.append(str(e))

    table = Table(["R", "error", "inWindow", "value", "splitError"])
    for row in rows:
        table.add(row.R, row.error, row.in_window, row.value, row.split_error)
    outcome.tables["equidist_decay"] = table

    gamma = report.gamma if report is not None else None
    outcome.values.update(
        {
            "observable": f.describe(),
            "mean": f.exact_mean,
            "gamma": gamma,
            "window": list(report.window) if report is not None else None,
            "residual": report.residual if report is not None else None,
            "split_exponent": report.split_exponent if report is not None else None,
        }
    )

    s = config["spectral_gap"]
    if s is not None:
        outcome.values["mean_ergodic"] = [
            mean_ergodic_bound(row.error, row.R, s) if row.error > 0.0 else None
            for row in rows
        ]
        decay = config["gamma"] if config["gamma"] is not None else gamma
        if decay is not None:
            conditions = [mass_condition(x, row.R, decay, s, 1.0, flow) for row in rows]
            outcome.values["mass_condition"] = [
                {"lhs": c.lhs, "rhs": c.rhs, "holds": c.holds} for c in conditions
            ]

    decays = gamma is not None and gamma > 0.0
    if config["expect_decay"]:
        outcome.assertions["decay_window"] = decays
    else:
        outcome.assertions["no_decay_window"] = not decays
    return outcome


def _oracle_parameter(spec):
    family = spec.get("family")
    if family == "golden":
        return GOLDEN_RATIO
    if family == "liouville":
        return spec.get("parameter") or liouville_constant()
    return None


@experiment("dioph")
@cached
def dioph(config):
    n, flow = config.n, config.flow
    point, algebraic = resolve_base_point(config["base_point"], n)
    index = config["index"]
    trace = diophantine_exponent(point, index, config["tmax"], config["grid_factor"], flow)
    outcome = ExperimentOutcome()

    table = Table(["T", "minHeight", "rate", "ratio"])
    for row in zip(trace.t_grid, trace.min_heights, trace.rates, trace.ratios):
        table.add(*row)
    outcome.tables["dioph_trace"] = table
    outcome.values.update(
        {
            "fitted_exponent": trace.fitted_exponent,
            "window": list(trace.window),
            "finite_set": list(trace.finite_set),
        }
    )

    parameter = _oracle_parameter(config["base_point"])
    standard_flow = config.flow.weights == (Fraction(1, 2), Fraction(-1, 2))
    if parameter is not None and standard_flow and index == 1:
        oracle = Table(["T", "oracleHeight", "minHeight"])
        worst = 0.0
        for T, height in convergent_oracle(parameter, config["tmax"]):
            if T < CONVERGENT_FLOOR:
                continue
            measured = parabolic_height(cartan_matrix(flow, -math.log(T)) @ point.entries, 1)
            oracle.add(T, height, measured)
            worst = max(worst, abs(measured - height) / height)
        outcome.tables["dioph_convergents"] = oracle
        outcome.values["oracle_deviation"] = worst
        if config["base_point"].get("family") == "golden":
            outcome.assertions["convergent_oracle"] = worst <= ORACLE_TOLERANCE

    if algebraic is not None:
        liouville = Table(["coordinate", "degree", "constant", "violations", "worstMargin"])
        seen = set()
        for alpha in algebraic.irrational_coordinates():
            if alpha.coords in seen:
                continue
            seen.add(alpha.coords)
            sweep = liouville_sweep(alpha, config["liouville_M"])
            bound = liouville_bound(alpha, 1)
            liouville.add(
                " ".join(str(c) for c in alpha.coords),
                bound.exponent + 1,
                bound.constant,
                sweep.violations,
                sweep.worst_margin,
            )
        outcome.tables["liouville_sweep"] = liouville
        outcome.assertions["liouville_bound"] = all(row[3] == 0 for row in liouville.rows)
        if algebraic.degree >= 2:
            exponent_bound = sl2_exponent_bound(algebraic.degree)
            outcome.values["exponent_bound"] = {
                "degree": exponent_bound.degree,
                "delta": exponent_bound.delta,
                "displayed": exponent_bound.displayed,
                "arithmetic": exponent_bound.arithmetic,
            }

    expected = config["expect_exponent"]
    if expected is not None:
        outcome.assertions["expected_exponent"] = (
            expected[0] <= trace.fitted_exponent <= expected[1]
        )
    return outcome
