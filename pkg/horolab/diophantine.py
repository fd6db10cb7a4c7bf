import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

import mpmath
import numpy as np

from horolab.exceptions import BadIndexError, BadParamsError, RationalInputError
from horolab.lattice import Lattice, lattice_minima, minima_many
from horolab.linalg import CartanFlow, GroupElement, cartan_matrix
from horolab.numberfield import PRECISION, AlgebraicNumber, AlgebraicPoint, NumberField

logger = logging.getLogger("django-horolab.horolab.diophantine")

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0
FAMILIES = ("identity", "parabolic", "golden", "liouville", "cusp")


@dataclass
class DiophantineTrace:
    g: GroupElement
    i: int
    t_grid: Tuple[float, ...]
    min_heights: Tuple[float, ...]
    rates: Tuple[float, ...]
    ratios: Tuple[float, ...]
    fitted_exponent: float
    window: Tuple[float, float]
    finite_set: Tuple[str, ...] = ("identity",)


@dataclass(frozen=True)
class LiouvilleBound:
    constant: float
    exponent: int
    M: int
    value: float


@dataclass(frozen=True)
class LiouvilleSweep:
    M_max: int
    violations: int
    worst_margin: float


@dataclass(frozen=True)
class ExponentBound:
    degree: int
    delta: float
    displayed: float
    arithmetic: float


def _default_flow(n: int) -> CartanFlow:
    return CartanFlow.from_weights([Fraction(1, 2)] + [0] * (n - 2) + [Fraction(-1, 2)])


def parabolic_height(g, i: int) -> float:
    """
    d_i(g): the largest reciprocal covolume of an i-dimensional subspace of g Z^n.
    """
    entries = g.entries if isinstance(g, GroupElement) else np.asarray(g, dtype=float)
    n = entries.shape[0]
    if not 1 <= i <= n - 1:
        raise BadIndexError(i)
    return lattice_minima(Lattice(entries), i)


def t_grid(tmax: float, grid_factor: float) -> List[float]:
    grid, T = [], float(grid_factor)
    while T < tmax:
        grid.append(T)
        T *= grid_factor
    grid.append(float(tmax))
    return grid


def diophantine_exponent(
    g,
    i: int,
    tmax: float,
    grid_factor: float = 2.0,
    flow: Optional[CartanFlow] = None,
) -> DiophantineTrace:
    """
    Ratio log min-height / log parabolic rate along a_{-log T} g over a geometric T
    grid. The exponent is the largest ratio over the tail T >= sqrt(tmax), clamped at
    zero; a finite grid only bounds the limsup from below.
    """
    if tmax < 10.0:
        raise BadParamsError("Diophantine traces need tmax >= 10.")
    if grid_factor <= 1.0:
        raise BadParamsError("The T grid factor must exceed 1.")
    g = g if isinstance(g, GroupElement) else GroupElement(g)
    if not 1 <= i <= g.n - 1:
        raise BadIndexError(i)
    flow = flow or _default_flow(g.n)

    grid = t_grid(tmax, grid_factor)
    translations = np.stack([cartan_matrix(flow, -math.log(T)) for T in grid])
    heights = minima_many(translations @ g.entries, i)
    rates = minima_many(translations, i)
    ratios = np.log(heights) / np.log(rates)

    tail = np.asarray(grid) >= math.sqrt(tmax)
    exponent = max(0.0, float(ratios[tail].max()))
    logger.debug(
        "Diophantine exponent %s over T <= %s",
        exponent,
        tmax,
        extra={"index": i, "T": tmax},
    )
    return DiophantineTrace(
        g=g,
        i=i,
        t_grid=tuple(grid),
        min_heights=tuple(float(h) for h in heights),
        rates=tuple(float(r) for r in rates),
        ratios=tuple(float(r) for r in ratios),
        fitted_exponent=exponent,
        window=(float(np.asarray(grid)[tail][0]), float(tmax)),
    )


def continued_fraction(x, terms: int) -> List[int]:
    with mpmath.workprec(4 * PRECISION):
        x = mpmath.mpf(x)
        quotients = []
        for _ in range(terms):
            a = int(mpmath.floor(x))
            quotients.append(a)
            remainder = x - a
            if remainder == 0:
                break
            x = 1 / remainder
        return quotients


def convergents(x, terms: int) -> List[Tuple[int, int]]:
    p_prev, p = 1, 0
    q_prev, q = 0, 1
    result = []
    for a in continued_fraction(x, terms):
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        result.append((p, q))
    return result


def convergent_oracle(x, tmax: float, terms: int = 64) -> List[Tuple[float, float]]:
    """
    For the lower unipotent point with parameter x: at T_k = q_k / |q_k x - p_k| the
    convergent vector has both coordinates of size sqrt(q_k |q_k x - p_k|), and its
    reciprocal length is the height there.
    """
    scales = []
    with mpmath.workprec(2 * PRECISION):
        x = mpmath.mpf(x)
        for p, q in convergents(x, terms):
            gap = abs(q * x - p)
            if gap == 0:
                break
            T = q / gap
            if T > tmax:
                break
            height = 1 / mpmath.sqrt((q / mpmath.sqrt(T)) ** 2 + (mpmath.sqrt(T) * gap) ** 2)
            scales.append((float(T), float(height)))
    return scales


def liouville_constant(start: int = 1, terms: int = 4, base: int = 10) -> mpmath.mpf:
    """
    sum of base^{-k!} for k = start .. start + terms - 1. The default is 0.110001 + 1e-24;
    its convergent 11/100 is met near T = 1e6.
    """
    digits = math.factorial(start + terms - 1) * math.log10(base) + 20
    with mpmath.workdps(int(digits)):
        return sum(
            (mpmath.mpf(base) ** -math.factorial(k) for k in range(start, start + terms)),
            mpmath.mpf(0),
        )


def _lower_unipotent(n: int, value: float) -> np.ndarray:
    matrix = np.eye(n)
    matrix[n - 1, 0] = value
    return matrix


def named_point(family: str, n: int = 2, parameter: Optional[float] = None) -> GroupElement:
    """
    identity; parabolic: upper unipotent with sqrt(2); golden: lower unipotent with
    the golden ratio; liouville: lower unipotent with liouville_constant(); cusp:
    diag(s, 1/s, 1, ...) with s = parameter (default 1e-3).
    """
    if family == "identity":
        return GroupElement.identity(n)
    if family == "parabolic":
        matrix = np.eye(n)
        matrix[0, n - 1] = math.sqrt(2.0) if parameter is None else parameter
        return GroupElement(matrix)
    if family == "golden":
        return GroupElement(_lower_unipotent(n, GOLDEN_RATIO))
    if family == "liouville":
        value = liouville_constant() if parameter is None else parameter
        return GroupElement(_lower_unipotent(n, float(value)))
    if family == "cusp":
        s = 1e-3 if parameter is None else float(parameter)
        return GroupElement(np.diag([s, 1.0 / s] + [1.0] * (n - 2)))
    raise ValueError("Unknown point family {!r}.".format(family))


def named_algebraic_point(family: str, n: int = 2) -> Optional[AlgebraicPoint]:
    """
    The exact number-field form of the parabolic and golden families.
    """
    if family == "parabolic":
        field = NumberField((1, 0, -2), 1.414)
        position = (0, n - 1)
    elif family == "golden":
        field = NumberField((1, -1, -1), 1.618)
        position = (n - 1, 0)
    else:
        return None
    entries = tuple(
        tuple(
            field.element([0, 1] if (row, col) == position else [int(row == col)])
            for col in range(n)
        )
        for row in range(n)
    )
    return AlgebraicPoint(field=field, entries=entries)


def liouville_bound(alpha: AlgebraicNumber, M: int) -> LiouvilleBound:
    """
    |alpha M - N| >= 1 / (|a_d| prod_j (|alpha - alpha_j| + 1) M^{d-1}) for every
    integer N, where a_d is the leading coefficient of the integer minimal
    polynomial and alpha_j run over the other conjugates.
    """
    if alpha.is_rational:
        raise RationalInputError()
    if M < 1:
        raise BadParamsError("Liouville heights start at M = 1.")
    poly = alpha.minimal_polynomial()
    degree = poly.degree()
    if degree < 2:
        raise RationalInputError()
    with mpmath.workprec(PRECISION):
        value = alpha.value
        product = mpmath.mpf(1)
        for conjugate in alpha.conjugates():
            product *= abs(value - conjugate) + 1
        constant = 1 / (abs(int(poly.LC())) * product)
        return LiouvilleBound(
            constant=float(constant),
            exponent=degree - 1,
            M=M,
            value=float(constant / mpmath.mpf(M) ** (degree - 1)),
        )


def best_linear_form(alpha: AlgebraicNumber, M: int) -> float:
    """
    min over integers N of |alpha M - N|.
    """
    with mpmath.workprec(PRECISION):
        product = alpha.value * M
        return float(abs(product - mpmath.nint(product)))


def liouville_sweep(alpha: AlgebraicNumber, M_max: int) -> LiouvilleSweep:
    """
    Check the effective bound against the measured best linear form for every
    M = 1 .. M_max.
    """
    base = liouville_bound(alpha, 1)
    violations, worst = 0, math.inf
    for M in range(1, M_max + 1):
        bound = base.constant / M ** base.exponent
        measured = best_linear_form(alpha, M)
        worst = min(worst, measured / bound)
        if measured < bound:
            violations += 1
    return LiouvilleSweep(M_max=M_max, violations=violations, worst_margin=worst)


def sl2_exponent_bound(d: int) -> ExponentBound:
    """
    Both readings of the exponent bound for a point over a degree-d field with
    delta = 1/d: the displayed 1 - delta/2 and the evaluated (-1/2 + delta)/(-1/2).
    """
    if d < 2:
        raise BadParamsError("Field degree must be at least 2.")
    delta = 1.0 / d
    return ExponentBound(
        degree=d,
        delta=delta,
        displayed=1.0 - delta / 2.0,
        arithmetic=(-0.5 + delta) / -0.5,
    )
