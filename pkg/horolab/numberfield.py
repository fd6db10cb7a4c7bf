"""
Points of SL_n over a real number field Q(theta). Coordinates are kept as exact
rationals in the power basis 1, theta, ..., theta^{d-1}; values are taken at 128-bit
precision through mpmath.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import mpmath
import numpy as np
import sympy

from horolab.linalg import GroupElement

logger = logging.getLogger("django-horolab.horolab.numberfield")

PRECISION = 128
_x = sympy.Symbol("x")


def _rational(text: str) -> Fraction:
    return Fraction(text.strip())


def _mpf(value: Fraction) -> mpmath.mpf:
    return mpmath.mpf(value.numerator) / value.denominator


@dataclass(frozen=True, eq=False)
class NumberField:
    """
    Q(theta) for theta the real root of `coefficients` (highest degree first) closest
    to `root_hint`.
    """

    coefficients: Tuple[Fraction, ...]
    root_hint: float

    def __post_init__(self):
        coefficients = tuple(Fraction(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coefficients)
        poly = sympy.Poly(
            [sympy.Rational(c.numerator, c.denominator) for c in coefficients], _x
        )
        if poly.degree() < 1:
            raise ValueError("Number fields need a polynomial of degree at least 1.")
        if not poly.is_irreducible:
            raise ValueError("Polynomial {} is reducible over Q.".format(poly.as_expr()))
        with mpmath.workprec(PRECISION):
            roots = [mpmath.mpf(str(sympy.N(root, 45))) for root in poly.real_roots()]
            if not roots:
                raise ValueError("Polynomial {} has no real root.".format(poly.as_expr()))
            generator = min(roots, key=lambda root: abs(root - self.root_hint))
        if len(roots) > 1:
            logger.debug(
                "Picked root %s of %s",
                mpmath.nstr(generator, 15),
                poly.as_expr(),
                extra={"root_hint": self.root_hint, "real_roots": len(roots)},
            )
        object.__setattr__(self, "poly", poly)
        object.__setattr__(self, "generator", generator)

    @property
    def degree(self) -> int:
        return self.poly.degree()

    def companion(self) -> sympy.Matrix:
        """
        Matrix of multiplication by theta on the power basis.
        """
        monic = self.poly.monic().all_coeffs()
        d = self.degree
        matrix = sympy.zeros(d, d)
        for row in range(1, d):
            matrix[row, row - 1] = 1
        for row in range(d):
            matrix[row, d - 1] = -monic[d - row]
        return matrix

    def element(self, coords: Sequence) -> "AlgebraicNumber":
        return AlgebraicNumber(self, tuple(Fraction(c) for c in coords))


@dataclass(frozen=True, eq=False)
class AlgebraicNumber:
    field: NumberField
    coords: Tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.coords) > self.field.degree:
            raise ValueError(
                "Expected at most {} power-basis coordinates, got {}.".format(
                    self.field.degree, len(self.coords)
                )
            )

    @property
    def value(self) -> mpmath.mpf:
        with mpmath.workprec(PRECISION):
            return sum(
                (_mpf(c) * self.field.generator ** j for j, c in enumerate(self.coords)),
                mpmath.mpf(0),
            )

    @property
    def is_rational(self) -> bool:
        return not any(self.coords[1:])

    def __float__(self) -> float:
        return float(self.value)

    def minimal_polynomial(self) -> sympy.Poly:
        """
        Primitive integer minimal polynomial: the irreducible factor of the
        multiplication matrix's characteristic polynomial vanishing at the value.
        """
        companion = self.field.companion()
        d = self.field.degree
        multiplication = sympy.zeros(d, d)
        for j, c in enumerate(self.coords):
            multiplication += sympy.Rational(c.numerator, c.denominator) * companion ** j
        _, factors = sympy.factor_list(multiplication.charpoly(_x).as_expr(), _x)
        value = complex(self.value)

        def distance(factor):
            roots = sympy.Poly(factor, _x).nroots(n=30)
            return min(abs(complex(root) - value) for root in roots)

        best = min((factor for factor, _ in factors), key=distance)
        _, primitive = sympy.Poly(best, _x).clear_denoms(convert=True)
        return primitive.primitive()[1]

    def conjugates(self) -> List[mpmath.mpc]:
        """
        The other roots of the minimal polynomial.
        """
        poly = self.minimal_polynomial()
        with mpmath.workprec(PRECISION):
            roots = mpmath.polyroots(
                [int(c) for c in poly.all_coeffs()], maxsteps=200, extraprec=PRECISION
            )
            value = self.value
            closest = min(range(len(roots)), key=lambda j: abs(roots[j] - value))
            return [root for j, root in enumerate(roots) if j != closest]


@dataclass(frozen=True, eq=False)
class AlgebraicPoint:
    field: NumberField
    entries: Tuple[Tuple[AlgebraicNumber, ...], ...]

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def degree(self) -> int:
        return self.field.degree

    def matrix(self) -> np.ndarray:
        return np.array([[float(entry) for entry in row] for row in self.entries])

    def group_element(self) -> GroupElement:
        return GroupElement(self.matrix())

    def irrational_coordinates(self) -> List[AlgebraicNumber]:
        return [entry for row in self.entries for entry in row if not entry.is_rational]


def parse_algebraic_point(text: str) -> AlgebraicPoint:
    """
    Text form, one item per line:

        polynomial: 1 -1 -1
        root: 1.618
        row: 1 | 0
        row: 0 1 | 1

    Polynomial coefficients run from the highest degree down. Each row entry is a list
    of rational power-basis coordinates.
    """
    coefficients: Optional[List[Fraction]] = None
    root_hint = 0.0
    rows = []
    for line in text.splitlines():
        if not line.strip():
            continue
        label, _, body = line.partition(":")
        label = label.strip().lower()
        if label == "polynomial":
            coefficients = [_rational(c) for c in body.split()]
        elif label == "root":
            root_hint = float(body)
        elif label == "row":
            rows.append([[_rational(c) for c in entry.split()] for entry in body.split("|")])
        else:
            raise ValueError("Unknown algebraic point line {!r}.".format(line.strip()))

    if coefficients is None:
        raise ValueError("Algebraic points need a polynomial line.")
    if not rows or any(len(row) != len(rows) for row in rows):
        raise ValueError("Algebraic points need a square matrix of rows.")
    field = NumberField(tuple(coefficients), root_hint)
    return AlgebraicPoint(
        field=field,
        entries=tuple(tuple(field.element(entry) for entry in row) for row in rows),
    )
