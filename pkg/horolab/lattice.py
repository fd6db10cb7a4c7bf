import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from horolab import utils
from horolab.exceptions import (
    BadIndexError,
    BadParamsError,
    ContractionNotEstablishedError,
    EnumerationBudgetError,
    UnimodularityError,
)
from horolab.linalg import UNIMODULAR_TOLERANCE, wedge_basis, wedge_power

logger = logging.getLogger("django-horolab.horolab.lattice")

LLL_DELTA = 0.99
GAUSS_MAX_ITERATIONS = 256
# Relative slack on enumeration radii so that boundary vectors are not lost to rounding.
RADIUS_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class Lattice:
    """
    A unimodular lattice given by the columns of `basis`.
    """

    basis: np.ndarray

    def __post_init__(self):
        basis = np.array(self.basis, dtype=float)
        if basis.ndim != 2 or basis.shape[0] != basis.shape[1]:
            raise UnimodularityError("Lattice bases must be square matrices.")
        scale = max(1.0, float(np.abs(basis).max())) ** basis.shape[0]
        if abs(abs(np.linalg.det(basis)) - 1.0) > UNIMODULAR_TOLERANCE * scale:
            raise UnimodularityError()
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)

    @classmethod
    def standard(cls, n: int) -> "Lattice":
        return cls(np.eye(n))

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    def transformed(self, matrix) -> "Lattice":
        return Lattice(np.asarray(matrix, dtype=float) @ self.basis)

    def reduced(self) -> "Lattice":
        return Lattice(lll_reduce(self.basis)[0])


@dataclass(frozen=True)
class DriftParameters:
    n: int
    delta0: float
    delta: float
    cdelta: float
    omega: float
    epsilon: float
    c1: float
    b: float

    def k_threshold(self, epsilon_tail: float) -> float:
        return 6.0 / (epsilon_tail * (1.0 - self.cdelta))

    def recurrence_time(self, u_value: float) -> float:
        return (math.log(u_value) + math.log(1.0 - self.cdelta)) / (
            math.log(3.0) - math.log(1.0 + 2.0 * self.cdelta)
        )


@dataclass(frozen=True)
class TightnessConstants:
    a: float
    b: float
    epsilon: float
    threshold: float

    def time(self, u_value: float) -> float:
        return math.log(u_value * (1.0 - self.a) / self.b) / math.log(1.0 / self.a)


def gram_schmidt(rows: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    n = rows.shape[0]
    star = np.array(rows, dtype=float)
    mu = np.eye(n)
    for i in range(n):
        for j in range(i):
            mu[i, j] = rows[i] @ star[j] / (star[j] @ star[j])
            star[i] -= mu[i, j] * star[j]
    return star, mu


def lll_reduce(basis, delta: float = LLL_DELTA) -> Tuple[np.ndarray, np.ndarray]:
    """
    LLL-reduce the columns of `basis`. Returns (reduced, transform) with
    reduced = basis @ transform and transform unimodular over the integers.
    """
    rows = np.array(basis, dtype=float).T.copy()
    n = rows.shape[0]
    transform = np.eye(n, dtype=np.int64)
    star, mu = gram_schmidt(rows)
    squares = np.einsum("ij,ij->i", star, star)

    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = int(np.rint(mu[k, j]))
            if q:
                rows[k] -= q * rows[j]
                transform[k] -= q * transform[j]
                mu[k, :j] -= q * mu[j, :j]
                mu[k, j] -= q
        if squares[k] >= (delta - mu[k, k - 1] ** 2) * squares[k - 1]:
            k += 1
        else:
            rows[[k - 1, k]] = rows[[k, k - 1]]
            transform[[k - 1, k]] = transform[[k, k - 1]]
            star, mu = gram_schmidt(rows)
            squares = np.einsum("ij,ij->i", star, star)
            k = max(k - 1, 1)

    return rows.T, transform.T


def enumerate_short_vectors(
    basis, radius: float, budget: Optional[int] = None
) -> List[Tuple[np.ndarray, float]]:
    """
    All non-zero integer coefficient vectors y with |basis @ y| <= radius, paired with
    their squared norms (Fincke-Pohst over the Gram-Schmidt data of the columns).
    """
    rows = np.asarray(basis, dtype=float).T
    n = rows.shape[0]
    star, mu = gram_schmidt(rows)
    squares = np.einsum("ij,ij->i", star, star)
    bound = radius * radius * (1.0 + RADIUS_SLACK)
    if budget is None:
        budget = utils.get_enumeration_budget()

    coeffs = np.zeros(n, dtype=np.int64)
    found = []
    visited = 0

    def search(level, partial):
        nonlocal visited
        center = -float(sum(coeffs[j] * mu[j, level] for j in range(level + 1, n)))
        span = math.sqrt(max(bound - partial, 0.0) / squares[level])
        for x in range(math.ceil(center - span), math.floor(center + span) + 1):
            visited += 1
            if visited > budget:
                raise EnumerationBudgetError(budget)
            value = partial + (x - center) ** 2 * squares[level]
            if value > bound:
                continue
            coeffs[level] = x
            if level == 0:
                if coeffs.any():
                    found.append((coeffs.copy(), value))
            else:
                search(level - 1, value)
        coeffs[level] = 0

    search(n - 1, 0.0)
    return found


def _signed_coordinate(p: dict, head: Tuple[int, ...], extra: int) -> int:
    if extra in head:
        return 0
    sign = -1 if sum(1 for a in head if a > extra) % 2 else 1
    return sign * p[tuple(sorted(head + (extra,)))]


def is_decomposable(coeffs: Sequence[int], n: int, k: int) -> bool:
    """
    Grassmann-Plucker relations on integer coordinates in the e_S basis of the k-th
    exterior power.
    """
    if k in (1, n - 1):
        return True
    p = dict(zip(wedge_basis(n, k), (int(c) for c in coeffs)))
    for head in itertools.combinations(range(n), k - 1):
        for tail in itertools.combinations(range(n), k + 1):
            total = 0
            for position, extra in enumerate(tail):
                rest = tail[:position] + tail[position + 1 :]
                total += (-1) ** position * _signed_coordinate(p, head, extra) * p[rest]
            if total != 0:
                return False
    return True


def covolume(vectors: np.ndarray) -> float:
    return float(math.sqrt(max(np.linalg.det(vectors.T @ vectors), 0.0)))


def _minimal_covolume(basis: np.ndarray, i: int, budget: Optional[int] = None) -> float:
    n = basis.shape[0]
    reduced, _ = lll_reduce(basis)
    best = min(
        covolume(reduced[:, list(subset)]) for subset in itertools.combinations(range(n), i)
    )

    wedge_reduced, transform = lll_reduce(wedge_power(reduced, i))
    try:
        candidates = enumerate_short_vectors(wedge_reduced, best, budget)
    except EnumerationBudgetError as e:
        logger.warning(
            "%s Keeping the reduced-basis bound %s",
            e,
            best,
            extra={"n": n, "index": i},
        )
        return best
    for coeffs, square in candidates:
        if square >= best * best:
            continue
        if is_decomposable(transform @ coeffs, n, i):
            best = min(best, float(np.linalg.norm(wedge_reduced @ coeffs)))
    return best


def lattice_minima(lat: Lattice, i: int, budget: Optional[int] = None) -> float:
    """
    alpha_i: the reciprocal of the least covolume of an i-dimensional rational subspace,
    found as the shortest decomposable vector of the i-th wedge lattice.
    """
    if not 0 <= i <= lat.n:
        raise BadIndexError(i)
    if i in (0, lat.n):
        return 1.0
    return 1.0 / _minimal_covolume(lat.basis, i, budget)


def gauss_reduce_many(bases) -> Tuple[np.ndarray, np.ndarray]:
    """
    Lagrange-Gauss reduction of many planar bases at once; returns the shortest and
    second basis vectors, shape (m, 2) each.
    """
    bases = np.asarray(bases, dtype=float)
    u, v = bases[:, :, 0].copy(), bases[:, :, 1].copy()
    for _ in range(GAUSS_MAX_ITERATIONS):
        swap = (v * v).sum(axis=1) < (u * u).sum(axis=1)
        u, v = np.where(swap[:, None], v, u), np.where(swap[:, None], u, v)
        q = np.rint((u * v).sum(axis=1) / (u * u).sum(axis=1))
        if not q.any():
            break
        v = v - q[:, None] * u
    return u, v


def minima_many(bases, i: int) -> np.ndarray:
    bases = np.asarray(bases, dtype=float)
    n = bases.shape[-1]
    if not 0 <= i <= n:
        raise BadIndexError(i)
    if i in (0, n):
        return np.ones(bases.shape[0])
    if n == 2:
        u, _ = gauss_reduce_many(bases)
        return 1.0 / np.linalg.norm(u, axis=1)
    return np.array([1.0 / _minimal_covolume(basis, i) for basis in bases])


def reduce_many(bases) -> np.ndarray:
    """
    Replace each basis by a reduced basis of the same lattice.
    """
    bases = np.asarray(bases, dtype=float)
    if bases.shape[-1] == 2:
        u, v = gauss_reduce_many(bases)
        return np.stack([u, v], axis=-1)
    return np.stack([lll_reduce(basis)[0] for basis in bases])


def margulis_function(lat: Lattice, epsilon: float, delta: float) -> float:
    n = lat.n
    return sum(
        epsilon ** (i * (n - i)) * lattice_minima(lat, i) ** delta for i in range(n + 1)
    )


def margulis_many(bases, epsilon: float, delta: float) -> np.ndarray:
    bases = np.asarray(bases, dtype=float)
    n = bases.shape[-1]
    return sum(
        epsilon ** (i * (n - i)) * minima_many(bases, i) ** delta for i in range(n + 1)
    )


def drift_parameters(n: int, cdelta: float, delta0: float, omega: float) -> DriftParameters:
    if cdelta >= 1.0:
        raise ContractionNotEstablishedError()
    if cdelta <= 0.0 or omega <= 0.0:
        raise BadParamsError("Drift parameters need 0 < C(delta) < 1 and omega > 0.")
    if cdelta > 0.99:
        logger.warning(
            "C(delta)=%s is close to 1; epsilon and 1 - c1 degenerate",
            cdelta,
            extra={"cdelta": cdelta},
        )
    return DriftParameters(
        n=n,
        delta0=delta0,
        delta=delta0 / n,
        cdelta=cdelta,
        omega=omega,
        epsilon=(1.0 - cdelta) / (3.0 * n * omega ** 2),
        c1=(1.0 + 2.0 * cdelta) / 3.0,
        b=2.0,
    )


def tightness_constants(a: float, b: float, epsilon: float) -> TightnessConstants:
    """
    For A u <= a u + b: the set {u <= 2b / ((1 - a) epsilon)} carries mass at least
    1 - epsilon after time(u(x)) steps.
    """
    if not 0.0 < a < 1.0:
        raise ContractionNotEstablishedError()
    return TightnessConstants(a=a, b=b, epsilon=epsilon, threshold=2.0 * b / ((1.0 - a) * epsilon))


def alpha_bound_from_recurrence(
    epsilon: float, cdelta: float, n: int, delta: float, c_dim: float = 1.0
) -> Tuple[float, float]:
    """
    (bound on alpha_1, lower bound on the injectivity radius) on the recurrence set.
    """
    alpha_bound = (c_dim / (epsilon * (1.0 - cdelta) ** n)) ** (1.0 / delta)
    injectivity = (epsilon * (1.0 - cdelta) ** n / c_dim) ** (n / delta)
    return alpha_bound, injectivity


def crude_log_u_bound(lat: Lattice, epsilon: float, delta: float) -> float:
    n = lat.n
    largest = max(lattice_minima(lat, i) ** delta for i in range(n + 1))
    return math.log(largest) + math.log(sum(epsilon ** (i * (n - i)) for i in range(n + 1)))


def injectivity_proxy(lat: Lattice) -> float:
    return 1.0 / lattice_minima(lat, 1)


def parse_matrix_text(text: str) -> np.ndarray:
    """
    Row-major decimal text: rows separated by ';' or newlines, entries by spaces or
    commas. Rational entries such as 1/2 are accepted.
    """
    rows = [row for row in text.replace(";", "\n").splitlines() if row.strip()]
    return np.array(
        [[float(Fraction(entry)) for entry in row.replace(",", " ").split()] for row in rows]
    )
