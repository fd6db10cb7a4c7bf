import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple, Union

import numpy as np

from horolab.exceptions import (
    AllWeightsEqualError,
    BadIndexError,
    InvalidFlowError,
    UnimodularityError,
)

logger = logging.getLogger("django-horolab.horolab.linalg")

UNIMODULAR_TOLERANCE = 1e-9
# Batched minors are gathered in blocks of this many matrices.
WEDGE_CHUNK = 4096

Number = Union[int, float, str, Fraction]


def _frozen(array) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class GroupElement:
    """
    An element of SL_n(R) stored as a dense read-only float64 matrix.
    """

    entries: np.ndarray

    def __post_init__(self):
        entries = _frozen(self.entries)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise UnimodularityError("Group elements must be square matrices.")
        scale = max(1.0, float(np.abs(entries).max())) ** entries.shape[0]
        if abs(np.linalg.det(entries) - 1.0) > UNIMODULAR_TOLERANCE * scale:
            raise UnimodularityError()
        object.__setattr__(self, "entries", entries)

    @classmethod
    def identity(cls, n: int) -> "GroupElement":
        return cls(np.eye(n))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.entries @ other.entries)

    def inverse(self) -> "GroupElement":
        return GroupElement(np.linalg.inv(self.entries))

    def apply(self, vector) -> np.ndarray:
        return self.entries @ np.asarray(vector, dtype=float)


@dataclass(frozen=True, eq=False)
class CartanFlow:
    """
    The diagonal flow a_t = diag(exp(t * w_i)). Weights are kept as exact rationals so
    that their sum is exactly zero.
    """

    weights: Tuple[Fraction, ...]

    def __post_init__(self):
        weights = tuple(Fraction(w) for w in self.weights)
        if sum(weights) != 0:
            raise InvalidFlowError("Flow weights must sum to zero.")
        if any(a < b for a, b in zip(weights, weights[1:])):
            raise InvalidFlowError()
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_weights(cls, weights: Sequence[Number]) -> "CartanFlow":
        """
        Build a flow from arbitrary weights, projecting onto the trace-zero hyperplane.
        """
        exact = [Fraction(w) for w in weights]
        mean = sum(exact) / len(exact)
        return cls(tuple(w - mean for w in exact))

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def vector(self) -> np.ndarray:
        return np.array([float(w) for w in self.weights])


@dataclass(frozen=True, eq=False)
class HorosphericalChart:
    """
    Lie coordinates on the expanded horospherical subgroup: the basis is the set of
    elementary matrices E_ij with w_i > w_j, ordered lexicographically on (i, j).
    """

    flow: CartanFlow
    pairs: Tuple[Tuple[int, int], ...]
    eigenvalues: np.ndarray
    degree: int

    @property
    def n(self) -> int:
        return self.flow.n

    @property
    def dim(self) -> int:
        return len(self.pairs)

    @property
    def basis(self) -> List[np.ndarray]:
        matrices = []
        for i, j in self.pairs:
            e = np.zeros((self.n, self.n))
            e[i, j] = 1.0
            matrices.append(e)
        return matrices

    def lie_elements(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        rows = [i for i, _ in self.pairs]
        cols = [j for _, j in self.pairs]
        elements = np.zeros((points.shape[0], self.n, self.n))
        elements[:, rows, cols] = points
        return elements


def cartan_element(flow: CartanFlow, t: float) -> GroupElement:
    return GroupElement(np.diag(np.exp(t * flow.vector)))


def cartan_matrix(flow: CartanFlow, t: float) -> np.ndarray:
    return np.diag(np.exp(t * flow.vector))


def horospherical_chart(flow: CartanFlow) -> HorosphericalChart:
    w = flow.weights
    pairs = tuple(
        (i, j) for i in range(flow.n) for j in range(flow.n) if w[i] > w[j]
    )
    if not pairs:
        raise AllWeightsEqualError()

    eigenvalues = _frozen([float(w[i] - w[j]) for i, j in pairs])
    # The longest chain of strictly decreasing weights is the nilpotency degree.
    degree = len(set(w)) - 1
    logger.debug(
        "Horospherical chart of dimension %s",
        len(pairs),
        extra={"weights": [str(x) for x in w], "degree": degree},
    )
    return HorosphericalChart(flow, pairs, eigenvalues, degree)


def exp_nilpotent_many(chart: HorosphericalChart, points) -> np.ndarray:
    x = chart.lie_elements(points)
    result = np.broadcast_to(np.eye(chart.n), x.shape).copy()
    result += x
    term = x
    for j in range(2, chart.degree + 1):
        term = term @ x / j
        result += term
    return result


def exp_nilpotent(chart: HorosphericalChart, tbar) -> GroupElement:
    return GroupElement(exp_nilpotent_many(chart, [tbar])[0])


def conjugate_coordinates(chart: HorosphericalChart, tbar, t: float) -> np.ndarray:
    """
    a_t exp(h(tbar)) a_{-t} = exp(h(tbar * e^{t * lambda})).
    """
    return np.asarray(tbar, dtype=float) * np.exp(t * chart.eigenvalues)


def wedge_basis(n: int, k: int) -> List[Tuple[int, ...]]:
    return list(itertools.combinations(range(n), k))


def wedge_power_many(matrices, k: int) -> np.ndarray:
    matrices = np.asarray(matrices, dtype=float)
    n = matrices.shape[-1]
    if not 1 <= k <= n:
        raise BadIndexError(k)
    if k == 1:
        return matrices.copy()

    index = np.array(wedge_basis(n, k))
    rows = index[:, None, :, None]
    cols = index[None, :, None, :]
    blocks = [
        np.linalg.det(matrices[start : start + WEDGE_CHUNK][:, rows, cols])
        for start in range(0, matrices.shape[0], WEDGE_CHUNK)
    ]
    return np.concatenate(blocks, axis=0)


def wedge_power(g: Union[GroupElement, np.ndarray], k: int) -> np.ndarray:
    entries = g.entries if isinstance(g, GroupElement) else np.asarray(g, dtype=float)
    return wedge_power_many(entries[None], k)[0]
