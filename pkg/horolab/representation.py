import collections
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np
from scipy import optimize, stats
from scipy.stats import qmc

from horolab import seeding
from horolab.exceptions import EmptyPositivePartError, NoStringError, ZeroVectorError
from horolab.linalg import (
    CartanFlow,
    HorosphericalChart,
    exp_nilpotent,
    exp_nilpotent_many,
    horospherical_chart,
    wedge_basis,
    wedge_power,
    wedge_power_many,
)

logger = logging.getLogger("django-horolab.horolab.representation")

# Unit vectors are pushed through the max-norm evaluation in blocks of this size.
SAMPLE_CHUNK = 256


@dataclass(frozen=True, eq=False)
class RepSpace:
    """
    The wedge representation on the k-th exterior power, in the basis e_S (S a
    k-subset in lexicographic order). Each e_S is a weight vector with weight sum(w_S).
    """

    flow: CartanFlow
    k: int
    labels: Tuple[Tuple[int, ...], ...]
    exact_weights: Tuple[Fraction, ...]
    positive: Tuple[int, ...]
    zero: Tuple[int, ...]
    negative: Tuple[int, ...]

    @property
    def n(self) -> int:
        return self.flow.n

    @property
    def dim(self) -> int:
        return len(self.labels)

    @property
    def weights(self) -> np.ndarray:
        return np.array([float(w) for w in self.exact_weights])

    @property
    def name(self) -> str:
        return "wedge{}".format(self.k)

    def a_action(self, t: float) -> np.ndarray:
        return np.exp(t * self.weights)


@dataclass(frozen=True, eq=False)
class WeightVectorCoeffs:
    rep: RepSpace
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.shape != (self.rep.dim,):
            raise ValueError(
                "Expected {} coefficients, got shape {}.".format(self.rep.dim, coeffs.shape)
            )
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def normalized(self) -> "WeightVectorCoeffs":
        if self.norm == 0.0:
            raise ZeroVectorError()
        return WeightVectorCoeffs(self.rep, self.coeffs / self.norm)


@dataclass(frozen=True)
class AnchorEstimate:
    lower: float
    upper: float
    witness: Tuple[float, ...]
    samples: int
    grid: int


def weight_decomposition(k: int, flow: CartanFlow) -> RepSpace:
    labels = tuple(wedge_basis(flow.n, k))
    exact = tuple(sum((flow.weights[i] for i in label), Fraction(0)) for label in labels)
    return RepSpace(
        flow=flow,
        k=k,
        labels=labels,
        exact_weights=exact,
        positive=tuple(i for i, w in enumerate(exact) if w > 0),
        zero=tuple(i for i, w in enumerate(exact) if w == 0),
        negative=tuple(i for i, w in enumerate(exact) if w < 0),
    )


def basis_vector(rep: RepSpace, index: int) -> WeightVectorCoeffs:
    coeffs = np.zeros(rep.dim)
    coeffs[index] = 1.0
    return WeightVectorCoeffs(rep, coeffs)


def orbit_coefficients(
    v: WeightVectorCoeffs, chart: HorosphericalChart, tbar
) -> WeightVectorCoeffs:
    image = wedge_power(exp_nilpotent(chart, tbar), v.rep.k) @ v.coeffs
    return WeightVectorCoeffs(v.rep, image)


def orbit_matrices(rep: RepSpace, chart: HorosphericalChart, points) -> np.ndarray:
    """
    rho(exp(h(t))) for every row t of `points`, shape (m, dim, dim).
    """
    return wedge_power_many(exp_nilpotent_many(chart, points), rep.k)


def box_grid(dim: int, resolution: int) -> np.ndarray:
    axis = np.linspace(0.0, 1.0, resolution)
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def sample_unit_vectors(dim: int, count: int, seed: int = 0) -> np.ndarray:
    """
    Deterministic unit vectors: an angular grid on the half circle for dim 2 (v and -v
    give the same ratios), scrambled Sobol points through the normal quantile otherwise.
    """
    if dim == 1:
        return np.ones((1, 1))
    if dim == 2:
        angles = np.pi * np.arange(count) / count
        return np.stack([np.cos(angles), np.sin(angles)], axis=-1)

    sampler = qmc.Sobol(d=dim, scramble=True, rng=seeding.generator(seed, "sphere"))
    points = sampler.random_base2(int(np.ceil(np.log2(max(count, 2)))))[:count]
    gaussian = stats.norm.ppf(points)
    return gaussian / np.linalg.norm(gaussian, axis=1, keepdims=True)


def _positive_rows(rep: RepSpace, chart: HorosphericalChart, grid: int) -> np.ndarray:
    matrices = orbit_matrices(rep, chart, box_grid(chart.dim, grid))
    return matrices[:, list(rep.positive), :].reshape(-1, rep.dim)


def _max_positive_coefficient(rows: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    values = [
        np.abs(rows @ vectors[start : start + SAMPLE_CHUNK].T).max(axis=0)
        for start in range(0, vectors.shape[0], SAMPLE_CHUNK)
    ]
    return np.concatenate(values)


def anchor_constant(
    rep: RepSpace,
    chart: HorosphericalChart,
    samples: int = 1024,
    grid: int = 33,
    seed: int = 0,
    refinements: int = 4,
) -> AnchorEstimate:
    """
    Estimate min over unit v of max over the unit box of the positive-weight
    coefficients of rho(h)v.

    The lower estimate minimizes the grid maximum over sampled unit vectors and then
    refines the best few with Nelder-Mead. The upper estimate re-evaluates that witness
    on a grid with twice the resolution.
    """
    if not rep.positive:
        raise EmptyPositivePartError()

    rows = _positive_rows(rep, chart, grid)
    candidates = np.concatenate(
        [sample_unit_vectors(rep.dim, samples, seed), np.eye(rep.dim)]
    )
    values = _max_positive_coefficient(rows, candidates)

    def objective(x):
        norm = np.linalg.norm(x)
        if norm == 0.0:
            return np.inf
        return float(np.abs(rows @ (x / norm)).max())

    best_value = float(values.min())
    best_vector = candidates[int(values.argmin())]
    for index in np.argsort(values, kind="stable")[:refinements]:
        result = optimize.minimize(
            objective,
            candidates[index],
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000},
        )
        if result.fun < best_value:
            best_value = float(result.fun)
            best_vector = result.x / np.linalg.norm(result.x)

    fine_rows = _positive_rows(rep, chart, 2 * grid - 1)
    upper = max(float(np.abs(fine_rows @ best_vector).max()), best_value)
    logger.debug(
        "Anchor constant for %s in [%s, %s]",
        rep.name,
        best_value,
        upper,
        extra={"rep": rep.name, "samples": samples, "grid": grid},
    )
    return AnchorEstimate(
        lower=best_value,
        upper=upper,
        witness=tuple(float(c) for c in best_vector),
        samples=samples,
        grid=grid,
    )


def orbit_norm_floor(
    rep: RepSpace,
    chart: HorosphericalChart,
    samples: int = 512,
    grid: int = 17,
    seed: int = 0,
) -> float:
    """
    Empirical min over unit v and box points h of |rho(h)v|.
    """
    matrices = orbit_matrices(rep, chart, box_grid(chart.dim, grid))
    vectors = np.concatenate([sample_unit_vectors(rep.dim, samples, seed), np.eye(rep.dim)])
    images = np.einsum("gij,sj->sgi", matrices, vectors)
    return float(np.linalg.norm(images, axis=-1).min())


def _simple_pairs(flow: CartanFlow, chart: HorosphericalChart):
    w = flow.weights
    levels = set(w)
    return [
        (i, j)
        for i, j in chart.pairs
        if not any(w[i] > level > w[j] for level in levels)
    ]


def weight_string_order(rep: RepSpace, chart: Optional[HorosphericalChart] = None) -> int:
    """
    Length of the shortest chain of simple root steps from a lowest-weight basis line to
    a highest-weight basis line.
    """
    weights = rep.exact_weights
    low, high = min(weights), max(weights)
    if low == high:
        raise NoStringError()

    if chart is None:
        chart = horospherical_chart(rep.flow)
    steps = _simple_pairs(rep.flow, chart)
    targets = {label for label, w in zip(rep.labels, weights) if w == high}
    queue = collections.deque(
        (label, 0) for label, w in zip(rep.labels, weights) if w == low
    )
    seen = {label for label, _ in queue}

    while queue:
        label, distance = queue.popleft()
        if label in targets:
            return distance
        members = set(label)
        for i, j in steps:
            if j in members and i not in members:
                neighbour = tuple(sorted((members - {j}) | {i}))
                if neighbour not in seen:
                    seen.add(neighbour)
                    queue.append((neighbour, distance + 1))

    raise NoStringError()
