import itertools
import logging
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
from scipy import optimize

from horolab.exceptions import ZeroSupError

logger = logging.getLogger("django-horolab.horolab.sublevel")

# Grid points are evaluated in blocks so that 10^6-point grids stay cheap on memory.
GRID_CHUNK = 1 << 18


@dataclass(frozen=True)
class SublevelQuery:
    dim: int
    degree: int
    epsilon: float
    sup_norm: float
    box_measure: float = 1.0


@dataclass(frozen=True)
class SupEstimate:
    value: float
    resolution: int
    argmax: Tuple[float, ...]


@dataclass(frozen=True, eq=False)
class BoxPolynomial:
    """
    A real polynomial on [0,1]^dim given by its exponent vectors and coefficients.
    """

    exponents: np.ndarray
    coefficients: np.ndarray
    degree: int

    @property
    def dim(self) -> int:
        return self.exponents.shape[1]

    def __call__(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        monomials = np.prod(points[:, None, :] ** self.exponents[None, :, :], axis=-1)
        return monomials @ self.coefficients


def chebyshev_T(d: int, x):
    x = np.asarray(x, dtype=float)
    previous, current = np.ones_like(x), x
    if d == 0:
        return previous if previous.ndim else float(previous)
    for _ in range(d - 1):
        previous, current = current, 2.0 * x * current - previous
    return current if current.ndim else float(current)


def sublevel_bound(q: SublevelQuery) -> float:
    if q.sup_norm <= 0.0:
        raise ZeroSupError()
    return min(1.0, 4.0 * q.dim * (q.epsilon / q.sup_norm) ** (1.0 / q.degree))


def remez_sup_bound(epsilon: float, fraction: float, dim: int, degree: int) -> float:
    """
    Remez: sup over the box is at most epsilon * T_d((1 + s) / (1 - s)) where
    s = (1 - fraction)^(1/dim) and fraction is the relative measure of {|f| < epsilon}.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError("Sub-level fraction must lie strictly between 0 and 1.")
    s = (1.0 - fraction) ** (1.0 / dim)
    return epsilon * chebyshev_T(degree, (1.0 + s) / (1.0 - s))


def _midpoint_axis(resolution: int) -> np.ndarray:
    return (np.arange(resolution) + 0.5) / resolution


def _grid_blocks(axis: np.ndarray, dim: int):
    resolution = len(axis)
    total = resolution ** dim
    for start in range(0, total, GRID_CHUNK):
        flat = np.arange(start, min(start + GRID_CHUNK, total))
        digits = np.stack(
            [(flat // resolution ** (dim - 1 - a)) % resolution for a in range(dim)],
            axis=-1,
        )
        yield axis[digits]


def _norms(values) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.ndim > 1:
        return np.linalg.norm(values, axis=-1)
    return np.abs(values)


def empirical_sublevel(
    f: Callable[[np.ndarray], np.ndarray], epsilon: float, resolution: int, dim: int = 1
) -> float:
    """
    Fraction of the cell-midpoint grid with |f| < epsilon.
    """
    if resolution < 2:
        raise ValueError("Grid resolution must be at least 2 per axis.")
    below = 0
    for block in _grid_blocks(_midpoint_axis(resolution), dim):
        below += int(np.count_nonzero(_norms(f(block)) < epsilon))
    return below / resolution ** dim


def sublevel_fractions(
    f: Callable[[np.ndarray], np.ndarray], epsilons, resolution: int, dim: int = 1
) -> np.ndarray:
    """
    empirical_sublevel for several thresholds from one pass over the grid.
    """
    epsilons = np.asarray(epsilons, dtype=float)
    below = np.zeros(epsilons.shape, dtype=np.int64)
    for block in _grid_blocks(_midpoint_axis(resolution), dim):
        norms = _norms(f(block))
        below += np.count_nonzero(norms[None, :] < epsilons[:, None], axis=1)
    return below / resolution ** dim


def sup_norm_estimate(
    f: Callable[[np.ndarray], np.ndarray], dim: int, resolution: int = 64
) -> SupEstimate:
    """
    Grid maximum of |f| over the box, polished by a bounded local search from the best
    grid point. The grid value is a lower bound on the true sup.
    """
    axis = np.linspace(0.0, 1.0, resolution)
    best_value, best_point = -np.inf, None
    for points in _grid_blocks(axis, dim):
        norms = _norms(f(points))
        index = int(norms.argmax())
        if norms[index] > best_value:
            best_value, best_point = float(norms[index]), points[index]

    result = optimize.minimize(
        lambda x: -float(_norms(f(np.atleast_2d(x)))[0]),
        best_point,
        method="L-BFGS-B",
        bounds=[(0.0, 1.0)] * dim,
    )
    if -result.fun > best_value:
        logger.debug(
            "Local search raised the sup from %s to %s",
            best_value,
            -result.fun,
            extra={"dim": dim, "resolution": resolution},
        )
        best_value, best_point = float(-result.fun), result.x
    return SupEstimate(
        value=best_value,
        resolution=resolution,
        argmax=tuple(float(c) for c in best_point),
    )


def random_polynomial(rng: np.random.Generator, dim: int, degree: int) -> BoxPolynomial:
    exponents = np.array(
        [
            e
            for e in itertools.product(range(degree + 1), repeat=dim)
            if sum(e) <= degree
        ]
    )
    coefficients = rng.uniform(-1.0, 1.0, size=len(exponents))
    return BoxPolynomial(exponents=exponents, coefficients=coefficients, degree=degree)


def ladder_fractions(
    f: Callable[[np.ndarray], np.ndarray],
    ratios,
    resolution: int,
    dim: int = 1,
    sup_resolution: int = 64,
) -> Tuple[SupEstimate, np.ndarray, np.ndarray]:
    """
    Thresholds ratio * sup for every ratio of the ladder, with the grid fraction below
    each. Scaling f leaves the fractions unchanged.
    """
    sup = sup_norm_estimate(f, dim, min(sup_resolution, resolution))
    if sup.value <= 0.0:
        raise ZeroSupError()
    epsilons = np.asarray(ratios, dtype=float) * sup.value
    return sup, epsilons, sublevel_fractions(f, epsilons, resolution, dim)
