import abc
import logging
import math
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, special

from horolab.exceptions import ConfigError
from horolab.lattice import (
    enumerate_short_vectors,
    gauss_reduce_many,
    lll_reduce,
    margulis_many,
    minima_many,
)

logger = logging.getLogger("django-horolab.horolab.observables")

# Planar lattices are summed over in row blocks of this size.
SIEGEL_CHUNK = 2048


class Observable(abc.ABC):
    """
    A bounded function on the space of unimodular lattices, evaluated on stacks of
    bases of shape (m, n, n). `exact_mean` is its Haar integral when known.
    """

    kind = None
    exact_mean: Optional[float] = None

    @abc.abstractmethod
    def evaluate_many(self, bases) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, lat) -> float:
        return float(self.evaluate_many(np.asarray(lat.basis)[None])[0])

    def describe(self) -> dict:
        return {"kind": self.kind, "exact_mean": self.exact_mean}


class ConstantObservable(Observable):
    kind = "constant"

    def __init__(self, value: float = 1.0):
        self.value = float(value)
        self.exact_mean = self.value

    def evaluate_many(self, bases) -> np.ndarray:
        return np.full(np.asarray(bases).shape[0], self.value)

    def describe(self) -> dict:
        return dict(super().describe(), value=self.value)


class SiegelObservable(Observable):
    """
    Siegel transform of a radial bump: sum over non-zero lattice vectors of psi(|v|),
    with psi = 1 on [0, r0], a cosine taper on [r0, r1] and 0 beyond. Its Haar mean
    is the integral of psi over R^n.
    """

    kind = "siegel"

    def __init__(self, n: int, r0: float = 0.5, r1: float = 1.5):
        if not 0.0 <= r0 < r1:
            raise ValueError("Siegel radii need 0 <= r0 < r1.")
        self.n = n
        self.r0 = float(r0)
        self.r1 = float(r1)
        self.exact_mean = self._haar_mean()

    def profile(self, radii) -> np.ndarray:
        radii = np.asarray(radii, dtype=float)
        taper = 0.5 * (1.0 + np.cos(np.pi * (radii - self.r0) / (self.r1 - self.r0)))
        return np.where(radii <= self.r0, 1.0, np.where(radii < self.r1, taper, 0.0))

    def _haar_mean(self) -> float:
        sphere = 2.0 * math.pi ** (self.n / 2.0) / special.gamma(self.n / 2.0)
        shell, _ = integrate.quad(
            lambda s: float(self.profile(s)) * s ** (self.n - 1),
            self.r0,
            self.r1,
            epsabs=1e-14,
            epsrel=1e-13,
        )
        return sphere * (self.r0 ** self.n / self.n + shell)

    def _planar(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        lengths = np.linalg.norm(u, axis=1)
        mu = (u * v).sum(axis=1) / lengths ** 2
        # With det 1 the second vector sits 1/|u| off the line of u.
        b_max = int(math.ceil(self.r1 * lengths.max()))
        a_max = int(math.ceil(self.r1 / lengths.min())) + 1

        total = np.zeros(u.shape[0])
        for b in range(-b_max, b_max + 1):
            center = np.rint(-b * mu)
            for offset in range(-a_max, a_max + 1):
                a = center + offset
                points = a[:, None] * u + b * v
                values = self.profile(np.linalg.norm(points, axis=1))
                if b == 0:
                    values = np.where(a == 0, 0.0, values)
                total += values
        return total

    def _general(self, basis: np.ndarray) -> float:
        reduced, _ = lll_reduce(basis)
        return float(
            sum(
                self.profile(np.linalg.norm(reduced @ coeffs))
                for coeffs, _ in enumerate_short_vectors(reduced, self.r1)
            )
        )

    def evaluate_many(self, bases) -> np.ndarray:
        bases = np.asarray(bases, dtype=float)
        if bases.shape[-1] == 2:
            u, v = gauss_reduce_many(bases)
            # Chunks of similar shortest length keep the coefficient box tight.
            order = np.argsort(np.linalg.norm(u, axis=1), kind="stable")
            values = np.empty(bases.shape[0])
            for start in range(0, bases.shape[0], SIEGEL_CHUNK):
                rows = order[start : start + SIEGEL_CHUNK]
                values[rows] = self._planar(u[rows], v[rows])
            return values
        return np.array([self._general(basis) for basis in bases])

    def describe(self) -> dict:
        return dict(super().describe(), r0=self.r0, r1=self.r1)


class HeightObservable(Observable):
    """
    Truncated height min(alpha_1^delta, cap).
    """

    kind = "height"

    def __init__(self, delta: float = 0.5, cap: float = 10.0):
        self.delta = float(delta)
        self.cap = float(cap)

    def evaluate_many(self, bases) -> np.ndarray:
        return np.minimum(minima_many(bases, 1) ** self.delta, self.cap)

    def describe(self) -> dict:
        return dict(super().describe(), delta=self.delta, cap=self.cap)


class MargulisObservable(Observable):
    kind = "margulis"

    def __init__(self, epsilon: float, delta: float):
        self.epsilon = float(epsilon)
        self.delta = float(delta)

    def evaluate_many(self, bases) -> np.ndarray:
        return margulis_many(bases, self.epsilon, self.delta)

    def describe(self) -> dict:
        return dict(super().describe(), epsilon=self.epsilon, delta=self.delta)


class MinimaPowerObservable(Observable):
    kind = "minima_power"

    def __init__(self, index: int, power: float):
        self.index = int(index)
        self.power = float(power)

    def evaluate_many(self, bases) -> np.ndarray:
        return minima_many(bases, self.index) ** self.power

    def describe(self) -> dict:
        return dict(super().describe(), index=self.index, power=self.power)


class GridObservable(Observable):
    """
    A user table of values against log alpha_1, linearly interpolated and held
    constant past both ends.
    """

    kind = "grid"

    def __init__(
        self,
        log_heights: Sequence[float],
        values: Sequence[float],
        exact_mean: Optional[float] = None,
    ):
        self.log_heights = np.asarray(log_heights, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.log_heights.shape != self.values.shape or self.log_heights.size < 2:
            raise ValueError("Grid observables need matching tables of at least two points.")
        if np.any(np.diff(self.log_heights) <= 0):
            raise ValueError("Grid abscissae must be strictly increasing.")
        self.exact_mean = exact_mean

    def evaluate_many(self, bases) -> np.ndarray:
        return np.interp(np.log(minima_many(bases, 1)), self.log_heights, self.values)

    def describe(self) -> dict:
        return dict(
            super().describe(),
            log_heights=self.log_heights.tolist(),
            values=self.values.tolist(),
        )


OBSERVABLE_KEYS = {
    "constant": {"value"},
    "siegel": {"r0", "r1"},
    "height": {"delta", "cap"},
    "margulis": {"epsilon", "delta"},
    "minima_power": {"index", "power"},
    "grid": {"log_heights", "values", "exact_mean"},
}


def build_observable(spec: dict, n: int) -> Observable:
    """
    Observable from the `observable` block of an experiment config.
    """
    kind = spec.get("kind")
    if kind not in OBSERVABLE_KEYS:
        raise ConfigError("observable.kind")
    unknown = set(spec) - OBSERVABLE_KEYS[kind] - {"kind"}
    if unknown:
        raise ConfigError("observable." + sorted(unknown)[0])

    params = {key: value for key, value in spec.items() if key != "kind"}
    try:
        if kind == "constant":
            return ConstantObservable(**params)
        if kind == "siegel":
            return SiegelObservable(n, **params)
        if kind == "height":
            return HeightObservable(**params)
        if kind == "margulis":
            return MargulisObservable(**params)
        if kind == "minima_power":
            return MinimaPowerObservable(**params)
        return GridObservable(**params)
    except (TypeError, ValueError) as e:
        logger.debug("Rejected observable spec", extra={"kind": kind, "error": str(e)})
        raise ConfigError("observable", 'Invalid configuration key "observable": {}'.format(e))
