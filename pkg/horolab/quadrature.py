import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial.legendre import leggauss

from horolab import seeding
from horolab import utils
from horolab.exceptions import ConfigError

logger = logging.getLogger("django-horolab.horolab.quadrature")

GAUSS = "gauss"
MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True, eq=False)
class QuadratureScheme:
    """
    A probability rule on the unit box [0,1]^dim. Weights always sum to one, and
    `integrate` divides by the same weight total so that constants come back exactly.
    """

    kind: str
    dim: int
    nodes: np.ndarray
    weights: np.ndarray
    order: Optional[int] = None
    panels: Optional[int] = None
    seed: Optional[int] = None
    samples: Optional[int] = None

    def __post_init__(self):
        for name in ("nodes", "weights"):
            array = np.array(getattr(self, name), dtype=float)
            array.setflags(write=False)
            object.__setattr__(self, name, array)
        object.__setattr__(self, "total", float(np.dot(self.weights, np.ones(self.size))))

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def gauss_legendre(cls, dim: int, order: int = 64, panels: int = 1):
        x, w = leggauss(order)
        offsets = np.arange(panels) / panels
        axis_nodes = (offsets[:, None] + (x[None, :] + 1.0) / (2.0 * panels)).ravel()
        axis_weights = np.tile(w / (2.0 * panels), panels)

        mesh = np.meshgrid(*([axis_nodes] * dim), indexing="ij")
        nodes = np.stack([m.ravel() for m in mesh], axis=-1)
        weight_mesh = np.meshgrid(*([axis_weights] * dim), indexing="ij")
        weights = np.prod(np.stack([m.ravel() for m in weight_mesh], axis=-1), axis=-1)
        return cls(GAUSS, dim, nodes, weights, order=order, panels=panels)

    @classmethod
    def monte_carlo(cls, dim: int, samples: int, seed: int):
        nodes = seeding.generator(seed, "quadrature", dim).random((samples, dim))
        weights = np.full(samples, 1.0 / samples)
        return cls(MONTE_CARLO, dim, nodes, weights, seed=seed, samples=samples)

    @classmethod
    def default(cls, dim: int, seed: int = 0):
        quadrature_settings = utils.get_quadrature_settings()
        if dim > quadrature_settings["MAX_TENSOR_DIM"]:
            logger.info(
                "No tensor grid in dimension %s, sampling instead",
                dim,
                extra={"dim": dim, "samples": quadrature_settings["MC_SAMPLES"]},
            )
            return cls.monte_carlo(dim, quadrature_settings["MC_SAMPLES"], seed)
        return cls.gauss_legendre(
            dim, quadrature_settings["ORDER"], utils.get_quadrature_panels(dim)
        )

    @classmethod
    def from_spec(cls, dim: int, spec: Optional[dict], seed: int):
        """
        Build a scheme from the `quadrature` block of an experiment config.
        """
        if not spec:
            return cls.default(dim, seed)
        unknown = set(spec) - {"kind", "order", "panels", "samples"}
        if unknown:
            raise ConfigError("quadrature." + sorted(unknown)[0])

        kind = spec.get("kind", GAUSS)
        if kind == GAUSS:
            order = int(spec.get("order", utils.get_quadrature_settings()["ORDER"]))
            panels = int(spec.get("panels", utils.get_quadrature_panels(dim)))
            if order < 1 or panels < 1:
                raise ConfigError("quadrature.order")
            return cls.gauss_legendre(dim, order, panels)
        if kind == MONTE_CARLO:
            samples = int(spec.get("samples", utils.get_quadrature_settings()["MC_SAMPLES"]))
            if samples < 2:
                raise ConfigError("quadrature.samples")
            return cls.monte_carlo(dim, samples, seed)
        raise ConfigError("quadrature.kind")

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, np.asarray(values, dtype=float)) / self.total)

    def standard_error(self, values) -> float:
        if self.kind != MONTE_CARLO:
            return 0.0
        values = np.asarray(values, dtype=float)
        return float(values.std(ddof=1) / np.sqrt(values.shape[0]))

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "dim": self.dim,
            "nodes": self.size,
            "order": self.order,
            "panels": self.panels,
            "seed": self.seed,
        }
