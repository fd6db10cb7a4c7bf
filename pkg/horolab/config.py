import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Optional, Tuple

from horolab.diophantine import FAMILIES, named_algebraic_point, named_point
from horolab.exceptions import ConfigError
from horolab.lattice import parse_matrix_text
from horolab.linalg import CartanFlow, GroupElement
from horolab.numberfield import AlgebraicPoint, parse_algebraic_point
from horolab.observables import build_observable

logger = logging.getLogger("django-horolab.horolab.config")

KINDS = ("contraction", "anchor", "remez", "drift", "equidist", "dioph")
COMMON_KEYS = {"kind", "n", "weights", "seed", "quadrature", "output"}
# Wedge dimensions stay <= 20.
MAX_DIMENSION = 6

DEFAULTS = {
    "contraction": {
        "delta": 0.5,
        "R": [2, 4, 8, 16, 32, 64, 128, 256],
        "samples": 100,
        "ks": None,
    },
    "anchor": {"ks": None, "samples": 1024, "grid": 33},
    "remez": {
        "count": 1000,
        "dims": [1, 2, 3],
        "degrees": [1, 2, 3, 4, 5],
        "ladder": [0.001, 0.01, 0.1, 0.5],
        "resolutions": [2048, 128, 24],
    },
    "drift": {
        "R": 64,
        "delta0": 0.9,
        "omega": None,
        "cdelta": None,
        "epsilon_tail": 0.1,
        "steps": 5,
        "paths": 4096,
        "lattices": 50,
        "cusp_heights": [0.001],
    },
    "equidist": {
        "R": [10, 100, 1000, 10000],
        "base_point": {"family": "golden"},
        "observable": {"kind": "siegel"},
        "spectral_gap": None,
        "gamma": None,
        "tau": None,
        "nodes_per_unit": 16,
        "min_window": 3,
        "max_residual": 0.1,
        "expect_decay": True,
    },
    "dioph": {
        "base_point": {"family": "golden"},
        "index": 1,
        "tmax": 1000000,
        "grid_factor": 2.0,
        "liouville_M": 10000,
        "expect_exponent": None,
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    n: int
    weights: Tuple[Fraction, ...]
    seed: int
    quadrature: Optional[Dict[str, Any]]
    output: Optional[str]
    params: Dict[str, Any] = field(default_factory=dict)

    @property
    def flow(self) -> CartanFlow:
        return CartanFlow.from_weights(self.weights)

    def __getitem__(self, key):
        return self.params[key]

    def echo(self) -> dict:
        data = self.canonical()
        data["output"] = self.output
        return data

    def canonical(self) -> dict:
        """
        The validated config with defaults filled in, minus the output location.
        """
        data = {
            "kind": self.kind,
            "n": self.n,
            "weights": [str(w) for w in self.weights],
            "seed": self.seed,
            "quadrature": self.quadrature,
        }
        data.update(self.params)
        return data


def load_config(path: str) -> dict:
    try:
        with open(path) as f:
            return json.load(f)
    except (OSError, ValueError) as e:
        raise ConfigError("config", "Cannot read config {}: {}".format(path, e))


def _number(raw, key, minimum=None, strict=False, integer=False):
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, 'Configuration key "{}" must be a number.'.format(key))
    if integer and int(value) != value:
        raise ConfigError(key, 'Configuration key "{}" must be an integer.'.format(key))
    if minimum is not None and (value <= minimum if strict else value < minimum):
        raise ConfigError(
            key,
            'Configuration key "{}" is out of range: {} (minimum {}{}).'.format(
                key, value, minimum, ", exclusive" if strict else ""
            ),
        )
    return int(value) if integer else float(value)


def _number_list(raw, key, minimum=None, strict=False, integer=False):
    values = raw[key]
    if not isinstance(values, list) or not values:
        raise ConfigError(key, 'Configuration key "{}" must be a non-empty list.'.format(key))
    return [
        _number({key: value}, key, minimum, strict, integer) for value in values
    ]


def _weights(raw) -> Tuple[Fraction, ...]:
    try:
        return tuple(Fraction(str(w)) for w in raw["weights"])
    except (TypeError, ValueError, ZeroDivisionError):
        raise ConfigError("weights", 'Configuration key "weights" must list rationals.')


def resolve_base_point(spec, n: int) -> Tuple[GroupElement, Optional[AlgebraicPoint]]:
    """
    A base point given as {"family": ..., "parameter": ...}, {"matrix": "<text>"} or
    {"algebraic": "<text>"}.
    """
    if not isinstance(spec, dict) or len(set(spec) & {"family", "matrix", "algebraic"}) != 1:
        raise ConfigError("base_point")
    unknown = set(spec) - {"family", "matrix", "algebraic", "parameter"}
    if unknown:
        raise ConfigError("base_point." + sorted(unknown)[0])
    try:
        if "family" in spec:
            if spec["family"] not in FAMILIES:
                raise ConfigError("base_point.family")
            point = named_point(spec["family"], n, spec.get("parameter"))
            return point, named_algebraic_point(spec["family"], n)
        if "matrix" in spec:
            return GroupElement(parse_matrix_text(spec["matrix"])), None
        algebraic = parse_algebraic_point(spec["algebraic"])
        return algebraic.group_element(), algebraic
    except ConfigError:
        raise
    except Exception as e:
        raise ConfigError("base_point", 'Invalid configuration key "base_point": {}'.format(e))


def _validate_kind_params(kind: str, raw: dict, n: int) -> dict:
    params = dict(DEFAULTS[kind])
    params.update({key: raw[key] for key in raw if key in DEFAULTS[kind]})

    if kind == "contraction":
        params["delta"] = _number(params, "delta", 0.0, strict=True)
        params["R"] = _number_list(params, "R", 1.0)
        params["samples"] = _number(params, "samples", 1, integer=True)
    elif kind == "anchor":
        params["samples"] = _number(params, "samples", 1, integer=True)
        params["grid"] = _number(params, "grid", 2, integer=True)
    elif kind == "remez":
        params["count"] = _number(params, "count", 1, integer=True)
        params["dims"] = _number_list(params, "dims", 1, integer=True)
        params["degrees"] = _number_list(params, "degrees", 1, integer=True)
        params["ladder"] = _number_list(params, "ladder", 0.0, strict=True)
        params["resolutions"] = _number_list(params, "resolutions", 2, integer=True)
        if len(params["resolutions"]) < max(params["dims"]):
            raise ConfigError(
                "resolutions",
                'Configuration key "resolutions" needs one entry per dimension.',
            )
    elif kind == "drift":
        params["R"] = _number(params, "R", 1.0, strict=True)
        params["delta0"] = _number(params, "delta0", 0.0, strict=True)
        for key in ("omega", "cdelta"):
            if params[key] is not None:
                params[key] = _number(params, key, 0.0, strict=True)
        params["epsilon_tail"] = _number(params, "epsilon_tail", 0.0, strict=True)
        params["steps"] = _number(params, "steps", 1, integer=True)
        params["paths"] = _number(params, "paths", 2, integer=True)
        params["lattices"] = _number(params, "lattices", 0, integer=True)
        params["cusp_heights"] = (
            _number_list(params, "cusp_heights", 0.0, strict=True)
            if params["cusp_heights"]
            else []
        )
    elif kind == "equidist":
        params["R"] = _number_list(params, "R", 1.0)
        resolve_base_point(params["base_point"], n)
        if not isinstance(params["observable"], dict):
            raise ConfigError("observable")
        build_observable(params["observable"], n)
        for key in ("spectral_gap", "gamma", "tau"):
            if params[key] is not None:
                params[key] = _number(params, key, 0.0, strict=True)
        if params["tau"] is not None and params["tau"] >= 1.0:
            raise ConfigError("tau", 'Configuration key "tau" must lie in (0, 1).')
        params["nodes_per_unit"] = _number(params, "nodes_per_unit", 1, integer=True)
        params["min_window"] = _number(params, "min_window", 2, integer=True)
        params["max_residual"] = _number(params, "max_residual", 0.0, strict=True)
        if not isinstance(params["expect_decay"], bool):
            raise ConfigError("expect_decay")
    elif kind == "dioph":
        resolve_base_point(params["base_point"], n)
        params["index"] = _number(params, "index", 1, integer=True)
        if params["index"] > n - 1:
            raise ConfigError("index", 'Configuration key "index" must lie in 1..n-1.')
        params["tmax"] = _number(params, "tmax", 10.0)
        params["grid_factor"] = _number(params, "grid_factor", 1.0, strict=True)
        params["liouville_M"] = _number(params, "liouville_M", 1, integer=True)
        if params["expect_exponent"] is not None:
            bounds = _number_list(params, "expect_exponent")
            if len(bounds) != 2 or bounds[0] > bounds[1]:
                raise ConfigError("expect_exponent")
            params["expect_exponent"] = bounds

    if params.get("ks") is not None:
        params["ks"] = _number_list(params, "ks", 1, integer=True)
        if max(params["ks"]) > n - 1:
            raise ConfigError("ks", 'Configuration key "ks" must lie in 1..n-1.')
    return params


def validate_config(raw: dict, kind: Optional[str] = None) -> ExperimentConfig:
    """
    Check a raw JSON config against the keys of its experiment kind and fill in
    defaults. ConfigError names the first offending key.
    """
    if not isinstance(raw, dict):
        raise ConfigError("config", "Experiment configs must be JSON objects.")
    config_kind = raw.get("kind", kind)
    if kind is not None and config_kind != kind:
        raise ConfigError(
            "kind", 'Config kind "{}" does not match command "{}".'.format(config_kind, kind)
        )
    if config_kind not in KINDS:
        raise ConfigError("kind")

    unknown = set(raw) - COMMON_KEYS - set(DEFAULTS[config_kind])
    if unknown:
        raise ConfigError(sorted(unknown)[0])
    if "seed" not in raw:
        raise ConfigError("seed", 'Configuration key "seed" is mandatory.')
    seed = _number(raw, "seed", 0, integer=True)

    if "weights" in raw:
        weights = _weights(raw)
        n = len(weights)
        if "n" in raw and _number(raw, "n", 2, integer=True) != n:
            raise ConfigError("n", 'Configuration key "n" does not match "weights".')
    else:
        n = _number(raw, "n", 2, integer=True) if "n" in raw else 2
        weights = (Fraction(1, 2),) + (Fraction(0),) * (n - 2) + (Fraction(-1, 2),)
    if not 2 <= n <= MAX_DIMENSION:
        raise ConfigError(
            "n", 'Configuration key "n" must lie in 2..{}.'.format(MAX_DIMENSION)
        )
    try:
        CartanFlow.from_weights(weights)
    except Exception as e:
        raise ConfigError("weights", 'Invalid configuration key "weights": {}'.format(e))

    quadrature = raw.get("quadrature")
    if quadrature is not None and not isinstance(quadrature, dict):
        raise ConfigError("quadrature")
    output = raw.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("output")

    config = ExperimentConfig(
        kind=config_kind,
        n=n,
        weights=weights,
        seed=seed,
        quadrature=quadrature,
        output=output,
        params=_validate_kind_params(config_kind, raw, n),
    )
    logger.debug("Validated %s config", config_kind, extra={"kind": config_kind, "seed": seed})
    return config
