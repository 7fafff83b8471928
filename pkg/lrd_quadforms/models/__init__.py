"""Catalog of spectral models"""

from typing import Any, Dict, List

from ..errors import InvalidConfigError, ParameterError
from .base import SlowFactor, SpectralModel, as_points, eval_filter
from .isotropic import Isotropic
from .one_direction import OneDirection, wrap
from .product import Product
from .two_lines import TwoLines
from .white_noise import WhiteNoise

DEFAULT_ORDER = ["isotropic", "product", "two_lines", "one_direction", "white_noise"]

_ALIASES = {
    "isotropic": "isotropic",
    "product": "product",
    "twolines": "two_lines",
    "two_lines": "two_lines",
    "onedirection": "one_direction",
    "one_direction": "one_direction",
    "whitenoise": "white_noise",
    "white_noise": "white_noise",
}


def canonical_kind(kind: str) -> str:
    key = str(kind).strip().lower().replace("-", "_")
    if key not in _ALIASES:
        raise ParameterError(f"unknown model kind '{kind}', expected one of {', '.join(DEFAULT_ORDER)}")
    return _ALIASES[key]


def build_model(kind: str, **params: Any) -> SpectralModel:
    """Build a catalog model by kind name"""
    name = canonical_kind(kind)
    l1 = params.pop("l1", None)
    if l1 is not None and not isinstance(l1, SlowFactor):
        l1 = SlowFactor(float(l1))
    if l1 is not None:
        params["l1"] = l1

    if name == "isotropic":
        return Isotropic(**params)
    elif name == "product":
        return Product(**params)
    elif name == "two_lines":
        return TwoLines(**params)
    elif name == "one_direction":
        return OneDirection(**params)
    return WhiteNoise(**params)


def model_from_dict(raw: Dict) -> SpectralModel:
    """Parse the JSON catalog form {dimension, kind, alpha | alpha_p/alpha_q, p, q, l1}"""
    if "kind" not in raw:
        raise InvalidConfigError("model entry needs a 'kind'")
    name = canonical_kind(raw["kind"])
    l1 = SlowFactor.from_dict(raw.get("l1"))
    try:
        if name in ("isotropic", "product"):
            return build_model(name, dimension=int(raw["dimension"]), alpha=float(raw["alpha"]), l1=l1)
        if name == "two_lines":
            alpha_p, alpha_q = raw.get("alpha_p"), raw.get("alpha_q")
            if alpha_p is None and isinstance(raw.get("alpha"), (list, tuple)):
                alpha_p, alpha_q = raw["alpha"]
            return build_model(
                name, alpha_p=float(alpha_p), alpha_q=float(alpha_q),
                p=float(raw["p"]), q=float(raw["q"]), l1=l1,
            )
        if name == "one_direction":
            return build_model(name, alpha=float(raw["alpha"]), p=float(raw["p"]), l1=l1)
        return build_model(name, dimension=int(raw.get("dimension", 1)), l1=l1)
    except (KeyError, TypeError) as e:
        raise InvalidConfigError(f"incomplete {raw['kind']} model entry: {e}") from e


def model_to_dict(model: SpectralModel) -> Dict:
    return model.to_dict()


__all__: List[str] = [
    "DEFAULT_ORDER",
    "Isotropic",
    "OneDirection",
    "Product",
    "SlowFactor",
    "SpectralModel",
    "TwoLines",
    "WhiteNoise",
    "as_points",
    "build_model",
    "canonical_kind",
    "eval_filter",
    "model_from_dict",
    "model_to_dict",
    "wrap",
]
