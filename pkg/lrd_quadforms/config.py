"""Settings loaded from configuration.json"""

import json
import logging
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Optional

from .errors import InvalidConfigError

logger = logging.getLogger(__name__)

DEFAULT_PATH = Path(__file__).resolve().parent.parent / "configuration.json"


@dataclass(frozen=True)
class QuadratureSettings:
    tolerance: float = 1e-8
    max_depth: int = 40
    order: int = 20
    max_panels: int = 65536


@dataclass(frozen=True)
class SimulationSettings:
    oversample: int = 4
    memory_budget_points: int = 2**26
    imaginary_residue: float = 1e-8
    exact_max_points: int = 4096
    jitter: float = 1e-10


@dataclass(frozen=True)
class ConditionHSettings:
    base_samples: int = 16384
    doublings: int = 4
    stability_threshold: float = 0.1


@dataclass(frozen=True)
class LimitLawSettings:
    resolution_1d: int = 512
    radius_1d: float = 200.0
    resolution_2d: int = 128
    radius_2d: float = 50.0
    chunk_size: int = 1000
    tail_target: float = 0.02
    wick_budget: int = 500_000_000


@dataclass(frozen=True)
class HarnessSettings:
    se_multiplier: float = 4.0
    min_replicates: int = 100
    kappa_drift: float = 0.05


@dataclass(frozen=True)
class Settings:
    quadrature: QuadratureSettings = field(default_factory=QuadratureSettings)
    simulation: SimulationSettings = field(default_factory=SimulationSettings)
    condition_h: ConditionHSettings = field(default_factory=ConditionHSettings)
    limit_laws: LimitLawSettings = field(default_factory=LimitLawSettings)
    harness: HarnessSettings = field(default_factory=HarnessSettings)


def _section(cls, raw: Dict[str, Any], name: str):
    known = {f.name for f in fields(cls)}
    unknown = set(raw) - known
    if unknown:
        raise InvalidConfigError(f"unknown keys in '{name}': {', '.join(sorted(unknown))}")
    return cls(**raw)


def settings_from_dict(raw: Dict[str, Any]) -> Settings:
    """Build Settings from a parsed configuration document"""
    sections = {
        "quadrature": QuadratureSettings,
        "simulation": SimulationSettings,
        "condition_h": ConditionHSettings,
        "limit_laws": LimitLawSettings,
        "harness": HarnessSettings,
    }
    unknown = set(raw) - set(sections)
    if unknown:
        raise InvalidConfigError(f"unknown settings sections: {', '.join(sorted(unknown))}")
    kwargs = {
        name: _section(cls, raw.get(name, {}), name) for name, cls in sections.items()
    }
    return Settings(**kwargs)


def load_settings(path: Optional[str] = None) -> Settings:
    """Load settings, falling back to built-in defaults when the file is missing"""
    target = Path(path) if path else DEFAULT_PATH
    if not target.exists():
        if path:
            raise InvalidConfigError(f"settings file not found: {target}")
        logger.debug("no %s found, using built-in defaults", target)
        return Settings()
    try:
        with open(target, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as e:
        raise InvalidConfigError(f"cannot parse {target}: {e}") from e
    return settings_from_dict(raw)


_ACTIVE: Optional[Settings] = None


def get_settings() -> Settings:
    """Process-wide settings, loaded lazily from the default location"""
    global _ACTIVE
    if _ACTIVE is None:
        _ACTIVE = load_settings()
    return _ACTIVE


def use_settings(settings: Settings) -> None:
    """Replace the process-wide settings (CLI and tests)"""
    global _ACTIVE
    _ACTIVE = settings
