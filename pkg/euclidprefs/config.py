"""
Settings for the search lanes.

Defaults live in the dataclasses below; a YAML file and dotted overrides
(`ilp.solver=highs`) are applied on top:

    ilp:
      max_iterations: 20
      solver: builtin
    qcp:
      restarts: 200
    portfolio:
      budget: 60
      lanes: [pattern38, hull, closure, embed]
    seed: 0
"""

import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

import yaml

from .errors import ConfigError

logger = logging.getLogger(__name__)

ALL_LANES = ("pattern38", "hull", "closure", "embed", "hull-full", "ilp")


@dataclass
class IlpSettings:
    max_iterations: int = 20
    subset_min: int = 5
    enable_six_cycles: bool = False
    solver: str = "builtin"          # builtin, highs, mip or external:<command>
    node_limit: int = 200000


@dataclass
class QcpSettings:
    eps_star: float = 1.0
    box_init: float = 100.0
    slice_init_secs: float = 10.0
    box_factor: float = 10.0
    slice_factor: float = 2.0
    restarts: int = 200
    full_pairs: bool = False
    solver: str = "builtin"          # builtin or external:<command>
    screen_secs: float = 3.0         # embedding screen inside the subset sweep
    tolerance: float = 1e-6          # for embeddings read from certificates


@dataclass
class HullSettings:
    max_subset_size: int = 6


@dataclass
class PortfolioSettings:
    budget: float = 60.0
    lanes: List[str] = field(default_factory=lambda: list(ALL_LANES))


@dataclass
class Settings:
    ilp: IlpSettings = field(default_factory=IlpSettings)
    qcp: QcpSettings = field(default_factory=QcpSettings)
    hull: HullSettings = field(default_factory=HullSettings)
    portfolio: PortfolioSettings = field(default_factory=PortfolioSettings)
    seed: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def _coerce(key: str, value: Any, default: Any) -> Any:
    """Convert a parsed YAML value to the type of the default."""
    try:
        if isinstance(default, bool):
            if not isinstance(value, bool):
                raise TypeError
            return value
        if isinstance(default, int):
            if isinstance(value, bool) or not isinstance(value, int):
                raise TypeError
            return value
        if isinstance(default, float):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise TypeError
            return float(value)
        if isinstance(default, list):
            if isinstance(value, str):
                value = [v.strip() for v in value.split(",") if v.strip()]
            if not isinstance(value, list):
                raise TypeError
            return [str(v) for v in value]
        return str(value)
    except TypeError:
        raise ConfigError(f"{key}: expected {type(default).__name__}, got {value!r}") from None


def _apply(settings: Settings, key: str, value: Any) -> None:
    parts = key.split(".")
    sections = {f.name: f for f in fields(Settings)}
    if len(parts) == 1:
        if parts[0] != "seed":
            raise ConfigError(f"Unknown setting: {key}. Available sections: {', '.join(sections)}")
        settings.seed = _coerce(key, value, settings.seed)
        return
    section, name = parts[0], ".".join(parts[1:])
    if section not in sections or section == "seed":
        raise ConfigError(f"Unknown section: {section}. Available: {', '.join(s for s in sections if s != 'seed')}")
    target = getattr(settings, section)
    options = [f.name for f in fields(target)]
    if name not in options:
        raise ConfigError(f"Unknown setting: {key}. Available: {', '.join(f'{section}.{o}' for o in options)}")
    setattr(target, name, _coerce(key, value, getattr(target, name)))


def _validate(settings: Settings) -> None:
    unknown = [lane for lane in settings.portfolio.lanes if lane not in ALL_LANES]
    if unknown:
        raise ConfigError(f"Unknown lane: {', '.join(unknown)}. Available: {', '.join(ALL_LANES)}")
    if settings.portfolio.budget < 0:
        raise ConfigError(f"portfolio.budget must be >= 0, got {settings.portfolio.budget}")
    if settings.qcp.eps_star <= 0:
        raise ConfigError(f"qcp.eps_star must be positive, got {settings.qcp.eps_star}")
    if settings.hull.max_subset_size < 4:
        raise ConfigError(f"hull.max_subset_size must be >= 4, got {settings.hull.max_subset_size}")


def parse_override(text: str) -> Tuple[str, Any]:
    """'qcp.restarts=50' → ('qcp.restarts', 50); the value is read as a YAML scalar."""
    key, sep, raw = text.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"override must look like key=value, got {text!r}")
    try:
        value = yaml.safe_load(raw) if raw.strip() else ""
    except yaml.YAMLError as e:
        raise ConfigError(f"cannot parse value of {key.strip()}: {e}") from e
    return key.strip(), value


def load_settings(
    path: Optional[Union[str, Path]] = None,
    overrides: Iterable[str] = (),
) -> Settings:
    """
    Build settings from defaults, an optional YAML file and key=value overrides.

    Raises:
        ConfigError: Unreadable file, unknown key or a value of the wrong type
    """
    settings = Settings()
    if path is not None:
        try:
            with open(path, encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except (OSError, yaml.YAMLError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must be a mapping of sections")
        for section, body in data.items():
            if isinstance(body, dict):
                for name, value in body.items():
                    _apply(settings, f"{section}.{name}", value)
            else:
                _apply(settings, str(section), body)
        logger.debug("loaded configuration from %s", path)

    for text in overrides:
        _apply(settings, *parse_override(text))
    _validate(settings)
    return settings


def settings_summary(settings: Settings) -> Dict[str, Any]:
    """Flat dotted view, e.g. {'ilp.solver': 'builtin', ...}."""
    flat: Dict[str, Any] = {}
    for section, body in settings.to_dict().items():
        if isinstance(body, dict):
            for name, value in body.items():
                flat[f"{section}.{name}"] = value
        else:
            flat[section] = body
    return flat
