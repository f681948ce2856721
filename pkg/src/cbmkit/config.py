"""Model configuration: the three laws plus run controls.

Configs serialize to a flat ``key = value`` text format with dotted keys
(``sane.shape``, ``sane.rate``, ``damage.rate``, ``inspection.kind``,
``inspection.c``, ``inspection.h``, ``horizon``, ``seed``, ``confidence``,
``grid``).  Blank lines and ``#`` comments are allowed.  Parsing then
serializing then parsing is the identity.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .laws import DETERMINISTIC, DamageLaw, InspectionLaw, SaneLaw


class ConfigError(ValueError):
    """Raised on malformed config text or inconsistent values."""


@dataclass(frozen=True)
class ModelConfig:
    sane: SaneLaw
    damage: DamageLaw
    inspection: InspectionLaw
    horizon: float
    seed: Optional[int] = None
    confidence: float = 0.95
    grid: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if not self.horizon > 0.0:
            raise ConfigError("horizon must be positive")
        if not 0.0 <= self.confidence < 1.0:
            raise ConfigError("confidence must lie in [0, 1)")
        if any(t <= 0.0 or t > self.horizon for t in self.grid):
            raise ConfigError("grid times must lie in (0, horizon]")

    def with_overrides(self, **kwargs) -> "ModelConfig":
        return replace(self, **kwargs)


_KEYS = (
    "sane.shape",
    "sane.rate",
    "damage.rate",
    "inspection.kind",
    "inspection.c",
    "inspection.h",
    "horizon",
    "seed",
    "confidence",
    "grid",
)


def parse_config(text: str) -> ModelConfig:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = val
    return config_from_values(values)


def config_from_values(values: dict[str, str]) -> ModelConfig:
    def need(key: str) -> str:
        if key not in values:
            raise ConfigError(f"missing key {key!r}")
        return values[key]

    try:
        sane = SaneLaw(int(need("sane.shape")), float(need("sane.rate")))
        damage = DamageLaw(float(need("damage.rate")))
        inspection = InspectionLaw(
            need("inspection.kind"),
            float(need("inspection.c")),
            float(values.get("inspection.h", "0")),
        )
        horizon = float(need("horizon"))
        seed = int(values["seed"]) if values.get("seed", "") != "" else None
        confidence = float(values.get("confidence", "0.95"))
        grid_text = values.get("grid", "").strip()
        grid = tuple(float(tok) for tok in grid_text.split(",") if tok.strip()) if grid_text else ()
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return ModelConfig(sane, damage, inspection, horizon, seed, confidence, grid)


def serialize_config(config: ModelConfig) -> str:
    lines = [
        f"sane.shape = {config.sane.shape}",
        f"sane.rate = {config.sane.rate!r}",
        f"damage.rate = {config.damage.rate!r}",
        f"inspection.kind = {config.inspection.kind}",
        f"inspection.c = {config.inspection.spacing!r}",
        f"inspection.h = {config.inspection.half_width!r}",
        f"horizon = {config.horizon!r}",
        f"seed = {'' if config.seed is None else config.seed}",
        f"confidence = {config.confidence!r}",
        f"grid = {', '.join(repr(t) for t in config.grid)}",
    ]
    return "\n".join(lines) + "\n"


def deterministic_config(
    shape: int = 1,
    damage_rate: float = 5e-4,
    sane_rate: float = 1e-3,
    spacing: float = 1000.0,
    horizon: float = 5e7,
    seed: Optional[int] = None,
    **kwargs,
) -> ModelConfig:
    """Convenience constructor for the common deterministic-gap setup."""
    return ModelConfig(
        SaneLaw(shape, sane_rate),
        DamageLaw(damage_rate),
        InspectionLaw(DETERMINISTIC, spacing),
        horizon,
        seed,
        **kwargs,
    )
