"""Run configuration: defaults, key=value files, and validation.

Every report echoes the configuration it ran under, and the master seed is
mandatory — no wall-clock seeding anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

__all__ = ["RunConfig", "ConfigError", "load_config_file"]


class ConfigError(ValueError):
    """Invalid or unparsable run configuration."""


@dataclass(frozen=True)
class RunConfig:
    grid_h: float = 1e-3
    horizon: int = 50
    reps: int = 100_000
    seed: int = 20130609
    tol_xi: float = 1e-6
    max_lag: int = 40
    cache_dir: str = ".altsel-cache"
    output_format: str = "text"  # "json" | "csv" | "text"

    def validate(self) -> "RunConfig":
        if not 0.0 < self.grid_h <= 1e-2:
            raise ConfigError(f"grid_h {self.grid_h} outside (0, 1e-2]")
        if self.horizon < 1:
            raise ConfigError(f"horizon must be >= 1, got {self.horizon}")
        if self.reps < 1:
            raise ConfigError(f"reps must be >= 1, got {self.reps}")
        if self.tol_xi <= 0.0:
            raise ConfigError(f"tol_xi must be positive, got {self.tol_xi}")
        if self.max_lag < 0:
            raise ConfigError(f"max_lag must be >= 0, got {self.max_lag}")
        if self.output_format not in ("json", "csv", "text"):
            raise ConfigError(f"unknown output format {self.output_format!r}")
        return self

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_PARSERS = {
    "grid_h": float,
    "horizon": int,
    "reps": int,
    "seed": int,
    "tol_xi": float,
    "max_lag": int,
    "cache_dir": str,
    "output_format": str,
}


def load_config_file(path: str | Path) -> RunConfig:
    """Parse a key = value file (blank lines and # comments allowed)."""
    cfg = RunConfig()
    overrides = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, _, value = text.partition("=")
        key = key.strip()
        if key not in _PARSERS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            overrides[key] = _PARSERS[key](value.strip())
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from None
    return replace(cfg, **overrides)
