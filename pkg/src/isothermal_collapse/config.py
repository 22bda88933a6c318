"""Configuration management via environment variables and flat JSON run files."""

import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .exceptions import InvalidInput


@dataclass
class Settings:
    """Process-wide settings."""

    log_level: str
    workers: int | None  # Sweep pool size (None: CPU count)
    output_dir: str

    @classmethod
    def from_env(cls) -> "Settings":
        """Load settings from environment variables."""
        workers = os.environ.get("ISOCOLLAPSE_WORKERS")
        return cls(
            log_level=os.environ.get("LOG_LEVEL", "INFO"),
            workers=int(workers) if workers else None,
            output_dir=os.environ.get("ISOCOLLAPSE_OUTPUT_DIR", "output"),
        )


@dataclass
class Tolerances:
    """Numerical tolerances used across the pipeline."""

    ode_rtol: float = 1e-11
    ode_atol: float = 1e-13
    root_tol: float = 1e-13
    quad_tol: float = 1e-10
    jump_tol: float = 1e-9
    residual_tol: float = 1e-6

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not value > 0:
                raise InvalidInput(f"tolerance {f.name} must be positive, got {value}")

    def tightened(self, factor: float = 0.5) -> "Tolerances":
        """Copy with the integrator tolerances scaled by factor."""
        return replace(self, ode_rtol=self.ode_rtol * factor, ode_atol=self.ode_atol * factor)


# Flat JSON keys that map onto Tolerances fields
_TOLERANCE_KEYS = {
    "ode_tol": "ode_rtol",
    "ode_rtol": "ode_rtol",
    "ode_atol": "ode_atol",
    "root_tol": "root_tol",
    "quad_tol": "quad_tol",
    "jump_tol": "jump_tol",
    "residual_tol": "residual_tol",
}


@dataclass
class RunConfig:
    """Everything a CLI command needs, read from a flat JSON file and overridden by flags."""

    m: int = 2
    beta: float = -1.0
    a: float = 1.0
    omega0: float = -1.0
    tolerances: Tolerances = field(default_factory=Tolerances)
    xi_min: float | None = None  # None: -XI_MIN_FACTOR * |xi_w|
    xi_max: float | None = None  # None: XI_MAX_FACTOR * |xi_w|
    x0: float | None = None  # None: X0_FACTOR * x_s
    out: str = "output"

    # sweep
    beta_min: float | None = None
    beta_max: float | None = None
    beta_steps: int = 20

    # eval
    times: list[float] = field(default_factory=lambda: [-1.0, -0.5, 0.0, 0.5, 1.0])
    r_max: float = 4.0
    r_points: int = 400
    r_bar: float = 1.0

    # trace
    kind: str = "particle"
    t0: float = -1.0
    r0: float = 1.0
    t1: float = 1.0

    # fv
    cells: list[int] = field(default_factory=lambda: [64, 128, 256, 512])
    cfl: float = 0.45
    t_start: float = -1.0
    t_end: float = 0.5

    def __post_init__(self):
        if self.omega0 >= 0:
            raise InvalidInput(f"omega0 must be negative, got {self.omega0}")
        if self.x0 is not None and self.x0 <= 0:
            raise InvalidInput(f"x0 must be positive, got {self.x0}")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        """Build from a flat dict; tolerance keys sit next to the parameters."""
        known = {f.name for f in fields(cls)} - {"tolerances"}
        kwargs = {}
        tol_kwargs = {}
        for key, value in data.items():
            if key in _TOLERANCE_KEYS:
                tol_kwargs[_TOLERANCE_KEYS[key]] = float(value)
            elif key in known:
                kwargs[key] = value
            else:
                raise InvalidInput(f"Unknown configuration key: {key}")
        return cls(tolerances=Tolerances(**tol_kwargs), **kwargs)

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        """Load a flat JSON run file."""
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        if not isinstance(data, dict):
            raise InvalidInput(f"{path}: expected a flat JSON object")
        return cls.from_dict(data)

    def with_overrides(self, **overrides) -> "RunConfig":
        """Return a copy with every non-None override applied (CLI flags win)."""
        updates = {k: v for k, v in overrides.items() if v is not None}
        data = self.to_dict()
        data.update(updates)
        return RunConfig.from_dict(data)

    def to_dict(self) -> dict:
        """Flat representation, the inverse of from_dict."""
        data = asdict(self)
        tolerances = data.pop("tolerances")
        data.update(tolerances)
        return data


# Global settings instance (lazy loaded)
_settings: Settings | None = None


def get_settings() -> Settings:
    """Get the process settings (singleton)."""
    global _settings
    if _settings is None:
        _settings = Settings.from_env()
    return _settings
