"""Flat ``key=value`` experiment configuration."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, fields
from pathlib import Path

OUTPUT_ENV = "MCFLAB_OUTPUT_DIR"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """Every tunable of the experiments, with the defaults used by the CLI.

    Keys prefixed ``t1_`` belong to the periodic-spike experiment, ``t2_`` to
    the slab/oscillation experiment.  ``tolerance_scale`` multiplies every
    pass/fail margin of the slab experiment (the coarse preset uses 2).
    """

    experiment: str = "theorem1"
    output_dir: str = ""
    # shooting
    n: int = 2
    shoot_tol: float = 1e-10
    shoot_step: float = 1e-4
    bracket: str = ""  # "lo,hi"; empty means scan
    eps: float = 0.1
    # stepping
    cfl: float = 0.9
    mixed_stencil: str = "skew"
    snapshots: bool = True
    # periodic spike experiment
    t1_outer: float = 0.45
    t1_cells: int = 512
    t1_coarsen: int = 4
    t1_t_end: float = 0.25
    t1_fine_records: int = 100
    t1_record_every: float = 0.0025
    t1_tail_fraction: float = 0.2
    t1_band_tol: float = 1e-3
    t1_heat_tol: float = 0.01
    t1_mean_tol: float = 1e-9
    # slab experiment
    t2_outer: float = 0.16
    t2_resolution: float = 0.02
    t2_fine_factor: int = 8
    t2_half_width: float = 26.0
    t2_m_max: int = 3
    t2_ell: float = 0.15
    t2_t_end: float = 10.0
    t2_fine_records: int = 40
    t2_record_every: float = 0.02
    t2_sphere_samples: int = 4
    t2_osc_low: float = 0.2
    t2_osc_high: float = 0.9
    t2_osc_dead_band: float = 0.02
    t2_heat_band: float = 0.2
    t2_order_slack: float = 1e-8
    t2_ball_radii: str = "5,10,20"
    tolerance_scale: float = 1.0

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.experiment not in ("theorem1", "theorem2", "validate", "run", "shoot-torus"):
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.n < 2:
            raise ConfigError("n must be at least 2")
        if not 0 < self.cfl <= 1:
            raise ConfigError("cfl must lie in (0, 1]")
        if self.mixed_stencil not in ("skew", "cross"):
            raise ConfigError("mixed_stencil must be skew or cross")
        if self.t1_cells < 8 or self.t1_cells % self.t1_coarsen:
            raise ConfigError("t1_cells must be >= 8 and divisible by t1_coarsen")
        for name in ("t1_coarsen", "t2_fine_factor", "t1_fine_records", "t2_fine_records",
                     "t2_sphere_samples"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        for name in ("eps", "t1_outer", "t1_t_end", "t2_outer", "t2_resolution", "t2_t_end",
                     "t1_record_every", "t2_record_every", "tolerance_scale", "t2_osc_dead_band"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.bracket:
            self.bracket_pair()
        self.ball_radii()

    def bracket_pair(self) -> tuple[float, float] | None:
        if not self.bracket:
            return None
        try:
            lo, hi = (float(v) for v in self.bracket.split(","))
        except ValueError:
            raise ConfigError(f"bracket must be 'lo,hi', got {self.bracket!r}") from None
        return lo, hi

    def ball_radii(self) -> list[float]:
        try:
            return [float(v) for v in self.t2_ball_radii.split(",") if v.strip()]
        except ValueError:
            raise ConfigError(f"bad t2_ball_radii {self.t2_ball_radii!r}") from None

    # -- serialization

    @classmethod
    def field_types(cls) -> dict[str, type]:
        return {f.name: type(f.default) for f in fields(cls)}

    @classmethod
    def coerce(cls, key: str, raw: str):
        types = cls.field_types()
        if key not in types:
            raise ConfigError(f"unknown config key {key!r}")
        typ = types[key]
        raw = raw.strip()
        try:
            if typ is bool:
                low = raw.lower()
                if low in ("1", "true", "yes", "on"):
                    return True
                if low in ("0", "false", "no", "off"):
                    return False
                raise ValueError(raw)
            return typ(raw)
        except ValueError:
            raise ConfigError(f"{key}: cannot read {raw!r} as {typ.__name__}") from None

    @staticmethod
    def parse_text(text: str) -> dict[str, object]:
        out = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
            key, _, val = line.partition("=")
            key = key.strip()
            out[key] = ExperimentConfig.coerce(key, val)
        return out

    @classmethod
    def from_text(cls, text: str, **overrides) -> "ExperimentConfig":
        values = cls.parse_text(text)
        values.update(overrides)
        return cls(**values)

    @classmethod
    def load(cls, path, **overrides) -> "ExperimentConfig":
        return cls.from_text(Path(path).read_text(), **overrides)

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{f.name}={v}")
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def resolved_output_dir(self) -> Path:
        """The env override wins, then ``output_dir``, then ``runs/<experiment>``."""
        env = os.environ.get(OUTPUT_ENV)
        if env:
            return Path(env)
        if self.output_dir:
            return Path(self.output_dir)
        return Path("runs") / self.experiment


PRESETS = {
    "coarse": {"t2_resolution": 0.05, "t2_fine_factor": 16, "tolerance_scale": 2.0},
    "default": {},
}
