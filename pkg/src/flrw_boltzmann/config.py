"""Simulation configuration: a frozen dataclass tree loaded from JSON."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Final

from flrw_boltzmann.diagnostics.norms import MAX_EXPONENT, NormSpec
from flrw_boltzmann.errors import ConfigError, FlrwBoltzmannError
from flrw_boltzmann.spacetime.models import ScaleFactorPreset

INITIAL_KINDS: Final[tuple[str, ...]] = ("gaussian", "shell")
SIGMA0_KINDS: Final[tuple[str, ...]] = ("constant",)
MIN_POINTS: Final[int] = 8

_TOP_LEVEL_KEYS: Final[frozenset[str]] = frozenset(
    {
        "lambda",
        "scale_factor",
        "grid",
        "sphere",
        "dt",
        "T",
        "picard",
        "picard_iters",
        "initial",
        "norms",
        "output",
        "seed",
        "sigma0",
    }
)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message)


def _positive(name: str, value: float) -> None:
    _require(math.isfinite(value) and value > 0.0, f"{name} must be positive, got {value}")


# ═══════════════════════════════════════════════════════════════════════════
# SECTIONS
# ═══════════════════════════════════════════════════════════════════════════


@dataclass(frozen=True)
class GridSpec:
    extent: float = 8.0
    n: int = 24

    def __post_init__(self) -> None:
        _positive("grid.extent", self.extent)
        _require(isinstance(self.n, int), f"grid.n must be an integer, got {self.n!r}")
        _require(self.n >= MIN_POINTS, f"grid.n must be at least {MIN_POINTS}, got {self.n}")
        corner_p0 = math.sqrt(1.0 + 3.0 * self.extent**2)
        _require(
            corner_p0 <= MAX_EXPONENT,
            f"grid.extent={self.extent} makes e^(p0) overflow at the cube corners",
        )


@dataclass(frozen=True)
class SphereSpec:
    polar_order: int = 8
    azimuth_order: int = 16

    def __post_init__(self) -> None:
        _require(self.polar_order >= 1, f"sphere.polar_order must be >= 1, got {self.polar_order}")
        _require(
            self.azimuth_order >= 1, f"sphere.azimuth_order must be >= 1, got {self.azimuth_order}"
        )


@dataclass(frozen=True)
class InitialSpec:
    kind: str = "gaussian"
    epsilon: float = 1e-3
    params: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        _require(
            self.kind in INITIAL_KINDS,
            f"initial.kind must be one of {', '.join(INITIAL_KINDS)}, got {self.kind!r}",
        )
        _require(
            math.isfinite(self.epsilon) and self.epsilon >= 0.0,
            f"initial.epsilon must be >= 0, got {self.epsilon}",
        )
        for key, value in self.params.items():
            _require(
                isinstance(value, int | float) and math.isfinite(value),
                f"initial.params.{key} must be a finite number, got {value!r}",
            )


@dataclass(frozen=True)
class OutputSpec:
    path: str = "runs/demo"
    interval: float = 0.1

    def __post_init__(self) -> None:
        _require(bool(self.path), "output.path must not be empty")
        _positive("output.interval", self.interval)


@dataclass(frozen=True)
class PicardSpec:
    iters: int = 2
    max_sweeps: int = 8
    tolerance: float = 1e-10
    max_halvings: int = 8

    def __post_init__(self) -> None:
        _require(self.iters >= 1, f"picard.iters must be >= 1, got {self.iters}")
        _require(
            self.max_sweeps >= self.iters,
            f"picard.max_sweeps ({self.max_sweeps}) must be >= picard.iters ({self.iters})",
        )
        _positive("picard.tolerance", self.tolerance)
        _require(
            self.max_halvings >= 0, f"picard.max_halvings must be >= 0, got {self.max_halvings}"
        )


# ═══════════════════════════════════════════════════════════════════════════
# SIMCONFIG
# ═══════════════════════════════════════════════════════════════════════════


@dataclass(frozen=True)
class SimConfig:
    """Everything a run depends on; all randomness derives from ``seed``."""

    lambda_: float = 3.0
    scale_factor: str = "coupled"
    grid: GridSpec = field(default_factory=GridSpec)
    sphere: SphereSpec = field(default_factory=SphereSpec)
    dt: float = 0.01
    T: float = 10.0
    picard: PicardSpec = field(default_factory=PicardSpec)
    initial: InitialSpec = field(default_factory=InitialSpec)
    norms: tuple[NormSpec, ...] = (NormSpec(2, 2),)
    output: OutputSpec = field(default_factory=OutputSpec)
    seed: int = 0
    sigma0: str = "constant"

    def __post_init__(self) -> None:
        _positive("lambda", self.lambda_)
        valid = [p.value for p in ScaleFactorPreset]
        _require(
            self.scale_factor in valid,
            f"scale_factor must be one of {', '.join(valid)}, got {self.scale_factor!r}",
        )
        _positive("dt", self.dt)
        _positive("T", self.T)
        _require(
            self.sigma0 in SIGMA0_KINDS,
            f"sigma0 must be one of {', '.join(SIGMA0_KINDS)}, got {self.sigma0!r}",
        )
        _require(isinstance(self.seed, int), f"seed must be an integer, got {self.seed!r}")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SimConfig:
        """Build and validate a config; absent optional keys take their defaults."""
        if not isinstance(data, dict):
            raise ConfigError(f"config must be a JSON object, got {type(data).__name__}")
        unknown = set(data) - _TOP_LEVEL_KEYS
        _require(not unknown, f"unknown config keys: {', '.join(sorted(unknown))}")

        try:
            picard_data = dict(data.get("picard", {}))
            if "picard_iters" in data:
                picard_data.setdefault("iters", data["picard_iters"])
                picard_data.setdefault(
                    "max_sweeps", max(data["picard_iters"], PicardSpec.max_sweeps)
                )
            initial_data = dict(data.get("initial", {}))
            initial_data["params"] = dict(initial_data.get("params", {}))
            norms = tuple(
                NormSpec(int(spec["k"]), int(spec["N"]))
                for spec in data.get("norms", [{"k": 2, "N": 2}])
            )
            return cls(
                lambda_=float(data.get("lambda", 3.0)),
                scale_factor=str(data.get("scale_factor", "coupled")),
                grid=GridSpec(**data.get("grid", {})),
                sphere=SphereSpec(**data.get("sphere", {})),
                dt=float(data.get("dt", 0.01)),
                T=float(data.get("T", 10.0)),
                picard=PicardSpec(**picard_data),
                initial=InitialSpec(**initial_data),
                norms=norms,
                output=OutputSpec(**data.get("output", {})),
                seed=int(data.get("seed", 0)),
                sigma0=str(data.get("sigma0", "constant")),
            )
        except ConfigError:
            raise
        except (FlrwBoltzmannError, TypeError, ValueError, KeyError) as exc:
            raise ConfigError(f"invalid config: {exc}") from exc

    def to_dict(self) -> dict[str, Any]:
        return {
            "lambda": self.lambda_,
            "scale_factor": self.scale_factor,
            "grid": {"extent": self.grid.extent, "n": self.grid.n},
            "sphere": {
                "polar_order": self.sphere.polar_order,
                "azimuth_order": self.sphere.azimuth_order,
            },
            "dt": self.dt,
            "T": self.T,
            "picard": {
                "iters": self.picard.iters,
                "max_sweeps": self.picard.max_sweeps,
                "tolerance": self.picard.tolerance,
                "max_halvings": self.picard.max_halvings,
            },
            "initial": {
                "kind": self.initial.kind,
                "epsilon": self.initial.epsilon,
                "params": dict(self.initial.params),
            },
            "norms": [{"k": spec.k, "N": spec.N} for spec in self.norms],
            "output": {"path": self.output.path, "interval": self.output.interval},
            "seed": self.seed,
            "sigma0": self.sigma0,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def load_config(path: Path) -> SimConfig:
    """Read and validate a JSON config file."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return SimConfig.from_dict(data)


def default_config() -> SimConfig:
    """The packaged demo configuration."""
    text = resources.files("flrw_boltzmann").joinpath("presets/demo.json").read_text("utf-8")
    return SimConfig.from_dict(json.loads(text))
