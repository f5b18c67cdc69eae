"""Scale-factor models: analytic exponential backgrounds and coupled Friedmann evolution."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

from flrw_boltzmann.errors import ConfigError, DomainError
from flrw_boltzmann.spacetime.friedmann import FriedmannState, friedmann_step

if TYPE_CHECKING:
    from flrw_boltzmann.collision.grid import DistributionGrid


class ScaleFactorPreset(str, Enum):
    """Named scale-factor choices accepted in configuration."""

    DESITTER = "desitter"
    UPPER = "upper"
    COUPLED = "coupled"


@dataclass(frozen=True)
class ScaleFactorModel:
    """R(t) either as R = e^{rate·t} or as the Friedmann ODE driven by the matter grid.

    Every model starts at R(0) = 1 with Ṙ(0) > 0. The analytic presets ignore
    matter backreaction but still report ρ and P of the grid they are handed.
    """

    lambda_: float
    preset: ScaleFactorPreset
    rate: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lambda_) and self.lambda_ > 0.0):
            raise DomainError(f"lambda must be positive and finite, got {self.lambda_}")
        if self.preset is not ScaleFactorPreset.COUPLED and not self.rate > 0.0:
            raise DomainError(f"analytic expansion rate must be positive, got {self.rate}")

    @classmethod
    def desitter(cls, lambda_: float) -> ScaleFactorModel:
        return cls(lambda_, ScaleFactorPreset.DESITTER, math.sqrt(lambda_ / 3.0))

    @classmethod
    def upper(cls, lambda_: float, rho0: float) -> ScaleFactorModel:
        if rho0 < 0.0:
            raise DomainError(f"initial energy density must be nonnegative, got {rho0}")
        rate = math.sqrt((8.0 * math.pi * rho0 + lambda_) / 3.0)
        return cls(lambda_, ScaleFactorPreset.UPPER, rate)

    @classmethod
    def coupled(cls, lambda_: float) -> ScaleFactorModel:
        return cls(lambda_, ScaleFactorPreset.COUPLED)

    @classmethod
    def from_name(cls, name: str, lambda_: float, rho0: float = 0.0) -> ScaleFactorModel:
        try:
            preset = ScaleFactorPreset(name)
        except ValueError:
            valid = ", ".join(p.value for p in ScaleFactorPreset)
            raise ConfigError(f"unknown scale_factor {name!r}; expected one of {valid}") from None
        if preset is ScaleFactorPreset.DESITTER:
            return cls.desitter(lambda_)
        if preset is ScaleFactorPreset.UPPER:
            return cls.upper(lambda_, rho0)
        return cls.coupled(lambda_)

    @property
    def is_analytic(self) -> bool:
        return self.preset is not ScaleFactorPreset.COUPLED

    def scale_factor(self, t: float) -> float:
        """Closed-form R(t); only defined for the analytic presets."""
        if not self.is_analytic:
            raise DomainError("coupled scale factor has no closed form; use advance()")
        return math.exp(self.rate * t)

    def expansion_rate(self, t: float) -> float:
        """Closed-form Ṙ(t) for the analytic presets."""
        return self.rate * self.scale_factor(t)

    def _matter_state(
        self, t: float, R: float, R_dot: float, matter: DistributionGrid | None
    ) -> FriedmannState:
        from flrw_boltzmann.diagnostics.moments import energy_density, pressure

        if matter is None:
            return FriedmannState(t=t, R=R, rho=0.0, P=0.0, R_dot=R_dot)
        return FriedmannState(
            t=t, R=R, rho=energy_density(matter, R), P=pressure(matter, R), R_dot=R_dot
        )

    def start(self, matter: DistributionGrid | None) -> FriedmannState:
        """State at t = 0, R = 1 on the expanding branch."""
        state = self._matter_state(0.0, 1.0, 0.0, matter)
        if self.is_analytic:
            R_dot = self.rate
        else:
            R_dot = math.sqrt((8.0 * math.pi * state.rho + self.lambda_) / 3.0)
        return self._matter_state(0.0, 1.0, R_dot, matter)

    def advance(
        self, state: FriedmannState, dt: float, matter: DistributionGrid | None
    ) -> FriedmannState:
        """Background at t + dt; the coupled mode reads ρ, P from ``matter`` at each stage."""
        if not dt > 0.0:
            raise DomainError(f"time step must be positive, got {dt}")
        t_new = state.t + dt
        if self.is_analytic:
            return self._matter_state(
                t_new, self.scale_factor(t_new), self.expansion_rate(t_new), matter
            )
        if matter is None:
            return friedmann_step(state, self.lambda_, dt)
        return friedmann_step(state, self.lambda_, dt, matter)
