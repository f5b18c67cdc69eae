"""Friedmann equations for a spatially flat FLRW spacetime with Λ > 0.

    (Ṙ/R)² = (8πρ + Λ)/3              (expanding root only)
    3R̈/R   = −4π(ρ + 3P) + Λ
    ρ̇      = −3(Ṙ/R)(ρ + P)
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Final

import numpy as np

from flrw_boltzmann.errors import DomainError, EnergyConditionError
from flrw_boltzmann.logs import get_logger

if TYPE_CHECKING:
    from flrw_boltzmann.collision.grid import DistributionGrid

logger = get_logger(__name__)

MAX_RETRIES: Final[int] = 10
SANDWICH_SLACK: Final[float] = 1e-12


@dataclass(frozen=True)
class FriedmannState:
    """Background state at time t.

    ``R_dot`` is carried separately from R·H so the Hamiltonian constraint
    can be monitored in uncoupled mode; None means "use the constraint".
    """

    t: float
    R: float
    rho: float
    P: float
    R_dot: float | None = None

    def __post_init__(self) -> None:
        values = (self.t, self.R, self.rho, self.P)
        if not all(math.isfinite(v) for v in values):
            raise DomainError(f"FriedmannState fields must be finite, got {values}")
        if self.R <= 0.0:
            raise DomainError(f"scale factor must be positive, got {self.R}")


def _check_lambda(lambda_: float) -> None:
    if not lambda_ > 0.0:
        raise DomainError(f"cosmological constant must be positive, got {lambda_}")


def _hubble(rho: float, lambda_: float) -> float:
    if rho < 0.0:
        raise EnergyConditionError(f"weak energy condition violated: rho={rho}")
    return math.sqrt((8.0 * math.pi * rho + lambda_) / 3.0)


def hubble_rate(state: FriedmannState, lambda_: float) -> float:
    """Ṙ/R on the expanding branch."""
    _check_lambda(lambda_)
    return _hubble(state.rho, lambda_)


def continuity_rhs(state: FriedmannState, lambda_: float) -> float:
    """ρ̇ = −3(Ṙ/R)(ρ + P)."""
    return -3.0 * hubble_rate(state, lambda_) * (state.rho + state.P)


def acceleration(state: FriedmannState, lambda_: float) -> float:
    """R̈/R from the second Friedmann equation."""
    _check_lambda(lambda_)
    return (-4.0 * math.pi * (state.rho + 3.0 * state.P) + lambda_) / 3.0


def constraint_drift(state: FriedmannState, lambda_: float) -> float:
    """|(Ṙ/R)² − (8πρ + Λ)/3| / (Λ/3) using the carried Ṙ."""
    _check_lambda(lambda_)
    if state.R_dot is None:
        return 0.0
    lhs = (state.R_dot / state.R) ** 2
    return abs(lhs - (8.0 * math.pi * state.rho + lambda_) / 3.0) / (lambda_ / 3.0)


def sandwich_bounds(t: float, lambda_: float, rho0: float) -> tuple[float, float]:
    """(e^{√(Λ/3) t}, e^{√((8πρ(0)+Λ)/3) t}) bounding R(t) for DEC matter."""
    _check_lambda(lambda_)
    return math.exp(math.sqrt(lambda_ / 3.0) * t), math.exp(_hubble(rho0, lambda_) * t)


def within_sandwich(state: FriedmannState, lambda_: float, rho0: float) -> bool:
    lower, upper = sandwich_bounds(state.t, lambda_, rho0)
    return lower * (1.0 - SANDWICH_SLACK) <= state.R <= upper * (1.0 + SANDWICH_SLACK)


# ═══════════════════════════════════════════════════════════════════════════
# RK4 STEPPER
# ═══════════════════════════════════════════════════════════════════════════


def _rk4(
    rhs: Callable[[np.ndarray], np.ndarray], y: np.ndarray, dt: float
) -> np.ndarray:
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * dt * k1)
    k3 = rhs(y + 0.5 * dt * k2)
    k4 = rhs(y + dt * k3)
    return np.asarray(y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))


def _step_fluid(state: FriedmannState, lambda_: float, dt: float) -> FriedmannState:
    """Evolve (R, ρ, Ṙ) with the barotropic closure P = wρ fixed by the start state."""
    w = state.P / state.rho if state.rho > 0.0 else 0.0
    R_dot = state.R_dot if state.R_dot is not None else state.R * _hubble(state.rho, lambda_)

    def rhs(y: np.ndarray) -> np.ndarray:
        log_R, rho, _ = y
        H = _hubble(rho, lambda_)
        return np.array(
            [
                H,
                -3.0 * H * (1.0 + w) * rho,
                math.exp(log_R) * (-4.0 * math.pi * (1.0 + 3.0 * w) * rho + lambda_) / 3.0,
            ]
        )

    y = _rk4(rhs, np.array([math.log(state.R), state.rho, R_dot]), dt)
    if y[1] < 0.0:
        raise EnergyConditionError(f"step produced negative energy density {y[1]}")
    return FriedmannState(
        t=state.t + dt, R=math.exp(y[0]), rho=float(y[1]), P=w * float(y[1]), R_dot=float(y[2])
    )


def _step_matter(
    state: FriedmannState, lambda_: float, dt: float, matter: DistributionGrid
) -> FriedmannState:
    """Evolve (R, Ṙ) with ρ and P recomputed from the frozen grid at every stage."""
    from flrw_boltzmann.diagnostics.moments import energy_density, pressure

    R_dot = state.R_dot if state.R_dot is not None else state.R * _hubble(state.rho, lambda_)

    def rhs(y: np.ndarray) -> np.ndarray:
        R = math.exp(y[0])
        rho = energy_density(matter, R)
        P = pressure(matter, R)
        return np.array(
            [_hubble(rho, lambda_), R * (-4.0 * math.pi * (rho + 3.0 * P) + lambda_) / 3.0]
        )

    y = _rk4(rhs, np.array([math.log(state.R), R_dot]), dt)
    R_new = math.exp(y[0])
    return FriedmannState(
        t=state.t + dt,
        R=R_new,
        rho=energy_density(matter, R_new),
        P=pressure(matter, R_new),
        R_dot=float(y[1]),
    )


def friedmann_step(
    state: FriedmannState,
    lambda_: float,
    dt: float,
    matter: DistributionGrid | None = None,
) -> FriedmannState:
    """Advance the background by dt with classical RK4.

    Without ``matter`` the fluid variables (R, ρ, Ṙ) are integrated; with it
    only (R, Ṙ) are, ρ and P being read from the grid. A step that drives ρ
    negative is retried on 2, 4, ... substeps (up to 10 halvings).
    """
    _check_lambda(lambda_)
    if not dt > 0.0:
        raise DomainError(f"time step must be positive, got {dt}")

    for attempt in range(MAX_RETRIES + 1):
        substeps = 2**attempt
        h = dt / substeps
        current = state
        try:
            for _ in range(substeps):
                if matter is None:
                    current = _step_fluid(current, lambda_, h)
                else:
                    current = _step_matter(current, lambda_, h, matter)
        except EnergyConditionError as exc:
            logger.warning("Friedmann step rejected (%s); halving to dt=%.3e", exc, h / 2.0)
            continue
        return replace(current, t=state.t + dt)

    raise EnergyConditionError(
        f"Friedmann step from t={state.t} failed after {MAX_RETRIES} halvings"
    )
