"""Semi-implicit Picard time step: gain from the previous sweep, loss implicit.

One sweep of the update on every lattice point is

    f⁽ᵐ⁺¹⁾ = (f_old + dt · Q₊(f⁽ᵐ⁾)) / (1 + dt · L(f⁽ᵐ⁾)),   f⁽⁰⁾ = f_old

which is a ratio of nonnegative quantities, so f ≥ 0 holds exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from flrw_boltzmann.collision.grid import DistributionGrid
from flrw_boltzmann.collision.operator import CollisionEvaluation, CollisionOperator
from flrw_boltzmann.diagnostics.moments import energy_density, pressure
from flrw_boltzmann.errors import DomainError, EnergyConditionError, StepFailure
from flrw_boltzmann.logs import get_logger
from flrw_boltzmann.spacetime.friedmann import FriedmannState
from flrw_boltzmann.spacetime.models import ScaleFactorModel

logger = get_logger(__name__)


@dataclass(frozen=True)
class SimState:
    """Distribution and background at time t, plus bookkeeping of the last step."""

    t: float
    f: DistributionGrid
    spacetime: FriedmannState
    step_count: int = 0
    residual: float = 0.0
    sweeps: int = 0
    leakage: float = 0.0
    halvings: int = 0

    def __post_init__(self) -> None:
        if not math.isfinite(self.t):
            raise DomainError(f"SimState time must be finite, got {self.t}")

    @property
    def R(self) -> float:
        return self.spacetime.R


@dataclass(frozen=True)
class SweepResult:
    values: np.ndarray
    residual: float
    sweeps: int
    converged: bool
    evaluation: CollisionEvaluation


def picard_sweeps(
    f_old: DistributionGrid,
    R: float,
    dt: float,
    operator: CollisionOperator,
    iters: int,
    max_sweeps: int,
    tolerance: float,
) -> SweepResult:
    """Run at least ``iters`` and at most ``max_sweeps`` sweeps at fixed R.

    The deposit stencil is built once from f_old and shared by the sweeps.
    Converged means the max-norm change of the last sweep is at most
    ``tolerance`` · max f.
    """
    old = np.asarray(f_old.values)
    current = f_old
    residual = 0.0
    evaluation: CollisionEvaluation | None = None
    stencil = operator.stencil(f_old, R)
    for sweep in range(1, max_sweeps + 1):
        evaluation = operator.evaluate(current, R, stencil)
        updated = (old + dt * evaluation.gain) / (1.0 + dt * evaluation.loss_rate)
        residual = float(np.max(np.abs(updated - current.values)))
        current = current.with_values(updated)
        logger.debug("sweep %d at R=%.6g: residual=%.3e", sweep, R, residual)
        if sweep >= iters and residual <= tolerance * current.max_value:
            return SweepResult(current.values, residual, sweep, True, evaluation)
    assert evaluation is not None
    return SweepResult(current.values, residual, max_sweeps, False, evaluation)


def _substep(
    state: SimState,
    dt: float,
    model: ScaleFactorModel,
    operator: CollisionOperator,
    iters: int,
    max_sweeps: int,
    tolerance: float,
) -> SimState | None:
    """One step of size dt, or None when the sweeps do not converge."""
    background = model.advance(state.spacetime, dt, state.f)
    result = picard_sweeps(state.f, background.R, dt, operator, iters, max_sweeps, tolerance)
    if not result.converged:
        return None
    f_new = state.f.with_values(result.values)
    background = replace(
        background, rho=energy_density(f_new, background.R), P=pressure(f_new, background.R)
    )
    return SimState(
        t=state.t + dt,
        f=f_new,
        spacetime=background,
        step_count=state.step_count,
        residual=result.residual,
        sweeps=result.sweeps,
        leakage=result.evaluation.leakage,
    )


def picard_step(
    state: SimState,
    dt: float,
    picard_iters: int,
    *,
    model: ScaleFactorModel,
    operator: CollisionOperator,
    max_sweeps: int = 8,
    tolerance: float = 1e-10,
    max_halvings: int = 8,
) -> SimState:
    """Advance (f, background) by dt.

    The background moves first (coupled mode reads ρ, P from f at t); the
    collision sweeps then run at R(t + dt). When the sweeps do not converge
    the interval is covered by 2, 4, ... substeps, up to ``max_halvings``
    times, before StepFailure is raised.
    """
    if not dt > 0.0:
        raise DomainError(f"time step must be positive, got {dt}")
    if picard_iters < 1:
        raise DomainError(f"picard_iters must be >= 1, got {picard_iters}")
    max_sweeps = max(max_sweeps, picard_iters)

    for halvings in range(max_halvings + 1):
        substeps = 2**halvings
        h = dt / substeps
        current: SimState | None = state
        try:
            for _ in range(substeps):
                assert current is not None
                current = _substep(current, h, model, operator, picard_iters, max_sweeps, tolerance)
                if current is None:
                    break
        except EnergyConditionError as exc:
            logger.warning("background step rejected at t=%.6g: %s", state.t, exc)
            current = None
        if current is not None:
            logger.debug(
                "step %d accepted: t=%.6g R=%.6g sweeps=%d residual=%.3e",
                state.step_count + 1,
                current.t,
                current.R,
                current.sweeps,
                current.residual,
            )
            return replace(
                current, t=state.t + dt, step_count=state.step_count + 1, halvings=halvings
            )
        logger.warning(
            "Picard sweeps did not converge at t=%.6g with dt=%.3e; halving", state.t, h
        )

    raise StepFailure(
        f"Picard step from t={state.t:.6g} failed after {max_halvings} halvings",
        last_state=state,
        details={"dt": dt, "max_halvings": max_halvings},
    )
