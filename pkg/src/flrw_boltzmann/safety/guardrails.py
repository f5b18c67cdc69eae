"""Per-step guardrails for simulation runs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from flrw_boltzmann.collision.grid import CUTOFF_TOL, DistributionGrid
from flrw_boltzmann.diagnostics.moments import energy_conditions
from flrw_boltzmann.spacetime.friedmann import FriedmannState, sandwich_bounds


@dataclass
class GuardrailResult:
    """Result of a guardrail check."""

    passed: bool
    violation: str | None = None
    action: str = "continue"  # continue/warn/abort


class Guardrails:
    """Invariant checks applied to every accepted step."""

    def __init__(
        self,
        lambda_: float,
        rho0: float,
        residual_tolerance: float = 1e-10,
        cutoff_tolerance: float = CUTOFF_TOL,
        max_leakage: float = 1e-3,
    ) -> None:
        """Initialize guardrails.

        Args:
            lambda_: Cosmological constant of the run
            rho0: Energy density at t = 0 (upper sandwich rate)
            residual_tolerance: Picard residual allowed per unit max f
            cutoff_tolerance: Allowed boundary-shell to peak ratio of f
            max_leakage: Allowed fraction of loss whose partners leave the cube
        """
        self.lambda_ = lambda_
        self.rho0 = rho0
        self.residual_tolerance = residual_tolerance
        self.cutoff_tolerance = cutoff_tolerance
        self.max_leakage = max_leakage

    def check_positivity(self, values: np.ndarray) -> GuardrailResult:
        minimum = float(values.min()) if values.size else 0.0
        if minimum < 0.0 or not np.all(np.isfinite(values)):
            return GuardrailResult(
                passed=False,
                violation=f"Distribution lost positivity or finiteness: min={minimum:.3e}",
                action="abort",
            )
        return GuardrailResult(passed=True)

    def check_energy_conditions(self, rho: float, P: float) -> GuardrailResult:
        report = energy_conditions(rho, P)
        if not report.holds:
            failed = "WEC" if not report.weak else "DEC"
            return GuardrailResult(
                passed=False,
                violation=f"{failed} violated: rho={rho:.6e}, P={P:.6e}",
                action="abort",
            )
        return GuardrailResult(passed=True)

    def check_sandwich(self, state: FriedmannState) -> GuardrailResult:
        """e^{√(Λ/3)t} ≤ R(t) ≤ e^{√((8πρ(0)+Λ)/3)t}, with 1e-12 relative slack."""
        lower, upper = sandwich_bounds(state.t, self.lambda_, self.rho0)
        if state.R < lower * (1.0 - 1e-12) or state.R > upper * (1.0 + 1e-12):
            return GuardrailResult(
                passed=False,
                violation=(
                    f"Scale factor outside exponential bounds at t={state.t:.4g}: "
                    f"{lower:.12g} <= {state.R:.12g} <= {upper:.12g} fails"
                ),
                action="abort",
            )
        return GuardrailResult(passed=True)

    def check_residual(self, residual: float, max_f: float) -> GuardrailResult:
        limit = self.residual_tolerance * max_f
        if residual > limit:
            return GuardrailResult(
                passed=True,
                violation=f"Picard residual {residual:.3e} above {limit:.3e}",
                action="warn",
            )
        return GuardrailResult(passed=True)

    def check_cutoff(self, f: DistributionGrid) -> GuardrailResult:
        ratio = f.boundary_ratio()
        if ratio > self.cutoff_tolerance:
            return GuardrailResult(
                passed=True,
                violation=f"Distribution reaches the cube boundary: ratio={ratio:.3e}",
                action="warn",
            )
        return GuardrailResult(passed=True)

    def check_leakage(self, leakage: float) -> GuardrailResult:
        if leakage > self.max_leakage:
            return GuardrailResult(
                passed=True,
                violation=f"Collision leakage {leakage:.3e} above {self.max_leakage:.1e}",
                action="warn",
            )
        return GuardrailResult(passed=True)

    def check_all(
        self,
        f: DistributionGrid,
        state: FriedmannState,
        residual: float,
        leakage: float,
    ) -> list[GuardrailResult]:
        """Run all guardrail checks.

        Args:
            f: Distribution after the step
            state: Background after the step (ρ, P from f)
            residual: Final Picard sweep residual
            leakage: Leakage fraction of the last collision pass

        Returns:
            List of all guardrail check results
        """
        return [
            self.check_positivity(np.asarray(f.values)),
            self.check_energy_conditions(state.rho, state.P),
            self.check_sandwich(state),
            self.check_residual(residual, f.max_value),
            self.check_cutoff(f),
            self.check_leakage(leakage),
        ]
