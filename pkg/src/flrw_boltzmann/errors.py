"""Exception hierarchy shared by all subpackages."""

from __future__ import annotations

from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from flrw_boltzmann.solver.picard import SimState


class FlrwBoltzmannError(Exception):
    """Base class for every error raised by this package."""


class DomainError(FlrwBoltzmannError, ValueError):
    """Input outside the mathematical domain of an operation."""


class ContractViolation(FlrwBoltzmannError, ValueError):
    """A caller broke a documented precondition (e.g. off-shell momenta)."""


class UndefinedAngleError(DomainError):
    """Scattering angle requested for a pair with vanishing relative momentum."""


class EnergyConditionError(DomainError):
    """Matter violating the weak energy condition reached the Friedmann equations."""


class ConfigError(FlrwBoltzmannError):
    """Configuration file missing, unreadable or invalid."""


class StepFailure(FlrwBoltzmannError, RuntimeError):
    """A time step could not be completed.

    Args:
        message: Human-readable reason.
        last_state: Last accepted state, dumped to disk by the caller.
        details: Extra numbers (residuals, dt) for the diagnostic dump.
    """

    def __init__(
        self,
        message: str,
        last_state: SimState | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message)
        self.last_state = last_state
        self.details = details or {}


class AuditFailure(FlrwBoltzmannError):
    """An offline property audit did not pass."""
