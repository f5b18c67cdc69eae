"""Time evolution of the distribution on the covariant-momentum lattice."""

from .checkpoint import Checkpoint, read_checkpoint, write_checkpoint
from .initial_data import initial_data, radial_profile, resolve_params
from .picard import SimState, SweepResult, picard_step, picard_sweeps
from .run import RunResult, initial_state, run

__all__ = [
    "Checkpoint",
    "RunResult",
    "SimState",
    "SweepResult",
    "initial_data",
    "initial_state",
    "picard_step",
    "picard_sweeps",
    "radial_profile",
    "read_checkpoint",
    "resolve_params",
    "run",
    "write_checkpoint",
]
