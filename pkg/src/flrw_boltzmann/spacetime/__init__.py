"""FLRW backgrounds with positive cosmological constant."""

from .friedmann import (
    FriedmannState,
    acceleration,
    constraint_drift,
    continuity_rhs,
    friedmann_step,
    hubble_rate,
    sandwich_bounds,
    within_sandwich,
)
from .models import ScaleFactorModel, ScaleFactorPreset

__all__ = [
    "FriedmannState",
    "ScaleFactorModel",
    "ScaleFactorPreset",
    "acceleration",
    "constraint_drift",
    "continuity_rhs",
    "friedmann_step",
    "hubble_rate",
    "sandwich_bounds",
    "within_sandwich",
]
