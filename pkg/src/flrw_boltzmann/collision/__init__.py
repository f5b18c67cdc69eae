"""Discrete collision operator: sphere quadrature, lattice, gain/loss and a Monte Carlo oracle."""

from .grid import DistributionGrid
from .monte_carlo import MonteCarloEstimate, mc_estimate
from .operator import (
    CollisionEvaluation,
    CollisionMoments,
    CollisionOperator,
    CollisionStencil,
    collision_moments,
    default_threads,
    gain,
    kernel_weight,
    loss_rate,
)
from .quadrature import SphereQuadrature

__all__ = [
    "CollisionEvaluation",
    "CollisionMoments",
    "CollisionOperator",
    "CollisionStencil",
    "DistributionGrid",
    "MonteCarloEstimate",
    "SphereQuadrature",
    "collision_moments",
    "default_threads",
    "gain",
    "kernel_weight",
    "loss_rate",
    "mc_estimate",
]
