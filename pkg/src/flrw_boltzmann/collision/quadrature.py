"""Product quadrature on the unit sphere: Gauss–Legendre in cos θ × midpoint azimuth."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Final

import numpy as np
from scipy.special import roots_legendre

from flrw_boltzmann.errors import ContractViolation, DomainError
from flrw_boltzmann.kinematics.vectors import FloatArray

WEIGHT_SUM_TOL: Final[float] = 1e-12
EXACTNESS_TOL: Final[float] = 1e-12

# (exponents of x, y, z; exact integral over S²)
_MONOMIALS: Final[tuple[tuple[tuple[int, int, int], float], ...]] = (
    ((2, 0, 0), 4.0 * math.pi / 3.0),
    ((0, 0, 2), 4.0 * math.pi / 3.0),
    ((4, 0, 0), 4.0 * math.pi / 5.0),
    ((0, 0, 4), 4.0 * math.pi / 5.0),
    ((2, 2, 0), 4.0 * math.pi / 15.0),
)


@dataclass(frozen=True, eq=False)
class SphereQuadrature:
    """Nodes ω_j ∈ S² and weights w_j with Σ w_j = 4π.

    Construction checks the weight sum and the monomials of degree up to
    ``exact_degree`` against their closed-form integrals.
    """

    nodes: FloatArray
    weights: FloatArray
    exact_degree: int = 0
    label: str = field(default="custom")

    def __post_init__(self) -> None:
        nodes = np.asarray(self.nodes, dtype=np.float64)
        weights = np.asarray(self.weights, dtype=np.float64)
        if nodes.ndim != 2 or nodes.shape[1] != 3 or weights.shape != (nodes.shape[0],):
            raise DomainError(
                f"quadrature needs (K, 3) nodes and K weights, got {nodes.shape}, {weights.shape}"
            )
        if np.max(np.abs(np.einsum("ij,ij->i", nodes, nodes) - 1.0)) > 1e-12:
            raise ContractViolation("quadrature nodes must lie on the unit sphere")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

        total = float(weights.sum())
        if abs(total - 4.0 * math.pi) > WEIGHT_SUM_TOL * 4.0 * math.pi:
            raise ContractViolation(f"quadrature weights sum to {total}, expected 4π")
        for (a, b, c), exact in _MONOMIALS:
            if a + b + c > self.exact_degree:
                continue
            approx = self.integrate(nodes[:, 0] ** a * nodes[:, 1] ** b * nodes[:, 2] ** c)
            if abs(approx - exact) > EXACTNESS_TOL * 4.0 * math.pi:
                raise ContractViolation(
                    f"{self.label} quadrature misses x^{a} y^{b} z^{c}: {approx} vs {exact}"
                )

    @classmethod
    def product(cls, polar_order: int = 8, azimuth_order: int = 16) -> SphereQuadrature:
        """Gauss–Legendre in cos θ (``polar_order`` nodes) × uniform azimuth."""
        if polar_order < 1 or azimuth_order < 1:
            raise DomainError(
                f"sphere orders must be positive, got {polar_order}x{azimuth_order}"
            )
        mu, w_mu = roots_legendre(polar_order)
        phi = (np.arange(azimuth_order) + 0.5) * (2.0 * math.pi / azimuth_order)
        sin_theta = np.sqrt(1.0 - mu**2)

        nodes = np.stack(
            [
                np.outer(sin_theta, np.cos(phi)).ravel(),
                np.outer(sin_theta, np.sin(phi)).ravel(),
                np.repeat(mu, azimuth_order),
            ],
            axis=1,
        )
        weights = np.repeat(w_mu, azimuth_order) * (2.0 * math.pi / azimuth_order)
        return cls(
            nodes=nodes,
            weights=weights,
            exact_degree=min(2 * polar_order - 1, azimuth_order - 1),
            label=f"{polar_order}x{azimuth_order}",
        )

    @property
    def size(self) -> int:
        return int(self.weights.shape[0])

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def integrate(self, values: FloatArray) -> float:
        """Σ_j w_j g(ω_j) for samples taken at the nodes."""
        return float(np.asarray(values, dtype=np.float64) @ self.weights)
