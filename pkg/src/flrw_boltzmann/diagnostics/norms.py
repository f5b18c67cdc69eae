"""Weighted energy norms ‖f‖_{k,N} and the pointwise decay envelope."""

from __future__ import annotations

import math
from collections.abc import Callable, Iterator
from dataclasses import dataclass
from itertools import product
from typing import Final

import numpy as np
from scipy import integrate

from flrw_boltzmann.collision.grid import DistributionGrid
from flrw_boltzmann.errors import DomainError
from flrw_boltzmann.kinematics.vectors import FloatArray

# e^{p⁰} must stay representable in float64
MAX_EXPONENT: Final[float] = 700.0


@dataclass(frozen=True)
class NormSpec:
    """Polynomial weight exponent k and derivative order N of ‖·‖_{k,N}."""

    k: int
    N: int

    def __post_init__(self) -> None:
        for name in ("k", "N"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 0:
                raise DomainError(f"{name} must be a nonnegative integer, got {value!r}")

    @property
    def label(self) -> str:
        return f"norm_k{self.k}_N{self.N}"


def multi_indices(order: int) -> Iterator[tuple[int, int, int]]:
    """All β ∈ ℕ³ with |β| ≤ order, lowest order first."""
    for total in range(order + 1):
        for beta in product(range(total + 1), repeat=3):
            if sum(beta) == total:
                yield beta


def _derivatives(f: DistributionGrid, order: int) -> dict[tuple[int, int, int], FloatArray]:
    """∂_β f on the lattice; centred differences, second-order one-sided at the faces."""
    if order > 0 and f.n < 3:
        raise DomainError("derivative norms need at least 3 points per axis")
    cache: dict[tuple[int, int, int], FloatArray] = {(0, 0, 0): np.asarray(f.values)}
    for beta in multi_indices(order):
        if beta in cache:
            continue
        axis = next(i for i, b in enumerate(beta) if b > 0)
        parent = tuple(b - (i == axis) for i, b in enumerate(beta))
        cache[beta] = np.asarray(
            np.gradient(cache[parent], f.spacing, axis=axis, edge_order=2)  # type: ignore[index]
        )
    return cache


def _weights(
    f: DistributionGrid, R: float, bracket_power: float, energy_factor: float
) -> FloatArray:
    """(1 + |p_*|²)^bracket_power · e^{energy_factor · p⁰}."""
    p0 = f.energies(R)
    exponent = energy_factor * float(p0.max())
    if exponent > MAX_EXPONENT:
        raise DomainError(
            f"e^{{p0}} overflows on this lattice (max p0={float(p0.max()):.1f} at R={R})"
        )
    return np.asarray((1.0 + f.norm_sq) ** bracket_power * np.exp(energy_factor * p0))


def weighted_norm(f: DistributionGrid, spec: NormSpec, R: float) -> float:
    """‖f‖_{k,N} = (Σ_{|β|≤N} Σ ⟨p_*⟩^{2k} e^{p⁰(t)} |∂_β f|² Δ³)^{1/2}."""
    if f.is_zero:
        return 0.0
    weight = _weights(f, R, float(spec.k), 1.0)
    total = 0.0
    for deriv in _derivatives(f, spec.N).values():
        total += float(np.sum(weight * deriv * deriv))
    return math.sqrt(total * f.cell_volume)


def decay_envelope(f: DistributionGrid, R: float, k: int) -> float:
    """max f ⟨p_*⟩^k e^{p⁰/2}; bounded in t when f̂ decays like the weight's inverse."""
    if f.is_zero:
        return 0.0
    return float(np.max(f.values * _weights(f, R, k / 2.0, 0.5)))


# ═══════════════════════════════════════════════════════════════════════════
# RADIAL ORACLES (isotropic data)
# ═══════════════════════════════════════════════════════════════════════════


def radial_norm_oracle(
    profile: Callable[[float], float], k: int, R: float, r_max: float
) -> float:
    """‖g‖_{k,0} for g(p_*) = profile(|p_*|) by adaptive radial quadrature over [0, r_max]."""

    def integrand(r: float) -> float:
        p0 = math.sqrt(1.0 + (r / R) ** 2)
        return 4.0 * math.pi * r * r * (1.0 + r * r) ** k * math.exp(p0) * profile(r) ** 2

    value, _ = integrate.quad(integrand, 0.0, r_max, limit=200)
    return math.sqrt(value)


def radial_moments_oracle(
    profile: Callable[[float], float], R: float, r_max: float
) -> tuple[float, float]:
    """(ρ, P) of an isotropic profile by radial quadrature."""

    def rho_integrand(r: float) -> float:
        return 4.0 * math.pi * r * r * profile(r) * math.sqrt(1.0 + (r / R) ** 2)

    def p_integrand(r: float) -> float:
        p0 = math.sqrt(1.0 + (r / R) ** 2)
        return 4.0 * math.pi * r * r * profile(r) * r * r / (3.0 * p0)

    rho, _ = integrate.quad(rho_integrand, 0.0, r_max, limit=200)
    P, _ = integrate.quad(p_integrand, 0.0, r_max, limit=200)
    return rho / R**3, P / R**5
