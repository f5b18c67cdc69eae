"""Matter moments of the distribution: ρ, P, comoving number and energy conditions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from flrw_boltzmann.collision.grid import DistributionGrid


def energy_density(f: DistributionGrid, R: float) -> float:
    """ρ = R⁻³ Σ f p⁰ Δ³."""
    p0 = f.energies(R)
    return float(np.sum(f.values * p0) * f.cell_volume / R**3)


def pressure(f: DistributionGrid, R: float) -> float:
    """P = R⁻⁵ Σ f |p_*|²/(3p⁰) Δ³."""
    p0 = f.energies(R)
    return float(np.sum(f.values * f.norm_sq / (3.0 * p0)) * f.cell_volume / R**5)


def number_integral(f: DistributionGrid) -> float:
    """Comoving particle number Σ f Δ³."""
    return float(np.sum(f.values) * f.cell_volume)


@dataclass(frozen=True)
class EnergyConditionReport:
    rho: float
    P: float
    weak: bool
    dominant: bool

    @property
    def holds(self) -> bool:
        return self.weak and self.dominant


def energy_conditions(rho: float, P: float) -> EnergyConditionReport:
    """WEC: ρ ≥ 0. DEC: |P| ≤ ρ."""
    return EnergyConditionReport(rho=rho, P=P, weak=rho >= 0.0, dominant=abs(P) <= rho)
