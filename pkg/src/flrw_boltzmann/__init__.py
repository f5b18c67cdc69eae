"""FLRW Boltzmann: Israel particles in expanding spacetimes with Λ > 0."""

__version__ = "0.1.0"
