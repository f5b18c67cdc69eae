"""Momentum value types: covariant 3-momenta and Minkowski four-vectors.

Units m = c = 1 throughout. Four-vectors use the signature (-,+,+,+).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Final

import numpy as np
import numpy.typing as npt

from flrw_boltzmann.errors import ContractViolation, DomainError

FloatArray = npt.NDArray[np.float64]

# Relative mass-shell tolerance for input validation
ON_SHELL_TOL: Final[float] = 1e-9


def _require_finite(name: str, values: tuple[float, ...]) -> None:
    if not all(math.isfinite(v) for v in values):
        raise DomainError(f"{name} must be finite, got {values}")


@dataclass(frozen=True)
class CovariantMomentum:
    """Covariant spatial momentum p_* = (p_1, p_2, p_3)."""

    p1: float
    p2: float
    p3: float

    def __post_init__(self) -> None:
        _require_finite("CovariantMomentum", (self.p1, self.p2, self.p3))

    @classmethod
    def from_array(cls, values: npt.ArrayLike) -> CovariantMomentum:
        arr = np.asarray(values, dtype=np.float64).reshape(3)
        return cls(float(arr[0]), float(arr[1]), float(arr[2]))

    @property
    def array(self) -> FloatArray:
        return np.array([self.p1, self.p2, self.p3], dtype=np.float64)

    @property
    def norm_sq(self) -> float:
        return self.p1 * self.p1 + self.p2 * self.p2 + self.p3 * self.p3

    @property
    def norm(self) -> float:
        return math.sqrt(self.norm_sq)

    @property
    def weight(self) -> float:
        """⟨p_*⟩ = sqrt(1 + |p_*|²); not the energy p⁰ unless R = 1."""
        return math.sqrt(1.0 + self.norm_sq)

    def orthonormal(self, R: float) -> FourVector:
        """On-shell orthonormal-frame momentum p̂ = (p⁰, p_*/R)."""
        if not R > 0.0:
            raise DomainError(f"scale factor must be positive, got {R}")
        return FourVector.on_shell(self.array / R)


@dataclass(frozen=True)
class FourVector:
    """Contravariant four-vector (x⁰, x¹, x², x³) in an orthonormal frame."""

    x0: float
    x1: float
    x2: float
    x3: float

    def __post_init__(self) -> None:
        _require_finite("FourVector", (self.x0, self.x1, self.x2, self.x3))

    @classmethod
    def from_array(cls, values: npt.ArrayLike) -> FourVector:
        arr = np.asarray(values, dtype=np.float64).reshape(4)
        return cls(float(arr[0]), float(arr[1]), float(arr[2]), float(arr[3]))

    @classmethod
    def on_shell(cls, spatial: npt.ArrayLike) -> FourVector:
        """Unit-mass momentum with the given spatial part."""
        vec = np.asarray(spatial, dtype=np.float64).reshape(3)
        energy = math.sqrt(1.0 + float(vec @ vec))
        return cls(energy, float(vec[0]), float(vec[1]), float(vec[2]))

    @property
    def array(self) -> FloatArray:
        return np.array([self.x0, self.x1, self.x2, self.x3], dtype=np.float64)

    @property
    def spatial(self) -> FloatArray:
        return np.array([self.x1, self.x2, self.x3], dtype=np.float64)

    def dot(self, other: FourVector) -> float:
        """Minkowski inner product x_α y^α."""
        return (
            -self.x0 * other.x0
            + self.x1 * other.x1
            + self.x2 * other.x2
            + self.x3 * other.x3
        )

    def __add__(self, other: FourVector) -> FourVector:
        return FourVector.from_array(self.array + other.array)

    def __sub__(self, other: FourVector) -> FourVector:
        return FourVector.from_array(self.array - other.array)

    def mass_shell_defect(self) -> float:
        """|x_α x^α + 1|, zero for unit-mass on-shell momenta."""
        return abs(self.dot(self) + 1.0)

    def require_on_shell(self, name: str = "momentum") -> None:
        if self.x0 <= 0.0 or self.mass_shell_defect() > ON_SHELL_TOL * max(1.0, self.x0**2):
            raise ContractViolation(
                f"{name} is off the unit mass shell: x0={self.x0}, "
                f"defect={self.mass_shell_defect():.3e}"
            )


def minkowski_dot(a: FloatArray, b: FloatArray) -> FloatArray:
    """Batched x_α y^α over the last axis (length 4)."""
    return np.asarray(
        -a[..., 0] * b[..., 0] + np.einsum("...i,...i->...", a[..., 1:], b[..., 1:]),
        dtype=np.float64,
    )


def energies(spatial: FloatArray) -> FloatArray:
    """Batched p⁰ = sqrt(1 + |p̂|²) over the last axis (length 3)."""
    return np.asarray(np.sqrt(1.0 + np.einsum("...i,...i->...", spatial, spatial)))


def unit_vector(values: npt.ArrayLike) -> FloatArray:
    """Validate |ω| = 1 to the on-shell tolerance and return it as an array."""
    vec = np.asarray(values, dtype=np.float64).reshape(3)
    if not np.all(np.isfinite(vec)):
        raise DomainError(f"omega must be finite, got {vec}")
    if abs(float(vec @ vec) - 1.0) > ON_SHELL_TOL:
        raise ContractViolation(f"omega must be a unit vector, got |omega|^2={float(vec @ vec)}")
    return vec


# ═══════════════════════════════════════════════════════════════════════════
# SAMPLING
# ═══════════════════════════════════════════════════════════════════════════


def random_unit_vectors(rng: np.random.Generator, count: int) -> FloatArray:
    """Uniform points on S² (normalised Gaussian triples)."""
    raw = rng.standard_normal((count, 3))
    return np.asarray(raw / np.linalg.norm(raw, axis=1, keepdims=True))


def random_momenta(
    rng: np.random.Generator,
    count: int,
    max_norm: float,
    min_norm: float = 1e-3,
) -> FloatArray:
    """Isotropic momenta with log-uniform magnitude in [min_norm, max_norm]."""
    magnitudes = np.exp(rng.uniform(math.log(min_norm), math.log(max_norm), count))
    return np.asarray(random_unit_vectors(rng, count) * magnitudes[:, None])
