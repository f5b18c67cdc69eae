"""Two-body elastic collision kinematics for unit-mass particles.

Post-collision momenta are parametrised by ω ∈ S² through the unit spacelike
vector Ω^α obtained by boosting (0, ω) out of the centre-of-momentum frame:

    Ω^α = ((n·ω)/√s, ω + (n·ω) n / (√s (n⁰ + √s))),   n = p̂ + q̂
    p'^α = p^α + 2 (q_β Ω^β) Ω^α,   q'^α = q^α − 2 (q_β Ω^β) Ω^α

Everything is evaluated in the orthonormal frame (p̂ = p_*/R) and mapped
back to covariant variables. The batch helpers broadcast over leading axes
and are what the collision operator and the audits run on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, NamedTuple

import numpy as np
import numpy.typing as npt

from flrw_boltzmann.errors import DomainError, UndefinedAngleError
from flrw_boltzmann.kinematics.vectors import (
    CovariantMomentum,
    FloatArray,
    FourVector,
    energies,
    unit_vector,
)

# ═══════════════════════════════════════════════════════════════════════════
# BATCH CORE
# ═══════════════════════════════════════════════════════════════════════════


def dot3(a: FloatArray, b: FloatArray) -> FloatArray:
    return np.asarray(np.einsum("...i,...i->...", a, b))


def pair_invariants(
    p: FloatArray,
    q: FloatArray,
    p0: FloatArray | None = None,
    q0: FloatArray | None = None,
) -> tuple[FloatArray, FloatArray]:
    """Return (h², s) for orthonormal spatial momenta, broadcasting.

    p⁰q⁰ − p·q is evaluated as (1 + |p|² + |q|² + |p×q|²)/(p⁰q⁰ + p·q) when
    p·q > 0, which avoids the cancellation between two large products.
    """
    if p0 is None:
        p0 = energies(p)
    if q0 is None:
        q0 = energies(q)
    pq = dot3(p, q)
    cross = np.cross(p, q)
    stable = (1.0 + dot3(p, p) + dot3(q, q) + dot3(cross, cross)) / (p0 * q0 + np.abs(pq))
    g = np.where(pq > 0.0, stable, p0 * q0 - pq)
    s = 2.0 + 2.0 * g

    diff = p - q
    diff0 = dot3(diff, p + q) / (p0 + q0)
    h_sq = np.maximum(dot3(diff, diff) - diff0 * diff0, 0.0)
    return np.asarray(h_sq), np.asarray(s)


class CollisionBatch(NamedTuple):
    """Vectorised outcome of the collision map."""

    p0: FloatArray
    q0: FloatArray
    s: FloatArray
    omega0: FloatArray
    omega_vec: FloatArray
    p_prime: FloatArray
    q_prime: FloatArray
    p0_prime: FloatArray
    q0_prime: FloatArray


def post_collision_batch(p: FloatArray, q: FloatArray, omega: FloatArray) -> CollisionBatch:
    """Apply the collision map to orthonormal spatial momenta (broadcasting)."""
    p0 = energies(p)
    q0 = energies(q)
    _, s = pair_invariants(p, q, p0, q0)
    root_s = np.sqrt(s)
    n = p + q
    n0 = p0 + q0

    n_omega = dot3(n, omega)
    omega0 = n_omega / root_s
    coef = n_omega / (root_s * (n0 + root_s))
    omega_vec = omega + coef[..., None] * n

    q_omega = -q0 * omega0 + dot3(q, omega_vec)
    kick = 2.0 * q_omega
    p_prime = p + kick[..., None] * omega_vec
    q_prime = q - kick[..., None] * omega_vec
    return CollisionBatch(
        p0=np.asarray(p0),
        q0=np.asarray(q0),
        s=np.asarray(s),
        omega0=np.asarray(omega0),
        omega_vec=np.asarray(omega_vec),
        p_prime=np.asarray(p_prime),
        q_prime=np.asarray(q_prime),
        p0_prime=np.asarray(p0 + kick * omega0),
        q0_prime=np.asarray(q0 - kick * omega0),
    )


def covariant_batch(
    p_star: FloatArray, q_star: FloatArray, omega: FloatArray, R: float
) -> tuple[FloatArray, FloatArray]:
    """Covariant post-collision momenta via the orthonormal frame."""
    batch = post_collision_batch(p_star / R, q_star / R, omega)
    return batch.p_prime * R, batch.q_prime * R


# ═══════════════════════════════════════════════════════════════════════════
# SCALAR OPERATIONS
# ═══════════════════════════════════════════════════════════════════════════


def mass_shell_energy(p_star: CovariantMomentum, R: float) -> float:
    """p⁰ = sqrt(1 + R⁻²|p_*|²)."""
    if not math.isfinite(R) or R <= 0.0:
        raise DomainError(f"scale factor must be positive and finite, got {R}")
    return math.sqrt(1.0 + p_star.norm_sq / (R * R))


def invariants_h_s(p_hat: FourVector, q_hat: FourVector) -> tuple[float, float]:
    """Relative momentum h and total energy s of an on-shell pair."""
    p_hat.require_on_shell("p_hat")
    q_hat.require_on_shell("q_hat")
    h_sq, s = pair_invariants(
        p_hat.spatial, q_hat.spatial, np.float64(p_hat.x0), np.float64(q_hat.x0)
    )
    return math.sqrt(float(h_sq)), float(s)


def moller_velocity(p_hat: FourVector, q_hat: FourVector) -> float:
    """v_M = h√s / (4 p⁰ q⁰)."""
    h, s = invariants_h_s(p_hat, q_hat)
    return h * math.sqrt(s) / (4.0 * p_hat.x0 * q_hat.x0)


def boost_omega(n: FourVector, s: float, omega: npt.ArrayLike) -> FourVector:
    """Unit spacelike Ω^α orthogonal to the total momentum n^α."""
    if not s > 0.0:
        raise DomainError(f"total energy s must be positive, got {s}")
    w = unit_vector(omega)
    root_s = math.sqrt(s)
    n_sp = n.spatial
    n_omega = float(n_sp @ w)
    spatial = w + n_omega / (root_s * (n.x0 + root_s)) * n_sp
    return FourVector(n_omega / root_s, float(spatial[0]), float(spatial[1]), float(spatial[2]))


def post_collision(
    p_hat: FourVector, q_hat: FourVector, omega: npt.ArrayLike
) -> tuple[FourVector, FourVector]:
    """Post-collision pair (p', q') in the orthonormal frame."""
    _, s = invariants_h_s(p_hat, q_hat)
    Omega = boost_omega(p_hat + q_hat, s, omega)
    kick = 2.0 * q_hat.dot(Omega)
    p_prime = FourVector.from_array(p_hat.array + kick * Omega.array)
    q_prime = FourVector.from_array(q_hat.array - kick * Omega.array)
    return p_prime, q_prime


def post_collision_covariant(
    p_star: CovariantMomentum,
    q_star: CovariantMomentum,
    omega: npt.ArrayLike,
    R: float,
) -> tuple[CovariantMomentum, CovariantMomentum]:
    """Covariant post-collision momenta, computed through the orthonormal frame."""
    p_prime, q_prime = post_collision(p_star.orthonormal(R), q_star.orthonormal(R), omega)
    return (
        CovariantMomentum.from_array(R * p_prime.spatial),
        CovariantMomentum.from_array(R * q_prime.spatial),
    )


def covariant_post_collision_direct(
    p_star: CovariantMomentum,
    q_star: CovariantMomentum,
    omega: npt.ArrayLike,
    R: float,
) -> tuple[CovariantMomentum, CovariantMomentum]:
    """Covariant post-collision momenta written directly in p_* variables.

    Independent of the boost path above; both must agree to rounding.
    """
    w = unit_vector(omega)
    p0 = mass_shell_energy(p_star, R)
    q0 = mass_shell_energy(q_star, R)
    p_cov, q_cov = p_star.array, q_star.array
    n_cov = p_cov + q_cov
    n0 = p0 + q0
    _, s_arr = pair_invariants(p_cov / R, q_cov / R)
    root_s = math.sqrt(float(s_arr))
    R2 = R * R

    n_omega = float(n_cov @ w)
    n_q_up = float(n_cov @ q_cov) / R2
    bracket = -q0 * n_omega / root_s + float(q_cov @ w) + n_omega * n_q_up / (
        root_s * (n0 + root_s)
    )
    direction = w + n_omega * n_cov / (R2 * root_s * (n0 + root_s))
    p_prime = p_cov + 2.0 * bracket * direction
    q_prime = n_cov - p_prime
    return CovariantMomentum.from_array(p_prime), CovariantMomentum.from_array(q_prime)


def scattering_angle(p_hat: FourVector, q_hat: FourVector, Omega: FourVector) -> float:
    """θ ∈ [0, π] from ((p_α − q_α)Ω^α)² = h² sin²(θ/2)."""
    h, _ = invariants_h_s(p_hat, q_hat)
    if h == 0.0:
        raise UndefinedAngleError("scattering angle is undefined for identical momenta")
    ratio = abs((p_hat - q_hat).dot(Omega)) / h
    return 2.0 * math.asin(min(ratio, 1.0))


def involution_defect(p_hat: FourVector, q_hat: FourVector, omega: npt.ArrayLike) -> float:
    """Max-norm distance between (p, q) and the map applied twice with the same ω."""
    p1, q1 = post_collision(p_hat, q_hat, omega)
    p2, q2 = post_collision(p1, q1, omega)
    return float(
        max(
            np.max(np.abs(p2.array - p_hat.array)),
            np.max(np.abs(q2.array - q_hat.array)),
        )
    )


# ═══════════════════════════════════════════════════════════════════════════
# FULL GEOMETRY (debug view)
# ═══════════════════════════════════════════════════════════════════════════


@dataclass(frozen=True)
class CollisionGeometry:
    """A fully resolved binary collision together with its invariant defects."""

    R: float
    p_hat: FourVector
    q_hat: FourVector
    omega: tuple[float, float, float]
    h: float
    s: float
    n: FourVector
    Omega: FourVector
    p_prime: FourVector
    q_prime: FourVector
    p_star_prime: CovariantMomentum
    q_star_prime: CovariantMomentum
    theta: float | None
    defects: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        def vec(v: FourVector) -> list[float]:
            return [v.x0, v.x1, v.x2, v.x3]

        return {
            "R": self.R,
            "p_hat": vec(self.p_hat),
            "q_hat": vec(self.q_hat),
            "omega": list(self.omega),
            "h": self.h,
            "s": self.s,
            "n": vec(self.n),
            "Omega": vec(self.Omega),
            "theta": self.theta,
            "theta_defined": self.theta is not None,
            "p_prime": vec(self.p_prime),
            "q_prime": vec(self.q_prime),
            "p_star_prime": self.p_star_prime.array.tolist(),
            "q_star_prime": self.q_star_prime.array.tolist(),
            "defects": dict(self.defects),
        }


def collision_geometry(
    p_star: CovariantMomentum,
    q_star: CovariantMomentum,
    omega: npt.ArrayLike,
    R: float = 1.0,
) -> CollisionGeometry:
    """Resolve one collision and measure every kinematic invariant."""
    w = unit_vector(omega)
    p_hat = p_star.orthonormal(R)
    q_hat = q_star.orthonormal(R)
    h, s = invariants_h_s(p_hat, q_hat)
    n = p_hat + q_hat
    Omega = boost_omega(n, s, w)
    p_prime, q_prime = post_collision(p_hat, q_hat, w)
    p_star_prime, q_star_prime = post_collision_covariant(p_star, q_star, w, R)
    p_direct, q_direct = covariant_post_collision_direct(p_star, q_star, w, R)
    theta = scattering_angle(p_hat, q_hat, Omega) if h > 0.0 else None

    defects = {
        "s_minus_4_minus_h2": abs(s - 4.0 - h * h),
        "omega_unit": abs(Omega.dot(Omega) - 1.0),
        "omega_orthogonal": abs(n.dot(Omega)),
        "momentum_conservation": float(
            np.max(np.abs(p_prime.array + q_prime.array - n.array))
        ),
        "p_prime_mass_shell": p_prime.mass_shell_defect(),
        "q_prime_mass_shell": q_prime.mass_shell_defect(),
        "covariant_paths": float(
            max(
                np.max(np.abs(p_direct.array - p_star_prime.array)),
                np.max(np.abs(q_direct.array - q_star_prime.array)),
            )
        ),
        "involution": involution_defect(p_hat, q_hat, w),
    }
    return CollisionGeometry(
        R=R,
        p_hat=p_hat,
        q_hat=q_hat,
        omega=(float(w[0]), float(w[1]), float(w[2])),
        h=h,
        s=s,
        n=n,
        Omega=Omega,
        p_prime=p_prime,
        q_prime=q_prime,
        p_star_prime=p_star_prime,
        q_star_prime=q_star_prime,
        theta=theta,
        defects=defects,
    )
