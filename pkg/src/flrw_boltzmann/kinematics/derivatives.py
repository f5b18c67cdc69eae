"""Derivative audits for the collision map: analytic gradients and FD Jacobians."""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass
from typing import Final

import numpy as np
import numpy.typing as npt

from flrw_boltzmann.errors import DomainError
from flrw_boltzmann.kinematics.collision_map import covariant_batch, mass_shell_energy
from flrw_boltzmann.kinematics.vectors import CovariantMomentum, FloatArray, unit_vector

# FD step relative to max(1, |p_*|)
RELATIVE_STEP: Final[float] = 1e-5

# Richardson discrepancy above which an estimate is flagged unreliable
RICHARDSON_TOL: Final[float] = 1e-6


def deriv_inv_p0(p_star: CovariantMomentum, R: float) -> FloatArray:
    """Analytic gradient ∂(1/p⁰)/∂p_a = −R⁻² p_a (p⁰)⁻³."""
    p0 = mass_shell_energy(p_star, R)
    return np.asarray(-p_star.array / (R * R * p0**3))


def central_difference_jacobian(
    func: Callable[[FloatArray], FloatArray],
    x: FloatArray,
    step: float | FloatArray,
) -> FloatArray:
    """Two-sided finite-difference Jacobian J[i, j] = ∂func_i/∂x_j.

    ``step`` may be a scalar or one step per coordinate.
    """
    r0 = np.asarray(func(x))
    steps = np.broadcast_to(np.asarray(step, dtype=np.float64), x.shape)
    jac = np.zeros((r0.size, x.size))
    for j in range(x.size):
        x_plus = x.copy()
        x_minus = x.copy()
        x_plus[j] += steps[j]
        x_minus[j] -= steps[j]
        diff = np.asarray(func(x_plus)) - np.asarray(func(x_minus))
        jac[:, j] = diff.ravel() / (2.0 * steps[j])
    return jac


def default_step(p_star: CovariantMomentum) -> float:
    return RELATIVE_STEP * max(1.0, p_star.norm)


@dataclass(frozen=True)
class JacobianEstimate:
    """Richardson-extrapolated FD Jacobian with its reliability flag."""

    matrix: FloatArray
    step: float
    discrepancy: float
    reliable: bool

    @property
    def spectral_norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))


def postcollision_jacobian(
    p_star: CovariantMomentum,
    q_star: CovariantMomentum,
    omega: npt.ArrayLike,
    R: float,
    step: float | None = None,
) -> JacobianEstimate:
    """FD approximation of ∂p_*'/∂p_* at fixed q_*, ω and R.

    Two central differences (h and h/2) are combined by Richardson
    extrapolation; their relative disagreement flags unreliable steps.
    """
    w = unit_vector(omega)
    h = default_step(p_star) if step is None else step
    if not h > 0.0:
        raise DomainError(f"FD step must be positive, got {h}")
    q = q_star.array

    def p_prime(x: FloatArray) -> FloatArray:
        return covariant_batch(x, q, w, R)[0]

    x0 = p_star.array
    coarse = central_difference_jacobian(p_prime, x0, h)
    fine = central_difference_jacobian(p_prime, x0, h / 2.0)
    scale = max(1.0, float(np.max(np.abs(fine))))
    discrepancy = float(np.max(np.abs(coarse - fine))) / scale
    return JacobianEstimate(
        matrix=(4.0 * fine - coarse) / 3.0,
        step=h,
        discrepancy=discrepancy,
        reliable=discrepancy <= RICHARDSON_TOL,
    )


def jacobian_determinant_6x6(
    p_star: CovariantMomentum,
    q_star: CovariantMomentum,
    omega: npt.ArrayLike,
    R: float,
    step: float | None = None,
) -> tuple[float, float]:
    """FD determinant of (p_*, q_*) ↦ (p_*', q_*') and the expected p'⁰q'⁰/(p⁰q⁰)."""
    w = unit_vector(omega)
    if step is None:
        h: float | FloatArray = np.array(
            [default_step(p_star)] * 3 + [default_step(q_star)] * 3, dtype=np.float64
        )
    else:
        h = step

    def pair_map(x: FloatArray) -> FloatArray:
        p_new, q_new = covariant_batch(x[:3], x[3:], w, R)
        return np.concatenate([p_new, q_new])

    x0 = np.concatenate([p_star.array, q_star.array])
    det = float(np.linalg.det(central_difference_jacobian(pair_map, x0, h)))

    p_new, q_new = covariant_batch(p_star.array, q_star.array, w, R)
    p0 = mass_shell_energy(p_star, R)
    q0 = mass_shell_energy(q_star, R)
    p0_new = math.sqrt(1.0 + float(p_new @ p_new) / (R * R))
    q0_new = math.sqrt(1.0 + float(q_new @ q_new) / (R * R))
    return det, p0_new * q0_new / (p0 * q0)
