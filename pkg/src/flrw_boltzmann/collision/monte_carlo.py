"""Monte Carlo estimate of the collision integrals, independent of the lattice quadrature."""

from __future__ import annotations

import math
from typing import Final, NamedTuple

import numpy as np
import numpy.typing as npt

from flrw_boltzmann.collision.grid import DistributionGrid
from flrw_boltzmann.errors import DomainError
from flrw_boltzmann.kinematics.collision_map import post_collision_batch
from flrw_boltzmann.kinematics.vectors import random_unit_vectors

MIN_SAMPLES: Final[int] = 1000


class MonteCarloEstimate(NamedTuple):
    gain: float
    loss: float
    stderr_gain: float
    stderr_loss: float


def _mean_and_stderr(samples: np.ndarray) -> tuple[float, float]:
    return float(samples.mean()), float(samples.std(ddof=1) / math.sqrt(samples.size))


def mc_estimate(
    f: DistributionGrid,
    p_star: npt.ArrayLike,
    R: float,
    n_samples: int,
    seed: int,
) -> MonteCarloEstimate:
    """Estimate Q₊(p) and Q₋(p) = f̃(p)·L(p) by uniform sampling.

    q_* is drawn uniformly from the cube (density 1/(2·extent)³) and ω
    uniformly from S² (density 1/4π), so each sample is weighted by
    (2·extent)³ · 4π · R⁻³ / (p⁰q⁰√s).
    """
    if n_samples < MIN_SAMPLES:
        raise DomainError(f"n_samples must be at least {MIN_SAMPLES}, got {n_samples}")
    if not (math.isfinite(R) and R > 0.0):
        raise DomainError(f"scale factor must be positive and finite, got {R}")
    p = np.asarray(p_star, dtype=np.float64).reshape(3)

    rng = np.random.default_rng(seed)
    q = rng.uniform(-f.extent, f.extent, size=(n_samples, 3))
    omega = random_unit_vectors(rng, n_samples)

    batch = post_collision_batch(p[None, :] / R, q / R, omega)
    volume = (2.0 * f.extent) ** 3
    weight = volume * 4.0 * math.pi / (R**3 * batch.p0 * batch.q0 * np.sqrt(batch.s))

    gain_samples = weight * f.interpolate(batch.p_prime * R) * f.interpolate(batch.q_prime * R)
    f_p = float(f.interpolate(p[None, :])[0])
    loss_samples = weight * f_p * f.interpolate(q)

    gain, stderr_gain = _mean_and_stderr(gain_samples)
    loss, stderr_loss = _mean_and_stderr(loss_samples)
    return MonteCarloEstimate(gain, loss, stderr_gain, stderr_loss)
