"""Gain and loss integrals of the Boltzmann collision operator for Israel particles.

With σ₀ ≡ 1 the integrand weight v_M·σ reduces to 1/(p⁰q⁰√s), so

    Q₊(p) = R⁻³ Σ_q Σ_j w_j Δ³ f̃(p_*') f̃(q_*') / (p⁰q⁰√s)
    Q₋(p) = f(p) · L(p),   L(p) = R⁻³ Σ_q Σ_j w_j Δ³ f(q_*) / (p⁰q⁰√s)

``gain`` and ``loss_rate`` evaluate these at one lattice point, with f̃ the
trilinear interpolant (zero outside the cube).

The full-lattice operator uses the transposed form. Every lattice pair
(p, q) and sphere node ω_j removes f(p)f(q)·w_j/(p⁰q⁰√s) from p and q and
deposits it at p_*' and q_*' with the corner weights of the enclosing
cells. Deposits are tilted toward the lowest-energy corner just enough to
return the pre-collision energy; when the tilt cannot do it the event
deposits back on p and q. Number and energy then balance up to what leaves
the cube.
"""

from __future__ import annotations

import math
import os
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Final, NamedTuple, TypeVar

import numpy as np
import numpy.typing as npt
from scipy import sparse

from flrw_boltzmann.collision.grid import DistributionGrid
from flrw_boltzmann.collision.quadrature import SphereQuadrature
from flrw_boltzmann.errors import ConfigError, DomainError
from flrw_boltzmann.kinematics.collision_map import pair_invariants, post_collision_batch
from flrw_boltzmann.kinematics.vectors import FloatArray, energies
from flrw_boltzmann.logs import get_logger

logger = get_logger(__name__)

T = TypeVar("T")
IndexArray = npt.NDArray[np.intp]

# Upper bound on (pair, ω) events materialised at once; fixes the chunking
TRIPLE_BUDGET: Final[int] = 1 << 16

# Pairs with f(p)f(q) below this fraction of max(f)² take no part in the full pass
PAIR_TOL: Final[float] = 1e-6

# Energy excess of a deposit, relative to the pair energy, left uncorrected
ENERGY_TOL: Final[float] = 1e-14


def default_threads() -> int:
    """Worker count from $THREADS, else the hardware parallelism."""
    raw = os.environ.get("THREADS")
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"THREADS must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError(f"THREADS must be a positive integer, got {value}")
    return value


def kernel_weight(p0: float, q0: float, s: float) -> float:
    """1/(p⁰q⁰√s), equal to v_M · 4/(h s) with the h factors cancelled."""
    return 1.0 / (p0 * q0 * math.sqrt(s))


def _check_R(R: float) -> None:
    if not (math.isfinite(R) and R > 0.0):
        raise DomainError(f"scale factor must be positive and finite, got {R}")


# ═══════════════════════════════════════════════════════════════════════════
# POINTWISE QUADRATURE
# ═══════════════════════════════════════════════════════════════════════════


def _pair_kernel(p_hat: FloatArray, q_hat: FloatArray) -> FloatArray:
    p0 = energies(p_hat)
    q0 = energies(q_hat)
    _, s = pair_invariants(p_hat, q_hat, p0, q0)
    return np.asarray(1.0 / (p0 * q0 * np.sqrt(s)))


def _gain_at(f: DistributionGrid, p: FloatArray, R: float, quad: SphereQuadrature) -> float:
    occupied = f.values.ravel() > 0.0
    if not np.any(occupied):
        return 0.0
    p_hat = p[None, None, :] / R
    q_hat = f.momenta / R
    omega = quad.nodes[None, :, :]
    block = max(1, TRIPLE_BUDGET // quad.size)

    total = 0.0
    for start in range(0, q_hat.shape[0], block):
        batch = post_collision_batch(p_hat, q_hat[start : start + block, None], omega)
        kernel = 1.0 / (batch.p0 * batch.q0 * np.sqrt(batch.s))
        integrand = kernel * f.interpolate(batch.p_prime * R) * f.interpolate(batch.q_prime * R)
        total += float(np.einsum("ak,k->", integrand, quad.weights))
    return total * f.cell_volume / R**3


def gain(
    f: DistributionGrid,
    p_index: tuple[int, int, int],
    R: float,
    quad: SphereQuadrature,
) -> float:
    """Q₊ at one lattice point, by direct quadrature over the whole lattice."""
    _check_R(R)
    return _gain_at(f, f.momentum_at(p_index), R, quad)


def loss_rate(
    f: DistributionGrid,
    p_index: tuple[int, int, int],
    R: float,
    quad: SphereQuadrature,
) -> float:
    """L(p) at one lattice point, so that Q₋ = f(p)·L(p)."""
    _check_R(R)
    flat = f.values.ravel()
    occupied = flat > 0.0
    if not np.any(occupied):
        return 0.0
    p_hat = f.momentum_at(p_index)[None, :] / R
    kernel = _pair_kernel(p_hat, f.momenta[occupied] / R)
    return float(quad.total_weight * f.cell_volume / R**3 * (kernel @ flat[occupied]))


# ═══════════════════════════════════════════════════════════════════════════
# DEPOSIT STENCILS
# ═══════════════════════════════════════════════════════════════════════════


class _DepositChunk(NamedTuple):
    matrix: sparse.csr_matrix
    leak: FloatArray
    leak_energy: FloatArray
    leaked_events: int
    fallbacks: int


def _deposit_chunk(
    lattice: DistributionGrid,
    energy: FloatArray,
    pair_i: IndexArray,
    pair_k: IndexArray,
    coef: FloatArray,
    R: float,
    quad: SphereQuadrature,
) -> _DepositChunk:
    """Deposit weights of one block of pairs, per unit f(p)f(q)."""
    pairs = pair_i.size
    batch = post_collision_batch(
        lattice.momenta[pair_i, None, :] / R,
        lattice.momenta[pair_k, None, :] / R,
        quad.nodes[None, :, :],
    )
    p_cell = lattice.cell_stencil(batch.p_prime * R)
    q_cell = lattice.cell_stencil(batch.q_prime * R)
    both = p_cell.inside & q_cell.inside

    p_energy = energy[p_cell.nodes]
    q_energy = energy[q_cell.nodes]
    p_linear = np.sum(p_cell.weights * p_energy, axis=-1)
    q_linear = np.sum(q_cell.weights * q_energy, axis=-1)
    slack = (p_linear - np.sum(p_cell.inner * p_energy, axis=-1)) + (
        q_linear - np.sum(q_cell.inner * q_energy, axis=-1)
    )
    before = (energy[pair_i] + energy[pair_k])[:, None]
    excess = p_linear + q_linear - before

    needs_tilt = both & (excess > ENERGY_TOL * before)
    fallback = needs_tilt & (excess >= slack)
    tilt = np.zeros_like(excess)
    tilting = needs_tilt & ~fallback
    tilt[tilting] = excess[tilting] / slack[tilting]

    scale = coef[:, None] * quad.weights[None, :]
    p_keep = scale * (p_cell.inside & ~fallback)
    q_keep = scale * (q_cell.inside & ~fallback)
    shift = tilt[..., None]
    p_weights = p_keep[..., None] * (p_cell.weights + shift * (p_cell.inner - p_cell.weights))
    q_weights = q_keep[..., None] * (q_cell.weights + shift * (q_cell.inner - q_cell.weights))
    back = scale * fallback

    column = np.broadcast_to(np.arange(pairs)[:, None], back.shape)
    rows = np.concatenate(
        [
            p_cell.nodes.ravel(),
            q_cell.nodes.ravel(),
            np.broadcast_to(pair_i[:, None], back.shape).ravel(),
            np.broadcast_to(pair_k[:, None], back.shape).ravel(),
        ]
    )
    columns = np.concatenate(
        [
            np.repeat(column.ravel(), 8),
            np.repeat(column.ravel(), 8),
            column.ravel(),
            column.ravel(),
        ]
    )
    data = np.concatenate([p_weights.ravel(), q_weights.ravel(), back.ravel(), back.ravel()])
    nonzero = data != 0.0
    matrix = sparse.csr_matrix(
        (data[nonzero], (rows[nonzero], columns[nonzero])), shape=(lattice.n**3, pairs)
    )

    p_out = ~p_cell.inside
    q_out = ~q_cell.inside
    return _DepositChunk(
        matrix=matrix,
        leak=np.sum(scale * (p_out.astype(np.float64) + q_out), axis=1),
        leak_energy=np.sum(scale * (p_out * batch.p0_prime + q_out * batch.q0_prime), axis=1),
        leaked_events=int(np.count_nonzero(~both)),
        fallbacks=int(np.count_nonzero(fallback)),
    )


def _pairs(f: DistributionGrid) -> tuple[IndexArray, IndexArray, IndexArray]:
    """Off-diagonal pairs i < k and diagonal cells with f_i f_k ≥ PAIR_TOL·max(f)²."""
    empty = np.zeros(0, dtype=np.intp)
    if f.is_zero:
        return empty, empty, empty
    flat = f.values.ravel()
    peak = f.max_value
    floor = PAIR_TOL * peak * peak
    candidates = np.flatnonzero(flat >= PAIR_TOL * peak)
    values = flat[candidates]
    a, b = np.triu_indices(candidates.size, k=1)
    keep = values[a] * values[b] >= floor
    diagonal = candidates[values * values >= floor]
    return candidates[a[keep]], candidates[b[keep]], diagonal


@dataclass(frozen=True, eq=False)
class CollisionStencil:
    """Pairs and post-collision deposits of the full-lattice operator at one R.

    The geometry depends on R and on which pairs are occupied, not on the
    values of f, so one stencil serves every Picard sweep of a step.
    ``pair_coef`` and ``diag_coef`` hold Δ³R⁻³/(p⁰q⁰√s); ``deposits[c]``
    maps the pair products of ``chunks[c]`` to gain per unit f(p)f(q).
    """

    n: int
    R: float
    cell_volume: float
    sphere_weight: float
    pair_i: IndexArray
    pair_k: IndexArray
    pair_coef: FloatArray
    diag_index: IndexArray
    diag_coef: FloatArray
    chunks: tuple[slice, ...]
    deposits: tuple[sparse.csr_matrix, ...]
    leak: FloatArray
    leak_energy: FloatArray
    leaked_events: int
    total_events: int
    fallbacks: int

    @property
    def pair_count(self) -> int:
        return int(self.pair_i.size)

    def apply(self, f: DistributionGrid) -> CollisionEvaluation:
        """Gain and loss-rate fields for values on the stencil's lattice."""
        if f.n != self.n:
            raise DomainError(f"stencil built for n={self.n}, grid has n={f.n}")
        cells = self.n**3
        flat = f.values.ravel()
        product = flat[self.pair_i] * flat[self.pair_k]

        gain_field = np.zeros(cells)
        for chunk, matrix in zip(self.chunks, self.deposits, strict=True):
            gain_field += matrix @ product[chunk]
        diag_values = flat[self.diag_index]
        gain_field[self.diag_index] += self.sphere_weight * self.diag_coef * diag_values**2

        loss = np.bincount(self.pair_i, self.pair_coef * flat[self.pair_k], minlength=cells)
        loss += np.bincount(self.pair_k, self.pair_coef * flat[self.pair_i], minlength=cells)
        loss[self.diag_index] += self.diag_coef * diag_values
        loss *= self.sphere_weight

        dv = self.cell_volume
        return CollisionEvaluation(
            gain=gain_field.reshape(f.values.shape),
            loss_rate=loss.reshape(f.values.shape),
            leaked_pairs=self.leaked_events,
            total_pairs=self.total_events,
            leaked_rate=float(dv * np.dot(self.leak, product)),
            loss_total=float(dv * np.dot(flat, loss)),
            leaked_energy=float(dv * np.dot(self.leak_energy, product)),
        )


# ═══════════════════════════════════════════════════════════════════════════
# FULL-GRID PASS
# ═══════════════════════════════════════════════════════════════════════════


@dataclass(frozen=True, eq=False)
class CollisionEvaluation:
    """Gain and loss-rate fields of one operator pass, with leakage bookkeeping.

    ``leaked_rate`` and ``leaked_energy`` are the number and energy that
    collisions send outside the cube, in the units of Σ Δ³ f·L.
    """

    gain: FloatArray
    loss_rate: FloatArray
    leaked_pairs: int
    total_pairs: int
    leaked_rate: float
    loss_total: float
    leaked_energy: float = 0.0

    @property
    def leakage(self) -> float:
        return 0.0 if self.loss_total == 0.0 else self.leaked_rate / self.loss_total

    @property
    def leaked_fraction(self) -> float:
        return 0.0 if self.total_pairs == 0 else self.leaked_pairs / self.total_pairs

    def net(self, f: DistributionGrid) -> FloatArray:
        """Q(f, f) = Q₊ − f·L on the lattice."""
        return np.asarray(self.gain - f.values * self.loss_rate)


class CollisionOperator:
    """Builds deposit stencils over the lattice, in parallel over fixed pair chunks."""

    def __init__(self, quad: SphereQuadrature, threads: int | None = None) -> None:
        self.quad = quad
        self.threads = default_threads() if threads is None else threads
        if self.threads < 1:
            raise ConfigError(f"thread count must be positive, got {self.threads}")

    @property
    def pairs_per_chunk(self) -> int:
        return max(1, TRIPLE_BUDGET // self.quad.size)

    def _map(self, fn: Callable[[slice], T], chunks: list[slice]) -> list[T]:
        if self.threads == 1 or len(chunks) <= 1:
            return [fn(chunk) for chunk in chunks]
        with ThreadPoolExecutor(max_workers=self.threads) as executor:
            return list(executor.map(fn, chunks))

    def stencil(self, f: DistributionGrid, R: float) -> CollisionStencil:
        """Deposit stencil for the pairs f occupies, at scale factor R."""
        _check_R(R)
        pair_i, pair_k, diag = _pairs(f)
        lattice = f.momenta / R
        pair_coef = f.cell_volume / R**3 * _pair_kernel(lattice[pair_i], lattice[pair_k])
        diag_coef = f.cell_volume / R**3 * _pair_kernel(lattice[diag], lattice[diag])

        size = self.pairs_per_chunk
        chunks = [slice(i, min(i + size, pair_i.size)) for i in range(0, pair_i.size, size)]
        energy = f.energies(R).ravel()
        parts = self._map(
            lambda c: _deposit_chunk(
                f, energy, pair_i[c], pair_k[c], pair_coef[c], R, self.quad
            ),
            chunks,
        )

        stencil = CollisionStencil(
            n=f.n,
            R=R,
            cell_volume=f.cell_volume,
            sphere_weight=self.quad.total_weight,
            pair_i=pair_i,
            pair_k=pair_k,
            pair_coef=pair_coef,
            diag_index=diag,
            diag_coef=diag_coef,
            chunks=tuple(chunks),
            deposits=tuple(part.matrix for part in parts),
            leak=np.concatenate([part.leak for part in parts]) if parts else np.zeros(0),
            leak_energy=(
                np.concatenate([part.leak_energy for part in parts]) if parts else np.zeros(0)
            ),
            leaked_events=sum(part.leaked_events for part in parts),
            total_events=pair_i.size * self.quad.size,
            fallbacks=sum(part.fallbacks for part in parts),
        )
        logger.debug(
            "stencil R=%.4g: %d pairs, %d events outside, %d deposited back",
            R,
            stencil.pair_count,
            stencil.leaked_events,
            stencil.fallbacks,
        )
        return stencil

    def evaluate(
        self, f: DistributionGrid, R: float, stencil: CollisionStencil | None = None
    ) -> CollisionEvaluation:
        """Gain and loss-rate arrays for the whole lattice.

        Args:
            f: Distribution on the lattice
            R: Scale factor
            stencil: Geometry from ``stencil`` at the same R, reused across sweeps

        Returns:
            The evaluation, with leakage bookkeeping
        """
        _check_R(R)
        if stencil is None:
            stencil = self.stencil(f, R)
        elif stencil.R != R:
            raise DomainError(f"stencil built at R={stencil.R}, evaluated at R={R}")
        evaluation = stencil.apply(f)
        logger.debug(
            "collision pass R=%.4g: leakage=%.3e, events outside=%d/%d",
            R,
            evaluation.leakage,
            evaluation.leaked_pairs,
            evaluation.total_pairs,
        )
        return evaluation


# ═══════════════════════════════════════════════════════════════════════════
# CONSERVATION MOMENTS
# ═══════════════════════════════════════════════════════════════════════════


@dataclass(frozen=True)
class CollisionMoments:
    """Number and energy moments of Q against the matching loss moments."""

    number_net: float
    number_loss: float
    energy_net: float
    energy_loss: float

    @property
    def number_relative(self) -> float:
        return 0.0 if self.number_loss == 0.0 else abs(self.number_net) / self.number_loss

    @property
    def energy_relative(self) -> float:
        return 0.0 if self.energy_loss == 0.0 else abs(self.energy_net) / self.energy_loss


def collision_moments(
    f: DistributionGrid,
    R: float,
    operator: CollisionOperator,
    evaluation: CollisionEvaluation | None = None,
) -> CollisionMoments:
    """Σ Δ³ (Q₊ − fL) and Σ Δ³ p⁰ (Q₊ − fL), each with its loss-side scale."""
    ev = operator.evaluate(f, R) if evaluation is None else evaluation
    dv = f.cell_volume
    p0 = f.energies(R)
    loss = f.values * ev.loss_rate
    net = ev.gain - loss
    return CollisionMoments(
        number_net=float(np.sum(net) * dv),
        number_loss=float(np.sum(loss) * dv),
        energy_net=float(np.sum(p0 * net) * dv),
        energy_loss=float(np.sum(p0 * loss) * dv),
    )
