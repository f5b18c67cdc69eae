"""Distribution function sampled on a uniform lattice in covariant momentum."""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass
from functools import cached_property
from typing import Final, NamedTuple

import numpy as np
import numpy.typing as npt
from scipy.interpolate import RegularGridInterpolator

from flrw_boltzmann.errors import DomainError
from flrw_boltzmann.kinematics.vectors import FloatArray

# boundary shell must sit below this fraction of max f
CUTOFF_TOL: Final[float] = 1e-12

# |lower| and |upper| cell coordinates closer than this (in spacings) count as a tie
TIE_TOL: Final[float] = 1e-9

_CORNERS: Final = np.array([(a, b, c) for a in (0, 1) for b in (0, 1) for c in (0, 1)])


class CellStencil(NamedTuple):
    """The 8 corner nodes of the lattice cell holding each point.

    ``weights`` are the trilinear weights; ``inner`` puts all weight on the
    corner nearest the origin (split evenly on ties), which is the
    lowest-energy corner of the cell.
    """

    nodes: npt.NDArray[np.intp]
    weights: FloatArray
    inner: FloatArray
    inside: npt.NDArray[np.bool_]


@dataclass(frozen=True, eq=False)
class DistributionGrid:
    """f(p_*) on the lattice linspace(−extent, extent, n)³.

    ``values`` is stored as a read-only float64 copy indexed [i, j, k] along
    (p_1, p_2, p_3). Off-lattice values come from trilinear interpolation
    with zero extension outside the cube.
    """

    extent: float
    n: int
    values: FloatArray

    def __post_init__(self) -> None:
        if not (math.isfinite(self.extent) and self.extent > 0.0):
            raise DomainError(f"grid extent must be positive and finite, got {self.extent}")
        if self.n < 2:
            raise DomainError(f"grid needs at least 2 points per axis, got {self.n}")
        values = np.array(self.values, dtype=np.float64)
        if values.shape != (self.n, self.n, self.n):
            raise DomainError(f"grid values must have shape {(self.n,) * 3}, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DomainError("grid values must be finite")
        if np.any(values < 0.0):
            raise DomainError(f"distribution must be nonnegative, min={float(values.min())}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, extent: float, n: int) -> DistributionGrid:
        return cls(extent, n, np.zeros((n, n, n)))

    @classmethod
    def from_function(
        cls, extent: float, n: int, func: Callable[[FloatArray], npt.ArrayLike]
    ) -> DistributionGrid:
        """Sample ``func`` on the lattice; it receives an (n, n, n, 3) array of p_*."""
        lattice = cls.zeros(extent, n)
        return lattice.with_values(np.asarray(func(lattice.momenta_cube), dtype=np.float64))

    def with_values(self, values: npt.ArrayLike) -> DistributionGrid:
        """Same lattice, new values."""
        return DistributionGrid(self.extent, self.n, np.asarray(values, dtype=np.float64))

    # ─── Lattice geometry ───────────────────────────────────────────────

    @property
    def spacing(self) -> float:
        return 2.0 * self.extent / (self.n - 1)

    @property
    def cell_volume(self) -> float:
        return self.spacing**3

    @cached_property
    def axis(self) -> FloatArray:
        return np.linspace(-self.extent, self.extent, self.n)

    @cached_property
    def momenta_cube(self) -> FloatArray:
        """(n, n, n, 3) covariant momenta at the lattice points."""
        mesh = np.meshgrid(self.axis, self.axis, self.axis, indexing="ij")
        return np.stack(mesh, axis=-1)

    @cached_property
    def momenta(self) -> FloatArray:
        """(n³, 3) lattice momenta in row-major order, matching ``values.ravel()``."""
        return self.momenta_cube.reshape(-1, 3)

    @cached_property
    def norm_sq(self) -> FloatArray:
        """|p_*|² on the lattice, shape (n, n, n)."""
        return np.einsum("...i,...i->...", self.momenta_cube, self.momenta_cube)

    def momentum_at(self, index: tuple[int, int, int]) -> FloatArray:
        i, j, k = index
        for value in index:
            if not 0 <= value < self.n:
                raise DomainError(f"grid index {index} outside 0..{self.n - 1}")
        return np.array([self.axis[i], self.axis[j], self.axis[k]])

    def energies(self, R: float) -> FloatArray:
        """p⁰ = sqrt(1 + R⁻²|p_*|²) on the lattice."""
        if not R > 0.0:
            raise DomainError(f"scale factor must be positive, got {R}")
        return np.sqrt(1.0 + self.norm_sq / (R * R))

    # ─── Values ─────────────────────────────────────────────────────────

    @cached_property
    def _interpolator(self) -> RegularGridInterpolator:
        return RegularGridInterpolator(
            (self.axis, self.axis, self.axis),
            self.values,
            method="linear",
            bounds_error=False,
            fill_value=0.0,
        )

    def interpolate(self, points: npt.ArrayLike) -> FloatArray:
        """Trilinear f̃ at arbitrary p_* (shape (..., 3)); zero outside the cube."""
        pts = np.asarray(points, dtype=np.float64)
        flat = pts.reshape(-1, 3)
        out = np.asarray(self._interpolator(flat), dtype=np.float64)
        return out.reshape(pts.shape[:-1])

    def contains(self, points: npt.ArrayLike) -> npt.NDArray[np.bool_]:
        """True where p_* lies inside the closed cube."""
        pts = np.asarray(points, dtype=np.float64)
        return np.asarray(np.all(np.abs(pts) <= self.extent, axis=-1))

    def cell_stencil(self, points: npt.ArrayLike) -> CellStencil:
        """Corner nodes and weights for points of shape (..., 3).

        Points outside the cube are snapped to the nearest boundary cell and
        flagged through ``inside``; their weights are not meaningful.
        """
        pts = np.asarray(points, dtype=np.float64)
        u = (pts + self.extent) / self.spacing
        base = np.clip(np.floor(u), 0, self.n - 2).astype(np.intp)
        t = np.clip(u - base, 0.0, 1.0)

        gap = np.abs(self.axis[base]) - np.abs(self.axis[base + 1])
        tie = np.abs(gap) <= TIE_TOL * self.spacing
        lower = np.where(tie, 0.5, np.where(gap < 0.0, 1.0, 0.0))

        axes = np.arange(3)
        linear = np.stack([1.0 - t, t], axis=-1)[..., axes, _CORNERS]
        inner = np.stack([lower, 1.0 - lower], axis=-1)[..., axes, _CORNERS]
        corner = base[..., None, :] + _CORNERS
        nodes = (corner[..., 0] * self.n + corner[..., 1]) * self.n + corner[..., 2]
        return CellStencil(
            nodes=nodes,
            weights=np.prod(linear, axis=-1),
            inner=np.prod(inner, axis=-1),
            inside=self.contains(pts),
        )

    @property
    def max_value(self) -> float:
        return float(self.values.max())

    @property
    def is_zero(self) -> bool:
        return not np.any(self.values)

    def boundary_max(self) -> float:
        """max f over the outer shell of lattice points."""
        v = self.values
        faces = (v[0], v[-1], v[:, 0], v[:, -1], v[:, :, 0], v[:, :, -1])
        return float(max(face.max() for face in faces))

    def boundary_ratio(self) -> float:
        """Boundary max relative to the global max (0 for f ≡ 0)."""
        peak = self.max_value
        return 0.0 if peak == 0.0 else self.boundary_max() / peak

    def cutoff_adequate(self, tol: float = CUTOFF_TOL) -> bool:
        return self.boundary_ratio() <= tol
