"""Initial distributions: smooth, nonnegative and rapidly decaying in |p_*|."""

from __future__ import annotations

from collections.abc import Callable, Mapping
from typing import Final

import numpy as np

from flrw_boltzmann.collision.grid import DistributionGrid
from flrw_boltzmann.errors import ConfigError, DomainError
from flrw_boltzmann.kinematics.vectors import FloatArray

# kind -> parameter defaults
DEFAULT_PARAMS: Final[dict[str, dict[str, float]]] = {
    "gaussian": {"width": 1.0},
    "shell": {"r0": 2.0, "w": 0.5},
}


def _profile(kind: str, params: Mapping[str, float]) -> Callable[[FloatArray], FloatArray]:
    if kind == "gaussian":
        width = params["width"]
        return lambda r: np.asarray(np.exp(-((r / width) ** 2)))
    r0, w = params["r0"], params["w"]
    return lambda r: np.asarray(np.exp(-(((r - r0) / w) ** 2)))


def resolve_params(kind: str, params: Mapping[str, float] | None = None) -> dict[str, float]:
    """Defaults for ``kind`` overridden by ``params``; unknown kinds or keys are config errors."""
    if kind not in DEFAULT_PARAMS:
        raise ConfigError(
            f"unknown initial data kind {kind!r}; expected one of {', '.join(DEFAULT_PARAMS)}"
        )
    resolved = dict(DEFAULT_PARAMS[kind])
    for key, value in (params or {}).items():
        if key not in resolved:
            raise ConfigError(f"initial data {kind!r} has no parameter {key!r}")
        resolved[key] = float(value)
    if any(value <= 0.0 for key, value in resolved.items() if key in ("width", "w")):
        raise ConfigError(f"initial data widths must be positive, got {resolved}")
    return resolved


def radial_profile(
    kind: str, epsilon: float, params: Mapping[str, float] | None = None
) -> Callable[[float], float]:
    """f(0, ·) as a function of |p_*|, for the radial oracles."""
    shape = _profile(kind, resolve_params(kind, params))
    return lambda r: epsilon * float(shape(np.asarray(r)))


def initial_data(
    kind: str,
    epsilon: float,
    extent: float,
    n: int,
    params: Mapping[str, float] | None = None,
) -> DistributionGrid:
    """gaussian: ε e^{−|p_*|²/width²}; shell: ε e^{−(|p_*|−r0)²/w²}."""
    if not epsilon >= 0.0:
        raise DomainError(f"epsilon must be nonnegative, got {epsilon}")
    shape = _profile(kind, resolve_params(kind, params))
    lattice = DistributionGrid.zeros(extent, n)
    if epsilon == 0.0:
        return lattice
    return lattice.with_values(epsilon * shape(np.sqrt(lattice.norm_sq)))
