"""Binary checkpoints of the distribution.

Layout, all little-endian float64:

    extent, n, t, R              header, 4 values
    f[i, j, k]                   n³ values, row-major (k fastest)
"""

from __future__ import annotations

from pathlib import Path
from typing import Final, NamedTuple

import numpy as np

from flrw_boltzmann.collision.grid import DistributionGrid
from flrw_boltzmann.errors import DomainError

DTYPE: Final[str] = "<f8"
HEADER_SIZE: Final[int] = 4


class Checkpoint(NamedTuple):
    f: DistributionGrid
    t: float
    R: float


def write_checkpoint(path: Path, f: DistributionGrid, t: float, R: float) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    header = np.array([f.extent, float(f.n), t, R], dtype=DTYPE)
    body = np.ascontiguousarray(f.values, dtype=DTYPE).ravel(order="C")
    with path.open("wb") as handle:
        handle.write(header.tobytes())
        handle.write(body.tobytes())
    return path


def read_checkpoint(path: Path) -> Checkpoint:
    raw = np.fromfile(path, dtype=DTYPE)
    if raw.size < HEADER_SIZE:
        raise DomainError(f"checkpoint {path} is truncated")
    extent, n_float, t, R = (float(v) for v in raw[:HEADER_SIZE])
    n = int(n_float)
    if n != n_float or raw.size != HEADER_SIZE + n**3:
        raise DomainError(f"checkpoint {path} has {raw.size} values, inconsistent with n={n_float}")
    values = raw[HEADER_SIZE:].astype(np.float64).reshape((n, n, n))
    return Checkpoint(DistributionGrid(extent, n, values), t, R)
