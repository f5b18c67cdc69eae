"""Per-output observables and their CSV time series."""

from __future__ import annotations

import csv
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from types import TracebackType
from typing import IO, Any

from flrw_boltzmann.diagnostics.norms import NormSpec

FIXED_COLUMNS = ("t", "R", "rho", "P", "number_integral")
TRAILING_COLUMNS = ("decay_envelope", "leakage", "continuity_residual")


@dataclass(frozen=True)
class DiagnosticsRecord:
    """Observables at one output time; ``norms`` follows the configured NormSpec order."""

    t: float
    R: float
    rho: float
    P: float
    number_integral: float
    norms: tuple[float, ...] = field(default_factory=tuple)
    decay_envelope: float = 0.0
    leakage: float = 0.0
    continuity_residual: float = math.nan

    def row(self) -> list[float]:
        return [
            self.t,
            self.R,
            self.rho,
            self.P,
            self.number_integral,
            *self.norms,
            self.decay_envelope,
            self.leakage,
            self.continuity_residual,
        ]


def csv_header(norm_specs: Sequence[NormSpec]) -> list[str]:
    return [*FIXED_COLUMNS, *(spec.label for spec in norm_specs), *TRAILING_COLUMNS]


def format_float(value: float) -> str:
    """17 significant digits: enough to round-trip any float64."""
    return f"{value:.17g}"


class RecordWriter:
    """Streams DiagnosticsRecords to CSV, header first, flushing every row."""

    def __init__(self, path: Path, norm_specs: Sequence[NormSpec]) -> None:
        self.path = path
        self.header = csv_header(norm_specs)
        self._handle: IO[str] | None = None
        self._writer: Any = None
        self.rows_written = 0

    def __enter__(self) -> RecordWriter:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._handle = self.path.open("w", newline="", encoding="utf-8")
        self._writer = csv.writer(self._handle, lineterminator="\n")
        self._writer.writerow(self.header)
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        tb: TracebackType | None,
    ) -> None:
        if self._handle is not None:
            self._handle.close()
            self._handle = None

    def write(self, record: DiagnosticsRecord) -> None:
        if self._handle is None:
            raise RuntimeError("RecordWriter used outside its context")
        values = record.row()
        if len(values) != len(self.header):
            raise ValueError(f"record has {len(values)} fields, header has {len(self.header)}")
        self._writer.writerow([format_float(v) for v in values])
        self._handle.flush()
        self.rows_written += 1


def read_records(path: Path) -> list[dict[str, float]]:
    """Parse a diagnostics CSV back into one float dict per row."""
    with path.open(newline="", encoding="utf-8") as handle:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(handle)]
