"""Run driver: initial data → Picard steps → diagnostics CSV and checkpoints."""

from __future__ import annotations

import math
import sqlite3
import time
import uuid
from collections import deque
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Final

from flrw_boltzmann.collision.operator import CollisionOperator
from flrw_boltzmann.collision.quadrature import SphereQuadrature
from flrw_boltzmann.config import SimConfig
from flrw_boltzmann.diagnostics.moments import energy_density, number_integral
from flrw_boltzmann.diagnostics.norms import decay_envelope, weighted_norm
from flrw_boltzmann.diagnostics.records import DiagnosticsRecord, RecordWriter
from flrw_boltzmann.errors import StepFailure
from flrw_boltzmann.logs import get_logger
from flrw_boltzmann.safety.guardrails import Guardrails
from flrw_boltzmann.solver.checkpoint import write_checkpoint
from flrw_boltzmann.solver.initial_data import initial_data
from flrw_boltzmann.solver.picard import SimState, picard_step
from flrw_boltzmann.spacetime.models import ScaleFactorModel
from flrw_boltzmann.storage.database import Database

logger = get_logger(__name__)

CSV_NAME: Final[str] = "diagnostics.csv"
FINAL_CHECKPOINT: Final[str] = "final.chk"
FAILURE_CHECKPOINT: Final[str] = "last_valid.chk"


@dataclass
class RunResult:
    records: list[DiagnosticsRecord]
    final_state: SimState
    output_dir: Path
    csv_path: Path
    checkpoint_path: Path
    wall_seconds: float = 0.0
    warnings: list[str] = field(default_factory=list)


class _ContinuityTracker:
    """Centred-difference residual of ρ̇ + 3H(ρ + P) over the last three steps.

    The value refers to the middle sample, so it lags the newest step by one.
    """

    def __init__(self, lambda_: float) -> None:
        self.lambda_ = lambda_
        self.samples: deque[tuple[float, float, float, float]] = deque(maxlen=3)
        self.latest = math.nan

    def push(self, state: SimState) -> float:
        bg = state.spacetime
        H = (bg.R_dot / bg.R) if bg.R_dot is not None else math.nan
        self.samples.append((state.t, bg.rho, bg.P, H))
        if len(self.samples) == 3:
            (t0, rho0, _, _), (_, rho1, P1, H1), (t2, rho2, _, _) = self.samples
            rho_dot = (rho2 - rho0) / (t2 - t0)
            scale = max(abs(rho_dot), self.lambda_ * H1)
            self.latest = abs(rho_dot + 3.0 * H1 * (rho1 + P1)) / scale
        return self.latest


def _record(state: SimState, config: SimConfig, continuity: float) -> DiagnosticsRecord:
    f, R = state.f, state.R
    envelope_k = config.norms[0].k if config.norms else 0
    return DiagnosticsRecord(
        t=state.t,
        R=R,
        rho=state.spacetime.rho,
        P=state.spacetime.P,
        number_integral=number_integral(f),
        norms=tuple(weighted_norm(f, spec, R) for spec in config.norms),
        decay_envelope=decay_envelope(f, R, envelope_k),
        leakage=state.leakage,
        continuity_residual=continuity,
    )


def _ledger_call(ledger: Database | None, action: Callable[[Database], object]) -> None:
    if ledger is None:
        return
    try:
        action(ledger)
    except (sqlite3.Error, OSError) as exc:
        logger.warning("run ledger unavailable: %s", exc)


def initial_state(config: SimConfig) -> tuple[SimState, ScaleFactorModel, float]:
    """(state at t = 0, background model, ρ(0))."""
    f0 = initial_data(
        config.initial.kind,
        config.initial.epsilon,
        config.grid.extent,
        config.grid.n,
        config.initial.params,
    )
    rho0 = energy_density(f0, 1.0)
    model = ScaleFactorModel.from_name(config.scale_factor, config.lambda_, rho0)
    return SimState(t=0.0, f=f0, spacetime=model.start(f0)), model, rho0


def run(
    config: SimConfig,
    operator: CollisionOperator | None = None,
    ledger: Database | None = None,
    on_record: Callable[[DiagnosticsRecord], None] | None = None,
) -> RunResult:
    """Advance to T, writing a record every output interval and a final checkpoint.

    A failed step writes ``last_valid.chk`` for the last accepted state and
    re-raises StepFailure.
    """
    started = time.perf_counter()
    output_dir = Path(config.output.path)
    csv_path = output_dir / CSV_NAME
    if operator is None:
        quad = SphereQuadrature.product(config.sphere.polar_order, config.sphere.azimuth_order)
        operator = CollisionOperator(quad)

    state, model, rho0 = initial_state(config)
    guardrails = Guardrails(config.lambda_, rho0, residual_tolerance=config.picard.tolerance)
    continuity = _ContinuityTracker(config.lambda_)
    continuity.push(state)

    n_steps = max(1, math.ceil(config.T / config.dt - 1e-9))
    every = max(1, round(config.output.interval / config.dt))
    run_id = uuid.uuid4().hex[:12]
    _ledger_call(ledger, lambda db: db.ensure_tables())
    _ledger_call(
        ledger, lambda db: db.record_run_start(run_id, config.to_dict(), str(output_dir))
    )
    logger.info(
        "run %s: %d steps of dt=%g, n=%d, sphere %dx%d, %d threads",
        run_id,
        n_steps,
        config.dt,
        config.grid.n,
        config.sphere.polar_order,
        config.sphere.azimuth_order,
        operator.threads,
    )

    records: list[DiagnosticsRecord] = []
    warned: set[str] = set()
    try:
        with RecordWriter(csv_path, config.norms) as writer:

            def emit(current: SimState) -> None:
                record = _record(current, config, continuity.latest)
                records.append(record)
                writer.write(record)
                if on_record is not None:
                    on_record(record)

            emit(state)
            for step in range(1, n_steps + 1):
                previous = state
                state = picard_step(
                    state,
                    config.dt,
                    config.picard.iters,
                    model=model,
                    operator=operator,
                    max_sweeps=config.picard.max_sweeps,
                    tolerance=config.picard.tolerance,
                    max_halvings=config.picard.max_halvings,
                )
                for check in guardrails.check_all(
                    state.f, state.spacetime, state.residual, state.leakage
                ):
                    if check.action == "abort":
                        raise StepFailure(
                            check.violation or "guardrail abort", last_state=previous
                        )
                    if check.action == "warn" and check.violation:
                        kind = check.violation.split(":")[0]
                        if kind not in warned:
                            warned.add(kind)
                            logger.warning("t=%.4g: %s", state.t, check.violation)
                continuity.push(state)
                if step % every == 0 or step == n_steps:
                    emit(state)
    except StepFailure as exc:
        last = exc.last_state if exc.last_state is not None else state
        dump = write_checkpoint(output_dir / FAILURE_CHECKPOINT, last.f, last.t, last.R)
        logger.error("step failure at t=%.6g: %s (state dumped to %s)", last.t, exc, dump)
        elapsed = time.perf_counter() - started
        _ledger_call(
            ledger,
            lambda db: db.record_run_end(
                run_id, "failed", last.t, last.R, last.step_count, elapsed
            ),
        )
        raise

    checkpoint = write_checkpoint(output_dir / FINAL_CHECKPOINT, state.f, state.t, state.R)
    elapsed = time.perf_counter() - started
    _ledger_call(
        ledger,
        lambda db: db.record_run_end(run_id, "ok", state.t, state.R, state.step_count, elapsed),
    )
    logger.info("run %s finished: t=%.4g R=%.6g in %.1fs", run_id, state.t, state.R, elapsed)
    return RunResult(
        records=records,
        final_state=state,
        output_dir=output_dir,
        csv_path=csv_path,
        checkpoint_path=checkpoint,
        wall_seconds=elapsed,
        warnings=sorted(warned),
    )
