"""CLI entry point for flrw-boltzmann."""

from __future__ import annotations

import json
import math
import sqlite3
from pathlib import Path
from typing import TYPE_CHECKING, Any

import click
from rich.console import Console
from rich.table import Table

from flrw_boltzmann import __version__

if TYPE_CHECKING:
    from flrw_boltzmann.config import SimConfig
    from flrw_boltzmann.diagnostics.audits import AuditReport
    from flrw_boltzmann.storage.database import Database

console = Console()
err_console = Console(stderr=True)

EXIT_CONFIG = 1
EXIT_STEP_FAILURE = 2
EXIT_AUDIT_FAILURE = 3


class MalformedArgument(click.BadParameter):
    """Non-numeric input to a numeric option; exits with the config code."""

    exit_code = EXIT_CONFIG


class StrictFloat(click.ParamType):
    name = "float"

    def convert(
        self, value: Any, param: click.Parameter | None, ctx: click.Context | None
    ) -> float:
        try:
            return float(value)
        except (TypeError, ValueError):
            raise MalformedArgument(f"{value!r} is not a number", ctx=ctx, param=param) from None


STRICT_FLOAT = StrictFloat()


@click.group()
@click.version_option(version=__version__, prog_name="flrwb")
@click.option("-v", "--verbose", count=True, help="Log more (-v info, -vv debug)")
def main(verbose: int) -> None:
    """Relativistic Boltzmann solver in an expanding FLRW background."""
    from flrw_boltzmann.logs import set_verbosity

    set_verbosity(verbose)


def _load(config_path: str) -> SimConfig:
    from flrw_boltzmann.config import load_config
    from flrw_boltzmann.errors import ConfigError

    try:
        return load_config(Path(config_path))
    except ConfigError as exc:
        err_console.print(f"[red]Config error:[/red] {exc}")
        raise SystemExit(EXIT_CONFIG) from exc


def _ledger() -> Database | None:
    from flrw_boltzmann.storage.database import Database

    try:
        db = Database()
        db.ensure_tables()
    except (sqlite3.Error, OSError) as exc:
        err_console.print(f"[yellow]Run ledger unavailable:[/yellow] {exc}")
        return None
    return db


# ═══════════════════════════════════════════════════════════════════════════
# SIMULATE
# ═══════════════════════════════════════════════════════════════════════════


@main.command()
@click.argument("config_path", metavar="CONFIG")
def simulate(config_path: str) -> None:
    """Run the coupled evolution described by a JSON config."""
    from flrw_boltzmann.errors import DomainError, StepFailure
    from flrw_boltzmann.solver.run import run

    config = _load(config_path)
    console.print(
        f"[bold cyan]Simulate:[/bold cyan] Λ={config.lambda_:g} {config.scale_factor} "
        f"n={config.grid.n} dt={config.dt:g} T={config.T:g}"
    )
    try:
        result = run(config, ledger=_ledger())
    except StepFailure as exc:
        err_console.print(f"[red]Step failure:[/red] {exc}")
        if exc.last_state is not None:
            last = exc.last_state
            err_console.print(f"  Last valid state: t={last.t:.6g} R={last.R:.6g}")
        raise SystemExit(EXIT_STEP_FAILURE) from exc
    except DomainError as exc:
        err_console.print(f"[red]Config error:[/red] {exc}")
        raise SystemExit(EXIT_CONFIG) from exc

    final = result.records[-1]
    console.print(f"[green]Finished[/green] t={final.t:.6g} R={final.R:.6g} rho={final.rho:.6g}")
    console.print(f"  Records:    {len(result.records)} → {result.csv_path}")
    console.print(f"  Checkpoint: {result.checkpoint_path}")
    console.print(f"  Wall time:  {result.wall_seconds:.1f}s")
    for warning in result.warnings:
        console.print(f"  [yellow]Warned:[/yellow] {warning}")


# ═══════════════════════════════════════════════════════════════════════════
# AUDIT
# ═══════════════════════════════════════════════════════════════════════════


def _print_report(report: AuditReport) -> None:
    verdict = "[green]PASS[/green]" if report.passed else "[red]FAIL[/red]"
    table = Table(title=f"{report.name}: {'PASS' if report.passed else 'FAIL'}")
    table.add_column("Measured", style="cyan")
    table.add_column("Value", justify="right")
    for key, value in report.measured.items():
        table.add_row(key, f"{value:.6e}")
    console.print(table)
    if report.name == "jacobian" and report.detail:
        scan = Table(title="Post-collision Jacobian vs |p_*|")
        for column in ("|q_*|", "R", "|p_*|"):
            scan.add_column(column, justify="right")
        scan.add_column("Spectral norm", justify="right", style="bold")
        scan.add_column("/ (q⁰)⁵", justify="right")
        scan.add_column("FD discrepancy", justify="right")
        scan.add_column("Reliable", justify="center")
        for row in report.detail:
            scan.add_row(
                f"{row['q_norm']:.4g}",
                f"{row['R']:.4g}",
                f"{row['p_norm']:.4g}",
                f"{row['spectral_norm']:.6f}",
                f"{row['ratio']:.4e}",
                f"{row['discrepancy']:.2e}",
                "yes" if row["reliable"] == 1.0 else "[red]no[/red]",
            )
        console.print(scan)
    if report.name == "conservation" and report.detail:
        levels = Table(title="Collision balance by resolution")
        for column in ("n", "Sphere", "Number", "Energy", "Leakage"):
            levels.add_column(column, justify="right")
        for row in report.detail:
            levels.add_row(
                f"{row['n']:.0f}",
                f"{row['polar_order']:.0f}×{row['azimuth_order']:.0f}",
                f"{row['number_relative']:.3e}",
                f"{row['energy_relative']:.3e}",
                f"{row['leakage']:.3e}",
            )
        console.print(levels)
    console.print(f"{report.name}: {verdict}")


@main.command()
@click.argument(
    "which",
    type=click.Choice(["kinematics", "lemma42", "lemma43", "jacobian", "conservation", "all"]),
)
@click.option("--samples", default=100_000, type=click.IntRange(min=1), help="Random samples")
@click.option("--seed", default=0, type=int, help="Sampling seed")
def audit(which: str, samples: int, seed: int) -> None:
    """Check a kinematic or integral estimate, or the collision balance."""
    from flrw_boltzmann.diagnostics.audits import AUDIT_NAMES, run_audit

    names = AUDIT_NAMES if which == "all" else (which,)
    ledger = _ledger()
    failed: list[str] = []
    for name in names:
        report = run_audit(name, samples, seed)
        _print_report(report)
        if ledger is not None:
            try:
                ledger.record_audit(name, report.passed, report.measured, report.detail)
            except sqlite3.Error as exc:
                err_console.print(f"[yellow]Could not record audit:[/yellow] {exc}")
        if not report.passed:
            failed.append(name)

    if failed:
        err_console.print(f"[red]Failed audits:[/red] {', '.join(failed)}")
        raise SystemExit(EXIT_AUDIT_FAILURE)


# ═══════════════════════════════════════════════════════════════════════════
# COLLIDE
# ═══════════════════════════════════════════════════════════════════════════


@main.command()
@click.option("--p", "p", nargs=3, type=STRICT_FLOAT, required=True, help="p_* components")
@click.option("--q", "q", nargs=3, type=STRICT_FLOAT, required=True, help="q_* components")
@click.option(
    "--omega", nargs=3, type=STRICT_FLOAT, default=(0.0, 0.0, 1.0), help="Direction on S²"
)
@click.option("--R", "R", type=STRICT_FLOAT, default=1.0, help="Scale factor")
def collide(
    p: tuple[float, float, float],
    q: tuple[float, float, float],
    omega: tuple[float, float, float],
    R: float,
) -> None:
    """Print one resolved collision and its invariant defects as JSON."""
    from flrw_boltzmann.errors import DomainError, FlrwBoltzmannError
    from flrw_boltzmann.kinematics import CovariantMomentum, collision_geometry

    length = math.sqrt(sum(x * x for x in omega))
    try:
        if not length > 0.0:
            raise DomainError(f"omega must be nonzero, got {omega}")
        direction = tuple(x / length for x in omega)
        geometry = collision_geometry(CovariantMomentum(*p), CovariantMomentum(*q), direction, R)
    except FlrwBoltzmannError as exc:
        err_console.print(f"[red]Invalid collision:[/red] {exc}")
        raise SystemExit(EXIT_CONFIG) from exc
    click.echo(json.dumps(geometry.to_dict(), indent=2))


# ═══════════════════════════════════════════════════════════════════════════
# ORACLE
# ═══════════════════════════════════════════════════════════════════════════

ORACLE_COLUMNS = (
    "point",
    "p1",
    "p2",
    "p3",
    "gain",
    "loss",
    "gain_mc",
    "loss_mc",
    "stderr_gain",
    "stderr_loss",
    "z_gain",
    "z_loss",
)


def _z_score(value: float, estimate: float, stderr: float) -> float:
    if stderr == 0.0:
        return 0.0 if value == estimate else float("inf")
    return (value - estimate) / stderr


@main.command()
@click.argument("config_path", metavar="CONFIG")
@click.option("--points", default=100, type=click.IntRange(min=1), help="Lattice test points")
@click.option("--samples", default=10_000, type=click.IntRange(min=1000), help="MC samples")
@click.option("--seed", default=None, type=int, help="Seed (default: config seed)")
def oracle(config_path: str, points: int, samples: int, seed: int | None) -> None:
    """Compare quadrature gain/loss against Monte Carlo at the initial data, as CSV."""
    import numpy as np

    from flrw_boltzmann.collision import SphereQuadrature, gain, loss_rate, mc_estimate
    from flrw_boltzmann.diagnostics.records import format_float
    from flrw_boltzmann.solver.initial_data import initial_data

    config = _load(config_path)
    seed = config.seed if seed is None else seed
    f = initial_data(
        config.initial.kind,
        config.initial.epsilon,
        config.grid.extent,
        config.grid.n,
        config.initial.params,
    )
    quad = SphereQuadrature.product(config.sphere.polar_order, config.sphere.azimuth_order)
    R = 1.0
    rng = np.random.default_rng(seed)
    indices = rng.integers(0, config.grid.n, size=(points, 3))

    click.echo(",".join(ORACLE_COLUMNS))
    for i, raw in enumerate(indices):
        index = (int(raw[0]), int(raw[1]), int(raw[2]))
        p = f.momentum_at(index)
        g = gain(f, index, R, quad)
        loss = float(f.values[index]) * loss_rate(f, index, R, quad)
        mc = mc_estimate(f, p, R, samples, seed + i + 1)
        row = [
            *(float(x) for x in p),
            g,
            loss,
            mc.gain,
            mc.loss,
            mc.stderr_gain,
            mc.stderr_loss,
            _z_score(g, mc.gain, mc.stderr_gain),
            _z_score(loss, mc.loss, mc.stderr_loss),
        ]
        click.echo(",".join([str(i), *(format_float(x) for x in row)]))


# ═══════════════════════════════════════════════════════════════════════════
# HISTORY
# ═══════════════════════════════════════════════════════════════════════════


@main.command()
@click.option("--limit", default=20, help="Number of entries to show")
def history(limit: int) -> None:
    """Show recent simulation runs and audit outcomes."""
    db = _ledger()
    if db is None:
        return
    runs = db.recent_runs(limit)
    audits = db.recent_audits(limit)
    if not runs and not audits:
        console.print("[dim]No history yet. Run a simulation or an audit first.[/dim]")
        return

    if runs:
        table = Table(title="Runs")
        table.add_column("Run", style="cyan")
        table.add_column("Status", style="green")
        table.add_column("t_final", justify="right")
        table.add_column("R_final", justify="right")
        table.add_column("Steps", justify="right")
        table.add_column("Wall", justify="right")
        table.add_column("Output")
        table.add_column("Date")
        for row in runs:
            table.add_row(
                str(row["run_id"]),
                str(row["status"]),
                _maybe(row["t_final"], ".4g"),
                _maybe(row["R_final"], ".6g"),
                str(row["steps"]),
                _maybe(row["wall_seconds"], ".1f"),
                str(row["output_path"]),
                str(row["started_at"])[:16],
            )
        console.print(table)

    if audits:
        table = Table(title="Audits")
        table.add_column("Audit", style="cyan")
        table.add_column("Result")
        table.add_column("Measured")
        table.add_column("Date")
        for row in audits:
            measured = json.loads(row["measured"])
            table.add_row(
                str(row["which"]),
                "[green]PASS[/green]" if row["passed"] else "[red]FAIL[/red]",
                ", ".join(f"{k}={v:.3g}" for k, v in measured.items()),
                str(row["run_at"])[:16],
            )
        console.print(table)


def _maybe(value: float | None, spec: str) -> str:
    return "-" if value is None else format(value, spec)
