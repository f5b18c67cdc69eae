"""Property audits: kinematic identities, the weighted-integral and weight-transfer
bounds, Jacobian identity and boundedness, and collisional conservation.

Each ``run_*`` entry returns an AuditReport with the measured extremal values
and a pass flag; the numeric helpers underneath are usable on their own.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any, Final

import numpy as np
from scipy import integrate

from flrw_boltzmann.collision.grid import DistributionGrid
from flrw_boltzmann.collision.operator import CollisionOperator, collision_moments
from flrw_boltzmann.collision.quadrature import SphereQuadrature
from flrw_boltzmann.errors import AuditFailure, DomainError
from flrw_boltzmann.kinematics.collision_map import (
    dot3,
    mass_shell_energy,
    pair_invariants,
    post_collision_batch,
)
from flrw_boltzmann.kinematics.derivatives import (
    jacobian_determinant_6x6,
    postcollision_jacobian,
)
from flrw_boltzmann.kinematics.vectors import (
    CovariantMomentum,
    random_momenta,
    random_unit_vectors,
)
from flrw_boltzmann.logs import get_logger

logger = get_logger(__name__)

# ═══════════════════════════════════════════════════════════════════════════
# THRESHOLDS
# ═══════════════════════════════════════════════════════════════════════════

WEIGHT_TRANSFER_BOUND: Final[float] = 17.0
LEMMA42_SPREAD: Final[float] = 0.01
LEMMA42_RADII: Final[tuple[float, ...]] = (1.0, math.e, math.e**2, math.e**3)
LEMMA42_ORDERS: Final[tuple[int, ...]] = (0, 2, 4)

INVARIANT_TOL: Final[float] = 1e-10  # relative to s
CONSERVATION_TOL: Final[float] = 1e-11
OMEGA_TOL: Final[float] = 1e-12
INVOLUTION_TOL: Final[float] = 1e-10
KINEMATICS_MAX_NORM: Final[float] = 10.0

JACOBIAN_DET_TOL: Final[float] = 1e-5
JACOBIAN_GROWTH: Final[float] = 2.0
JACOBIAN_SAMPLES: Final[int] = 1000
JACOBIAN_Q_STARS: Final[tuple[tuple[float, float, float], ...]] = (
    (0.5, -0.3, 0.2),
    (1.5, 0.8, -1.1),
    (-3.0, 2.0, 4.0),
)
JACOBIAN_RADII: Final[tuple[float, ...]] = (1.0, math.exp(-1.0), math.e)
JACOBIAN_OMEGA: Final = np.array([1.0, 2.0, 2.0]) / 3.0
JACOBIAN_DIRECTION: Final = np.array([1.0, 1.0, 0.0])
JACOBIAN_P_NORMS: Final = np.logspace(0.0, 3.0, 7)
JACOBIAN_TAIL_ROWS: Final[int] = 3  # the last decade of JACOBIAN_P_NORMS

NUMBER_BALANCE_TOL: Final[float] = 1e-3
ENERGY_BALANCE_TOL: Final[float] = 5e-3
REFINEMENT_GAIN: Final[float] = 2.0
BALANCE_FLOOR: Final[float] = 1e-12  # both levels at rounding level count as converged
# (n, polar order, azimuth order), coarse to desk resolution
CONSERVATION_LEVELS: Final[tuple[tuple[int, int, int], ...]] = ((16, 4, 8), (24, 8, 16))
CONSERVATION_EXTENT: Final[float] = 8.0
CONSERVATION_EPSILON: Final[float] = 1e-3


@dataclass
class AuditReport:
    """Outcome of one audit: pass flag, extremal measurements, optional table."""

    name: str
    passed: bool
    measured: dict[str, float] = field(default_factory=dict)
    detail: list[dict[str, float]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "measured": dict(self.measured),
            "detail": [dict(row) for row in self.detail],
        }


# ═══════════════════════════════════════════════════════════════════════════
# WEIGHTED INTEGRAL ∫(p⁰)^m e^{−p⁰} dp_* ≤ C R³
# ═══════════════════════════════════════════════════════════════════════════


def audit_lemma42(R: float, m: int) -> float:
    """[∫ (p⁰)^m e^{−p⁰} dp_*] / R³ by adaptive radial quadrature in |p_*|."""
    if not -2 <= m <= 10:
        raise DomainError(f"m must lie in [-2, 10], got {m}")
    if not R > 0.0:
        raise DomainError(f"scale factor must be positive, got {R}")

    def integrand(r: float) -> float:
        p0 = math.sqrt(1.0 + (r / R) ** 2)
        return 4.0 * math.pi * r * r * p0**m * math.exp(-p0)

    value, _ = integrate.quad(integrand, 0.0, 100.0 * R, limit=200)
    return value / R**3


def lemma42_limit(m: int) -> float:
    """Continuum value ∫ (1+|z|²)^{m/2} e^{−√(1+|z|²)} dz the ratio should equal."""

    def integrand(z: float) -> float:
        z0 = math.sqrt(1.0 + z * z)
        return 4.0 * math.pi * z * z * z0**m * math.exp(-z0)

    value, _ = integrate.quad(integrand, 0.0, math.inf, limit=200)
    return value


def run_lemma42_audit(
    orders: Sequence[int] = LEMMA42_ORDERS, radii: Sequence[float] = LEMMA42_RADII
) -> AuditReport:
    rows: list[dict[str, float]] = []
    worst = 0.0
    for m in orders:
        ratios = [audit_lemma42(R, m) for R in radii]
        limit = lemma42_limit(m)
        spread = (max(ratios) - min(ratios)) / limit
        worst = max(worst, spread)
        for R, ratio in zip(radii, ratios, strict=True):
            rows.append({"m": float(m), "R": R, "ratio": ratio, "limit": limit})
    return AuditReport(
        name="lemma42",
        passed=worst <= LEMMA42_SPREAD,
        measured={"max_relative_spread": worst},
        detail=rows,
    )


# ═══════════════════════════════════════════════════════════════════════════
# WEIGHT TRANSFER ⟨p_*⟩² ≤ 17 ⟨p_*'⟩² ⟨q_*'⟩²
# ═══════════════════════════════════════════════════════════════════════════


def audit_lemma43(samples: int, seed: int, max_norm: float = 1e3) -> float:
    """max over random collisions of (1+|p_*|²)/((1+|p_*'|²)(1+|q_*'|²)).

    |p_*|, |q_*| are log-uniform up to ``max_norm`` and R log-uniform in
    [e⁻³, e³].
    """
    if samples < 1:
        raise DomainError(f"samples must be positive, got {samples}")
    rng = np.random.default_rng(seed)
    p = random_momenta(rng, samples, max_norm)
    q = random_momenta(rng, samples, max_norm)
    omega = random_unit_vectors(rng, samples)
    R = np.exp(rng.uniform(-3.0, 3.0, samples))[:, None]

    batch = post_collision_batch(p / R, q / R, omega)
    p_new = batch.p_prime * R
    q_new = batch.q_prime * R
    ratio = (1.0 + dot3(p, p)) / ((1.0 + dot3(p_new, p_new)) * (1.0 + dot3(q_new, q_new)))
    return float(ratio.max())


def run_lemma43_audit(samples: int, seed: int) -> AuditReport:
    worst = audit_lemma43(samples, seed)
    return AuditReport(
        name="lemma43",
        passed=worst <= WEIGHT_TRANSFER_BOUND,
        measured={"max_ratio": worst, "bound": WEIGHT_TRANSFER_BOUND},
    )


# ═══════════════════════════════════════════════════════════════════════════
# KINEMATIC IDENTITIES
# ═══════════════════════════════════════════════════════════════════════════


def audit_kinematics(
    samples: int, seed: int, max_norm: float = KINEMATICS_MAX_NORM
) -> dict[str, float]:
    """Worst violations of the collision-map identities over random pairs."""
    rng = np.random.default_rng(seed)
    p = random_momenta(rng, samples, max_norm)
    q = random_momenta(rng, samples, max_norm)
    omega = random_unit_vectors(rng, samples)

    batch = post_collision_batch(p, q, omega)
    h_sq, s = pair_invariants(p, q, batch.p0, batch.q0)
    h = np.sqrt(h_sq)
    n = p + q
    n0 = batch.p0 + batch.q0
    dist = np.sqrt(dot3(p - q, p - q))

    omega_norm = -batch.omega0**2 + dot3(batch.omega_vec, batch.omega_vec)
    omega_dot_n = -batch.omega0 * n0 + dot3(batch.omega_vec, n)
    momentum = np.maximum(
        np.max(np.abs(batch.p_prime + batch.q_prime - n), axis=-1),
        np.abs(batch.p0_prime + batch.q0_prime - n0),
    )
    shell_p = np.abs(dot3(batch.p_prime, batch.p_prime) - batch.p0_prime**2 + 1.0)
    shell_q = np.abs(dot3(batch.q_prime, batch.q_prime) - batch.q0_prime**2 + 1.0)

    back = post_collision_batch(batch.p_prime, batch.q_prime, omega)
    involution = np.maximum(
        np.max(np.abs(back.p_prime - p), axis=-1), np.max(np.abs(back.q_prime - q), axis=-1)
    )

    slack = 1e-12 * (1.0 + dist)
    bounds_ok = bool(
        np.all(dist / np.sqrt(batch.p0 * batch.q0) <= h + slack)
        and np.all(h <= dist + slack)
        and np.all(s <= 4.0 * batch.p0 * batch.q0 * (1.0 + 1e-12))
    )
    return {
        "s_minus_4_minus_h2": float(np.max(np.abs(s - 4.0 - h_sq) / s)),
        "omega_unit": float(np.max(np.abs(omega_norm - 1.0))),
        "omega_orthogonal": float(np.max(np.abs(omega_dot_n))),
        "momentum_conservation": float(np.max(momentum)),
        "mass_shell": float(max(np.max(shell_p), np.max(shell_q))),
        "involution": float(np.max(involution)),
        "invariant_bounds_hold": 1.0 if bounds_ok else 0.0,
    }


def run_kinematics_audit(samples: int, seed: int) -> AuditReport:
    measured = audit_kinematics(samples, seed)
    passed = (
        measured["s_minus_4_minus_h2"] <= INVARIANT_TOL
        and measured["omega_unit"] <= OMEGA_TOL
        and measured["omega_orthogonal"] <= OMEGA_TOL
        and measured["momentum_conservation"] <= CONSERVATION_TOL
        and measured["mass_shell"] <= CONSERVATION_TOL
        and measured["involution"] <= INVOLUTION_TOL
        and measured["invariant_bounds_hold"] == 1.0
    )
    return AuditReport(name="kinematics", passed=passed, measured=measured)


# ═══════════════════════════════════════════════════════════════════════════
# JACOBIANS
# ═══════════════════════════════════════════════════════════════════════════


def jacobian_scan(
    q_star: CovariantMomentum,
    omega: np.ndarray,
    direction: np.ndarray,
    norms: Sequence[float],
    R: float = 1.0,
) -> list[dict[str, float]]:
    """Spectral norm of ∂p_*'/∂p_* along p_* = |p_*|·direction.

    ``ratio`` divides the norm by (q⁰)⁵, the weight the derivative bound
    carries in q.
    """
    unit = direction / np.linalg.norm(direction)
    q0 = mass_shell_energy(q_star, R)
    rows = []
    for magnitude in norms:
        estimate = postcollision_jacobian(
            CovariantMomentum.from_array(magnitude * unit), q_star, omega, R
        )
        rows.append(
            {
                "q_norm": q_star.norm,
                "R": R,
                "p_norm": float(magnitude),
                "spectral_norm": estimate.spectral_norm,
                "ratio": estimate.spectral_norm / q0**5,
                "discrepancy": estimate.discrepancy,
                "reliable": 1.0 if estimate.reliable else 0.0,
            }
        )
    return rows


def audit_jacobian(samples: int, seed: int) -> tuple[float, list[dict[str, float]]]:
    """(worst relative determinant error, |p_*| scans over JACOBIAN_Q_STARS × JACOBIAN_RADII).

    The first scan is the reference configuration q_* = JACOBIAN_Q_STARS[0], R = 1.
    """
    rng = np.random.default_rng(seed)
    p = random_momenta(rng, samples, 10.0)
    q = random_momenta(rng, samples, 10.0)
    omega = random_unit_vectors(rng, samples)
    R = np.exp(rng.uniform(-1.0, 1.0, samples))

    worst = 0.0
    for i in range(samples):
        det, expected = jacobian_determinant_6x6(
            CovariantMomentum.from_array(p[i]),
            CovariantMomentum.from_array(q[i]),
            omega[i],
            float(R[i]),
        )
        worst = max(worst, abs(det - expected) / abs(expected))

    table: list[dict[str, float]] = []
    for q_star in JACOBIAN_Q_STARS:
        for radius in JACOBIAN_RADII:
            table.extend(
                jacobian_scan(
                    CovariantMomentum(*q_star),
                    JACOBIAN_OMEGA,
                    JACOBIAN_DIRECTION,
                    JACOBIAN_P_NORMS,
                    radius,
                )
            )
    return worst, table


def _scans(table: Sequence[dict[str, float]]) -> list[list[dict[str, float]]]:
    size = len(JACOBIAN_P_NORMS)
    return [list(table[i : i + size]) for i in range(0, len(table), size)]


def run_jacobian_audit(samples: int, seed: int) -> AuditReport:
    """Determinant identity plus boundedness of ∂p_*'/∂p_* in |p_*|.

    Passes when the determinant error is within tolerance, every FD row is
    reliable, the reference scan stays within JACOBIAN_GROWTH of its value
    at |p_*| = 1, and no scan grows by more than JACOBIAN_GROWTH over its
    last decade. ``fitted_constant`` is the smallest C with
    ‖∂p_*'/∂p_*‖ ≤ C (q⁰)⁵ on every row.
    """
    worst, table = audit_jacobian(min(samples, JACOBIAN_SAMPLES), seed)
    scans = _scans(table)
    reference = scans[0]
    base = reference[0]["spectral_norm"]
    peak = max(row["spectral_norm"] for row in reference)

    tail_growth = 0.0
    for scan in scans:
        tail = [row["spectral_norm"] for row in scan[-JACOBIAN_TAIL_ROWS:]]
        tail_growth = max(tail_growth, max(tail) / tail[0])
    unreliable = sum(1 for row in table if row["reliable"] != 1.0)

    return AuditReport(
        name="jacobian",
        passed=worst <= JACOBIAN_DET_TOL
        and unreliable == 0
        and peak <= JACOBIAN_GROWTH * base
        and tail_growth <= JACOBIAN_GROWTH,
        measured={
            "det_relative_error": worst,
            "norm_at_1": base,
            "max_norm": peak,
            "tail_growth": tail_growth,
            "fitted_constant": max(row["ratio"] for row in table),
            "unreliable_rows": float(unreliable),
        },
        detail=table,
    )


# ═══════════════════════════════════════════════════════════════════════════
# CONSERVATION AND GROWTH
# ═══════════════════════════════════════════════════════════════════════════


def check_conservation(f: DistributionGrid, R: float, operator: CollisionOperator) -> AuditReport:
    """Number and energy balance of one full-lattice pass on the given data."""
    evaluation = operator.evaluate(f, R)
    moments = collision_moments(f, R, operator, evaluation)
    return AuditReport(
        name="conservation",
        passed=moments.number_relative <= NUMBER_BALANCE_TOL
        and moments.energy_relative <= ENERGY_BALANCE_TOL,
        measured={
            "number_relative": moments.number_relative,
            "energy_relative": moments.energy_relative,
            "leakage": evaluation.leakage,
        },
    )


def improved(coarse: float, fine: float) -> bool:
    """Refinement gain of at least REFINEMENT_GAIN, or both already at the rounding floor."""
    return fine <= coarse / REFINEMENT_GAIN or max(coarse, fine) <= BALANCE_FLOOR


def run_conservation_audit(
    levels: Sequence[tuple[int, int, int]] = CONSERVATION_LEVELS,
    extent: float = CONSERVATION_EXTENT,
    epsilon: float = CONSERVATION_EPSILON,
    R: float = 1.0,
) -> AuditReport:
    """Collision balance on a Gaussian at increasing (n, polar, azimuth) resolution.

    The last level must meet the number and energy tolerances and improve
    on the level before it.
    """
    if len(levels) < 2:
        raise DomainError("conservation audit needs at least two resolution levels")
    rows: list[dict[str, float]] = []
    for n, polar, azimuth in levels:
        f = DistributionGrid.from_function(
            extent, n, lambda p: epsilon * np.exp(-np.einsum("...i,...i->...", p, p))
        )
        operator = CollisionOperator(SphereQuadrature.product(polar, azimuth))
        report = check_conservation(f, R, operator)
        logger.info("conservation n=%d sphere %dx%d: %s", n, polar, azimuth, report.measured)
        rows.append(
            {"n": float(n), "polar_order": float(polar), "azimuth_order": float(azimuth)}
            | report.measured
        )

    coarse, fine = rows[-2], rows[-1]
    return AuditReport(
        name="conservation",
        passed=fine["number_relative"] <= NUMBER_BALANCE_TOL
        and fine["energy_relative"] <= ENERGY_BALANCE_TOL
        and improved(coarse["number_relative"], fine["number_relative"])
        and improved(coarse["energy_relative"], fine["energy_relative"]),
        measured={
            "number_relative": fine["number_relative"],
            "energy_relative": fine["energy_relative"],
            "coarse_number_relative": coarse["number_relative"],
            "coarse_energy_relative": coarse["energy_relative"],
            "leakage": fine["leakage"],
        },
        detail=rows,
    )


def fit_growth_constant(norms: Sequence[float]) -> float:
    """Smallest C with ‖f(t)‖² ≤ ‖f(0)‖² + C sup_{s≤t} ‖f(s)‖³ along a norm series."""
    if not norms:
        return 0.0
    initial_sq = norms[0] ** 2
    running_max = norms[0]
    constant = 0.0
    for value in norms[1:]:
        running_max = max(running_max, value)
        excess = value**2 - initial_sq
        if excess > 0.0 and running_max > 0.0:
            constant = max(constant, excess / running_max**3)
    return constant


# ═══════════════════════════════════════════════════════════════════════════
# DISPATCH
# ═══════════════════════════════════════════════════════════════════════════

AUDIT_NAMES: Final[tuple[str, ...]] = (
    "kinematics",
    "lemma42",
    "lemma43",
    "jacobian",
    "conservation",
)


def _dispatch(name: str, samples: int, seed: int) -> AuditReport:
    if name == "kinematics":
        return run_kinematics_audit(samples, seed)
    if name == "lemma42":
        return run_lemma42_audit()
    if name == "lemma43":
        return run_lemma43_audit(samples, seed)
    if name == "jacobian":
        return run_jacobian_audit(samples, seed)
    if name == "conservation":
        return run_conservation_audit()
    raise DomainError(f"unknown audit {name!r}; expected one of {', '.join(AUDIT_NAMES)}")


def run_audit(name: str, samples: int, seed: int, strict: bool = False) -> AuditReport:
    """Run one named sampling audit.

    Args:
        name: One of AUDIT_NAMES
        samples: Random samples for the sampling audits
        seed: Seed of the sampling generator
        strict: Raise AuditFailure instead of returning a failed report

    Returns:
        The audit report
    """
    logger.info("running audit %s (samples=%d, seed=%d)", name, samples, seed)
    report = _dispatch(name, samples, seed)
    if strict and not report.passed:
        raise AuditFailure(f"audit {name} failed: {report.measured}")
    return report
