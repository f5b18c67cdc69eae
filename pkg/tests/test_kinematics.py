"""Tests for collision kinematics."""

from __future__ import annotations

import math

import numpy as np
import pytest

from flrw_boltzmann.errors import ContractViolation, DomainError, UndefinedAngleError
from flrw_boltzmann.kinematics import (
    CovariantMomentum,
    FourVector,
    boost_omega,
    collision_geometry,
    covariant_post_collision_direct,
    deriv_inv_p0,
    invariants_h_s,
    involution_defect,
    jacobian_determinant_6x6,
    mass_shell_energy,
    minkowski_dot,
    moller_velocity,
    pair_invariants,
    post_collision,
    post_collision_batch,
    post_collision_covariant,
    postcollision_jacobian,
    random_momenta,
    random_unit_vectors,
    scattering_angle,
)

SQRT2 = math.sqrt(2.0)
MOVING = FourVector.on_shell([1.0, 0.0, 0.0])  # (√2, 1, 0, 0)
REST = FourVector.on_shell([0.0, 0.0, 0.0])
ANTI = FourVector.on_shell([-1.0, 0.0, 0.0])


# ═══════════════════════════════════════════════════════════════════════════
# VALUE TYPES
# ═══════════════════════════════════════════════════════════════════════════


class TestValueTypes:
    def test_on_shell_energy(self) -> None:
        assert MOVING.x0 == pytest.approx(SQRT2)
        assert MOVING.mass_shell_defect() < 1e-15

    def test_minkowski_signature(self) -> None:
        assert REST.dot(REST) == pytest.approx(-1.0)
        batch = np.array([MOVING.array, REST.array])
        assert minkowski_dot(batch, batch) == pytest.approx([-1.0, -1.0])

    def test_non_finite_rejected(self) -> None:
        with pytest.raises(DomainError):
            CovariantMomentum(math.nan, 0.0, 0.0)

    def test_orthonormal_rejects_nonpositive_R(self) -> None:
        with pytest.raises(DomainError):
            CovariantMomentum(1.0, 0.0, 0.0).orthonormal(0.0)

    def test_off_shell_rejected(self) -> None:
        with pytest.raises(ContractViolation):
            invariants_h_s(FourVector(2.0, 0.0, 0.0, 0.0), REST)


class TestMassShell:
    def test_rest(self) -> None:
        assert mass_shell_energy(CovariantMomentum(0.0, 0.0, 0.0), 2.0) == 1.0

    def test_covariant_scaling(self) -> None:
        # p_* = (3, 0, 0) at R = 3 is p̂ = (1, 0, 0)
        assert mass_shell_energy(CovariantMomentum(3.0, 0.0, 0.0), 3.0) == pytest.approx(SQRT2)

    def test_invalid_R(self) -> None:
        with pytest.raises(DomainError):
            mass_shell_energy(CovariantMomentum(1.0, 0.0, 0.0), -1.0)


# ═══════════════════════════════════════════════════════════════════════════
# INVARIANTS
# ═══════════════════════════════════════════════════════════════════════════


class TestInvariants:
    def test_moving_against_rest(self) -> None:
        h, s = invariants_h_s(MOVING, REST)
        assert h * h == pytest.approx(2.0 * SQRT2 - 2.0, rel=1e-12)
        assert s == pytest.approx(2.0 + 2.0 * SQRT2, rel=1e-12)

    def test_head_on(self) -> None:
        h, s = invariants_h_s(MOVING, ANTI)
        assert h == pytest.approx(2.0, rel=1e-12)
        assert s == pytest.approx(8.0, rel=1e-12)

    def test_identical_momenta(self) -> None:
        h, s = invariants_h_s(MOVING, MOVING)
        assert h == 0.0
        assert s == pytest.approx(4.0)

    def test_s_equals_4_plus_h_squared(self) -> None:
        rng = np.random.default_rng(7)
        p = random_momenta(rng, 10_000, 10.0)
        q = random_momenta(rng, 10_000, 10.0)
        h_sq, s = pair_invariants(p, q)
        assert np.max(np.abs(s - 4.0 - h_sq) / s) <= 1e-10

    def test_moller_velocity(self) -> None:
        h, s = invariants_h_s(MOVING, REST)
        expected = h * math.sqrt(s) / (4.0 * SQRT2)
        assert moller_velocity(MOVING, REST) == pytest.approx(expected, rel=1e-14)
        assert moller_velocity(REST, MOVING) == pytest.approx(moller_velocity(MOVING, REST))


# ═══════════════════════════════════════════════════════════════════════════
# BOOST AND COLLISION MAP
# ═══════════════════════════════════════════════════════════════════════════


class TestBoostOmega:
    n = FourVector(1.0 + SQRT2, 1.0, 0.0, 0.0)
    s = 2.0 + 2.0 * SQRT2

    def test_transverse_direction_unchanged(self) -> None:
        Omega = boost_omega(self.n, self.s, [0.0, 0.0, 1.0])
        assert Omega.array == pytest.approx([0.0, 0.0, 0.0, 1.0], abs=1e-15)

    def test_longitudinal_direction(self) -> None:
        Omega = boost_omega(self.n, self.s, [1.0, 0.0, 0.0])
        assert Omega.x0 == pytest.approx(1.0 / math.sqrt(self.s), rel=1e-14)
        assert abs(self.n.dot(Omega)) < 1e-12
        assert Omega.dot(Omega) == pytest.approx(1.0, abs=1e-12)

    def test_requires_unit_omega(self) -> None:
        with pytest.raises(ContractViolation):
            boost_omega(self.n, self.s, [1.0, 1.0, 0.0])

    def test_requires_positive_s(self) -> None:
        with pytest.raises(DomainError):
            boost_omega(self.n, 0.0, [1.0, 0.0, 0.0])


class TestPostCollision:
    def test_transverse_omega_is_identity(self) -> None:
        p_prime, q_prime = post_collision(MOVING, REST, [0.0, 0.0, 1.0])
        assert p_prime.array == pytest.approx(MOVING.array, abs=1e-14)
        assert q_prime.array == pytest.approx(REST.array, abs=1e-14)

    def test_longitudinal_omega_exchanges_momenta(self) -> None:
        p_prime, q_prime = post_collision(MOVING, REST, [1.0, 0.0, 0.0])
        assert p_prime.array == pytest.approx(REST.array, abs=1e-12)
        assert q_prime.array == pytest.approx(MOVING.array, abs=1e-12)
        assert p_prime.mass_shell_defect() < 1e-12
        total = p_prime.array + q_prime.array
        assert total == pytest.approx((MOVING + REST).array, abs=1e-12)

    def test_identical_momenta_unchanged(self) -> None:
        p_prime, q_prime = post_collision(MOVING, MOVING, [0.0, 1.0, 0.0])
        assert p_prime.array == pytest.approx(MOVING.array, abs=1e-14)
        assert q_prime.array == pytest.approx(MOVING.array, abs=1e-14)

    def test_involution(self) -> None:
        p_hat = FourVector.on_shell([0.3, -2.0, 1.5])
        q_hat = FourVector.on_shell([4.0, 0.2, -0.7])
        assert involution_defect(p_hat, q_hat, [0.0, 0.6, 0.8]) < 1e-10

    def test_batch_conserves_four_momentum(self) -> None:
        rng = np.random.default_rng(3)
        p = random_momenta(rng, 5000, 10.0)
        q = random_momenta(rng, 5000, 10.0)
        omega = random_unit_vectors(rng, 5000)
        batch = post_collision_batch(p, q, omega)
        assert np.max(np.abs(batch.p_prime + batch.q_prime - p - q)) < 1e-11
        energy = batch.p0_prime + batch.q0_prime - batch.p0 - batch.q0
        assert np.max(np.abs(energy)) < 1e-11
        shell = np.sqrt(1.0 + np.sum(batch.p_prime**2, axis=1)) - batch.p0_prime
        assert np.max(np.abs(shell)) < 1e-11


class TestCovariantPaths:
    @pytest.mark.parametrize("R", [math.exp(-3.0), 1.0, 2.5, math.exp(3.0)])
    def test_boost_and_direct_agree(self, R: float) -> None:
        rng = np.random.default_rng(11)
        for p, q, w in zip(
            random_momenta(rng, 50, 50.0),
            random_momenta(rng, 50, 50.0),
            random_unit_vectors(rng, 50),
            strict=True,
        ):
            p_star = CovariantMomentum.from_array(p)
            q_star = CovariantMomentum.from_array(q)
            via_boost = post_collision_covariant(p_star, q_star, w, R)
            direct = covariant_post_collision_direct(p_star, q_star, w, R)
            scale = max(1.0, p_star.norm, q_star.norm)
            for a, b in zip(via_boost, direct, strict=True):
                assert np.max(np.abs(a.array - b.array)) <= 1e-10 * scale

    def test_orthonormal_zero_maps_to_zero(self) -> None:
        zero = CovariantMomentum(0.0, 0.0, 0.0)
        p_prime, q_prime = post_collision_covariant(zero, zero, [1.0, 0.0, 0.0], 2.0)
        assert p_prime.norm < 1e-14
        assert q_prime.norm < 1e-14


class TestScatteringAngle:
    def test_exchange_is_backscatter(self) -> None:
        _, s = invariants_h_s(MOVING, REST)
        Omega = boost_omega(MOVING + REST, s, [1.0, 0.0, 0.0])
        assert scattering_angle(MOVING, REST, Omega) == pytest.approx(math.pi, abs=1e-6)

    def test_transverse_is_forward(self) -> None:
        _, s = invariants_h_s(MOVING, REST)
        Omega = boost_omega(MOVING + REST, s, [0.0, 0.0, 1.0])
        assert scattering_angle(MOVING, REST, Omega) == pytest.approx(0.0, abs=1e-12)

    def test_undefined_for_identical_momenta(self) -> None:
        _, s = invariants_h_s(MOVING, MOVING)
        Omega = boost_omega(MOVING + MOVING, s, [0.0, 1.0, 0.0])
        with pytest.raises(UndefinedAngleError):
            scattering_angle(MOVING, MOVING, Omega)


# ═══════════════════════════════════════════════════════════════════════════
# DERIVATIVES
# ═══════════════════════════════════════════════════════════════════════════


class TestDerivatives:
    def test_deriv_inv_p0(self) -> None:
        grad = deriv_inv_p0(CovariantMomentum(1.0, 0.0, 0.0), 1.0)
        assert grad == pytest.approx([-(2.0**-1.5), 0.0, 0.0], rel=1e-14)

    def test_deriv_inv_p0_scaling(self) -> None:
        p = np.array([0.4, -1.2, 2.0])
        R = 3.7
        scaled = deriv_inv_p0(CovariantMomentum.from_array(R * p), R)
        base = deriv_inv_p0(CovariantMomentum.from_array(p), 1.0)
        assert scaled == pytest.approx(base / R, rel=1e-12)

    def test_jacobian_at_origin_is_finite(self) -> None:
        zero = CovariantMomentum(0.0, 0.0, 0.0)
        estimate = postcollision_jacobian(zero, zero, [0.0, 0.0, 1.0], 1.0)
        assert np.all(np.isfinite(estimate.matrix))
        assert estimate.reliable

    def test_jacobian_bounded_at_large_momentum(self) -> None:
        q = CovariantMomentum(0.5, -0.3, 0.2)
        w = np.array([1.0, 2.0, 2.0]) / 3.0
        small = postcollision_jacobian(CovariantMomentum(1.0, 0.0, 0.0), q, w, 1.0)
        large = postcollision_jacobian(CovariantMomentum(1e3, 0.0, 0.0), q, w, 1.0)
        assert math.isfinite(large.spectral_norm)
        assert large.spectral_norm <= 10.0 * max(1.0, small.spectral_norm)

    def test_jacobian_rejects_nonpositive_step(self) -> None:
        zero = CovariantMomentum(0.0, 0.0, 0.0)
        with pytest.raises(DomainError):
            postcollision_jacobian(zero, zero, [0.0, 0.0, 1.0], 1.0, step=0.0)

    def test_determinant_identity(self) -> None:
        rng = np.random.default_rng(5)
        for p, q, w in zip(
            random_momenta(rng, 20, 10.0),
            random_momenta(rng, 20, 10.0),
            random_unit_vectors(rng, 20),
            strict=True,
        ):
            det, expected = jacobian_determinant_6x6(
                CovariantMomentum.from_array(p), CovariantMomentum.from_array(q), w, 1.3
            )
            assert det == pytest.approx(expected, rel=1e-5)


# ═══════════════════════════════════════════════════════════════════════════
# GEOMETRY VIEW
# ═══════════════════════════════════════════════════════════════════════════


def test_geometry_defects_are_small() -> None:
    geometry = collision_geometry(
        CovariantMomentum(1.0, 2.0, -0.5), CovariantMomentum(-0.3, 0.4, 3.0), [0.0, 0.6, 0.8], 1.7
    )
    assert geometry.theta is not None
    assert all(value <= 1e-11 for value in geometry.defects.values())


def test_geometry_identical_momenta_flags_angle() -> None:
    p = CovariantMomentum(1.0, 0.0, 0.0)
    data = collision_geometry(p, p, [0.0, 0.0, 1.0]).to_dict()
    assert data["theta"] is None
    assert data["theta_defined"] is False
    assert data["p_star_prime"] == pytest.approx([1.0, 0.0, 0.0], abs=1e-14)
