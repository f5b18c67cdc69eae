"""Tests for the discrete collision operator."""

from __future__ import annotations

import math

import numpy as np
import pytest

from flrw_boltzmann.collision import (
    CollisionEvaluation,
    CollisionOperator,
    DistributionGrid,
    SphereQuadrature,
    collision_moments,
    default_threads,
    gain,
    kernel_weight,
    loss_rate,
    mc_estimate,
)
from flrw_boltzmann.errors import ConfigError, ContractViolation, DomainError
from flrw_boltzmann.kinematics import (
    FourVector,
    invariants_h_s,
    moller_velocity,
    random_momenta,
)
from flrw_boltzmann.solver import initial_data

# Small lattice with the origin on a node
N = 9
EXTENT = 4.0
CENTER = (N // 2, N // 2, N // 2)


@pytest.fixture(scope="module")
def quad() -> SphereQuadrature:
    return SphereQuadrature.product(2, 4)


@pytest.fixture(scope="module")
def gaussian() -> DistributionGrid:
    return initial_data("gaussian", 1e-2, EXTENT, N, {"width": 1.5})


@pytest.fixture(scope="module")
def evaluation(gaussian: DistributionGrid, quad: SphereQuadrature) -> CollisionEvaluation:
    return CollisionOperator(quad, threads=2).evaluate(gaussian, 1.0)


# ═══════════════════════════════════════════════════════════════════════════
# SPHERE QUADRATURE
# ═══════════════════════════════════════════════════════════════════════════


class TestSphereQuadrature:
    def test_weights_sum_to_4pi(self) -> None:
        rule = SphereQuadrature.product(8, 16)
        assert rule.size == 128
        assert rule.total_weight == pytest.approx(4.0 * math.pi, rel=1e-14)
        assert rule.exact_degree == 15

    def test_second_moment(self) -> None:
        rule = SphereQuadrature.product(4, 8)
        x = rule.nodes[:, 0]
        assert rule.integrate(x * x) == pytest.approx(4.0 * math.pi / 3.0, rel=1e-12)

    def test_rejects_bad_weights(self) -> None:
        rule = SphereQuadrature.product(2, 4)
        with pytest.raises(ContractViolation):
            SphereQuadrature(rule.nodes, rule.weights * 1.01)

    def test_rejects_off_sphere_nodes(self) -> None:
        rule = SphereQuadrature.product(2, 4)
        with pytest.raises(ContractViolation):
            SphereQuadrature(rule.nodes * 1.1, rule.weights)

    def test_rejects_zero_order(self) -> None:
        with pytest.raises(DomainError):
            SphereQuadrature.product(0, 8)


# ═══════════════════════════════════════════════════════════════════════════
# LATTICE
# ═══════════════════════════════════════════════════════════════════════════


class TestDistributionGrid:
    def test_geometry(self) -> None:
        grid = DistributionGrid.zeros(EXTENT, N)
        assert grid.spacing == pytest.approx(1.0)
        assert grid.momentum_at(CENTER) == pytest.approx([0.0, 0.0, 0.0])
        assert grid.momenta.shape == (N**3, 3)
        assert grid.is_zero

    def test_values_are_read_only(self, gaussian: DistributionGrid) -> None:
        with pytest.raises(ValueError):
            gaussian.values[0, 0, 0] = 1.0

    def test_rejects_negative_values(self) -> None:
        values = np.zeros((N, N, N))
        values[1, 2, 3] = -1e-20
        with pytest.raises(DomainError):
            DistributionGrid(EXTENT, N, values)

    def test_rejects_wrong_shape(self) -> None:
        with pytest.raises(DomainError):
            DistributionGrid(EXTENT, N, np.zeros((N, N, N - 1)))

    def test_index_out_of_range(self) -> None:
        with pytest.raises(DomainError):
            DistributionGrid.zeros(EXTENT, N).momentum_at((0, 0, N))

    def test_interpolation(self, gaussian: DistributionGrid) -> None:
        node = gaussian.momentum_at((3, 5, 4))
        assert gaussian.interpolate(node[None, :])[0] == pytest.approx(gaussian.values[3, 5, 4])
        outside = np.array([[EXTENT + 0.5, 0.0, 0.0]])
        assert gaussian.interpolate(outside)[0] == 0.0

    def test_from_function(self) -> None:
        grid = DistributionGrid.from_function(EXTENT, N, lambda p: np.exp(-p[..., 0] ** 2))
        assert grid.values[CENTER] == pytest.approx(1.0)

    def test_cutoff(self) -> None:
        tight = initial_data("gaussian", 1.0, 8.0, 17)
        assert tight.cutoff_adequate()
        wide = initial_data("gaussian", 1.0, 2.0, 9, {"width": 2.0})
        assert not wide.cutoff_adequate()
        assert DistributionGrid.zeros(EXTENT, N).boundary_ratio() == 0.0


class TestCellStencil:
    def test_trilinear_weights(self, gaussian: DistributionGrid) -> None:
        rng = np.random.default_rng(5)
        points = rng.uniform(-3.5, 3.5, size=(50, 3))
        cell = gaussian.cell_stencil(points)
        assert cell.inside.all()
        assert cell.weights.sum(axis=-1) == pytest.approx(np.ones(50), rel=1e-14)
        assert cell.inner.sum(axis=-1) == pytest.approx(np.ones(50), rel=1e-14)
        centroid = np.einsum("pc,pci->pi", cell.weights, gaussian.momenta[cell.nodes])
        assert centroid == pytest.approx(points, abs=1e-12)
        values = np.sum(cell.weights * gaussian.values.ravel()[cell.nodes], axis=-1)
        assert values == pytest.approx(gaussian.interpolate(points), rel=1e-12, abs=1e-30)

    def test_inner_corner_is_nearest_origin(self) -> None:
        grid = DistributionGrid.zeros(EXTENT, N)
        cell = grid.cell_stencil(np.array([[1.3, -2.6, 0.4]]))
        corner = int(np.argmax(cell.inner[0]))
        assert cell.inner[0, corner] == 1.0
        assert grid.momenta[cell.nodes[0, corner]] == pytest.approx([1.0, -2.0, 0.0])

    def test_tie_splits_evenly(self) -> None:
        # even n puts the origin at the center of a cell
        grid = DistributionGrid.zeros(EXTENT, N + 1)
        cell = grid.cell_stencil(np.array([[0.1, -0.2, 0.05]]))
        assert cell.inner[0] == pytest.approx(np.full(8, 0.125))

    def test_outside_points_flagged(self) -> None:
        grid = DistributionGrid.zeros(EXTENT, N)
        cell = grid.cell_stencil(np.array([[EXTENT + 0.5, 0.0, 0.0], [EXTENT, 0.0, 0.0]]))
        assert cell.inside.tolist() == [False, True]
        assert cell.nodes.max() < N**3


# ═══════════════════════════════════════════════════════════════════════════
# KERNEL, GAIN AND LOSS
# ═══════════════════════════════════════════════════════════════════════════


class TestKernel:
    def test_moving_against_rest(self) -> None:
        s = 2.0 + 2.0 * math.sqrt(2.0)
        expected = 1.0 / (math.sqrt(2.0) * math.sqrt(s))
        assert kernel_weight(math.sqrt(2.0), 1.0, s) == pytest.approx(expected, rel=1e-15)

    def test_matches_moller_factorisation(self) -> None:
        rng = np.random.default_rng(2)
        p = random_momenta(rng, 1000, 20.0)
        q = random_momenta(rng, 1000, 20.0)
        for a, b in zip(p, q, strict=True):
            p_hat, q_hat = FourVector.on_shell(a), FourVector.on_shell(b)
            h, s = invariants_h_s(p_hat, q_hat)
            if h <= 1e-6:
                continue
            via_moller = moller_velocity(p_hat, q_hat) * 4.0 / (h * s)
            direct = kernel_weight(p_hat.x0, q_hat.x0, s)
            assert via_moller == pytest.approx(direct, rel=1e-12)


class TestGainLoss:
    def test_zero_distribution(self, quad: SphereQuadrature) -> None:
        zero = DistributionGrid.zeros(EXTENT, N)
        assert gain(zero, CENTER, 1.0, quad) == 0.0
        assert loss_rate(zero, CENTER, 1.0, quad) == 0.0

    def test_constant_loss_rate_at_rest(self, quad: SphereQuadrature) -> None:
        c = 0.3
        grid = DistributionGrid(EXTENT, N, np.full((N, N, N), c))
        q0 = np.sqrt(1.0 + grid.norm_sq)
        # p at rest: s = 2 + 2q⁰
        lattice_sum = np.sum(1.0 / (q0 * np.sqrt(2.0 + 2.0 * q0)))
        expected = c * 4.0 * math.pi * grid.cell_volume * lattice_sum
        assert loss_rate(grid, CENTER, 1.0, quad) == pytest.approx(expected, rel=1e-12)

    def test_single_cell_at_origin(self, quad: SphereQuadrature) -> None:
        values = np.zeros((N, N, N))
        values[CENTER] = 1.0
        grid = DistributionGrid(EXTENT, N, values)
        loss = grid.values[CENTER] * loss_rate(grid, CENTER, 1.0, quad)
        assert loss == pytest.approx(4.0 * math.pi * grid.cell_volume / 2.0, rel=1e-12)
        assert gain(grid, CENTER, 1.0, quad) >= loss * (1.0 - 1e-12)

    def test_invalid_scale_factor(self, gaussian: DistributionGrid, quad: SphereQuadrature) -> None:
        with pytest.raises(DomainError):
            gain(gaussian, CENTER, 0.0, quad)

    def test_loss_rate_nonnegative(self, evaluation: CollisionEvaluation) -> None:
        assert np.all(evaluation.loss_rate >= 0.0)
        assert np.all(evaluation.gain >= 0.0)


# ═══════════════════════════════════════════════════════════════════════════
# FULL-GRID OPERATOR
# ═══════════════════════════════════════════════════════════════════════════


class TestCollisionOperator:
    def test_loss_rate_matches_pointwise(
        self,
        gaussian: DistributionGrid,
        quad: SphereQuadrature,
        evaluation: CollisionEvaluation,
    ) -> None:
        # only partners with f(p)f(q) below PAIR_TOL·max² are left out of the full pass
        for index, rel in ((CENTER, 1e-4), ((5, 4, 3), 1e-3), ((2, 6, 4), 1e-3)):
            assert evaluation.loss_rate[index] == pytest.approx(
                loss_rate(gaussian, index, 1.0, quad), rel=rel
            )

    def test_gain_close_to_direct_quadrature(
        self, gaussian: DistributionGrid, quad: SphereQuadrature, evaluation: CollisionEvaluation
    ) -> None:
        direct = gain(gaussian, CENTER, 1.0, quad)
        assert direct > 0.0
        assert evaluation.gain[CENTER] == pytest.approx(direct, rel=0.5)

    def test_single_cell_is_stationary(self, quad: SphereQuadrature) -> None:
        values = np.zeros((N, N, N))
        values[CENTER] = 1.0
        grid = DistributionGrid(EXTENT, N, values)
        result = CollisionOperator(quad, threads=1).evaluate(grid, 1.0)
        loss = grid.values[CENTER] * result.loss_rate[CENTER]
        assert loss == pytest.approx(4.0 * math.pi * grid.cell_volume / 2.0, rel=1e-12)
        assert np.max(np.abs(result.net(grid))) <= 1e-14 * loss

    def test_thread_count_does_not_change_result(
        self,
        gaussian: DistributionGrid,
        quad: SphereQuadrature,
        evaluation: CollisionEvaluation,
    ) -> None:
        serial = CollisionOperator(quad, threads=1).evaluate(gaussian, 1.0)
        assert np.array_equal(serial.gain, evaluation.gain)
        assert np.array_equal(serial.loss_rate, evaluation.loss_rate)

    def test_stencil_reused_across_values(
        self, gaussian: DistributionGrid, quad: SphereQuadrature
    ) -> None:
        operator = CollisionOperator(quad, threads=1)
        stencil = operator.stencil(gaussian, 1.5)
        assert stencil.pair_count > 0
        scaled = gaussian.with_values(2.0 * gaussian.values)
        reused = operator.evaluate(scaled, 1.5, stencil)
        fresh = operator.evaluate(gaussian, 1.5)
        assert reused.gain == pytest.approx(4.0 * fresh.gain, rel=1e-12)
        assert reused.loss_rate == pytest.approx(2.0 * fresh.loss_rate, rel=1e-12)

    def test_stencil_rejects_other_scale_factor(
        self, gaussian: DistributionGrid, quad: SphereQuadrature
    ) -> None:
        operator = CollisionOperator(quad, threads=1)
        stencil = operator.stencil(gaussian, 1.0)
        with pytest.raises(DomainError):
            operator.evaluate(gaussian, 2.0, stencil)
        with pytest.raises(DomainError):
            stencil.apply(DistributionGrid.zeros(EXTENT, N + 2))

    def test_preserves_reflection_symmetry(self, evaluation: CollisionEvaluation) -> None:
        gain_field = evaluation.gain
        assert gain_field == pytest.approx(gain_field[::-1, :, :], rel=1e-10, abs=1e-30)
        assert gain_field == pytest.approx(gain_field[:, :, ::-1], rel=1e-10, abs=1e-30)
        swapped = np.swapaxes(gain_field, 0, 1)
        assert gain_field == pytest.approx(swapped, rel=1e-10, abs=1e-30)

    def test_leakage_is_a_fraction(self, evaluation: CollisionEvaluation) -> None:
        assert 0.0 <= evaluation.leakage < 0.1
        assert 0.0 <= evaluation.leaked_fraction < 1.0
        assert evaluation.total_pairs > 0

    def test_zero_distribution(self, quad: SphereQuadrature) -> None:
        result = CollisionOperator(quad, threads=1).evaluate(DistributionGrid.zeros(EXTENT, N), 2.0)
        assert not np.any(result.gain)
        assert not np.any(result.loss_rate)
        assert result.leakage == 0.0

    def test_threads_from_env(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("THREADS", "3")
        assert default_threads() == 3
        monkeypatch.setenv("THREADS", "zero")
        with pytest.raises(ConfigError):
            default_threads()


# ═══════════════════════════════════════════════════════════════════════════
# CONSERVATION
# ═══════════════════════════════════════════════════════════════════════════


class TestConservation:
    def test_number_lost_only_through_the_boundary(
        self,
        gaussian: DistributionGrid,
        quad: SphereQuadrature,
        evaluation: CollisionEvaluation,
    ) -> None:
        moments = collision_moments(gaussian, 1.0, CollisionOperator(quad), evaluation)
        assert abs(moments.number_net + evaluation.leaked_rate) <= 1e-12 * moments.number_loss

    def test_energy_lost_only_through_the_boundary(
        self,
        gaussian: DistributionGrid,
        quad: SphereQuadrature,
        evaluation: CollisionEvaluation,
    ) -> None:
        moments = collision_moments(gaussian, 1.0, CollisionOperator(quad), evaluation)
        # partners of particles that leave keep their plain trilinear deposit
        assert moments.energy_net + evaluation.leaked_energy >= -1e-12 * moments.energy_loss

    @pytest.mark.parametrize("R", [0.5, 1.0, 3.0])
    def test_balance_without_leakage(self, R: float) -> None:
        f = initial_data("gaussian", 1e-3, 8.0, 12)
        operator = CollisionOperator(SphereQuadrature.product(4, 8))
        evaluation = operator.evaluate(f, R)
        assert evaluation.leaked_rate == 0.0
        moments = collision_moments(f, R, operator, evaluation)
        assert moments.number_loss > 0.0
        assert moments.number_relative <= 1e-12
        assert moments.energy_relative <= 1e-12

    def test_desk_resolution_and_refinement(self) -> None:
        levels = []
        for n, polar, azimuth in ((16, 4, 8), (24, 8, 16)):
            f = initial_data("gaussian", 1e-3, 8.0, n)
            operator = CollisionOperator(SphereQuadrature.product(polar, azimuth))
            levels.append(collision_moments(f, 1.0, operator))
        coarse, desk = levels
        assert desk.number_relative <= 1e-3
        assert desk.energy_relative <= 5e-3
        for before, after in (
            (coarse.number_relative, desk.number_relative),
            (coarse.energy_relative, desk.energy_relative),
        ):
            assert after <= before / 2.0 or max(before, after) <= 1e-12


# ═══════════════════════════════════════════════════════════════════════════
# MONTE CARLO ORACLE
# ═══════════════════════════════════════════════════════════════════════════


class TestMonteCarlo:
    @pytest.fixture(scope="class")
    def fine(self) -> DistributionGrid:
        return initial_data("gaussian", 1e-2, EXTENT, 13, {"width": 1.5})

    def test_agrees_with_quadrature(self, fine: DistributionGrid) -> None:
        quad = SphereQuadrature.product(8, 16)
        near = np.argwhere(fine.norm_sq <= 4.0)
        rng = np.random.default_rng(2024)
        points = near[rng.choice(len(near), size=20, replace=False)]

        gain_hits = loss_hits = 0
        for seed, row in enumerate(points):
            index = (int(row[0]), int(row[1]), int(row[2]))
            estimate = mc_estimate(fine, fine.momentum_at(index), 1.0, 40_000, seed)
            g = gain(fine, index, 1.0, quad)
            loss = fine.values[index] * loss_rate(fine, index, 1.0, quad)
            gain_hits += abs(g - estimate.gain) <= 3.0 * estimate.stderr_gain
            loss_hits += abs(loss - estimate.loss) <= 3.0 * estimate.stderr_loss
        assert gain_hits >= 19
        assert loss_hits >= 19

    def test_reproducible(self, fine: DistributionGrid) -> None:
        p = np.array([0.5, 0.0, -1.0])
        assert mc_estimate(fine, p, 1.3, 2000, 9) == mc_estimate(fine, p, 1.3, 2000, 9)

    def test_stderr_scaling(self, fine: DistributionGrid) -> None:
        p = np.zeros(3)
        small = mc_estimate(fine, p, 1.0, 20_000, 1)
        large = mc_estimate(fine, p, 1.0, 40_000, 2)
        ratio = large.stderr_loss / small.stderr_loss
        assert ratio == pytest.approx(1.0 / math.sqrt(2.0), rel=0.2)

    def test_zero_distribution(self) -> None:
        estimate = mc_estimate(DistributionGrid.zeros(EXTENT, N), np.zeros(3), 1.0, 1000, 0)
        assert estimate == (0.0, 0.0, 0.0, 0.0)

    def test_minimum_samples(self, fine: DistributionGrid) -> None:
        with pytest.raises(DomainError):
            mc_estimate(fine, np.zeros(3), 1.0, 999, 0)
