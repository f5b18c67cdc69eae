"""Tests for the Friedmann background and scale-factor models."""

from __future__ import annotations

import math

import pytest

from flrw_boltzmann.diagnostics import energy_density
from flrw_boltzmann.errors import ConfigError, DomainError, EnergyConditionError
from flrw_boltzmann.solver import initial_data
from flrw_boltzmann.spacetime import (
    FriedmannState,
    ScaleFactorModel,
    ScaleFactorPreset,
    acceleration,
    constraint_drift,
    continuity_rhs,
    friedmann_step,
    hubble_rate,
    sandwich_bounds,
    within_sandwich,
)

LAMBDA = 3.0


def _evolve(state: FriedmannState, dt: float, steps: int) -> list[FriedmannState]:
    history = [state]
    for _ in range(steps):
        state = friedmann_step(state, LAMBDA, dt)
        history.append(state)
    return history


# ═══════════════════════════════════════════════════════════════════════════
# FRIEDMANN EQUATIONS
# ═══════════════════════════════════════════════════════════════════════════


class TestFriedmannEquations:
    def test_hubble_rate(self) -> None:
        state = FriedmannState(t=0.0, R=1.0, rho=3.0 / (8.0 * math.pi), P=0.0)
        assert hubble_rate(state, LAMBDA) == pytest.approx(math.sqrt(2.0), rel=1e-14)

    def test_vacuum_hubble_rate(self) -> None:
        state = FriedmannState(t=0.0, R=1.0, rho=0.0, P=0.0)
        assert hubble_rate(state, LAMBDA) == pytest.approx(1.0)
        assert acceleration(state, LAMBDA) == pytest.approx(1.0)

    def test_continuity_rhs(self) -> None:
        state = FriedmannState(t=0.0, R=1.0, rho=1.0, P=1.0 / 3.0)
        expected = -4.0 * math.sqrt((8.0 * math.pi + 3.0) / 3.0)
        assert continuity_rhs(state, LAMBDA) == pytest.approx(expected, rel=1e-14)

    def test_negative_density_rejected(self) -> None:
        state = FriedmannState(t=0.0, R=1.0, rho=-1e-3, P=0.0)
        with pytest.raises(EnergyConditionError):
            hubble_rate(state, LAMBDA)

    def test_nonpositive_lambda_rejected(self) -> None:
        state = FriedmannState(t=0.0, R=1.0, rho=0.0, P=0.0)
        with pytest.raises(DomainError):
            hubble_rate(state, 0.0)

    def test_state_validation(self) -> None:
        with pytest.raises(DomainError):
            FriedmannState(t=0.0, R=0.0, rho=0.0, P=0.0)
        with pytest.raises(DomainError):
            FriedmannState(t=math.inf, R=1.0, rho=0.0, P=0.0)


class TestFriedmannStep:
    def test_vacuum_is_de_sitter(self) -> None:
        history = _evolve(FriedmannState(t=0.0, R=1.0, rho=0.0, P=0.0), 0.01, 100)
        final = history[-1]
        assert final.t == pytest.approx(1.0)
        assert abs(final.R - math.e) <= 1e-8
        assert all(within_sandwich(state, LAMBDA, 0.0) for state in history)

    def test_dust_conserves_comoving_density(self) -> None:
        start = FriedmannState(t=0.0, R=1.0, rho=0.1, P=0.0)
        history = _evolve(start, 0.01, 200)
        invariant = [state.rho * state.R**3 for state in history]
        assert max(abs(v - invariant[0]) for v in invariant) / invariant[0] < 1e-8

    def test_radiation_stays_in_sandwich(self) -> None:
        rho0 = 0.05
        history = _evolve(FriedmannState(t=0.0, R=1.0, rho=rho0, P=rho0 / 3.0), 0.01, 300)
        assert all(within_sandwich(state, LAMBDA, rho0) for state in history)
        rhos = [state.rho for state in history]
        assert all(b <= a for a, b in zip(rhos, rhos[1:], strict=False))

    def test_constraint_drift_small(self) -> None:
        history = _evolve(FriedmannState(t=0.0, R=1.0, rho=0.2, P=0.05), 0.01, 100)
        assert constraint_drift(history[-1], LAMBDA) < 1e-8

    def test_invalid_dt(self) -> None:
        with pytest.raises(DomainError):
            friedmann_step(FriedmannState(t=0.0, R=1.0, rho=0.0, P=0.0), LAMBDA, 0.0)


class TestSandwich:
    def test_bounds_at_origin(self) -> None:
        assert sandwich_bounds(0.0, LAMBDA, 1.0) == (1.0, 1.0)

    def test_vacuum_bounds_coincide(self) -> None:
        lower, upper = sandwich_bounds(2.0, LAMBDA, 0.0)
        assert lower == upper == pytest.approx(math.exp(2.0))

    def test_outside_detected(self) -> None:
        state = FriedmannState(t=1.0, R=2.0, rho=0.0, P=0.0)
        assert not within_sandwich(state, LAMBDA, 0.0)


# ═══════════════════════════════════════════════════════════════════════════
# SCALE-FACTOR MODELS
# ═══════════════════════════════════════════════════════════════════════════


class TestScaleFactorModel:
    def test_desitter(self) -> None:
        model = ScaleFactorModel.desitter(LAMBDA)
        assert model.rate == pytest.approx(1.0)
        assert model.scale_factor(1.0) == pytest.approx(math.e)
        assert model.is_analytic

    def test_upper_rate(self) -> None:
        rho0 = 3.0 / (8.0 * math.pi)
        model = ScaleFactorModel.upper(LAMBDA, rho0)
        assert model.rate == pytest.approx(math.sqrt(2.0))

    def test_from_name(self) -> None:
        assert ScaleFactorModel.from_name("coupled", LAMBDA).preset is ScaleFactorPreset.COUPLED
        assert ScaleFactorModel.from_name("upper", LAMBDA, 0.1).preset is ScaleFactorPreset.UPPER

    def test_unknown_name(self) -> None:
        with pytest.raises(ConfigError):
            ScaleFactorModel.from_name("milne", LAMBDA)

    def test_coupled_has_no_closed_form(self) -> None:
        with pytest.raises(DomainError):
            ScaleFactorModel.coupled(LAMBDA).scale_factor(1.0)

    def test_invalid_lambda(self) -> None:
        with pytest.raises(DomainError):
            ScaleFactorModel.coupled(-1.0)

    def test_coupled_vacuum_matches_desitter(self) -> None:
        model = ScaleFactorModel.coupled(LAMBDA)
        state = model.start(None)
        assert state.R_dot == pytest.approx(1.0)
        for _ in range(50):
            state = model.advance(state, 0.02, None)
        assert state.R == pytest.approx(math.e, rel=1e-10)

    def test_coupled_with_matter_stays_in_sandwich(self) -> None:
        f = initial_data("gaussian", 0.05, 4.0, 9)
        rho0 = energy_density(f, 1.0)
        model = ScaleFactorModel.coupled(LAMBDA)
        state = model.start(f)
        assert state.rho == pytest.approx(rho0)
        for _ in range(20):
            state = model.advance(state, 0.05, f)
            assert within_sandwich(state, LAMBDA, rho0)
        assert state.rho < rho0

    def test_analytic_reports_grid_moments(self) -> None:
        f = initial_data("gaussian", 0.05, 4.0, 9)
        model = ScaleFactorModel.desitter(LAMBDA)
        state = model.advance(model.start(f), 0.5, f)
        assert state.R == pytest.approx(math.exp(0.5))
        assert state.rho == pytest.approx(energy_density(f, state.R))
