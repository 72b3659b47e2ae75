"""Tests for cavity-output pulse shapes.

Covers:
- PulseProfile / CavityParams / TemporalMode validation
- analytic_pulse_shape norm identity and scale invariance
- simulate_single_atom_emission against the analytic mode (adiabatic regime)
- adiabatic convergence as the drive slows down
- grid checks, zero drive, branching into h and v
- mode_overlap / delayed / position_perturbed
"""

import math

import numpy as np
import pytest

from app.config import Config
from app.errors import GridTooCoarseError, InvalidArgumentError
from app.models.pulse import CavityParams, PulseProfile, TemporalMode
from app.services import pulse_service


# ─── Helpers ───────────────────────────────────────────────

def _fixed_area_profile(kappa_t, cavity, n_points):
    """sin² drive whose κ∫sin²θ stays fixed as the duration grows."""
    duration = kappa_t / cavity.kappa
    # ∫Ω²/G² dt = (Ω_max/G)²·(3/8)·T should give κ∫sin²θ ≈ 7.5
    omega_max = cavity.coupling_norm * math.sqrt(7.5 / (cavity.kappa * 0.375 * duration))
    return PulseProfile.sin_squared(omega_max, duration, n_points)


# ══════════════════════════════════════════════
#  MODELS
# ══════════════════════════════════════════════

class TestPulseModels:

    def test_profile_must_start_at_zero(self):
        times = np.linspace(0, 1, 32)
        with pytest.raises(InvalidArgumentError, match="ramp from zero"):
            PulseProfile(times, np.ones(32))

    def test_profile_needs_enough_points(self):
        with pytest.raises(InvalidArgumentError):
            PulseProfile(np.linspace(0, 1, 8), np.zeros(8))

    def test_profile_needs_uniform_grid(self):
        times = np.linspace(0, 1, 32) ** 2
        with pytest.raises(InvalidArgumentError, match="uniform"):
            PulseProfile(times, np.zeros(32))

    def test_profile_rejects_nan(self):
        rabi = np.zeros(32)
        rabi[5] = np.nan
        with pytest.raises(InvalidArgumentError):
            PulseProfile(np.linspace(0, 1, 32), rabi)

    def test_cavity_needs_a_coupling(self):
        with pytest.raises(InvalidArgumentError):
            CavityParams(0, 0, 1.0)

    def test_cavity_needs_positive_kappa(self):
        with pytest.raises(InvalidArgumentError):
            CavityParams(1, 1, 0.0)

    def test_mode_cannot_hold_two_photons(self):
        times = np.linspace(0, 1, 101)
        with pytest.raises(InvalidArgumentError, match="more than one photon"):
            TemporalMode(times, np.full(101, 2.0))

    def test_branching(self):
        assert CavityParams(1, 1, 1).branching_h == pytest.approx(0.5)
        assert CavityParams(1, 0, 1).branching_h == 1.0


# ══════════════════════════════════════════════
#  ANALYTIC SHAPE
# ══════════════════════════════════════════════

class TestAnalyticPulseShape:

    def test_norm_identity(self):
        cavity = CavityParams(1.0, 1.0, 10.0)
        profile = PulseProfile.sin_squared(omega_max=2.0, duration=20.0, n_points=100001)
        mode = pulse_service.analytic_pulse_shape(profile, cavity)
        assert mode.norm_squared() == pytest.approx(
            pulse_service.emitted_fraction(profile, cavity), abs=1e-6
        )

    def test_norm_identity_at_the_operating_point(self, adiabatic_profile, adiabatic_cavity):
        mode = pulse_service.analytic_pulse_shape(adiabatic_profile, adiabatic_cavity)
        assert mode.norm_squared() == pytest.approx(
            pulse_service.emitted_fraction(adiabatic_profile, adiabatic_cavity), abs=1e-6
        )

    def test_invariant_under_common_scaling(self, adiabatic_profile, adiabatic_cavity):
        base = pulse_service.analytic_pulse_shape(adiabatic_profile, adiabatic_cavity)
        for factor in (0.5, 2.0, 10.0):
            profile, cavity = pulse_service.position_perturbed(
                adiabatic_profile, adiabatic_cavity, mode_amplitude=factor, pumping="collinear"
            )
            scaled = pulse_service.analytic_pulse_shape(profile, cavity)
            assert np.max(np.abs(scaled.values - base.values)) <= 1e-12 * np.max(np.abs(base.values))

    def test_zero_drive_gives_no_photon(self):
        profile = PulseProfile(np.linspace(0, 1, 64), np.zeros(64))
        mode = pulse_service.analytic_pulse_shape(profile, CavityParams(1, 1, 10))
        assert mode.norm_squared() == 0.0

    def test_mixing_angle_below_one(self, adiabatic_profile, adiabatic_cavity):
        s = pulse_service.mixing_angle(adiabatic_profile, adiabatic_cavity)
        assert s.min() == 0.0
        assert s.max() < 1.0


# ══════════════════════════════════════════════
#  INTEGRATOR
# ══════════════════════════════════════════════

class TestSingleAtomEmission:

    def test_matches_analytic_shape(self, adiabatic_profile, adiabatic_cavity, adiabatic_emission):
        analytic = pulse_service.analytic_pulse_shape(adiabatic_profile, adiabatic_cavity)
        error = pulse_service.relative_l2_error(adiabatic_emission.numeric_mode, analytic)
        assert error <= 1e-2

    def test_photon_almost_surely_emitted(self, adiabatic_emission):
        assert adiabatic_emission.p_c >= 0.99

    def test_probability_bookkeeping(self, adiabatic_emission):
        emitted = adiabatic_emission.numeric_mode.norm_squared()
        assert emitted + adiabatic_emission.residual_population == pytest.approx(1.0, abs=1e-5)
        assert adiabatic_emission.p_c == pytest.approx(emitted, abs=1e-5)

    def test_norm_kept_at_every_step(self, adiabatic_emission):
        assert adiabatic_emission.norm_drift <= 1e-6

    def test_step_bound_follows_config(self, monkeypatch, adiabatic_profile, adiabatic_cavity):
        monkeypatch.setattr(Config, "RK4_MAX_STEP", 0.01)
        with pytest.raises(GridTooCoarseError, match="0.01"):
            pulse_service.simulate_single_atom_emission(adiabatic_profile, adiabatic_cavity)

    def test_branching_follows_couplings(self, adiabatic_cavity, adiabatic_emission):
        assert adiabatic_emission.branching_h == pytest.approx(adiabatic_cavity.branching_h, rel=1e-6)

    def test_polarization_modes_share_the_shape(self, adiabatic_emission):
        overlap = pulse_service.mode_overlap(adiabatic_emission.mode_h, adiabatic_emission.mode_v)
        assert abs(overlap) == pytest.approx(1.0, abs=1e-9)

    def test_zero_drive(self):
        profile = PulseProfile(np.linspace(0, 1e-6, 401), np.zeros(401))
        result = pulse_service.simulate_single_atom_emission(profile, CavityParams(1e6, 1e6, 1e7))
        assert result.p_c == 0.0
        assert result.numeric_mode.norm_squared() == 0.0

    def test_coarse_grid_rejected(self):
        profile = PulseProfile.sin_squared(omega_max=1e6, duration=2e-4, n_points=1001)
        with pytest.raises(GridTooCoarseError, match="points"):
            pulse_service.simulate_single_atom_emission(profile, CavityParams(1e6, 1e7, 1e7))

    def test_error_shrinks_as_drive_slows(self):
        cavity = CavityParams(1.0, 10.0, 10.0)
        errors = []
        for scale in (1, 2, 4, 8):
            kappa_t = 200 * scale
            profile = _fixed_area_profile(kappa_t, cavity, n_points=int(kappa_t / 0.04) + 1)
            result = pulse_service.simulate_single_atom_emission(profile, cavity)
            analytic = pulse_service.analytic_pulse_shape(profile, cavity)
            errors.append(pulse_service.relative_l2_error(result.numeric_mode, analytic))
        assert all(b < a for a, b in zip(errors, errors[1:]))


# ══════════════════════════════════════════════
#  MODE UTILITIES
# ══════════════════════════════════════════════

class TestModeUtilities:

    def _gaussian(self, times, center, width=1.0):
        values = np.exp(-((times - center) ** 2) / (2 * width ** 2))
        values /= math.sqrt(np.sum(values ** 2) * (times[1] - times[0]))
        return TemporalMode(times, 0.999 * values)

    def test_self_overlap_is_one(self):
        times = np.linspace(-10, 10, 2001)
        a = self._gaussian(times, 0.0)
        assert pulse_service.mode_overlap(a, a) == pytest.approx(1.0, abs=1e-12)

    def test_far_apart_modes_are_orthogonal(self):
        times = np.linspace(-20, 20, 4001)
        a, b = self._gaussian(times, -10.0), self._gaussian(times, 10.0)
        assert abs(pulse_service.mode_overlap(a, b)) < 1e-12

    def test_delay_reduces_overlap(self):
        times = np.linspace(-10, 10, 2001)
        a = self._gaussian(times, 0.0)
        b = pulse_service.delayed(a, 1.0)
        # Gaussian overlap at delay τ: exp(−τ²/(4w²))
        assert abs(pulse_service.mode_overlap(a, b)) == pytest.approx(math.exp(-0.25), abs=1e-4)

    def test_different_grids_rejected(self):
        a = self._gaussian(np.linspace(-10, 10, 2001), 0.0)
        b = self._gaussian(np.linspace(-10, 10, 2002), 0.0)
        with pytest.raises(InvalidArgumentError):
            pulse_service.mode_overlap(a, b)

    def test_zero_mode_rejected(self):
        times = np.linspace(0, 1, 101)
        a = TemporalMode(times, np.zeros(101))
        with pytest.raises(InvalidArgumentError):
            pulse_service.mode_overlap(a, a)

    def test_relative_error_ignores_global_phase(self):
        times = np.linspace(-10, 10, 2001)
        a = self._gaussian(times, 0.0)
        b = TemporalMode(times, a.values * np.exp(0.7j))
        assert pulse_service.relative_l2_error(b, a) == pytest.approx(0.0, abs=1e-12)

    def test_transverse_phase_leaves_drive(self, adiabatic_profile, adiabatic_cavity):
        profile, cavity = pulse_service.position_perturbed(
            adiabatic_profile, adiabatic_cavity, phase=1.1, pumping="transverse"
        )
        assert profile is adiabatic_profile
        assert cavity.branching_h == pytest.approx(adiabatic_cavity.branching_h, rel=1e-12)
        assert cavity.g0 / abs(cavity.g0) == pytest.approx(complex(math.cos(1.1), math.sin(1.1)))

    def test_unknown_pumping(self, adiabatic_profile, adiabatic_cavity):
        with pytest.raises(InvalidArgumentError):
            pulse_service.position_perturbed(adiabatic_profile, adiabatic_cavity, pumping="oblique")
