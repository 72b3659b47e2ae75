"""Pulse service — cavity-output temporal modes.

- mixing_angle / analytic_pulse_shape: the adiabatic output shape
  f(t) = √κ·sinθ(t)·exp(−(κ/2)∫₀ᵗ sin²θ), sinθ = |Ω|/√(|g0|²+|g1|²+|Ω|²)
- simulate_single_atom_emission: fixed-step RK4 on the one-excitation
  sector {|g;vac⟩, |e;vac⟩, |0;1_h⟩, |1;1_v⟩} with cavity decay −iκ/2
- mode_overlap: normalized ⟨a|b⟩, the two-photon interference visibility
- position_perturbed: couplings seen by an atom displaced in the cavity

Quadrature is the trapezoid rule on the uniform grid everywhere.
"""

import logging
import math

import numpy as np

from app.config import Config
from app.errors import (
    GridTooCoarseError,
    InvalidArgumentError,
    NonConvergenceError,
)
from app.models.pulse import (
    CavityParams,
    EmissionResult,
    PulseProfile,
    TemporalMode,
    cumulative_trapezoid,
    trapezoid,
)

logger = logging.getLogger(__name__)

NORM_BOOKKEEPING_TOL = 1e-6

# Basis indices of the one-excitation sector; slot 4 accumulates the
# emitted probability ∫κ(|c_h|² + |c_v|²)dt alongside the amplitudes.
G, E, H, V, EMITTED = range(5)


def mixing_angle(profile: PulseProfile, params: CavityParams) -> np.ndarray:
    """sinθ(t) on the profile grid, in [0, 1)."""
    omega = np.abs(profile.rabi)
    return omega / np.sqrt(params.coupling_norm ** 2 + omega ** 2)


def analytic_pulse_shape(profile: PulseProfile, params: CavityParams) -> TemporalMode:
    sin_theta = mixing_angle(profile, params)
    decay = cumulative_trapezoid(sin_theta ** 2, profile.times)
    values = math.sqrt(params.kappa) * sin_theta * np.exp(-0.5 * params.kappa * decay)
    return TemporalMode(profile.times, values)


def emitted_fraction(profile: PulseProfile, params: CavityParams) -> float:
    """Closed form of ∫|f|²dt: 1 − exp(−κ∫₀ᵀ sin²θ)."""
    sin_theta = mixing_angle(profile, params)
    return float(1.0 - np.exp(-params.kappa * trapezoid(sin_theta ** 2, profile.times)))


def _check_grid(profile, params, max_step_product):
    fastest = max(profile.peak, abs(params.g0), abs(params.g1), params.kappa)
    product = fastest * profile.spacing
    if product > max_step_product:
        raise GridTooCoarseError(
            f"grid too coarse for RK4: max(|Ω|,|g|,κ)·dt = {product:.3g} "
            f"> {max_step_product}; use at least "
            f"{math.ceil(profile.duration * fastest / max_step_product) + 1} points"
        )


def _integrate(profile, params, substeps):
    """RK4 with `substeps` steps per grid interval; samples on the grid."""
    times = profile.times
    g0, g1, kappa = params.g0, params.g1, params.kappa
    h = profile.spacing / substeps

    # Ω at every half step, linearly interpolated between grid samples
    n_steps = (len(times) - 1) * substeps
    half_times = times[0] + 0.5 * h * np.arange(2 * n_steps + 1)
    half_times[-1] = times[-1]
    omega_half = np.interp(half_times, times, profile.rabi.real) \
        + 1j * np.interp(half_times, times, profile.rabi.imag)

    def deriv(y, omega):
        # ċ = −i·H_eff·c with H = Ω|e⟩⟨g| + g0|e⟩⟨0|a_h + g1|e⟩⟨1|a_v + h.c.
        c_g, c_e, c_h, c_v = y[G], y[E], y[H], y[V]
        return np.array([
            -1j * omega.conjugate() * c_e,
            -1j * (omega * c_g + g0 * c_h + g1 * c_v),
            -1j * g0.conjugate() * c_e - 0.5 * kappa * c_h,
            -1j * g1.conjugate() * c_e - 0.5 * kappa * c_v,
            kappa * (abs(c_h) ** 2 + abs(c_v) ** 2),
        ])

    y = np.zeros(5, dtype=complex)
    y[G] = 1.0
    samples = np.empty((len(times), 5), dtype=complex)
    samples[0] = y
    worst_bookkeeping = 0.0
    for k in range(len(times) - 1):
        for j in range(substeps):
            step = k * substeps + j
            w0, w_half, w1 = omega_half[2 * step], omega_half[2 * step + 1], omega_half[2 * step + 2]
            k1 = deriv(y, w0)
            k2 = deriv(y + 0.5 * h * k1, w_half)
            k3 = deriv(y + 0.5 * h * k2, w_half)
            k4 = deriv(y + h * k3, w1)
            y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        samples[k + 1] = y
        survived = float(np.sum(np.abs(y[:EMITTED]) ** 2))
        worst_bookkeeping = max(worst_bookkeeping, abs(survived + y[EMITTED].real - 1.0))
    return samples, worst_bookkeeping


def simulate_single_atom_emission(
    profile: PulseProfile,
    params: CavityParams,
    max_step_product=None,
    convergence_tol=None,
) -> EmissionResult:
    """Integrate the no-jump one-excitation dynamics for one driving pulse.

    Runs once at the grid spacing and once at half of it; the finer run is
    reported.

    Args:
        profile: Drive Ω(t) on a uniform grid.
        params: Cavity couplings g0, g1 and decay κ.
        max_step_product: Bound on max(|Ω|,|g|,κ)·dt; defaults to
            Config.RK4_MAX_STEP.
        convergence_tol: Largest allowed change of p_c under step halving;
            defaults to Config.CONVERGENCE_TOL.

    Returns:
        EmissionResult with the combined and per-polarization output modes,
        p_c, the emitted branching and the worst per-step norm drift.

    Raises:
        GridTooCoarseError: If the grid violates the step bound.
        NonConvergenceError: If halving the step moves p_c by more than
            `convergence_tol`.
    """
    if max_step_product is None:
        max_step_product = Config.RK4_MAX_STEP
    if convergence_tol is None:
        convergence_tol = Config.CONVERGENCE_TOL
    _check_grid(profile, params, max_step_product)

    coarse, _ = _integrate(profile, params, substeps=1)
    fine, bookkeeping = _integrate(profile, params, substeps=2)

    def p_c_of(samples):
        end = samples[-1]
        return 1.0 - float(np.sum(np.abs(end[:EMITTED]) ** 2))

    p_coarse, p_fine = p_c_of(coarse), p_c_of(fine)
    if abs(p_coarse - p_fine) > convergence_tol:
        raise NonConvergenceError(
            f"step halving moved p_c by {abs(p_coarse - p_fine):.3g} "
            f"(> {convergence_tol}); refine the grid"
        )
    if bookkeeping > NORM_BOOKKEEPING_TOL:
        logger.warning(
            f"emitted + surviving probability drifted from 1 by {bookkeeping:.3g}"
        )

    sqrt_kappa = math.sqrt(params.kappa)
    G_norm = params.coupling_norm
    c_h, c_v = fine[:, H], fine[:, V]
    # combined output channel (g0·c_h + g1·c_v)/√(|g0|²+|g1|²)
    combined = (params.g0 * c_h + params.g1 * c_v) / G_norm
    end = fine[-1]
    residual = float(np.sum(np.abs(end[:EMITTED]) ** 2))
    emitted_h = float(trapezoid(params.kappa * np.abs(c_h) ** 2, profile.times))
    emitted_v = float(trapezoid(params.kappa * np.abs(c_v) ** 2, profile.times))
    branching = emitted_h / (emitted_h + emitted_v) if emitted_h + emitted_v > 0 else params.branching_h

    logger.debug(
        f"emission: p_c={p_fine:.6f} residual={residual:.3g} "
        f"bookkeeping={bookkeeping:.3g} steps={2 * (len(profile.times) - 1)}"
    )
    return EmissionResult(
        numeric_mode=TemporalMode(profile.times, sqrt_kappa * combined),
        p_c=p_fine,
        branching_h=branching,
        mode_h=TemporalMode(profile.times, sqrt_kappa * c_h),
        mode_v=TemporalMode(profile.times, sqrt_kappa * c_v),
        residual_population=residual,
        steps=2 * (len(profile.times) - 1),
        norm_drift=bookkeeping,
    )


def _inner(a: TemporalMode, b: TemporalMode) -> complex:
    return complex(trapezoid(np.conj(a.values) * b.values, a.times))


def mode_overlap(a: TemporalMode, b: TemporalMode) -> complex:
    """⟨a|b⟩/√(⟨a|a⟩⟨b|b⟩)."""
    if not a.same_grid(b):
        raise InvalidArgumentError("modes are sampled on different time grids")
    norm_a, norm_b = a.norm_squared(), b.norm_squared()
    if norm_a <= 0 or norm_b <= 0:
        raise InvalidArgumentError("mode overlap needs modes with nonzero norm")
    return _inner(a, b) / math.sqrt(norm_a * norm_b)


def relative_l2_error(numeric: TemporalMode, reference: TemporalMode) -> float:
    """‖e^{iφ}·numeric − reference‖₂ / ‖reference‖₂ with the best global phase φ."""
    if not numeric.same_grid(reference):
        raise InvalidArgumentError("modes are sampled on different time grids")
    ref_norm = reference.norm_squared()
    if ref_norm <= 0:
        raise InvalidArgumentError("reference mode is identically zero")
    cross = _inner(numeric, reference)
    phase = cross / abs(cross) if abs(cross) > 0 else 1.0
    diff = phase * numeric.values - reference.values
    return math.sqrt(float(trapezoid(np.abs(diff) ** 2, reference.times)) / ref_norm)


def delayed(mode: TemporalMode, delay) -> TemporalMode:
    """The same shape shifted later by `delay` seconds, zero-filled."""
    shifted = np.interp(mode.times - delay, mode.times, mode.values.real, left=0.0, right=0.0) \
        + 1j * np.interp(mode.times - delay, mode.times, mode.values.imag, left=0.0, right=0.0)
    return TemporalMode(mode.times, shifted)


def position_perturbed(profile: PulseProfile, params: CavityParams,
                       mode_amplitude=1.0, phase=0.0, pumping="collinear"):
    """Drive and couplings seen by an atom away from the antinode.

    collinear: Ω, g0 and g1 share the cavity mode function, so all three
        scale by the same real `mode_amplitude` (the pulse shape depends
        only on their ratios).
    transverse: Ω is untouched; g0 and g1 pick up a common phase e^{iφ}
        (travelling-wave or free-space position dependence).
    """
    if pumping == "collinear":
        if mode_amplitude <= 0:
            raise InvalidArgumentError("mode amplitude must be positive for collinear pumping")
        return profile.scaled(mode_amplitude), params.scaled(mode_amplitude)
    if pumping == "transverse":
        return profile, params.scaled(complex(math.cos(phase), math.sin(phase)))
    raise InvalidArgumentError(f"pumping must be 'collinear' or 'transverse', got {pumping!r}")
