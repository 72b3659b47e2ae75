"""Synthesis service — rotator settings that herald an arbitrary symmetric state.

A target Σ b(n)|N_a, n⟩ equals Σ a_n (s0†)^n (s1†)^{N_a−n}|G⟩ with
a_n = c(n)·b(n). Commuting collective operators factor like a polynomial
in x = s0†/s1†, so each root r of Σ a_n x^n gives one factor (s0† − r·s1†),
and every missing top degree contributes a bare s1† (a root at infinity).
A rotator R(θ, φ) in front of the h detector turns a click into
cosθ·s0† − sinθ·e^{iφ}·s1†, which matches (s0† − r·s1†) for θ = arctan|r|,
φ = arg r.
"""

import cmath
import logging
import math

import numpy as np

from app.config import Config
from app.errors import InvalidArgumentError, NumericFailureError
from app.models.protocol import ProtocolConfig
from app.models.state import CollectiveOp, DickeIndex
from app.models.synthesis import (
    IDENTITY_ROTATOR,
    ProjectiveRoot,
    RotatorSetting,
    SynthesisPlan,
    TargetSuperposition,
)
from app.services import montecarlo_service
from app.services.dicke_service import (
    apply_sequence,
    dicke_norm_coeff,
    fidelity,
    ground_state,
    normalize,
)

logger = logging.getLogger(__name__)

NEWTON_MAX_ITER = 50
ROUND_TRIP_TOL = 1e-8


def excitation_operator(setting: RotatorSetting) -> CollectiveOp:
    """Collective operator heralded by a click on the designated detector."""
    cos_t, sin_t = math.cos(setting.theta), math.sin(setting.theta)
    if setting.theta == math.pi / 2:
        cos_t = 0.0
    if setting.mu == 0:
        return CollectiveOp(cos_t, -sin_t * cmath.exp(1j * setting.phi))
    return CollectiveOp(sin_t * cmath.exp(-1j * setting.phi), cos_t)


def rotator_matrix(theta, phi) -> np.ndarray:
    """2×2 unitary on (h, v) amplitudes; columns are the images of |h⟩ and |v⟩."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([
        [c, -s * cmath.exp(-1j * phi)],
        [s * cmath.exp(1j * phi), c],
    ])


def coefficients_to_polynomial(target: TargetSuperposition) -> list:
    """a_n = c(n)·b(n), ascending in n; not divided by the leading term."""
    n = target.n_atoms
    coeffs = [dicke_norm_coeff(DickeIndex(n, k)) * b for k, b in enumerate(target.coefficients)]
    if all(a == 0 for a in coeffs):
        raise InvalidArgumentError("all-zero target")
    return coeffs


def _companion_roots(monic_tail):
    """Eigenvalues of the companion matrix of x^d + Σ_{k<d} c_k x^k."""
    d = len(monic_tail)
    companion = np.zeros((d, d), dtype=complex)
    companion[1:, :-1] = np.eye(d - 1)
    companion[:, -1] = -np.asarray(monic_tail)
    return np.linalg.eigvals(companion)


def polynomial_roots(coeffs, tol=None) -> list:
    """All N_a projective roots of Σ a_n x^n (coefficients ascending).

    Finite roots are companion-matrix eigenvalues, polished by Newton until
    |p(r)| ≤ tol·max|a|·max(1, |r|)^d; N_a − d roots sit at infinity.

    Args:
        coeffs: a_0..a_N, lowest degree first.
        tol: Residual tolerance after scaling max|a| = 1; defaults to
            Config.ROOT_TOL.

    Returns:
        List of N_a ProjectiveRoot, finite roots first.

    Raises:
        InvalidArgumentError: If fewer than two or all-zero coefficients.
        NumericFailureError: If a polished root misses the residual bound.
    """
    if tol is None:
        tol = Config.ROOT_TOL
    a = np.asarray(coeffs, dtype=complex)
    if a.ndim != 1 or len(a) < 2:
        raise InvalidArgumentError("need at least two coefficients")
    scale = float(np.max(np.abs(a)))
    if scale == 0:
        raise InvalidArgumentError("zero polynomial has no roots")
    a = a / scale
    n_roots = len(a) - 1
    degree = int(np.max(np.nonzero(a)[0]))

    roots = []
    if degree > 0:
        descending = a[degree::-1]
        derivative = np.polyder(descending)
        for guess in _companion_roots(a[:degree] / a[degree]):
            roots.append(_polish(guess, descending, derivative, degree, tol))
    roots += [ProjectiveRoot.infinite()] * (n_roots - degree)
    logger.debug(f"polynomial of degree {degree}: {n_roots - degree} roots at infinity")
    return roots


def _residual_bound(r, degree, tol):
    return tol * max(1.0, abs(r)) ** degree


def _polish(guess, descending, derivative, degree, tol):
    best = complex(guess)
    best_residual = abs(np.polyval(descending, best))
    r = best
    for iteration in range(NEWTON_MAX_ITER):
        if best_residual <= _residual_bound(best, degree, tol) * 1e-3:
            break
        slope = np.polyval(derivative, r)
        if slope == 0:
            break
        r = r - np.polyval(descending, r) / slope
        residual = abs(np.polyval(descending, r))
        if not np.isfinite(residual):
            break
        if residual < best_residual:
            best, best_residual = complex(r), residual

    bound = _residual_bound(best, degree, tol)
    if best_residual > bound:
        raise NumericFailureError(
            f"root {best:.6g} polished to residual {best_residual:.3g} > bound {bound:.3g}",
            diagnostics={
                "root": [best.real, best.imag],
                "residual": float(best_residual),
                "bound": float(bound),
                "degree": degree,
            },
        )
    if best_residual > 0.1 * bound:
        logger.warning(f"root {best:.6g} is within 10x of the residual bound")
    return ProjectiveRoot(best)


def _wrap_phase(phi):
    """Map an angle into (−π, π]."""
    while phi <= -math.pi:
        phi += 2 * math.pi
    while phi > math.pi:
        phi -= 2 * math.pi
    return phi


def roots_to_settings(roots) -> list:
    """One h-designated RotatorSetting per root."""
    settings = []
    for root in roots:
        if root.is_infinite:
            settings.append(RotatorSetting(theta=math.pi / 2, phi=0.0, designated_detector="h"))
        elif root.value == 0:
            settings.append(RotatorSetting(theta=0.0, phi=0.0, designated_detector="h"))
        else:
            settings.append(RotatorSetting(
                theta=math.atan(abs(root.value)),
                phi=_wrap_phase(cmath.phase(root.value)),
                designated_detector="h",
            ))
    return settings


def predicted_state(n_atoms, settings):
    """Normalized Π excitation_operator(setting)|G⟩."""
    ops = [excitation_operator(s) for s in settings]
    return normalize(apply_sequence(ground_state(n_atoms), ops))


def synthesize(target: TargetSuperposition, n_pulses=None, tol=None) -> SynthesisPlan:
    """Rotator settings that herald `target`.

    Args:
        target: Normalized symmetric superposition Σ b(n)|N_a, n⟩.
        n_pulses: Pulses M in the protocol; settings fill 1..N_a and any
            further pulses carry identity rotators. None means M = N_a.
        tol: Root residual tolerance; defaults to Config.ROOT_TOL.

    Returns:
        SynthesisPlan with settings, roots and the predicted state.

    Raises:
        InvalidArgumentError: If n_pulses < N_a.
        NumericFailureError: If root polishing fails or the predicted state
            misses the target by more than 1e-8 in fidelity.
    """
    n = target.n_atoms
    if n_pulses is not None and n_pulses < n:
        raise InvalidArgumentError(f"need M >= N_a pulses, got M={n_pulses}, N_a={n}")
    coeffs = coefficients_to_polynomial(target)
    roots = polynomial_roots(coeffs, tol)
    settings = roots_to_settings(roots)
    state = predicted_state(n, settings)

    achieved = fidelity(state, target.to_state())
    if achieved < 1 - ROUND_TRIP_TOL:
        raise NumericFailureError(
            f"synthesized state misses the target: fidelity {achieved:.12f}",
            diagnostics={"fidelity": achieved, "n_atoms": n},
        )
    logger.info(f"synthesized N_a={n} target: fidelity={achieved:.12f}")
    return SynthesisPlan(
        settings=settings,
        residual_pulses=(n_pulses - n) if n_pulses is not None else 0,
        predicted_state=state,
        roots=roots,
    )


# --- Heralding the plan ---

def plan_protocol(plan: SynthesisPlan, config: ProtocolConfig) -> ProtocolConfig:
    """`config` with the plan's rotators on pulses 1..N_a and identity after."""
    if config.n_atoms != plan.n_atoms:
        raise InvalidArgumentError(
            f"plan is for {plan.n_atoms} atoms, config has {config.n_atoms}"
        )
    if config.n_pulses < plan.n_atoms:
        raise InvalidArgumentError(
            f"need M >= N_a pulses, got M={config.n_pulses}, N_a={plan.n_atoms}"
        )
    rotators = list(plan.settings) + [IDENTITY_ROTATOR] * (config.n_pulses - plan.n_atoms)
    return ProtocolConfig(
        n_atoms=config.n_atoms,
        n_pulses=config.n_pulses,
        eta=config.eta,
        branching_h=config.branching_h,
        rotators=tuple(rotators),
        seed=config.seed,
    )


def designated_events(plan: SynthesisPlan):
    """[(pulse, detector)] the plan post-selects on."""
    return [(m, s.designated_detector) for m, s in enumerate(plan.settings, start=1)]


def _designated_bins(plan: SynthesisPlan):
    return sorted(2 * (m - 1) + s.mu for m, s in enumerate(plan.settings, start=1))


def _plan_worker(payload, n_trials, seed_seq, batch_size):
    from app.services.multi_atom_service import sample_bins

    config = ProtocolConfig.from_dict(payload["config"])
    wanted = np.array(payload["bins"])
    rng = np.random.default_rng(seed_seq)
    accepted = 0
    for size in montecarlo_service.batches(n_trials, batch_size):
        bins = np.sort(sample_bins(config, rng, size), axis=1)
        accepted += int(np.count_nonzero(np.all(bins == wanted, axis=1)))
    return {"accepted": accepted}


def plan_success_probability(plan: SynthesisPlan, config: ProtocolConfig, trials,
                             partitions=8, jobs=1, batch_size=200_000):
    """Monte Carlo rate of the designated click pattern and its heralded fidelity.

    Args:
        plan: Synthesis plan whose settings sit on pulses 1..N_a.
        config: Protocol (M, eta, branching_h, seed); its rotators are replaced.
        trials: Monte Carlo trials.

    Returns:
        Dict with trials, accepted, rate, stderr and heralded_fidelity.

    Raises:
        InvalidArgumentError: If config has fewer pulses than the plan needs.
    """
    from app.services.multi_atom_service import heralded_state

    protocol = plan_protocol(plan, config)
    payload = {"config": protocol.to_dict(), "bins": _designated_bins(plan)}
    counts = montecarlo_service.run_partitioned(
        _plan_worker, payload, trials, protocol.seed,
        partitions=partitions, jobs=jobs, batch_size=batch_size,
    )
    rate, stderr = montecarlo_service.proportion(counts["accepted"], trials)
    # every accepted trial shows the same pattern, so it heralds one state
    heralded = heralded_state(protocol, designated_events(plan))
    heralded_fidelity = fidelity(heralded, plan.predicted_state)
    logger.info(
        f"plan Monte Carlo: {counts['accepted']}/{trials} accepted, "
        f"heralded fidelity {heralded_fidelity:.12f}"
    )
    return {
        "trials": trials,
        "accepted": counts["accepted"],
        "rate": rate,
        "stderr": stderr,
        "heralded_fidelity": heralded_fidelity,
    }
