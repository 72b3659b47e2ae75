"""Two-cavity service — heralded Bell pair from two single-atom cavities.

Each atom emits into its cavity, leaving (g0|0⟩|h⟩ + g1|1⟩|v⟩)/norm. The two
photons meet on a PBS; with the R(π/2) rotator on the R arm a coincidence
behind the PBS keeps only the |hv⟩, |vh⟩ terms, so

    (g0·g1'|01⟩|hv⟩ + g1·g0'|10⟩|vh⟩)        (atoms L⊗R, photons L⊗R)

is a four-particle GHZ-type state. Measuring both photons at ±45° then
heralds (|01⟩ ± |10⟩)/√2 on the atoms. Without the rotator the surviving
terms are |hh⟩, |vv⟩ and the heralded pair is (|00⟩ ± |11⟩)/√2.

Two-qubit vectors and matrices are ordered |00⟩, |01⟩, |10⟩, |11⟩ with the
L atom as the leading qubit.
"""

import logging
import math

import numpy as np

from app.errors import InfeasibleError, InvalidArgumentError
from app.models.cavity import AtomPhotonState, DetectionConfig, TwoCavityOutcome
from app.models.pulse import CavityParams, TemporalMode, trapezoid
from app.services import montecarlo_service

logger = logging.getLogger(__name__)

# Basis indices of the two-atom register
ATOM_00, ATOM_01, ATOM_10, ATOM_11 = range(4)

# Photon measurement bases: outcome label -> (⟨·|h⟩, ⟨·|v⟩) as a bra
PHOTON_BASES = {
    "hv": {"h": np.array([1.0, 0.0]), "v": np.array([0.0, 1.0])},
    "diag": {
        "+": np.array([1.0, 1.0]) / math.sqrt(2),
        "-": np.array([1.0, -1.0]) / math.sqrt(2),
    },
}

_NAMED_STATES = {
    "|01>": np.array([0, 1, 0, 0], dtype=complex),
    "|10>": np.array([0, 0, 1, 0], dtype=complex),
    "psi_plus": np.array([0, 1, 1, 0], dtype=complex) / math.sqrt(2),
    "psi_minus": np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2),
}


def cavity_emission_state(params: CavityParams) -> AtomPhotonState:
    """Atom-photon state left behind by a complete adiabatic emission."""
    norm = params.coupling_norm
    if norm == 0:
        raise InvalidArgumentError("both couplings are zero")
    return AtomPhotonState(params.g0 / norm, params.g1 / norm)


def _heralded_terms(left: AtomPhotonState, right: AtomPhotonState, rotate_R):
    """(atom index, amplitude) of the two terms a coincidence keeps."""
    if rotate_R:
        return (ATOM_01, left.amp_h * right.amp_v), (ATOM_10, left.amp_v * right.amp_h)
    return (ATOM_00, left.amp_h * right.amp_h), (ATOM_11, left.amp_v * right.amp_v)


def coincidence_project(
    left: AtomPhotonState,
    right: AtomPhotonState,
    overlap,
    config: DetectionConfig,
) -> TwoCavityOutcome:
    """Project on a coincidence and return the heralded two-atom state.

    `overlap` multiplies the coherence between the two heralded terms; it is
    1 for indistinguishable photons and 0 when the detection times reveal
    which cavity each photon came from. two_time_conditional_density gives
    its value for a pair of sampled temporal modes.

    Args:
        left: Atom-photon state of the left cavity.
        right: Atom-photon state of the right cavity.
        overlap: Complex coherence factor, |overlap| <= 1.
        config: Detection scheme, eta, rotate_R and minus_outcome.

    Returns:
        TwoCavityOutcome with the success probability, the normalized 4×4
        conditional density and its fidelity to the target Bell state.

    Raises:
        InvalidArgumentError: If |overlap| > 1.
        InfeasibleError: If no coincidence can occur for these couplings.
    """
    overlap = complex(overlap)
    if abs(overlap) > 1 + 1e-12:
        raise InvalidArgumentError(f"|overlap| must be <= 1, got {abs(overlap):.6g}")

    (i, a), (j, b) = _heralded_terms(left, right, config.rotate_R)
    p_projected = abs(a) ** 2 + abs(b) ** 2
    if p_projected == 0:
        raise InfeasibleError("a coincidence never occurs for these couplings")

    rho = np.zeros((4, 4), dtype=complex)
    rho[i, i] = abs(a) ** 2 / p_projected
    rho[j, j] = abs(b) ** 2 / p_projected
    rho[i, j] = overlap * a * b.conjugate() / p_projected
    rho[j, i] = rho[i, j].conjugate()

    # phase-matched target (|i⟩ + e^{iχ}|j⟩)/√2 maximizes the fidelity
    fidelity = 0.5 * (rho[i, i].real + rho[j, j].real) + abs(rho[i, j])
    success = p_projected * config.eta ** 2 * config.scheme_factor
    target = "psi_plus" if config.rotate_R else "phi_plus"
    logger.debug(
        f"coincidence: P_s={p_projected:.6g} success={success:.6g} fidelity={fidelity:.12f}"
    )
    return TwoCavityOutcome(
        success_probability=success,
        conditional_density=rho,
        bell_fidelity=min(1.0, fidelity),
        target=target,
    )


def success_probability(
    params_left: CavityParams, params_right: CavityParams, config: DetectionConfig
) -> float:
    """Heralding probability from per-arm branching ratios, η² and the scheme."""
    b_left, b_right = params_left.branching_h, params_right.branching_h
    if config.rotate_R:
        p_projected = b_left * (1 - b_right) + (1 - b_left) * b_right
    else:
        p_projected = b_left * b_right + (1 - b_left) * (1 - b_right)
    return p_projected * config.eta ** 2 * config.scheme_factor


def two_time_conditional_density(
    left: AtomPhotonState,
    right: AtomPhotonState,
    mode_left: TemporalMode,
    mode_right: TemporalMode,
    rotate_R=True,
) -> np.ndarray:
    """Heralded density from time-resolved detection, summed over times.

    Behind the PBS one photon reaches each detector. The |01⟩ term puts the
    L photon on detector 1 and the R photon on detector 2; the |10⟩ term
    swaps them. The joint amplitude at detection times (t1, t2) is
    therefore a·f_L(t1)f_R(t2)|01⟩ + b·f_R(t1)f_L(t2)|10⟩, and the
    conditional state is ∫∫|ψ(t1,t2)⟩⟨ψ(t1,t2)| on the sampled grid. For
    normalized modes the resulting coherence factor is |⟨f_L|f_R⟩|².
    """
    if not mode_left.same_grid(mode_right):
        raise InvalidArgumentError("modes are sampled on different time grids")
    times = mode_left.times
    f_left = mode_left.values / math.sqrt(mode_left.norm_squared())
    f_right = mode_right.values / math.sqrt(mode_right.norm_squared())
    (i, a), (j, b) = _heralded_terms(left, right, rotate_R)

    # trapezoid weights so that Σ w·F approximates ∫F
    dt = np.diff(times)
    weights = np.zeros(len(times))
    weights[:-1] += 0.5 * dt
    weights[1:] += 0.5 * dt
    w2 = weights[:, None] * weights[None, :]

    psi_i = a * np.outer(f_left, f_right)
    psi_j = b * np.outer(f_right, f_left)
    rho = np.zeros((4, 4), dtype=complex)
    rho[i, i] = np.sum(w2 * np.abs(psi_i) ** 2)
    rho[j, j] = np.sum(w2 * np.abs(psi_j) ** 2)
    rho[i, j] = np.sum(w2 * psi_i * psi_j.conj())
    rho[j, i] = rho[i, j].conjugate()
    return rho / np.trace(rho).real


def interference_visibility(mode_left: TemporalMode, mode_right: TemporalMode) -> float:
    """|⟨f_L|f_R⟩|², the coherence factor that enters coincidence_project."""
    inner = trapezoid(np.conj(mode_left.values) * mode_right.values, mode_left.times)
    return float(abs(inner) ** 2 / (mode_left.norm_squared() * mode_right.norm_squared()))


# --- Monte Carlo ---

def _two_cavity_worker(payload, n_trials, seed_seq, batch_size):
    b_left, b_right, eta, rotate_R, scheme, minus_outcome = payload
    rng = np.random.default_rng(seed_seq)
    counts = {"successes": 0, "plus": 0, "minus": 0, "coincidences": 0}
    for size in montecarlo_service.batches(n_trials, batch_size):
        left_h = rng.random(size) < b_left
        right_h = rng.random(size) < b_right
        survived = (rng.random(size) < eta) & (rng.random(size) < eta)
        plus_left = rng.random(size) < 0.5
        plus_right = rng.random(size) < 0.5

        projected = (left_h != right_h) if rotate_R else (left_h == right_h)
        coincidence = survived & projected
        same_sign = plus_left == plus_right
        if scheme == "polarizer45":
            accepted = coincidence & plus_left & plus_right
        elif minus_outcome == "discard":
            accepted = coincidence & same_sign
        else:
            accepted = coincidence

        counts["coincidences"] += int(np.count_nonzero(coincidence))
        counts["successes"] += int(np.count_nonzero(accepted))
        counts["plus"] += int(np.count_nonzero(accepted & same_sign))
        counts["minus"] += int(np.count_nonzero(accepted & ~same_sign))
    return counts


def monte_carlo_two_cavity(
    params_left: CavityParams,
    params_right: CavityParams,
    config: DetectionConfig,
    trials,
    seed,
    partitions=8,
    jobs=1,
    batch_size=200_000,
):
    """Sample branchings, photon losses and polarizer outcomes per trial.

    Returns {trials, successes, rate, stderr, tally} where tally counts the
    heralded + Bell state and the − state (phase-flipped when the scheme
    keeps it).
    """
    payload = (
        params_left.branching_h,
        params_right.branching_h,
        config.eta,
        config.rotate_R,
        config.scheme,
        config.minus_outcome,
    )
    counts = montecarlo_service.run_partitioned(
        _two_cavity_worker, payload, trials, seed,
        partitions=partitions, jobs=jobs, batch_size=batch_size,
    )
    rate, stderr = montecarlo_service.proportion(counts["successes"], trials)
    logger.info(
        f"two-cavity Monte Carlo: {counts['successes']}/{trials} heralded "
        f"(rate={rate:.6f} ± {stderr:.2g})"
    )
    return {
        "trials": trials,
        "successes": counts["successes"],
        "rate": rate,
        "stderr": stderr,
        "tally": {"plus": counts["plus"], "minus": counts["minus"]},
    }


# --- GHZ structure ---

def ghz_effective_state() -> np.ndarray:
    """Ideal post-PBS state as a (2, 2, 2, 2) array over (atom L, atom R, photon L, photon R)."""
    psi = np.zeros((2, 2, 2, 2), dtype=complex)
    # photon index 0 = h, 1 = v
    psi[0, 1, 0, 1] = 1 / math.sqrt(2)
    psi[1, 0, 1, 0] = 1 / math.sqrt(2)
    return psi


def _label_of(atoms):
    for name, reference in _NAMED_STATES.items():
        if abs(abs(np.vdot(reference, atoms)) - 1) < 1e-12:
            return name
    return "other"


def polarization_basis_outcome(basis_left, basis_right):
    """Joint photon outcome table and the atom state each outcome heralds.

    Returns a list of {outcome: [o_L, o_R], probability, atom_state, label}
    with atom_state a normalized 4-vector and label one of |01>, |10>,
    psi_plus, psi_minus (zero-probability outcomes carry neither).
    """
    for basis in (basis_left, basis_right):
        if basis not in PHOTON_BASES:
            raise InvalidArgumentError(f"basis must be 'hv' or 'diag', got {basis!r}")
    psi = ghz_effective_state()
    rows = []
    for out_left, bra_left in PHOTON_BASES[basis_left].items():
        for out_right, bra_right in PHOTON_BASES[basis_right].items():
            atoms = np.einsum("abcd,c,d->ab", psi, bra_left.conj(), bra_right.conj()).reshape(4)
            probability = float(np.vdot(atoms, atoms).real)
            row = {"outcome": [out_left, out_right], "probability": probability}
            if probability > 1e-15:
                atoms = atoms / math.sqrt(probability)
                row["atom_state"] = atoms
                row["label"] = _label_of(atoms)
            else:
                row["atom_state"] = None
                row["label"] = None
            rows.append(row)
    return rows
