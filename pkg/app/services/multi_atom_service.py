"""Multi-atom service — Dicke states heralded by M weak driving pulses.

All N_a atoms share one cavity. Each pulse transfers a fraction of the
ground population, so every atom emits one photon into one of M pulses and
one of two polarizations: 2M distinguishable (pulse, detector) bins. With
threshold detectors a run shows N_a clicks exactly when every photon
survives and all photons landed in distinct bins; the click pattern then
names the product of collective operators that prepared the atoms.

- Analytic chain: p_si, p_succ, p_nh, p_en (independent-bin forms) plus
  the exact finite-M distribution exact_p_nh / exact_p_en
- simulate_run: one trial, returning a RunOutcome with the heralded state
- estimate_probabilities: vectorized partitioned Monte Carlo
- repeat_cost: expected wall time until the first entangled outcome
"""

import logging
import math

import numpy as np

from app.errors import InfeasibleError, InvalidArgumentError
from app.models.protocol import ClickRecord, ProtocolConfig, RunOutcome
from app.models.state import CollectiveOp
from app.models.synthesis import RotatorSetting
from app.services import montecarlo_service
from app.services.dicke_service import apply_sequence, ground_state, normalize
from app.services.synthesis_service import excitation_operator, rotator_matrix

logger = logging.getLogger(__name__)

DETECTORS = ("h", "v")

# |b − 1/2| above this makes the independent-bin p_nh / p_en invalid
BALANCED_TOL = 1e-9


# --- Analytic probabilities ---

def _check_counts(n_atoms, n_pulses):
    if n_atoms < 1:
        raise InvalidArgumentError(f"n_atoms must be >= 1, got {n_atoms}")
    if n_pulses < 1 or 2 * n_pulses < n_atoms:
        raise InvalidArgumentError(
            f"need 2M >= N_a, got M={n_pulses}, N_a={n_atoms}"
        )


def _check_eta(eta):
    if not 0.0 <= eta <= 1.0:
        raise InvalidArgumentError(f"eta must be in [0, 1], got {eta}")


def is_balanced(branching_h):
    return abs(branching_h - 0.5) <= BALANCED_TOL


def _check_balanced(branching_h):
    if not is_balanced(branching_h):
        raise InvalidArgumentError(
            f"independent-bin formula needs branching_h = 1/2 (g0 ≈ g1), got {branching_h}; "
            "use exact_p_nh / exact_p_en"
        )


def falling_factorial_ratio(n, k):
    """(n)_k / n^k = Π_{j<k} (n − j)/n."""
    product = 1.0
    for j in range(k):
        product *= (n - j) / n
    return product


def analytic_p_si(n_atoms, n_pulses):
    """Probability that N_a photons take N_a distinct paths out of 2M."""
    _check_counts(n_atoms, n_pulses)
    return falling_factorial_ratio(2 * n_pulses, n_atoms)


def analytic_p_succ(n_atoms, n_pulses, eta):
    _check_eta(eta)
    return eta ** n_atoms * analytic_p_si(n_atoms, n_pulses)


def analytic_p_nh(n_atoms, n_pulses, eta, n_h, branching_h=0.5):
    """Probability of a post-selected record with n_h h-clicks, p_succ·C(N_a, n_h)/2^{N_a}.

    Args:
        n_atoms: Number of atoms N_a.
        n_pulses: Number of driving pulses M (2M >= N_a).
        eta: Per-photon detection efficiency in [0, 1].
        n_h: Number of h-detector clicks, 0..N_a.
        branching_h: h-branching of each photon; the formula holds only at 1/2.

    Returns:
        The probability as a float.

    Raises:
        InvalidArgumentError: If n_h is out of range or branching_h is not 1/2.
    """
    _check_balanced(branching_h)
    if not 0 <= n_h <= n_atoms:
        raise InvalidArgumentError(f"n_h must be in 0..{n_atoms}, got {n_h}")
    return analytic_p_succ(n_atoms, n_pulses, eta) * math.comb(n_atoms, n_h) / 2 ** n_atoms


def analytic_p_en(n_atoms, n_pulses, eta, branching_h=0.5):
    """p_succ·(1 − 2^{1−N_a}): every outcome except n_h ∈ {0, N_a}.

    Raises:
        InvalidArgumentError: If branching_h is not 1/2.
    """
    _check_balanced(branching_h)
    return analytic_p_succ(n_atoms, n_pulses, eta) * (1.0 - 2.0 ** (1 - n_atoms))


def exact_p_nh(n_atoms, n_pulses, eta, n_h, branching_h=0.5):
    """Exact probability of the (n_h, N_a − n_h) record in the 2M-path model.

    n_h photons must land in distinct h bins and the rest in distinct v
    bins: η^{N_a}·C(N_a,n_h)·b^{n_h}(1−b)^{N_a−n_h}·(M)_{n_h}(M)_{N_a−n_h}/M^{N_a}.
    """
    _check_counts(n_atoms, n_pulses)
    _check_eta(eta)
    if not 0 <= n_h <= n_atoms:
        raise InvalidArgumentError(f"n_h must be in 0..{n_atoms}, got {n_h}")
    n_v = n_atoms - n_h
    if n_h > n_pulses or n_v > n_pulses:
        return 0.0
    return (
        eta ** n_atoms
        * math.comb(n_atoms, n_h)
        * branching_h ** n_h
        * (1 - branching_h) ** n_v
        * falling_factorial_ratio(n_pulses, n_h)
        * falling_factorial_ratio(n_pulses, n_v)
    )


def exact_p_en(n_atoms, n_pulses, eta, branching_h=0.5):
    return math.fsum(
        exact_p_nh(n_atoms, n_pulses, eta, n_h, branching_h) for n_h in range(1, n_atoms)
    )


def stepwise_transfer_fractions(n_pulses):
    """Share of the remaining ground population each pulse must transfer.

    Pulse m (1-based) moves 1/(M − m + 1) of what is left, so every pulse
    moves 1/M of the initial population.
    """
    if n_pulses < 1:
        raise InvalidArgumentError(f"n_pulses must be >= 1, got {n_pulses}")
    return [1.0 / (n_pulses - m + 1) for m in range(1, n_pulses + 1)]


def expected_photons_per_pulse(n_atoms, n_pulses):
    _check_counts(n_atoms, n_pulses)
    return n_atoms / n_pulses


# --- Monte Carlo ---

def rotated_branching(branching_h, setting: RotatorSetting = None):
    """Probability a photon leaves the rotator h-polarized.

    The emitted polarization is h with probability `branching_h`, else v;
    each is mapped through the rotator unitary and read on the h port.
    """
    if setting is None:
        return branching_h
    to_h = np.abs(rotator_matrix(setting.theta, setting.phi)[0]) ** 2
    return float(branching_h * to_h[0] + (1 - branching_h) * to_h[1])


def click_operator(setting: RotatorSetting, detector):
    """Collective operator heralded by a click on `detector` behind `setting`."""
    if setting is None:
        return CollectiveOp.raising(DETECTORS.index(detector))
    return excitation_operator(
        RotatorSetting(setting.theta, setting.phi, designated_detector=detector)
    )


def heralded_state(config: ProtocolConfig, events):
    """Normalized product of click operators, applied to |G⟩ in click order."""
    ops = [click_operator(config.rotator(m), d) for m, d in events]
    return normalize(apply_sequence(ground_state(config.n_atoms), ops))


def _pulse_branching(config: ProtocolConfig):
    """Post-rotator h probability per pulse, index 0 = pulse 1."""
    return np.array([
        rotated_branching(config.branching_h, config.rotator(m))
        for m in range(1, config.n_pulses + 1)
    ])


def sample_bins(config: ProtocolConfig, rng, size):
    """(size, N_a) bin indices, or −1 for a lost photon; bin = 2·(m−1) + (0 h | 1 v)."""
    pulses = rng.integers(0, config.n_pulses, size=(size, config.n_atoms))
    p_h = _pulse_branching(config)[pulses]
    is_v = (rng.random((size, config.n_atoms)) >= p_h).astype(np.int64)
    survived = rng.random((size, config.n_atoms)) < config.eta
    return np.where(survived, 2 * pulses + is_v, -1)


def _distinct_clicks(bins):
    """Number of distinct nonnegative bins per row."""
    ordered = np.sort(bins, axis=1)
    fresh = np.ones_like(ordered, dtype=bool)
    fresh[:, 1:] = ordered[:, 1:] != ordered[:, :-1]
    return np.count_nonzero(fresh & (ordered >= 0), axis=1)


def _events_of(bins):
    """Click events of one row, ordered by (pulse, detector)."""
    return [(b // 2 + 1, DETECTORS[b % 2]) for b in sorted(set(int(x) for x in bins if x >= 0))]


def simulate_run(config: ProtocolConfig, rng) -> RunOutcome:
    """One M-pulse sequence: click record, post-selection and heralded state."""
    bins = sample_bins(config, rng, 1)[0]
    events = _events_of(bins)
    clicks = ClickRecord.from_events(events)
    post_selected = clicks.total == config.n_atoms

    all_survived = bool(np.all(bins >= 0))
    all_distinct = len(set(bins.tolist())) == config.n_atoms
    if post_selected != (all_survived and all_distinct):
        raise AssertionError(f"click count disagrees with photon paths: {bins.tolist()}")

    state = heralded_state(config, events) if post_selected else None
    return RunOutcome(clicks=clicks, post_selected=post_selected, conditional_state=state)


def _multi_atom_worker(payload, n_trials, seed_seq, batch_size):
    config = ProtocolConfig.from_dict(payload)
    rng = np.random.default_rng(seed_seq)
    histogram = [0] * (config.n_atoms + 1)
    accepted = 0
    for size in montecarlo_service.batches(n_trials, batch_size):
        bins = sample_bins(config, rng, size)
        clicks = _distinct_clicks(bins)
        lemma = np.all(bins >= 0, axis=1) & (clicks == config.n_atoms)
        post_selected = clicks == config.n_atoms
        if not np.array_equal(lemma, post_selected):
            raise AssertionError("N_a clicks without N_a distinct surviving photons")
        n_h = np.count_nonzero((bins % 2 == 0) & (bins >= 0), axis=1)[post_selected]
        counts = np.bincount(n_h, minlength=config.n_atoms + 1)
        histogram = [a + int(b) for a, b in zip(histogram, counts)]
        accepted += int(np.count_nonzero(post_selected))
    return {"post_selected": accepted, "histogram": histogram}


def estimate_probabilities(config: ProtocolConfig, trials, partitions=8, jobs=1,
                           batch_size=200_000):
    """Empirical p_succ, p_nh and p_en with standard errors.

    Deterministic for fixed (config.seed, partitions).

    Args:
        config: Protocol, including the root seed.
        trials: Number of M-pulse sequences to sample.
        partitions: Width of the seed tree.
        jobs: Worker processes.
        batch_size: Trials per vectorised batch.

    Returns:
        Dict with trials, seed, p_succ, p_en (each with a stderr), the
        per-n_h table p_nh and the raw post-selected histogram.
    """
    counts = montecarlo_service.run_partitioned(
        _multi_atom_worker, config.to_dict(), trials, config.seed,
        partitions=partitions, jobs=jobs, batch_size=batch_size,
    )
    histogram = counts["histogram"]
    p_succ, se_succ = montecarlo_service.proportion(counts["post_selected"], trials)
    p_nh = []
    for n_h, count in enumerate(histogram):
        rate, stderr = montecarlo_service.proportion(count, trials)
        p_nh.append({"n_h": n_h, "count": count, "p": rate, "stderr": stderr})
    entangled = sum(histogram[1:-1]) if config.n_atoms > 1 else 0
    p_en, se_en = montecarlo_service.proportion(entangled, trials)
    logger.info(
        f"multi-atom Monte Carlo N_a={config.n_atoms} M={config.n_pulses}: "
        f"p_succ={p_succ:.6f} p_en={p_en:.6f} over {trials} trials"
    )
    return {
        "trials": trials,
        "seed": config.seed,
        "p_succ": p_succ,
        "p_succ_stderr": se_succ,
        "p_en": p_en,
        "p_en_stderr": se_en,
        "p_nh": p_nh,
        "histogram": histogram,
    }


def collect_heralded(config: ProtocolConfig, n_accepted, rng, max_trials=10_000_000):
    """Run single trials until `n_accepted` are post-selected; return their outcomes."""
    outcomes = []
    for _ in range(max_trials):
        outcome = simulate_run(config, rng)
        if outcome.post_selected:
            outcomes.append(outcome)
            if len(outcomes) == n_accepted:
                return outcomes
    raise InfeasibleError(
        f"only {len(outcomes)} of {n_accepted} heralded runs after {max_trials} trials"
    )


def repeat_cost(config: ProtocolConfig, pulse_duration):
    """Expected cost of repeating the M-pulse sequence until an entangled herald.

    Uses the independent-bin p_en at branching 1/2 and the exact finite-M
    p_en for any other branching.

    Args:
        config: Protocol (N_a, M, eta, branching_h).
        pulse_duration: Duration Δt of one driving pulse, seconds.

    Returns:
        (total seconds M·Δt/p_en, expected repetitions 1/p_en).

    Raises:
        InvalidArgumentError: If pulse_duration is not positive.
        InfeasibleError: If p_en = 0.
    """
    if pulse_duration <= 0:
        raise InvalidArgumentError("pulse duration must be positive")
    if is_balanced(config.branching_h):
        p_en = analytic_p_en(config.n_atoms, config.n_pulses, config.eta)
    else:
        p_en = exact_p_en(config.n_atoms, config.n_pulses, config.eta, config.branching_h)
    if p_en <= 0:
        raise InfeasibleError(
            f"p_en = 0 for N_a={config.n_atoms}, eta={config.eta}: never entangled"
        )
    return config.n_pulses * pulse_duration / p_en, 1.0 / p_en
