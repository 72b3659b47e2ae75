"""Verify service — symmetric algebra against the brute-force oracle.

Each check returns {"name", "n_atoms", "max_error", "passed"}. The
`verify` command runs them all for N_a up to a chosen size; the test
suite calls them directly.
"""

import logging

import numpy as np

from app.models.state import CollectiveOp, DickeIndex, SymmetricState
from app.models.synthesis import TargetSuperposition
from app.services import oracle_service
from app.services.dicke_service import (
    S0,
    S1,
    apply_collective,
    dicke_norm_coeff,
    dicke_state,
    fidelity,
    ground_state,
)
from app.services.synthesis_service import excitation_operator, synthesize

logger = logging.getLogger(__name__)

ORACLE_TOL = 1e-10
ROUND_TRIP_TOL = 1e-8


def _result(name, n_atoms, max_error, tol):
    return {"name": name, "n_atoms": n_atoms, "max_error": float(max_error), "passed": bool(max_error <= tol)}


def _oracle_string(n_atoms, ops):
    full = oracle_service.oracle_expand(ground_state(n_atoms))
    for op in ops:
        full = oracle_service.oracle_apply(full, op)
    return full


def random_symmetric_state(n_atoms, rng) -> SymmetricState:
    """Random complex amplitudes on every (n0, n1) key."""
    amps = {}
    for n0 in range(n_atoms + 1):
        for n1 in range(n_atoms + 1 - n0):
            amps[(n0, n1)] = complex(rng.normal(), rng.normal())
    return SymmetricState(n_atoms, amps)


def random_target(n_atoms, rng) -> TargetSuperposition:
    raw = rng.normal(size=n_atoms + 1) + 1j * rng.normal(size=n_atoms + 1)
    return TargetSuperposition.from_unnormalized(raw)


def check_norm_coeffs(n_atoms):
    """c(n_h)·‖(s0†)^{n_h}(s1†)^{N−n_h}|G⟩‖ = 1 on the oracle."""
    worst = 0.0
    for n_h in range(n_atoms + 1):
        idx = DickeIndex(n_atoms, n_h)
        raw = _oracle_string(n_atoms, [S0] * n_h + [S1] * idx.n_v)
        worst = max(worst, abs(dicke_norm_coeff(idx) * raw.norm() - 1.0))
    return _result("dicke_norm_coeff", n_atoms, worst, ORACLE_TOL)


def check_dicke_states(n_atoms):
    """dicke_state expanded equals c·(raw operator string) on the oracle."""
    worst = 0.0
    for n_h in range(n_atoms + 1):
        idx = DickeIndex(n_atoms, n_h)
        expanded = oracle_service.oracle_expand(dicke_state(idx))
        raw = _oracle_string(n_atoms, [S0] * n_h + [S1] * idx.n_v)
        diff = expanded.amplitudes - dicke_norm_coeff(idx) * raw.amplitudes
        worst = max(worst, float(np.max(np.abs(diff))))
    return _result("dicke_state", n_atoms, worst, ORACLE_TOL)


def check_apply_collective(n_atoms, rng, samples=5):
    """expand(apply(ψ)) == oracle_apply(expand(ψ)) for random ψ and operators."""
    worst = 0.0
    for _ in range(samples):
        state = random_symmetric_state(n_atoms, rng)
        op = CollectiveOp(complex(rng.normal(), rng.normal()), complex(rng.normal(), rng.normal()))
        symmetric = oracle_service.oracle_expand(apply_collective(state, op))
        brute = oracle_service.oracle_apply(oracle_service.oracle_expand(state), op)
        scale = max(1.0, float(np.max(np.abs(brute.amplitudes))))
        worst = max(worst, float(np.max(np.abs(symmetric.amplitudes - brute.amplitudes))) / scale)
    return _result("apply_collective", n_atoms, worst, ORACLE_TOL)


def check_round_trip(n_atoms, rng, count=100, use_oracle=True):
    """Random targets synthesize to fidelity ≥ 1 − 1e-8, re-checked on the oracle."""
    worst = 0.0
    for _ in range(count):
        target = random_target(n_atoms, rng)
        plan = synthesize(target)
        if use_oracle:
            full = _oracle_string(n_atoms, [excitation_operator(s) for s in plan.settings])
            reference = oracle_service.oracle_expand(target.to_state())
            overlap = oracle_service.oracle_inner(reference, full)
            achieved = abs(overlap) ** 2 / (full.norm() ** 2 * reference.norm() ** 2)
        else:
            achieved = fidelity(plan.predicted_state, target.to_state())
        worst = max(worst, 1.0 - achieved)
    return _result("synthesis_round_trip", n_atoms, worst, ROUND_TRIP_TOL)


def run_all(max_atoms, rng, round_trip_count=100, oracle_max_atoms=6):
    """Every check for N_a = 1..max_atoms; the oracle is skipped above oracle_max_atoms."""
    results = []
    for n in range(1, max_atoms + 1):
        if n <= oracle_max_atoms:
            results.append(check_norm_coeffs(n))
            results.append(check_dicke_states(n))
            results.append(check_apply_collective(n, rng))
        if n >= 2:
            results.append(check_round_trip(n, rng, round_trip_count, use_oracle=n <= oracle_max_atoms))
    failed = [r for r in results if not r["passed"]]
    for r in failed:
        logger.warning(f"check {r['name']} failed at N_a={r['n_atoms']}: error {r['max_error']:.3g}")
    logger.info(f"verification: {len(results) - len(failed)}/{len(results)} checks passed")
    return results
