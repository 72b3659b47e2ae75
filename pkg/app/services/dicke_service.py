"""Dicke service — exact algebra on the symmetric subspace of N_a atoms.

Basis vectors are the unit-normalized fully symmetric states labelled by
the occupations (n_g, n0, n1); keys store (n0, n1), n_g is implicit.
The collective raising operators act as bosonic hops out of the g mode:

    s0†: (n0, n1) -> √((n0 + 1)·n_g) · (n0 + 1, n1)
    s1†: (n0, n1) -> √((n1 + 1)·n_g) · (n0, n1 + 1)

These matrix elements are checked against the tensor-product oracle in
tests/test_dicke.py. All functions are pure; states are immutable.
"""

import logging
import math
from collections import defaultdict

import numpy as np
from scipy.special import gammaln

from app.errors import (
    DegenerateStateError,
    InvalidArgumentError,
    RaisingOnFullError,
)
from app.models.state import CollectiveOp, DickeIndex, SymmetricState

logger = logging.getLogger(__name__)

# Exact integer factorials up to here, log-gamma above.
EXACT_FACTORIAL_LIMIT = 20

S0 = CollectiveOp.raising(0)
S1 = CollectiveOp.raising(1)


def log_factorial(n):
    """ln(n!): exact below EXACT_FACTORIAL_LIMIT, log-gamma above."""
    if n < 0:
        raise InvalidArgumentError(f"factorial of negative number {n}")
    if n <= EXACT_FACTORIAL_LIMIT:
        return math.log(math.factorial(n))
    return float(gammaln(n + 1))


def multinomial(n_g, n0, n1):
    """N!/(n_g!·n0!·n1!) as a float."""
    n = n_g + n0 + n1
    if n <= EXACT_FACTORIAL_LIMIT:
        return float(
            math.factorial(n)
            // (math.factorial(n_g) * math.factorial(n0) * math.factorial(n1))
        )
    return math.exp(log_factorial(n) - log_factorial(n_g) - log_factorial(n0) - log_factorial(n1))


def dicke_norm_coeff(idx: DickeIndex) -> float:
    """c(n_h) with c·(s0†)^{n_h}(s1†)^{N_a−n_h}|G⟩ of unit norm.

    The raw operator string puts amplitude n_h!·(N_a−n_h)! on each of the
    C(N_a, n_h) configurations, so its squared norm is
    N_a!·n_h!·(N_a−n_h)! and c = 1/√(N_a!·n_h!·(N_a−n_h)!).
    """
    n, k = idx.n_atoms, idx.n_h
    if n <= EXACT_FACTORIAL_LIMIT:
        return 1.0 / math.sqrt(math.factorial(n) * math.factorial(k) * math.factorial(n - k))
    return math.exp(-0.5 * (log_factorial(n) + log_factorial(k) + log_factorial(n - k)))


def ground_state(n_atoms: int) -> SymmetricState:
    """|G⟩: every atom in g."""
    if n_atoms < 1:
        raise InvalidArgumentError(f"n_atoms must be >= 1, got {n_atoms}")
    return SymmetricState(n_atoms, {(0, 0): 1.0}, normalized=True)


def apply_collective(state: SymmetricState, op: CollectiveOp) -> SymmetricState:
    """Unnormalized image of `state` under alpha·s0† + beta·s1†.

    Components with no atom left in g are annihilated.

    Args:
        state: Symmetric state, normalized or not.
        op: Collective raising operator (alpha, beta).

    Returns:
        A new, unnormalized SymmetricState.

    Raises:
        RaisingOnFullError: If every component of `state` is fully excited.
    """
    n = state.n_atoms
    out = defaultdict(complex)
    raised = False
    for (n0, n1), amp in state.amplitudes.items():
        n_g = n - n0 - n1
        if n_g == 0:
            continue
        raised = True
        if op.alpha != 0:
            out[(n0 + 1, n1)] += op.alpha * amp * math.sqrt((n0 + 1) * n_g)
        if op.beta != 0:
            out[(n0, n1 + 1)] += op.beta * amp * math.sqrt((n1 + 1) * n_g)
    if not raised:
        raise RaisingOnFullError(
            f"no atom left in g: raising a {n}-atom Dicke-sector state gives zero"
        )
    return SymmetricState(n, out)


def apply_sequence(state: SymmetricState, ops) -> SymmetricState:
    """Apply ops left to right (first op acts first), unnormalized."""
    for op in ops:
        state = apply_collective(state, op)
    return state


def normalize(state: SymmetricState) -> SymmetricState:
    norm = state.norm()
    if norm == 0:
        raise DegenerateStateError("cannot normalize the zero vector")
    amps = {key: amp / norm for key, amp in state.amplitudes.items()}
    return SymmetricState(state.n_atoms, amps, normalized=True)


def dicke_state(idx: DickeIndex) -> SymmetricState:
    """|N_a, n_h⟩: n_h atoms in 0, the rest in 1."""
    return SymmetricState(idx.n_atoms, {(idx.n_h, idx.n_v): 1.0}, normalized=True)


def raw_dicke_string(idx: DickeIndex) -> SymmetricState:
    """(s0†)^{n_h}(s1†)^{N_a−n_h}|G⟩ without the normalization coefficient."""
    ops = [S0] * idx.n_h + [S1] * idx.n_v
    return apply_sequence(ground_state(idx.n_atoms), ops)


def inner(a: SymmetricState, b: SymmetricState) -> complex:
    """⟨a|b⟩."""
    if a.n_atoms != b.n_atoms:
        raise InvalidArgumentError(
            f"states have different atom numbers ({a.n_atoms} vs {b.n_atoms})"
        )
    return sum(
        (amp.conjugate() * b.amplitudes[key] for key, amp in a.amplitudes.items() if key in b.amplitudes),
        0j,
    )


def fidelity(a: SymmetricState, b: SymmetricState) -> float:
    """|⟨a|b⟩|² for normalized a, b."""
    overlap = inner(a, b)
    norms = a.norm_squared() * b.norm_squared()
    if norms == 0:
        raise DegenerateStateError("fidelity with the zero vector")
    return min(1.0, max(0.0, abs(overlap) ** 2 / norms))


def ghz_state(n_atoms: int) -> SymmetricState:
    """(|N_a, N_a⟩ + |N_a, 0⟩)/√2: all atoms in 0, or all in 1."""
    if n_atoms < 2:
        raise InvalidArgumentError(f"GHZ state needs >= 2 atoms, got {n_atoms}")
    amp = 1 / math.sqrt(2)
    return SymmetricState(n_atoms, {(n_atoms, 0): amp, (0, n_atoms): amp}, normalized=True)


def _occupations(n_atoms, key):
    n0, n1 = key
    return [n_atoms - n0 - n1, n0, n1]


def single_atom_density(state: SymmetricState) -> np.ndarray:
    """One-body reduced state ρ_{μν} = ⟨a_ν† a_μ⟩/N_a over (g, 0, 1)."""
    n = state.n_atoms
    norm_sq = state.norm_squared()
    if norm_sq == 0:
        raise DegenerateStateError("reduced state of the zero vector")
    rho = np.zeros((3, 3), dtype=complex)
    for key, amp in state.amplitudes.items():
        occ = _occupations(n, key)
        for mu in range(3):
            if occ[mu] == 0:
                continue
            for nu in range(3):
                moved = list(occ)
                moved[mu] -= 1
                coef = math.sqrt(occ[mu]) * math.sqrt(moved[nu] + 1)
                moved[nu] += 1
                target = state.amplitudes.get((moved[1], moved[2]))
                if target is not None:
                    rho[mu, nu] += target.conjugate() * amp * coef
    return rho / (n * norm_sq)


def single_atom_purity(state: SymmetricState) -> float:
    """Tr ρ² of the one-body reduced state; < 1 iff the pure state is entangled."""
    rho = single_atom_density(state)
    return float(np.real(np.trace(rho @ rho)))
