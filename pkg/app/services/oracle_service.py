"""Oracle service — brute-force tensor-product states over {g, 0, 1}^N_a.

Used only to check the symmetric-subspace algebra. Flat index digits are
base 3 with atom 0 leading; digit 0 = g, 1 = level 0, 2 = level 1.
"""

import itertools
import logging
import math

import numpy as np

from app.config import Config
from app.errors import SizeLimitError
from app.models.state import CollectiveOp, FullState, SymmetricState
from app.services.dicke_service import multinomial

logger = logging.getLogger(__name__)

# 3^8 amplitudes; HERALD_ORACLE_MAX_ATOMS may only lower it
HARD_MAX_ATOMS = 8


def _check_size(n_atoms, limit=None):
    if limit is None:
        limit = Config.ORACLE_MAX_ATOMS
    limit = min(limit, HARD_MAX_ATOMS)
    if n_atoms > limit:
        raise SizeLimitError(
            f"oracle holds 3^N amplitudes; N_a = {n_atoms} exceeds the limit of {limit}"
        )


def _digits(n_atoms):
    """(3^N, N) array of base-3 digits for every flat index."""
    idx = np.arange(3 ** n_atoms)
    powers = 3 ** np.arange(n_atoms - 1, -1, -1)
    return (idx[:, None] // powers[None, :]) % 3


def oracle_expand(state: SymmetricState, max_atoms=None) -> FullState:
    """Expand each symmetric basis vector into its distinct permutations.

    Args:
        state: Symmetric state to expand.
        max_atoms: Size limit; defaults to Config.ORACLE_MAX_ATOMS, never above 8.

    Returns:
        FullState holding all 3^N_a amplitudes.

    Raises:
        SizeLimitError: If N_a exceeds the limit.
    """
    n = state.n_atoms
    _check_size(n, max_atoms)
    amps = np.zeros(3 ** n, dtype=complex)
    powers = [3 ** (n - 1 - k) for k in range(n)]
    for (n0, n1), amp in state.amplitudes.items():
        weight = amp / math.sqrt(multinomial(n - n0 - n1, n0, n1))
        for zeros in itertools.combinations(range(n), n0):
            rest = [k for k in range(n) if k not in zeros]
            for ones in itertools.combinations(rest, n1):
                index = sum(powers[k] for k in zeros) + 2 * sum(powers[k] for k in ones)
                amps[index] += weight
    return FullState(n, amps)


def oracle_apply(full: FullState, op: CollectiveOp, max_atoms=None) -> FullState:
    """Literal Σ_i over atoms of alpha·|0⟩_i⟨g| + beta·|1⟩_i⟨g|."""
    n = full.n_atoms
    _check_size(n, max_atoms)
    digits = _digits(n)
    src = full.amplitudes
    out = np.zeros_like(src)
    for k in range(n):
        in_g = np.nonzero(digits[:, k] == 0)[0]
        step = 3 ** (n - 1 - k)
        if op.alpha != 0:
            np.add.at(out, in_g + step, op.alpha * src[in_g])
        if op.beta != 0:
            np.add.at(out, in_g + 2 * step, op.beta * src[in_g])
    return FullState(n, out)


def oracle_inner(a: FullState, b: FullState) -> complex:
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def oracle_permute(full: FullState, permutation) -> FullState:
    """Relabel atoms: atom k of the result is atom permutation[k] of `full`."""
    n = full.n_atoms
    tensor = full.amplitudes.reshape((3,) * n)
    return FullState(n, np.transpose(tensor, permutation).reshape(-1))


def oracle_single_atom_density(full: FullState, atom=0) -> np.ndarray:
    """Partial trace down to one atom, normalized by ⟨ψ|ψ⟩."""
    n = full.n_atoms
    tensor = np.moveaxis(full.amplitudes.reshape((3,) * n), atom, 0).reshape(3, -1)
    rho = tensor @ tensor.conj().T
    return rho / np.trace(rho).real


def oracle_from_labels(n_atoms, weights) -> FullState:
    """Build a FullState from {"g01": amplitude, ...}."""
    _check_size(n_atoms)
    amps = np.zeros(3 ** n_atoms, dtype=complex)
    layout = FullState(n_atoms, amps)
    for label, amp in weights.items():
        amps[layout.index_of(label)] += amp
    return FullState(n_atoms, amps)
