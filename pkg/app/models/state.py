"""Atomic state models.

- SymmetricState: sparse amplitudes over the symmetric occupation basis of
  N_a three-level atoms (levels g, 0, 1), keyed by (n0, n1).
- DickeIndex: (N_a, n_h) label of a Dicke state.
- CollectiveOp: alpha·s0† + beta·s1†.
- FullState: dense 3^N_a tensor-product amplitudes, the brute-force oracle.

All of these are immutable after construction.
"""

import cmath
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np

from app.errors import InvalidArgumentError

# Level order used everywhere (oracle digits, one-body matrices).
LEVELS = ["g", "0", "1"]


@dataclass(frozen=True)
class SymmetricState:
    n_atoms: int
    amplitudes: Mapping[tuple[int, int], complex] = field(default_factory=dict)
    normalized: bool = False

    def __post_init__(self):
        if self.n_atoms < 1:
            raise InvalidArgumentError(f"n_atoms must be >= 1, got {self.n_atoms}")
        clean = {}
        for key, amp in self.amplitudes.items():
            n0, n1 = int(key[0]), int(key[1])
            if n0 < 0 or n1 < 0 or n0 + n1 > self.n_atoms:
                raise InvalidArgumentError(
                    f"occupation ({n0}, {n1}) outside the {self.n_atoms}-atom basis"
                )
            amp = complex(amp)
            if not cmath.isfinite(amp):
                raise InvalidArgumentError(f"non-finite amplitude at ({n0}, {n1})")
            if amp != 0:
                clean[(n0, n1)] = amp
        object.__setattr__(self, "amplitudes", MappingProxyType(clean))
        if self.normalized and abs(self.norm_squared() - 1.0) > 1e-12:
            raise InvalidArgumentError("state flagged normalized but norm != 1")

    def amplitude(self, n0, n1):
        return self.amplitudes.get((n0, n1), 0j)

    def norm_squared(self):
        return math.fsum(abs(a) ** 2 for a in self.amplitudes.values())

    def norm(self):
        return math.sqrt(self.norm_squared())

    @property
    def is_dicke_sector(self):
        """True when every populated key has n0 + n1 = N_a (no atom left in g)."""
        return all(n0 + n1 == self.n_atoms for n0, n1 in self.amplitudes)

    def dicke_coefficients(self):
        """b(n_h) for n_h = 0..N_a, read from the Dicke-sector keys."""
        return [self.amplitude(n_h, self.n_atoms - n_h) for n_h in range(self.n_atoms + 1)]

    def to_dict(self):
        return {
            "n_atoms": self.n_atoms,
            "entries": [
                {"n0": n0, "n1": n1, "re": amp.real, "im": amp.imag}
                for (n0, n1), amp in sorted(self.amplitudes.items())
            ],
        }

    @classmethod
    def from_dict(cls, data, normalized=False):
        amps = {
            (int(e["n0"]), int(e["n1"])): complex(e["re"], e["im"])
            for e in data["entries"]
        }
        return cls(int(data["n_atoms"]), amps, normalized=normalized)

    def __repr__(self):
        return f"<SymmetricState N={self.n_atoms} keys={len(self.amplitudes)}>"


@dataclass(frozen=True)
class DickeIndex:
    n_atoms: int
    n_h: int

    def __post_init__(self):
        if self.n_atoms < 1:
            raise InvalidArgumentError(f"n_atoms must be >= 1, got {self.n_atoms}")
        if not 0 <= self.n_h <= self.n_atoms:
            raise InvalidArgumentError(
                f"n_h must be in 0..{self.n_atoms}, got {self.n_h}"
            )

    @property
    def n_v(self):
        return self.n_atoms - self.n_h


@dataclass(frozen=True)
class CollectiveOp:
    alpha: complex = 0j  # coefficient of s0†
    beta: complex = 0j   # coefficient of s1†

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        if self.alpha == 0 and self.beta == 0:
            raise InvalidArgumentError("collective operator with alpha = beta = 0")
        if not (cmath.isfinite(self.alpha) and cmath.isfinite(self.beta)):
            raise InvalidArgumentError("collective operator coefficients must be finite")

    @classmethod
    def raising(cls, mu):
        """s_mu† for mu in {0, 1}."""
        if mu == 0:
            return cls(1, 0)
        if mu == 1:
            return cls(0, 1)
        raise InvalidArgumentError(f"mu must be 0 or 1, got {mu}")


@dataclass(frozen=True, eq=False)
class FullState:
    n_atoms: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (3 ** self.n_atoms,):
            raise InvalidArgumentError(
                f"expected {3 ** self.n_atoms} amplitudes, got shape {amps.shape}"
            )
        if not np.all(np.isfinite(amps)):
            raise InvalidArgumentError("non-finite amplitude in FullState")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def index_of(self, label):
        """Flat index of a label like "g01" (atom 0 is the leading digit)."""
        if len(label) != self.n_atoms:
            raise InvalidArgumentError(f"label {label!r} has wrong length")
        index = 0
        for ch in label:
            index = 3 * index + LEVELS.index(ch)
        return index

    def amplitude(self, label):
        return complex(self.amplitudes[self.index_of(label)])

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def __repr__(self):
        return f"<FullState N={self.n_atoms}>"
