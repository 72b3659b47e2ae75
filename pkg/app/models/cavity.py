"""Two-cavity protocol models.

- AtomPhotonState: (g0|0⟩|h⟩ + g1|1⟩|v⟩)/norm for one cavity.
- DetectionConfig: detection scheme after the PBS, photon efficiency, and
  whether the R arm carries the R(π/2) rotator.
- TwoCavityOutcome: heralded probability and conditional two-atom state.
"""

import cmath
from dataclasses import dataclass

import numpy as np

from app.errors import InvalidArgumentError


@dataclass(frozen=True)
class AtomPhotonState:
    amp_h: complex  # coefficient of |0⟩|h⟩
    amp_v: complex  # coefficient of |1⟩|v⟩

    def __post_init__(self):
        object.__setattr__(self, "amp_h", complex(self.amp_h))
        object.__setattr__(self, "amp_v", complex(self.amp_v))
        if not (cmath.isfinite(self.amp_h) and cmath.isfinite(self.amp_v)):
            raise InvalidArgumentError("atom-photon amplitudes must be finite")
        if abs(abs(self.amp_h) ** 2 + abs(self.amp_v) ** 2 - 1) > 1e-12:
            raise InvalidArgumentError("atom-photon state is not normalized")

    @property
    def p_h(self):
        return abs(self.amp_h) ** 2

    @property
    def p_v(self):
        return abs(self.amp_v) ** 2


@dataclass(frozen=True)
class DetectionConfig:
    # -- Valid schemes --
    SCHEMES = ("polarizer45", "pbs_both_outputs")
    # -- What to do with a coincidence where exactly one −45° port fires --
    MINUS_OUTCOMES = ("correct", "discard")

    scheme: str = "pbs_both_outputs"
    eta: float = 1.0
    rotate_R: bool = True
    minus_outcome: str = "correct"  # correct | discard

    def __post_init__(self):
        if self.scheme not in self.SCHEMES:
            raise InvalidArgumentError(
                f"scheme must be one of {', '.join(self.SCHEMES)}, got {self.scheme!r}"
            )
        if self.minus_outcome not in self.MINUS_OUTCOMES:
            raise InvalidArgumentError(f"unknown minus_outcome {self.minus_outcome!r}")
        if not 0.0 <= self.eta <= 1.0:
            raise InvalidArgumentError(f"eta must be in [0, 1], got {self.eta}")

    @property
    def scheme_factor(self):
        """Fraction of P_s coincidences the detection scheme keeps."""
        if self.scheme == "polarizer45":
            return 0.25
        return 0.5 if self.minus_outcome == "discard" else 1.0


@dataclass(frozen=True, eq=False)
class TwoCavityOutcome:
    success_probability: float
    conditional_density: np.ndarray  # 4×4 over |00⟩, |01⟩, |10⟩, |11⟩ (L⊗R)
    bell_fidelity: float
    # Bell state heralded by the + outcome: "psi_plus" or "phi_plus"
    target: str = "psi_plus"

    def __post_init__(self):
        rho = np.array(self.conditional_density, dtype=complex)
        if rho.shape != (4, 4):
            raise InvalidArgumentError("conditional density must be 4×4")
        rho.setflags(write=False)
        object.__setattr__(self, "conditional_density", rho)
        if not -1e-12 <= self.bell_fidelity <= 1 + 1e-12:
            raise InvalidArgumentError("bell_fidelity outside [0, 1]")

    def density_as_pairs(self):
        """[[re, im] × 4] × 4 for JSON output."""
        return [[[float(z.real), float(z.imag)] for z in row] for row in self.conditional_density]
