"""Synthesis models.

- RotatorSetting: per-pulse rotator R(θ, φ) plus the detector whose click
  is designated for that pulse.
- TargetSuperposition: Dicke-basis coefficients b(n_h), n_h = 0..N_a.
- ProjectiveRoot: a polynomial root on the extended complex plane.
- SynthesisPlan: rotator settings heralding a target state.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from app.errors import InvalidArgumentError
from app.models.state import SymmetricState


@dataclass(frozen=True)
class RotatorSetting:
    DETECTORS = ("h", "v")

    theta: float = 0.0
    phi: float = 0.0
    designated_detector: str = "h"

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi / 2 + 1e-12:
            raise InvalidArgumentError(f"theta must be in [0, π/2], got {self.theta}")
        if not -math.pi < self.phi <= math.pi + 1e-12:
            raise InvalidArgumentError(f"phi must be in (−π, π], got {self.phi}")
        if self.designated_detector not in self.DETECTORS:
            raise InvalidArgumentError(
                f"designated_detector must be 'h' or 'v', got {self.designated_detector!r}"
            )

    @property
    def mu(self):
        return 0 if self.designated_detector == "h" else 1

    @property
    def is_identity(self):
        return self.theta == 0.0


IDENTITY_ROTATOR = RotatorSetting()


@dataclass(frozen=True)
class TargetSuperposition:
    n_atoms: int
    coefficients: tuple

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.coefficients)
        if self.n_atoms < 1:
            raise InvalidArgumentError(f"n_atoms must be >= 1, got {self.n_atoms}")
        if len(coeffs) != self.n_atoms + 1:
            raise InvalidArgumentError(
                f"expected {self.n_atoms + 1} coefficients, got {len(coeffs)}"
            )
        if not all(cmath.isfinite(c) for c in coeffs):
            raise InvalidArgumentError("target coefficients must be finite")
        if all(c == 0 for c in coeffs):
            raise InvalidArgumentError("target has no nonzero coefficient")
        if abs(math.fsum(abs(c) ** 2 for c in coeffs) - 1) > 1e-12:
            raise InvalidArgumentError("target coefficients are not normalized")
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def from_unnormalized(cls, coefficients):
        """Normalize raw coefficients; n_atoms is len − 1."""
        coeffs = np.asarray(coefficients, dtype=complex)
        norm = float(np.linalg.norm(coeffs))
        if norm == 0:
            raise InvalidArgumentError("target has no nonzero coefficient")
        return cls(len(coeffs) - 1, tuple(coeffs / norm))

    def to_state(self):
        """The target as a Dicke-sector SymmetricState."""
        n = self.n_atoms
        amps = {(n_h, n - n_h): b for n_h, b in enumerate(self.coefficients)}
        return SymmetricState(n, amps, normalized=True)

    def to_dict(self):
        return {
            "n_atoms": self.n_atoms,
            "coefficients": [{"re": c.real, "im": c.imag} for c in self.coefficients],
        }


@dataclass(frozen=True)
class ProjectiveRoot:
    value: complex = None  # None marks the root at infinity

    def __post_init__(self):
        if self.value is not None:
            value = complex(self.value)
            if not cmath.isfinite(value):
                raise InvalidArgumentError("finite root must be a finite complex number")
            object.__setattr__(self, "value", value)

    @property
    def is_infinite(self):
        return self.value is None

    @classmethod
    def infinite(cls):
        return cls(None)

    def to_json(self):
        if self.is_infinite:
            return "inf"
        return {"re": self.value.real, "im": self.value.imag}

    def __repr__(self):
        return "<ProjectiveRoot ∞>" if self.is_infinite else f"<ProjectiveRoot {self.value:.6g}>"


@dataclass(frozen=True)
class SynthesisPlan:
    settings: tuple
    residual_pulses: int
    predicted_state: SymmetricState
    roots: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "settings", tuple(self.settings))
        object.__setattr__(self, "roots", tuple(self.roots))
        if len(self.settings) != self.predicted_state.n_atoms:
            raise InvalidArgumentError("plan needs exactly one setting per atom")
        if not (self.predicted_state.normalized and self.predicted_state.is_dicke_sector):
            raise InvalidArgumentError("predicted state must be a normalized Dicke-sector state")
        if self.residual_pulses < 0:
            raise InvalidArgumentError("residual_pulses must be >= 0")

    @property
    def n_atoms(self):
        return self.predicted_state.n_atoms
