"""Drive pulse and cavity-output models.

- PulseProfile: sampled Rabi frequency Ω(t) on a uniform grid.
- CavityParams: couplings g0, g1 (to the h and v cavity modes) and decay κ.
- TemporalMode: sampled single-photon wavepacket f(t), units 1/√s.
- EmissionResult: output of the one-excitation integrator.

Arrays are copied and frozen on construction.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from app.errors import InvalidArgumentError

MIN_GRID_POINTS = 16


def _frozen(values, dtype):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def trapezoid(values, times):
    """Trapezoidal integral of samples on a grid."""
    values = np.asarray(values)
    dt = np.diff(times)
    return np.sum(0.5 * (values[1:] + values[:-1]) * dt)


def cumulative_trapezoid(values, times):
    """Running trapezoidal integral, starting at 0 on the first grid point."""
    values = np.asarray(values)
    steps = 0.5 * (values[1:] + values[:-1]) * np.diff(times)
    return np.concatenate([[0.0], np.cumsum(steps)])


@dataclass(frozen=True, eq=False)
class PulseProfile:
    times: np.ndarray
    rabi: np.ndarray

    def __post_init__(self):
        times = _frozen(self.times, float)
        rabi = _frozen(self.rabi, complex)
        if times.ndim != 1 or times.shape != rabi.shape:
            raise InvalidArgumentError("times and rabi must be 1-d and the same length")
        if len(times) < MIN_GRID_POINTS:
            raise InvalidArgumentError(
                f"pulse grid needs >= {MIN_GRID_POINTS} points, got {len(times)}"
            )
        steps = np.diff(times)
        if np.any(steps <= 0):
            raise InvalidArgumentError("pulse grid must be strictly increasing")
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
            raise InvalidArgumentError("pulse grid must be uniformly spaced")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(rabi))):
            raise InvalidArgumentError("pulse profile contains non-finite values")
        peak = float(np.max(np.abs(rabi)))
        if abs(rabi[0]) > 1e-9 * peak:
            raise InvalidArgumentError("drive must ramp from zero: Ω(0) != 0")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "rabi", rabi)

    @property
    def spacing(self):
        return float(self.times[1] - self.times[0])

    @property
    def duration(self):
        return float(self.times[-1] - self.times[0])

    @property
    def peak(self):
        return float(np.max(np.abs(self.rabi)))

    def scaled(self, factor):
        return PulseProfile(self.times, self.rabi * factor)

    @classmethod
    def sin_squared(cls, omega_max, duration, n_points=2001):
        """Default drive shape Ω(t) = Ω_max·sin²(πt/T) on [0, T]."""
        if duration <= 0:
            raise InvalidArgumentError("pulse duration must be positive")
        times = np.linspace(0.0, duration, n_points)
        rabi = omega_max * np.sin(np.pi * times / duration) ** 2
        # sin(0) is exact, but pin the endpoint against rounding
        rabi[0] = 0.0
        return cls(times, rabi)

    def to_dict(self):
        return {
            "times": self.times.tolist(),
            "rabi_re": self.rabi.real.tolist(),
            "rabi_im": self.rabi.imag.tolist(),
        }

    def __repr__(self):
        return f"<PulseProfile n={len(self.times)} T={self.duration:.3g}s peak={self.peak:.3g}>"


@dataclass(frozen=True)
class CavityParams:
    g0: complex
    g1: complex
    kappa: float

    def __post_init__(self):
        object.__setattr__(self, "g0", complex(self.g0))
        object.__setattr__(self, "g1", complex(self.g1))
        object.__setattr__(self, "kappa", float(self.kappa))
        if not (cmath.isfinite(self.g0) and cmath.isfinite(self.g1)):
            raise InvalidArgumentError("couplings must be finite")
        if abs(self.g0) ** 2 + abs(self.g1) ** 2 <= 0:
            raise InvalidArgumentError("at least one coupling must be nonzero")
        if not (self.kappa > 0 and math.isfinite(self.kappa)):
            raise InvalidArgumentError(f"kappa must be > 0, got {self.kappa}")

    @property
    def coupling_norm(self):
        """√(|g0|² + |g1|²)."""
        return math.sqrt(abs(self.g0) ** 2 + abs(self.g1) ** 2)

    @property
    def branching_h(self):
        """Probability an emitted photon is h-polarized."""
        return abs(self.g0) ** 2 / self.coupling_norm ** 2

    def scaled(self, factor):
        return CavityParams(self.g0 * factor, self.g1 * factor, self.kappa)

    def to_dict(self):
        return {
            "g0": {"re": self.g0.real, "im": self.g0.imag},
            "g1": {"re": self.g1.real, "im": self.g1.imag},
            "kappa": self.kappa,
        }


@dataclass(frozen=True, eq=False)
class TemporalMode:
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = _frozen(self.times, float)
        values = _frozen(self.values, complex)
        if times.shape != values.shape:
            raise InvalidArgumentError("mode times and values differ in length")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if self.norm_squared() > 1 + 1e-9:
            raise InvalidArgumentError(
                f"mode carries more than one photon: ∫|f|² = {self.norm_squared():.12f}"
            )

    def norm_squared(self):
        """∫|f(t)|² dt by trapezoid."""
        return float(trapezoid(np.abs(self.values) ** 2, self.times))

    def same_grid(self, other):
        return self.times.shape == other.times.shape and np.array_equal(self.times, other.times)


@dataclass(frozen=True)
class EmissionResult:
    numeric_mode: TemporalMode
    p_c: float
    branching_h: float
    # Per-polarization output channels; numeric_mode is their common shape
    mode_h: TemporalMode = None
    mode_v: TemporalMode = None
    residual_population: float = 0.0
    steps: int = 0
    # worst |surviving + emitted − 1| over the grid
    norm_drift: float = 0.0
