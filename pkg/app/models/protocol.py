"""Multi-atom protocol models.

- ProtocolConfig: N_a atoms, M driving pulses, efficiency, branching and
  optional per-pulse rotators.
- ClickRecord: (pulse, detector) events of one M-pulse sequence.
- RunOutcome: one Monte Carlo trial after post-selection.
"""

from dataclasses import dataclass

from app.errors import InvalidArgumentError
from app.models.state import SymmetricState
from app.models.synthesis import RotatorSetting


@dataclass(frozen=True)
class ProtocolConfig:
    n_atoms: int
    n_pulses: int
    eta: float = 1.0
    branching_h: float = 0.5
    rotators: tuple = None  # one RotatorSetting per pulse, None = identity
    seed: int = 0

    def __post_init__(self):
        if self.n_atoms < 1:
            raise InvalidArgumentError(f"n_atoms must be >= 1, got {self.n_atoms}")
        if self.n_pulses < 1 or 2 * self.n_pulses < self.n_atoms:
            raise InvalidArgumentError(
                f"need 2M >= N_a, got M={self.n_pulses}, N_a={self.n_atoms}"
            )
        if not 0.0 <= self.eta <= 1.0:
            raise InvalidArgumentError(f"eta must be in [0, 1], got {self.eta}")
        if not 0.0 <= self.branching_h <= 1.0:
            raise InvalidArgumentError(
                f"branching_h must be in [0, 1], got {self.branching_h}"
            )
        if self.rotators is not None:
            rotators = tuple(self.rotators)
            if len(rotators) != self.n_pulses:
                raise InvalidArgumentError(
                    f"need one rotator per pulse ({self.n_pulses}), got {len(rotators)}"
                )
            if not all(isinstance(r, RotatorSetting) for r in rotators):
                raise InvalidArgumentError("rotators must be RotatorSetting instances")
            object.__setattr__(self, "rotators", rotators)

    def rotator(self, pulse_index):
        """Rotator of pulse m (1-based); identity when none configured."""
        if self.rotators is None:
            return None
        return self.rotators[pulse_index - 1]

    @classmethod
    def from_dict(cls, data):
        rotators = data.get("rotators")
        if rotators is not None:
            rotators = tuple(
                RotatorSetting(
                    theta=float(r.get("theta", 0.0)),
                    phi=float(r.get("phi", 0.0)),
                    designated_detector=r.get("detector", "h"),
                )
                for r in rotators
            )
        return cls(
            n_atoms=int(data["n_atoms"]),
            n_pulses=int(data["n_pulses"]),
            eta=float(data.get("eta", 1.0)),
            branching_h=float(data.get("branching_h", 0.5)),
            rotators=rotators,
            seed=int(data.get("seed", 0)),
        )

    def to_dict(self):
        out = {
            "n_atoms": self.n_atoms,
            "n_pulses": self.n_pulses,
            "eta": self.eta,
            "branching_h": self.branching_h,
            "seed": self.seed,
        }
        if self.rotators is not None:
            out["rotators"] = [
                {"theta": r.theta, "phi": r.phi, "detector": r.designated_detector}
                for r in self.rotators
            ]
        return out


@dataclass(frozen=True)
class ClickRecord:
    events: tuple  # ((pulse_index, "h" | "v"), ...) in click order
    n_h: int
    n_v: int

    def __post_init__(self):
        events = tuple((int(m), d) for m, d in self.events)
        if len(set(events)) != len(events):
            raise InvalidArgumentError("threshold detectors click at most once per pulse")
        if any(d not in ("h", "v") for _, d in events):
            raise InvalidArgumentError("detector must be 'h' or 'v'")
        n_h = sum(1 for _, d in events if d == "h")
        if (n_h, len(events) - n_h) != (self.n_h, self.n_v):
            raise InvalidArgumentError("n_h / n_v totals disagree with the events")
        object.__setattr__(self, "events", events)

    @classmethod
    def from_events(cls, events):
        events = tuple(events)
        n_h = sum(1 for _, d in events if d == "h")
        return cls(events, n_h, len(events) - n_h)

    @property
    def total(self):
        return self.n_h + self.n_v


@dataclass(frozen=True)
class RunOutcome:
    clicks: ClickRecord
    post_selected: bool
    conditional_state: SymmetricState = None

    def __post_init__(self):
        if self.post_selected and self.conditional_state is None:
            raise InvalidArgumentError("post-selected run needs a conditional state")
        if not self.post_selected and self.conditional_state is not None:
            raise InvalidArgumentError("rejected run cannot carry a conditional state")
        if self.conditional_state is not None and not (
            self.conditional_state.normalized and self.conditional_state.is_dicke_sector
        ):
            raise InvalidArgumentError("conditional state must be normalized and Dicke-sector")
