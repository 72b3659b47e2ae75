# Command package: one module per CLI verb, plus shared config parsing.

from dataclasses import dataclass

from app.errors import ConfigError
from app.models.pulse import CavityParams, PulseProfile
from app.services.io_service import parse_complex, parse_number, require


@dataclass(frozen=True)
class RunSettings:
    seed: int
    trials: int
    jobs: int
    partitions: int
    batch_size: int


def resolve_run(config, data, seed=None, trials=None, jobs=None):
    """CLI flag, then config file, then environment default."""
    seed = seed if seed is not None else parse_number(data, "seed", config.SEED, int)
    trials = trials if trials is not None else parse_number(data, "trials", config.TRIALS, int)
    if trials < 1:
        raise ConfigError(f"trials must be >= 1, got {trials}")
    return RunSettings(
        seed=seed,
        trials=trials,
        jobs=jobs if jobs is not None else config.JOBS,
        partitions=config.PARTITIONS,
        batch_size=config.BATCH_SIZE,
    )


def parse_cavity(data, section="cavity"):
    if not isinstance(data, dict):
        raise ConfigError(f"{section} must be an object")
    return CavityParams(
        g0=parse_complex(require(data, "g0", section), f"{section}.g0"),
        g1=parse_complex(require(data, "g1", section), f"{section}.g1"),
        kappa=parse_number(data, "kappa", section=section),
    )


def parse_pulse(data, section="pulse"):
    """Either sampled {times, rabi} or the sin² ramp {omega_max, duration, n_points}."""
    if not isinstance(data, dict):
        raise ConfigError(f"{section} must be an object")
    if "times" in data or "rabi" in data:
        times = require(data, "times", section)
        rabi = require(data, "rabi", section)
        if not isinstance(times, list) or not isinstance(rabi, list):
            raise ConfigError(f"{section}.times and {section}.rabi must be lists")
        return PulseProfile(
            [parse_number({"t": t}, "t", section=section) for t in times],
            [parse_complex(r, f"{section}.rabi") for r in rabi],
        )
    return PulseProfile.sin_squared(
        omega_max=parse_number(data, "omega_max", section=section),
        duration=parse_number(data, "duration", section=section),
        n_points=parse_number(data, "n_points", 2001, int, section=section),
    )


def parse_bool(data, key, default, section="config"):
    value = data.get(key, default)
    if not isinstance(value, bool):
        raise ConfigError(f"{section}.{key} must be true or false, got {value!r}")
    return value
