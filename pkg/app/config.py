import os


def _env_int(name, default):
    return int(os.environ.get(name, default))


def _env_float(name, default):
    return float(os.environ.get(name, default))


class Config:
    """Base configuration. Shared across all environments."""

    # --- Monte Carlo ---
    SEED = _env_int("HERALD_SEED", 20240101)
    TRIALS = _env_int("HERALD_TRIALS", 100_000)
    # Partition count fixes the seed tree, so it is part of the result.
    # JOBS only bounds worker processes and never changes outputs.
    PARTITIONS = _env_int("HERALD_PARTITIONS", 8)
    JOBS = _env_int("HERALD_JOBS", 1)
    BATCH_SIZE = _env_int("HERALD_BATCH_SIZE", 200_000)

    # --- Numerics ---
    ORACLE_MAX_ATOMS = _env_int("HERALD_ORACLE_MAX_ATOMS", 8)
    RK4_MAX_STEP = _env_float("HERALD_RK4_MAX_STEP", 0.05)  # max(|Ω|,|g|,κ)·dt
    CONVERGENCE_TOL = _env_float("HERALD_CONVERGENCE_TOL", 1e-6)
    ROOT_TOL = _env_float("HERALD_ROOT_TOL", 1e-10)

    # --- Logging ---
    LOG_LEVEL = os.environ.get("HERALD_LOG_LEVEL", "INFO").upper()

    TESTING = False

    @classmethod
    def validate(cls):
        """Fail fast if any setting is out of range."""
        problems = []
        if cls.TRIALS < 1:
            problems.append("HERALD_TRIALS must be >= 1")
        if cls.PARTITIONS < 1:
            problems.append("HERALD_PARTITIONS must be >= 1")
        if cls.JOBS < 1:
            problems.append("HERALD_JOBS must be >= 1")
        if cls.BATCH_SIZE < 1:
            problems.append("HERALD_BATCH_SIZE must be >= 1")
        if not 1 <= cls.ORACLE_MAX_ATOMS <= 8:
            problems.append("HERALD_ORACLE_MAX_ATOMS must be in 1..8")
        if not 0 < cls.RK4_MAX_STEP <= 0.05:
            problems.append("HERALD_RK4_MAX_STEP must be in (0, 0.05]")
        if cls.CONVERGENCE_TOL <= 0 or cls.ROOT_TOL <= 0:
            problems.append("tolerances must be positive")
        if cls.LOG_LEVEL not in ("DEBUG", "INFO", "WARNING", "ERROR"):
            problems.append(f"unknown HERALD_LOG_LEVEL {cls.LOG_LEVEL!r}")
        if problems:
            raise RuntimeError(
                f"Invalid configuration: {'; '.join(problems)}"
            )


class DevConfig(Config):
    """Local runs from a checkout."""

    LOG_LEVEL = os.environ.get("HERALD_LOG_LEVEL", "DEBUG").upper()


class TestConfig(Config):
    """Testing — small fixed budgets, no env lookups."""

    TESTING = True
    SEED = 12345
    TRIALS = 20_000
    PARTITIONS = 4
    JOBS = 1
    BATCH_SIZE = 50_000
    ORACLE_MAX_ATOMS = 8
    RK4_MAX_STEP = 0.05
    CONVERGENCE_TOL = 1e-6
    ROOT_TOL = 1e-10
    LOG_LEVEL = "WARNING"

    @classmethod
    def validate(cls):
        """Skip validation in test mode — everything is hardcoded."""
        pass


class ProdConfig(Config):
    """Batch production runs (long Monte Carlo budgets)."""

    TRIALS = _env_int("HERALD_TRIALS", 1_000_000)
    JOBS = _env_int("HERALD_JOBS", os.cpu_count() or 1)


config_by_name = {
    "development": DevConfig,
    "production": ProdConfig,
    "testing": TestConfig,
}
