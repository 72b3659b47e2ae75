"""verify — oracle-equivalence and synthesis round-trip report.

Config: {"max_atoms": 6, "round_trip_count": 100, "seed": ..}. Exits 3 if
any check fails (the report is written first).
"""

import logging

import click
import numpy as np

from app.decorators import common_options, herald_command
from app.errors import ConfigError, NumericFailureError
from app.services import io_service, verify_service
from app.services.io_service import parse_number

logger = logging.getLogger(__name__)


@click.command("verify")
@common_options
@click.pass_obj
@herald_command
def verify_cmd(config, config_path, out_path, seed, trials, jobs, verify):
    """Check the symmetric algebra against the tensor-product oracle."""
    data = io_service.load_config(config_path)
    max_atoms = parse_number(data, "max_atoms", 6, int)
    if not 1 <= max_atoms <= 8:
        raise ConfigError(f"max_atoms must be in 1..8, got {max_atoms}")
    count = parse_number(data, "round_trip_count", 100, int)
    seed = seed if seed is not None else parse_number(data, "seed", config.SEED, int)

    rng = np.random.default_rng(seed)
    checks = verify_service.run_all(
        max_atoms, rng, round_trip_count=count,
        oracle_max_atoms=min(max_atoms, config.ORACLE_MAX_ATOMS),
    )
    passed = all(c["passed"] for c in checks)
    payload = {"max_atoms": max_atoms, "seed": seed, "checks": checks, "passed": passed}
    io_service.write_json(out_path, payload, schema_name="verify")

    failed = [c for c in checks if not c["passed"]]
    if failed:
        raise NumericFailureError(
            f"{len(failed)} of {len(checks)} checks failed",
            diagnostics={"failed": [f"{c['name']}@{c['n_atoms']}" for c in failed]},
        )
    click.echo(f"all {len(checks)} checks passed")
