"""synthesize — rotator plan for a target superposition of Dicke states.

Config: {"coefficients": [{re, im}, ...] (b(0)..b(N_a), normalized on read),
"n_atoms": optional cross-check, "n_pulses", "eta", "branching_h"}; the last
three only matter for --verify, which Monte Carlo runs the plan.
"""

import logging

import click

from app.commands import resolve_run
from app.decorators import common_options, herald_command
from app.errors import ConfigError
from app.models.protocol import ProtocolConfig
from app.models.synthesis import TargetSuperposition
from app.services import io_service, synthesis_service
from app.services.dicke_service import fidelity
from app.services.io_service import parse_complex, parse_number, require

logger = logging.getLogger(__name__)


def parse_target(data):
    raw = require(data, "coefficients")
    if not isinstance(raw, list) or len(raw) < 2:
        raise ConfigError("coefficients must be a list of at least two entries")
    coeffs = [parse_complex(c, f"coefficients[{i}]") for i, c in enumerate(raw)]
    if "n_atoms" in data:
        declared = parse_number(data, "n_atoms", kind=int)
        if declared != len(coeffs) - 1:
            raise ConfigError(
                f"n_atoms = {declared} needs {declared + 1} coefficients, got {len(coeffs)}"
            )
    return TargetSuperposition.from_unnormalized(coeffs)


def plan_payload(plan, target):
    return {
        "n_atoms": plan.n_atoms,
        "settings": [
            {"pulse": m, "theta": s.theta, "phi": s.phi, "detector": s.designated_detector}
            for m, s in enumerate(plan.settings, start=1)
        ],
        "roots": [r.to_json() for r in plan.roots],
        "residual_pulses": plan.residual_pulses,
        "predicted_fidelity": fidelity(plan.predicted_state, target.to_state()),
        "predicted_state": plan.predicted_state.to_dict(),
    }


@click.command("synthesize")
@common_options
@click.pass_obj
@herald_command
def synthesize_cmd(config, config_path, out_path, seed, trials, jobs, verify):
    """Roots of the target polynomial -> per-pulse rotator settings."""
    data = io_service.load_config(config_path)
    target = parse_target(data)
    n_pulses = parse_number(data, "n_pulses", target.n_atoms, int)
    plan = synthesis_service.synthesize(target, n_pulses=n_pulses, tol=config.ROOT_TOL)
    payload = plan_payload(plan, target)

    if verify:
        run = resolve_run(config, data, seed, trials, jobs)
        protocol = ProtocolConfig(
            n_atoms=target.n_atoms,
            n_pulses=n_pulses,
            eta=parse_number(data, "eta", 1.0),
            branching_h=parse_number(data, "branching_h", 0.5),
            seed=run.seed,
        )
        payload["verification"] = synthesis_service.plan_success_probability(
            plan, protocol, run.trials,
            partitions=run.partitions, jobs=run.jobs, batch_size=run.batch_size,
        )
        payload["verification"]["seed"] = run.seed

    io_service.write_json(out_path, payload, schema_name="synthesis_plan")
    click.echo(
        f"{len(plan.settings)} settings, predicted fidelity {payload['predicted_fidelity']:.12f}"
    )
