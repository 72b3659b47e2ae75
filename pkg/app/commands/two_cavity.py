"""two-cavity — heralded Bell pair: analytic success, Monte Carlo, heralded state.

Config:
    {"left": {g0, g1, kappa}, "right": {...}  (defaults to left),
     "detection": {"scheme", "eta", "rotate_R", "minus_outcome"},
     "overlap": 1.0 | {re, im}, "seed": .., "trials": ..}
"""

import dataclasses
import logging

import click

from app.commands import parse_bool, parse_cavity, resolve_run
from app.decorators import common_options, herald_command
from app.errors import InfeasibleError
from app.models.cavity import DetectionConfig
from app.services import io_service, two_cavity_service
from app.services.io_service import parse_complex, parse_number, require

logger = logging.getLogger(__name__)


def parse_detection(data):
    data = data or {}
    return DetectionConfig(
        scheme=data.get("scheme", "pbs_both_outputs"),
        eta=parse_number(data, "eta", 1.0, section="detection"),
        rotate_R=parse_bool(data, "rotate_R", True, section="detection"),
        minus_outcome=data.get("minus_outcome", "correct"),
    )


@click.command("two-cavity")
@common_options
@click.pass_obj
@herald_command
def two_cavity_cmd(config, config_path, out_path, seed, trials, jobs, verify):
    """Two single-atom cavities joined on a PBS."""
    data = io_service.load_config(config_path)
    left = parse_cavity(require(data, "left"), "left")
    right = parse_cavity(data["right"], "right") if "right" in data else left
    detection = parse_detection(data.get("detection"))
    overlap = parse_complex(data.get("overlap", 1.0), "overlap")
    run = resolve_run(config, data, seed, trials, jobs)

    try:
        outcome = two_cavity_service.coincidence_project(
            two_cavity_service.cavity_emission_state(left),
            two_cavity_service.cavity_emission_state(right),
            overlap,
            detection,
        )
    except InfeasibleError as e:
        logger.warning(f"no heralded state: {e}")
        outcome = None
    p_analytic = two_cavity_service.success_probability(left, right, detection)
    by_minus_outcome = {
        choice: two_cavity_service.success_probability(
            left, right, dataclasses.replace(detection, minus_outcome=choice)
        )
        for choice in DetectionConfig.MINUS_OUTCOMES
    }
    empirical = two_cavity_service.monte_carlo_two_cavity(
        left, right, detection, run.trials, run.seed,
        partitions=run.partitions, jobs=run.jobs, batch_size=run.batch_size,
    )

    payload = {
        "scheme": detection.scheme,
        "eta": detection.eta,
        "rotate_R": detection.rotate_R,
        "minus_outcome": detection.minus_outcome,
        "overlap": {"re": overlap.real, "im": overlap.imag},
        "p_analytic": p_analytic,
        "p_by_minus_outcome": by_minus_outcome,
        "p_empirical": empirical["rate"],
        "stderr": empirical["stderr"],
        "tally": empirical["tally"],
        "trials": run.trials,
        "seed": run.seed,
        "bell_fidelity": outcome.bell_fidelity if outcome is not None else None,
        "target": "psi_plus" if detection.rotate_R else "phi_plus",
        "density": outcome.density_as_pairs() if outcome is not None else None,
    }
    io_service.write_json(out_path, payload, schema_name="two_cavity")
    fidelity = f"{outcome.bell_fidelity:.12f}" if outcome is not None else "n/a"
    click.echo(
        f"p_analytic = {p_analytic:.6g}, p_empirical = {empirical['rate']:.6g} "
        f"± {empirical['stderr']:.2g}, bell_fidelity = {fidelity}"
    )
