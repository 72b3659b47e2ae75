"""dicke — multi-atom Dicke-state heralding: analytic table and Monte Carlo.

Config: ProtocolConfig fields {n_atoms, n_pulses, eta, branching_h, seed}
plus optional "pulse_duration" (seconds) for the repeat-until-success cost.
Writes JSON to --out and the post-selected n_h histogram to <out>_hist.csv.
"""

import logging
import math

import click

from app.commands import resolve_run
from app.decorators import common_options, herald_command
from app.errors import ConfigError, HeraldError, InfeasibleError
from app.models.protocol import ProtocolConfig
from app.services import io_service, multi_atom_service
from app.services.io_service import parse_number

logger = logging.getLogger(__name__)


def parse_protocol(data, seed):
    try:
        return ProtocolConfig.from_dict({**data, "seed": seed})
    except HeraldError:
        raise
    except KeyError as e:
        raise ConfigError(f"config is missing required key {e.args[0]!r}")
    except (TypeError, ValueError) as e:
        raise ConfigError(f"malformed protocol config: {e}")


def analytic_table(protocol: ProtocolConfig):
    """Analytic and exact probabilities; the independent-bin p_nh / p_en are null off branching 1/2."""
    n, m, eta, b = protocol.n_atoms, protocol.n_pulses, protocol.eta, protocol.branching_h
    exact_p_nh = [multi_atom_service.exact_p_nh(n, m, eta, k, b) for k in range(n + 1)]
    table = {
        "p_si": multi_atom_service.analytic_p_si(n, m),
        "p_succ": multi_atom_service.analytic_p_succ(n, m, eta),
        "p_en": None,
        "p_nh": None,
        "exact_p_nh": exact_p_nh,
        "exact_p_succ": math.fsum(exact_p_nh),
        "exact_p_en": multi_atom_service.exact_p_en(n, m, eta, b),
    }
    if multi_atom_service.is_balanced(b):
        table["p_en"] = multi_atom_service.analytic_p_en(n, m, eta)
        table["p_nh"] = [multi_atom_service.analytic_p_nh(n, m, eta, k) for k in range(n + 1)]
    else:
        logger.warning(f"branching_h={b}: independent-bin p_nh and p_en not reported")
    return table


@click.command("dicke")
@common_options
@click.pass_obj
@herald_command
def dicke_cmd(config, config_path, out_path, seed, trials, jobs, verify):
    """Dicke states from M weak pulses and threshold detectors."""
    data = io_service.load_config(config_path)
    run = resolve_run(config, data, seed, trials, jobs)
    protocol = parse_protocol(data, run.seed)

    payload = {
        "n_atoms": protocol.n_atoms,
        "n_pulses": protocol.n_pulses,
        "eta": protocol.eta,
        "branching_h": protocol.branching_h,
        "trials": run.trials,
        "seed": run.seed,
        **analytic_table(protocol),
    }
    if "pulse_duration" in data:
        duration = parse_number(data, "pulse_duration")
        try:
            total, repetitions = multi_atom_service.repeat_cost(protocol, duration)
            payload["repeat"] = {"pulse_duration": duration, "total_time": total, "repetitions": repetitions}
        except InfeasibleError as e:
            logger.warning(f"repeat cost skipped: {e}")
            payload["repeat"] = None

    empirical = multi_atom_service.estimate_probabilities(
        protocol, run.trials,
        partitions=run.partitions, jobs=run.jobs, batch_size=run.batch_size,
    )
    payload["empirical"] = {
        "p_succ": empirical["p_succ"],
        "p_succ_stderr": empirical["p_succ_stderr"],
        "p_en": empirical["p_en"],
        "p_en_stderr": empirical["p_en_stderr"],
        "p_nh": empirical["p_nh"],
    }
    rows = [[n_h, count] for n_h, count in enumerate(empirical["histogram"])]
    io_service.write_csv(io_service.sibling_path(out_path, "_hist.csv"), ["n_h", "count"], rows)
    io_service.write_json(out_path, payload, schema_name="dicke")
    expected_p_en = payload["p_en"] if payload["p_en"] is not None else payload["exact_p_en"]
    click.echo(
        f"p_en = {expected_p_en:.4g} (empirical {empirical['p_en']:.4g} "
        f"± {empirical['p_en_stderr']:.2g})"
    )
