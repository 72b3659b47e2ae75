import os
import logging

import click

from app.config import config_by_name

logger = logging.getLogger(__name__)


def create_cli(config_name=None):
    """CLI factory."""

    if config_name is None:
        config_name = os.environ.get("HERALD_ENV", "development")
    if config_name not in config_by_name:
        raise click.UsageError(
            f"HERALD_ENV must be one of {', '.join(config_by_name)}, got {config_name!r}"
        )
    config = config_by_name[config_name]

    # --- Logging ---
    if not config.TESTING:
        logging.basicConfig(
            level=config.LOG_LEVEL,
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        )

    # --- Validate settings (skip in testing) ---
    if config_name != "testing":
        try:
            config.validate()
        except RuntimeError as e:
            logger.warning(f"Config validation: {e}")

    @click.group()
    @click.pass_context
    def cli(ctx):
        """Heralded entanglement of atoms in optical cavities."""
        ctx.obj = config

    register_commands(cli)
    return cli


def register_commands(cli):
    """Attach one command per protocol workflow."""
    from app.commands.pulse_shape import pulse_shape_cmd
    from app.commands.two_cavity import two_cavity_cmd
    from app.commands.dicke import dicke_cmd
    from app.commands.synthesize import synthesize_cmd
    from app.commands.verify import verify_cmd

    cli.add_command(pulse_shape_cmd)
    cli.add_command(two_cavity_cmd)
    cli.add_command(dicke_cmd)
    cli.add_command(synthesize_cmd)
    cli.add_command(verify_cmd)
