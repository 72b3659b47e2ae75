"""
Custom command decorators.

- common_options: the --config/--out/--seed/--trials/--jobs/--verify flags
  every verb shares.
- herald_command: turns a HeraldError escaping a command into a logged
  one-line diagnostic and the error's exit code (2 argument/config, 3
  numeric failure).
"""

import logging
from functools import wraps

import click

from app.errors import HeraldError

logger = logging.getLogger(__name__)


def common_options(f):
    """Attach the shared batch-run options."""
    options = [
        click.option("--config", "config_path", required=True,
                     type=click.Path(dir_okay=False), help="JSON config file"),
        click.option("--out", "out_path", required=True,
                     type=click.Path(dir_okay=False), help="JSON result file"),
        click.option("--seed", type=int, default=None, help="Monte Carlo seed"),
        click.option("--trials", type=click.IntRange(min=1), default=None,
                     help="Monte Carlo trials"),
        click.option("--jobs", type=click.IntRange(min=1), default=None,
                     help="Worker processes (never changes results)"),
        click.option("--verify", is_flag=True, default=False,
                     help="Also run the Monte Carlo verification"),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def herald_command(f):
    """Map HeraldError to its exit code."""

    @wraps(f)
    def decorated(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except HeraldError as e:
            logger.error(f"{type(e).__name__}: {e}")
            click.echo(f"error: {e}", err=True)
            if getattr(e, "diagnostics", None):
                click.echo(f"diagnostics: {e.diagnostics}", err=True)
            click.get_current_context().exit(e.exit_code)

    return decorated
