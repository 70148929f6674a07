import logging

import typer
from rich.logging import RichHandler

from app.api.commands import err_console, register_commands

cli = typer.Typer(
    name="wmwg",
    help="W-weighted m-weak group inverse toolkit: compute, cross-check and verify.",
    add_completion=False,
    no_args_is_help=True,
)


@cli.callback()
def main(
    verbose: int = typer.Option(0, "--verbose", "-v", count=True, help="-v for info, -vv for debug."),
) -> None:
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    logging.basicConfig(
        level=level,
        format="%(name)s: %(message)s",
        handlers=[RichHandler(console=err_console, show_path=False)],
        force=True,
    )


# ── Commands ──────────────────────────────────────────────────────────────────
register_commands(cli)   # compute  table  verify  random  show


def run() -> None:
    cli()


if __name__ == "__main__":
    run()
