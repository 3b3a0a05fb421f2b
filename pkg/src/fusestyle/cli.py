"""Main CLI entry point for fusestyle."""

import logging
import platform
from typing import Annotated

import torch
import typer
from rich.console import Console

from . import __version__
from .commands import config as config_cmd
from .commands import metrics as metrics_cmd
from .commands import stylize as stylize_cmd
from .commands import train as train_cmd
from .commands import weights as weights_cmd
from .utils.log import setup_logging

# Create main app
app = typer.Typer(
    name="fusestyle",
    help="Arbitrary, temporally coherent style transfer with multi-channel feature correlation",
    add_completion=True,
    no_args_is_help=True,
    rich_markup_mode="rich",
)

# Sub-apps also installed as their own console scripts (`stylize`, `metrics`)
stylize_app = stylize_cmd.app
metrics_app = metrics_cmd.app

# Console for rich output
console = Console()


def version_callback(value: bool) -> None:
    """Print version and exit."""
    if value:
        console.print(f"[bold blue]fusestyle[/bold blue] version [green]{__version__}[/green]")
        raise typer.Exit()


@app.callback()
def main(
    version: Annotated[
        bool,
        typer.Option(
            "--version",
            "-v",
            callback=version_callback,
            is_eager=True,
            help="Show version and exit",
        ),
    ] = False,
    verbose: Annotated[
        bool,
        typer.Option("--verbose", "-V", help="Log debug messages"),
    ] = False,
) -> None:
    """Train and run multi-channel-correlation style transfer."""
    setup_logging(verbose)


def _standalone(sub_app: typer.Typer) -> None:
    """Give a directly installed sub-app the same logging setup as the umbrella app."""

    @sub_app.callback()
    def _root(
        verbose: Annotated[
            bool,
            typer.Option("--verbose", "-V", help="Log debug messages"),
        ] = False,
    ) -> None:
        # Keep a level already chosen by the umbrella app.
        if verbose or not logging.getLogger("fusestyle").handlers:
            setup_logging(verbose)


_standalone(stylize_app)
_standalone(metrics_app)

# Register command groups
app.command(name="train", help="Train a model from a config file")(train_cmd.main)
app.add_typer(stylize_app, name="stylize", help="Stylize images and frame directories")
app.add_typer(metrics_app, name="metrics", help="Coherence, robustness and training metrics")
app.add_typer(config_cmd.app, name="config", help="Manage training configuration files")
app.add_typer(weights_cmd.app, name="weights", help="Convert and inspect weight files")


@app.command(name="version")
def version_command() -> None:
    """Show detailed version information."""
    console.print("\n[bold blue]fusestyle[/bold blue] - multi-channel correlation style transfer\n")
    console.print(f"Version: [green]{__version__}[/green]")
    console.print(f"Python: [cyan]{platform.python_version()}[/cyan]")
    console.print(f"Torch: [cyan]{torch.__version__}[/cyan]")
    cuda = "available" if torch.cuda.is_available() else "not available"
    console.print(f"CUDA: [magenta]{cuda}[/magenta]")
    console.print()
    raise typer.Exit()


if __name__ == "__main__":
    app()
