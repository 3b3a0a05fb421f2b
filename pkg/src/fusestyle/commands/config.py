"""Training configuration commands."""

from pathlib import Path
from typing import Annotated, Any

import typer
from rich.console import Console

from ..core.config import ConfigManager
from ..errors import ConfigError
from ..models.config import TrainConfig

app = typer.Typer()
console = Console()

PathArg = Annotated[Path, typer.Argument(help="Training config file (TOML)")]


@app.command(name="init")
def init_config(
    path: PathArg,
    force: Annotated[
        bool,
        typer.Option("--force", "-f", help="Overwrite an existing file"),
    ] = False,
) -> None:
    """Write a config file holding the default training protocol."""
    if path.exists() and not force:
        console.print(f"[red]Error:[/red] {path} already exists (use --force to overwrite)")
        raise typer.Exit(1)
    ConfigManager.save(TrainConfig(), path)
    console.print(f"[bold green]✓[/bold green] Wrote default config to {path}")


@app.command(name="show")
def show_config(path: PathArg) -> None:
    """Show every value of a config file, defaults and environment included."""
    try:
        config = ConfigManager.load(path)
    except ConfigError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(1) from None
    console.print(f"\n[bold blue]Training configuration[/bold blue] ({path})\n")
    _print_config_dict(config.model_dump(mode="json", exclude_none=True))


def _print_config_dict(config: dict[str, Any], prefix: str = "") -> None:
    """Recursively print configuration dictionary."""
    for key, value in config.items():
        full_key = f"{prefix}.{key}" if prefix else key

        if isinstance(value, dict):
            _print_config_dict(value, full_key)
        else:
            console.print(f"  [cyan]{full_key}[/cyan] = {value}")


@app.command(name="get")
def get_config(
    path: PathArg,
    key: Annotated[
        str,
        typer.Argument(help="Configuration key (dot notation, e.g., 'loss.style')"),
    ],
) -> None:
    """Get a configuration value."""
    try:
        value = ConfigManager.get_value(ConfigManager.load(path), key)
    except ConfigError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(1) from None

    if value is None:
        console.print(f"[yellow]Configuration key '{key}' not found.[/yellow]")
        raise typer.Exit(1)

    console.print(f"[cyan]{key}[/cyan] = {getattr(value, 'value', value)}")


@app.command(name="set")
def set_config(
    path: PathArg,
    key: Annotated[
        str,
        typer.Argument(help="Configuration key (dot notation)"),
    ],
    value: Annotated[
        str,
        typer.Argument(help="Value to set (parsed as TOML, e.g. 15, 1e-4, \"deep\")"),
    ],
) -> None:
    """Set a configuration value, validating the whole config."""
    try:
        ConfigManager.set_value(path, key, value)
    except ConfigError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(1) from None

    console.print(f"[bold green]✓[/bold green] Set [cyan]{key}[/cyan] = {value} in {path}")
