"""Training command."""

from pathlib import Path
from typing import Annotated

import typer
from rich.console import Console
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn, TimeRemainingColumn

from ..core import trainer
from ..core.config import ConfigManager
from ..errors import FuseStyleError
from ..models.reports import LossBundle

console = Console()


def main(
    config: Annotated[Path, typer.Option("--config", "-c", help="Training config file (TOML)")],
    resume: Annotated[
        bool,
        typer.Option("--resume", "-r", help="Continue from the run's latest checkpoint"),
    ] = False,
    steps: Annotated[
        int | None, typer.Option("--steps", help="Override the configured step count")
    ] = None,
    device: Annotated[
        str | None, typer.Option("--device", help="Override the configured torch device")
    ] = None,
) -> None:
    """Train the decoder and correlation module on two image directories."""
    try:
        train_config = ConfigManager.load(config)
        overrides = {k: v for k, v in {"steps": steps, "device": device}.items() if v is not None}
        if overrides:
            train_config = ConfigManager.from_snapshot(
                train_config.model_dump(mode="json") | overrides
            )

        with Progress(
            TextColumn("[bold blue]train"),
            BarColumn(),
            MofNCompleteColumn(),
            TextColumn("loss {task.fields[loss]}"),
            TimeRemainingColumn(),
            console=console,
        ) as progress:
            task = progress.add_task("train", total=train_config.steps, loss="-")

            def on_step(step: int, bundle: LossBundle) -> None:
                progress.update(task, completed=step, loss=f"{bundle.total:.4f}")

            final = trainer.fit(train_config, resume=resume, on_step=on_step)
    except (FuseStyleError, OSError) as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(1) from None

    console.print(
        f"[bold green]✓[/bold green] Trained to step {final.step}; "
        f"checkpoints in {train_config.output_dir / 'checkpoints'}"
    )
