"""Metrics commands: clip coherence, the illumination probe and training-log summaries."""

import json
from pathlib import Path
from typing import Annotated

import typer
from rich.console import Console
from rich.table import Table

from ..core import metrics_log
from ..core.coherence import compare_coherence, frame_diffs, illumination_probe, save_heatmaps
from ..core.inference import Stylizer
from ..core.paths import RunPaths
from ..errors import FuseStyleError
from ..utils.images import load_frames, load_image

app = typer.Typer(no_args_is_help=True, rich_markup_mode="rich")
console = Console()


@app.command(name="coherence")
def coherence(
    frames: Annotated[Path, typer.Option("--frames", "-f", help="Frame directory to measure")],
    out: Annotated[Path, typer.Option("--out", "-o", help="JSON report path")],
    against: Annotated[
        Path | None,
        typer.Option("--against", help="Input frames the measured clip was stylized from"),
    ] = None,
    heatmaps: Annotated[
        Path | None,
        typer.Option("--heatmaps", help="Write one difference heatmap PNG per frame pair here"),
    ] = None,
) -> None:
    """Adjacent-frame differences of a clip, optionally relative to its input clip."""
    try:
        clip = load_frames(frames)
        if against is None:
            report = frame_diffs(clip, with_heatmaps=heatmaps is not None)
            measured = report
            payload = report.model_dump_json(indent=2)
        else:
            pair = compare_coherence(load_frames(against), clip, with_heatmaps=heatmaps is not None)
            measured = pair.stylized
            payload = pair.model_dump_json(indent=2)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(payload, encoding="utf-8")
        if heatmaps is not None:
            written = save_heatmaps(measured, heatmaps)
            console.print(f"[dim]{len(written)} heatmaps in {heatmaps}[/dim]")
    except (FuseStyleError, OSError) as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(1) from None

    console.print(
        f"[cyan]frames[/cyan] = {measured.frames}  "
        f"[cyan]mean_diff[/cyan] = {measured.mean_diff:.6f}  "
        f"[cyan]var_diff[/cyan] = {measured.var_diff:.6g}"
    )
    if against is not None:
        console.print(f"[cyan]ratio[/cyan] = {json.loads(payload)['ratio']}")
    console.print(f"[bold green]✓[/bold green] Report written to {out}")


@app.command(name="probe")
def probe(
    ckpt: Annotated[Path, typer.Option("--ckpt", "-k", help="Checkpoint file (.mccw)")],
    content: Annotated[Path, typer.Option("--content", "-c", help="Content image")],
    style: Annotated[Path, typer.Option("--style", "-s", help="Style image")],
    sigma: Annotated[float, typer.Option("--sigma", min=0.0, help="Noise standard deviation")] = 0.01,
    trials: Annotated[int, typer.Option("--trials", "-n", help="Noise draws")] = 20,
    seed: Annotated[int, typer.Option("--seed", help="Noise seed")] = 0,
    weights: Annotated[
        Path | None, typer.Option("--weights", "-w", help="Encoder weights")
    ] = None,
    device: Annotated[str, typer.Option("--device", help="Torch device")] = "cpu",
) -> None:
    """Mean output change of a model under Gaussian noise on the content image."""
    try:
        stylizer = Stylizer.from_files(ckpt, weights, device=device)
        gains = stylizer.prepare_style(load_image(style))
        value = illumination_probe(
            lambda c, _s: stylizer.stylize(c, gains),
            load_image(content),
            load_image(style),
            sigma,
            trials,
            seed,
        )
    except (FuseStyleError, OSError) as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(1) from None
    console.print(f"[cyan]illumination probe[/cyan] (sigma={sigma}, trials={trials}) = {value:.6f}")


@app.command(name="summary")
def summary(
    run: Annotated[
        Path, typer.Option("--run", "-r", help="Training run directory, or a checkpoint inside one")
    ],
    window: Annotated[int, typer.Option("--window", min=1, help="Rolling-mean window")] = 10,
    start_step: Annotated[int, typer.Option("--start-step", help="Reference step")] = 10,
) -> None:
    """Smoothed loss terms at a reference step versus the last logged step."""
    run = RunPaths.find_run_root(run) or run
    metrics_file = RunPaths(run).metrics_file
    if not metrics_file.exists():
        console.print(f"[red]Error:[/red] No metrics file in {run}")
        raise typer.Exit(1)

    try:
        trends = metrics_log.summarize(metrics_file, window=window, start_step=start_step)
    except (FuseStyleError, OSError) as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(1) from None
    table = Table(title=f"Losses in {run}", show_header=True, header_style="bold cyan")
    table.add_column("Term", style="bold")
    table.add_column(f"Step {trends[0].start_step}")
    table.add_column(f"Step {trends[0].end_step}")
    table.add_column("End / start")
    for trend in trends:
        colour = "green" if trend.ratio < 1 else "yellow"
        table.add_row(
            trend.term,
            f"{trend.start:.6g}",
            f"{trend.end:.6g}",
            f"[{colour}]{trend.ratio:.3f}[/{colour}]",
        )
    console.print(table)
