"""Stylization commands: single images, frame directories and the timing harness."""

from pathlib import Path
from typing import Annotated

import typer
from rich.console import Console
from rich.table import Table

from ..core.inference import DEFAULT_SIZES, Stylizer
from ..errors import ConfigError, FuseStyleError
from ..models.config import Depth, FusionMode

app = typer.Typer(no_args_is_help=True, rich_markup_mode="rich")
console = Console()

CkptOpt = Annotated[Path, typer.Option("--ckpt", "-k", help="Checkpoint file (.mccw)")]
WeightsOpt = Annotated[
    Path | None,
    typer.Option("--weights", "-w", help="Encoder weights (default: from the checkpoint config)"),
]
ModeOpt = Annotated[
    FusionMode | None,
    typer.Option("--mode", help="Expected fusion mode; rejected if the checkpoint differs"),
]
DepthOpt = Annotated[
    Depth | None,
    typer.Option("--depth", help="Expected codec depth; rejected if the checkpoint differs"),
]
DeviceOpt = Annotated[str, typer.Option("--device", help="Torch device (cpu, cuda, cuda:1 ...)")]
AlphaOpt = Annotated[
    float,
    typer.Option("--alpha", "-a", min=0.0, max=1.0, help="Style strength (1 = full stylization)"),
]


def _load(
    ckpt: Path,
    weights: Path | None,
    mode: FusionMode | None,
    depth: Depth | None,
    device: str,
) -> Stylizer:
    return Stylizer.from_files(ckpt, weights, depth=depth, mode=mode, device=device)


def parse_sizes(value: str) -> list[int]:
    """Parse a comma-separated size list such as ``256,512,1024``."""
    try:
        sizes = [int(part) for part in value.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigError(f"Invalid size list: {value!r}") from e
    if not sizes or min(sizes) < 16:
        raise ConfigError(f"Sizes must be integers >= 16, got {value!r}")
    return sizes


@app.command(name="image")
def stylize_image(
    content: Annotated[Path, typer.Option("--content", "-c", help="Content image")],
    style: Annotated[Path, typer.Option("--style", "-s", help="Style image")],
    ckpt: CkptOpt,
    out: Annotated[Path, typer.Option("--out", "-o", help="Output image")],
    weights: WeightsOpt = None,
    mode: ModeOpt = None,
    depth: DepthOpt = None,
    alpha: AlphaOpt = 1.0,
    device: DeviceOpt = "cpu",
) -> None:
    """Stylize one image at its own resolution."""
    try:
        stylizer = _load(ckpt, weights, mode, depth, device)
        stylizer.stylize_image(content, style, out, alpha=alpha)
    except (FuseStyleError, OSError) as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(1) from None
    console.print(f"[bold green]✓[/bold green] Wrote {out}")


@app.command(name="video")
def stylize_video(
    frames: Annotated[Path, typer.Option("--frames", "-f", help="Directory of input frames")],
    style: Annotated[Path, typer.Option("--style", "-s", help="Style image")],
    ckpt: CkptOpt,
    out: Annotated[Path, typer.Option("--out", "-o", help="Output frame directory")],
    weights: WeightsOpt = None,
    mode: ModeOpt = None,
    depth: DepthOpt = None,
    alpha: AlphaOpt = 1.0,
    device: DeviceOpt = "cpu",
    workers: Annotated[
        int, typer.Option("--workers", "-j", min=1, help="Frames stylized concurrently")
    ] = 1,
) -> None:
    """Stylize every frame of a directory with one style image."""
    try:
        stylizer = _load(ckpt, weights, mode, depth, device)
        with console.status(f"Stylizing frames from {frames}..."):
            written = stylizer.stylize_video(frames, style, out, workers=workers, alpha=alpha)
    except (FuseStyleError, OSError) as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(1) from None
    console.print(f"[bold green]✓[/bold green] Wrote {len(written)} frames to {out}")


@app.command(name="bench")
def benchmark(
    ckpt: CkptOpt,
    sizes: Annotated[
        str, typer.Option("--sizes", help="Comma-separated square sizes")
    ] = ",".join(str(s) for s in DEFAULT_SIZES),
    runs: Annotated[int, typer.Option("--runs", "-n", help="Measured runs per size")] = 10,
    warmup: Annotated[int, typer.Option("--warmup", min=0, help="Untimed runs per size")] = 2,
    weights: WeightsOpt = None,
    device: DeviceOpt = "cpu",
    out: Annotated[
        Path | None, typer.Option("--out", "-o", help="Also write the report as JSON")
    ] = None,
) -> None:
    """Time generation per image size, next to the published reference numbers."""
    try:
        stylizer = _load(ckpt, weights, None, None, device)
        with console.status("Timing inference..."):
            report = stylizer.benchmark(parse_sizes(sizes), runs=runs, warmup=warmup)
        if out is not None:
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_text(report.model_dump_json(indent=2), encoding="utf-8")
    except (FuseStyleError, OSError) as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(1) from None

    table = Table(title=f"Inference time ({report.depth})", show_header=True, header_style="bold cyan")
    table.add_column("Size", style="bold")
    table.add_column("Mean (s)")
    table.add_column("Median (s)")
    table.add_column(f"Reference (s, {report.reference_hardware})", style="dim")
    for row in report.timings:
        reference = f"{row.reference_seconds:.3f}" if row.reference_seconds is not None else "-"
        table.add_row(
            f"{row.size}x{row.size}", f"{row.mean_seconds:.4f}", f"{row.median_seconds:.4f}", reference
        )
    console.print(table)
    console.print(f"[dim]{report.hardware}; {runs} runs after {warmup} warmup[/dim]")
