"""Weight-file commands: convert the published VGG19 and inspect MCCW1 containers."""

from pathlib import Path
from typing import Annotated

import torch
import typer
from rich.console import Console
from rich.table import Table

from ..core.codec import VGG19_LAYOUT, ConvSpec
from ..core.paths import RunPaths
from ..core.weights import describe, write_records
from ..errors import FuseStyleError

app = typer.Typer()
console = Console()

# Positions of conv1_1 .. conv4_1 inside torchvision's ``vgg19().features``.
TORCHVISION_FEATURE_INDEX = {
    "conv1_1": 0,
    "conv1_2": 2,
    "conv2_1": 5,
    "conv2_2": 7,
    "conv3_1": 10,
    "conv3_2": 12,
    "conv3_3": 14,
    "conv3_4": 16,
    "conv4_1": 19,
}


def vgg19_records() -> dict[str, torch.Tensor]:
    """Encoder records taken from torchvision's ImageNet VGG19 (downloads on first use)."""
    try:
        from torchvision.models import VGG19_Weights, vgg19
    except ImportError as e:
        raise FuseStyleError(
            "torchvision is required to convert VGG19; install fusestyle[vgg]"
        ) from e
    features = vgg19(weights=VGG19_Weights.IMAGENET1K_V1).features
    records: dict[str, torch.Tensor] = {}
    for spec in VGG19_LAYOUT:
        if isinstance(spec, ConvSpec):
            conv = features[TORCHVISION_FEATURE_INDEX[spec.tag]]
            records[f"{spec.tag}.weight"] = conv.weight.detach().clone()
            records[f"{spec.tag}.bias"] = conv.bias.detach().clone()
    return records


@app.command(name="convert-vgg")
def convert_vgg(
    out: Annotated[
        Path,
        typer.Option("--out", "-o", help="Destination weight file"),
    ] = RunPaths.DEFAULT_ENCODER_WEIGHTS,
) -> None:
    """Write the pretrained VGG19 encoder (conv1_1 .. conv4_1) as an MCCW1 file."""
    try:
        with console.status("Fetching VGG19 weights..."):
            records = vgg19_records()
        write_records(out, records)
    except (FuseStyleError, OSError) as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(1) from None
    console.print(f"[bold green]✓[/bold green] Wrote {len(records)} records to {out}")


@app.command(name="inspect")
def inspect_weights(
    path: Annotated[Path, typer.Argument(help="MCCW1 weight or checkpoint file")],
) -> None:
    """List the records of a weight file."""
    try:
        rows = describe(path)
    except FuseStyleError as e:
        console.print(f"[red]Error:[/red] {e}")
        raise typer.Exit(1) from None

    table = Table(title=str(path), show_header=True, header_style="bold cyan")
    table.add_column("Tag", style="bold")
    table.add_column("Dtype")
    table.add_column("Shape")
    for tag, dtype, shape in rows:
        table.add_row(tag, dtype, " x ".join(str(d) for d in shape) or "scalar")
    console.print(table)
    console.print(f"[dim]{len(rows)} records[/dim]")
