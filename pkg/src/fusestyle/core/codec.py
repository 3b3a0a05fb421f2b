"""Frozen VGG19 encoder taps and the trainable mirror decoder.

The encoder runs VGG19 up to relu4_1 (or relu3_1 for the shallow codec) and
exposes the relu{1..4}_1 activations as named taps. The decoder mirrors the
truncated encoder: every 3x3 convolution becomes a 3x3 convolution with
swapped channel counts and every max pool becomes a nearest-neighbour 2x
upsample. All 3x3 convolutions use reflection padding.
"""

from __future__ import annotations

import hashlib
import logging
from collections.abc import Iterator, Mapping
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import torch
import torch.nn.functional as F
from torch import nn

from ..errors import ChannelMismatchError, ImageSizeError, LayerShapeError
from ..models.config import Depth
from .weights import read_records, write_records

logger = logging.getLogger(__name__)

MIN_SIZE = 16
TAPS = ("relu1_1", "relu2_1", "relu3_1", "relu4_1")

# ImageNet statistics expected by the published VGG19 weights.
IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)


@dataclass(frozen=True)
class ConvSpec:
    """One 3x3 convolution of the encoder layout."""

    tag: str
    in_channels: int
    out_channels: int

    @property
    def tap(self) -> str | None:
        """Tap produced after this convolution's ReLU, if it opens a block."""
        block, index = self.tag.removeprefix("conv").split("_")
        return f"relu{block}_1" if index == "1" else None


POOL: Literal["pool"] = "pool"
LayerSpec = ConvSpec | Literal["pool"]


def make_layout(
    widths: tuple[int, ...] = (64, 128, 256, 512),
    convs: tuple[int, ...] = (2, 2, 4, 1),
    in_channels: int = 3,
) -> tuple[LayerSpec, ...]:
    """
    Build a VGG-style layout: blocks of 3x3 convolutions separated by max pools.

    The defaults give VGG19 through conv4_1. Tests build miniature codecs
    with e.g. ``make_layout((8, 8, 8, 8), (1, 1, 1, 1))``.

    Args:
        widths: Output channels of each block
        convs: Convolutions per block
        in_channels: Image channels

    Returns:
        Layout tuple of ConvSpec entries and POOL markers
    """
    layout: list[LayerSpec] = []
    channels = in_channels
    for block, (width, count) in enumerate(zip(widths, convs, strict=True), start=1):
        if block > 1:
            layout.append(POOL)
        for index in range(1, count + 1):
            layout.append(ConvSpec(f"conv{block}_{index}", channels, width))
            channels = width
    return tuple(layout)


VGG19_LAYOUT = make_layout()


def truncate_layout(layout: tuple[LayerSpec, ...], depth: Depth) -> tuple[LayerSpec, ...]:
    """Cut a layout right after the convolution producing the depth's deepest tap."""
    for position, spec in enumerate(layout):
        if isinstance(spec, ConvSpec) and spec.tap == depth.tap:
            return layout[: position + 1]
    raise ValueError(f"layout has no {depth.tap} tap")


def tap_channels(layout: tuple[LayerSpec, ...], depth: Depth) -> int:
    """Channel count of the depth's deepest tap."""
    last = truncate_layout(layout, depth)[-1]
    assert isinstance(last, ConvSpec)
    return last.out_channels


@dataclass(frozen=True)
class EncoderTaps:
    """Named encoder activations, ordered shallow to deep."""

    taps: dict[str, torch.Tensor]
    depth: Depth

    @property
    def deepest(self) -> torch.Tensor:
        """Activation of the depth's deepest tap."""
        return self.taps[self.depth.tap]

    def __getitem__(self, tag: str) -> torch.Tensor:
        return self.taps[tag]

    def __iter__(self) -> Iterator[str]:
        return iter(self.taps)

    def __len__(self) -> int:
        return len(self.taps)


def _conv3x3(x: torch.Tensor, conv: nn.Conv2d) -> torch.Tensor:
    return conv(F.pad(x, (1, 1, 1, 1), mode="reflect"))


class Encoder(nn.Module):
    """VGG-style feature encoder. Parameters never receive gradients."""

    mean: torch.Tensor
    std: torch.Tensor

    def __init__(self, layout: tuple[LayerSpec, ...] = VGG19_LAYOUT) -> None:
        super().__init__()
        self.layout = layout
        self.convs = nn.ModuleDict(
            {
                spec.tag: nn.Conv2d(spec.in_channels, spec.out_channels, kernel_size=3)
                for spec in layout
                if isinstance(spec, ConvSpec)
            }
        )
        self.register_buffer("mean", torch.tensor(IMAGENET_MEAN).view(1, 3, 1, 1))
        self.register_buffer("std", torch.tensor(IMAGENET_STD).view(1, 3, 1, 1))
        self.requires_grad_(False)
        self.eval()

    def train(self, mode: bool = True) -> Encoder:
        # Always in eval mode.
        return super().train(False)

    def preprocess(self, img: torch.Tensor) -> torch.Tensor:
        """Map [0, 1] RGB to the network's normalized input range."""
        return (img - self.mean) / self.std

    def forward(self, img: torch.Tensor, depth: Depth = Depth.DEEP) -> EncoderTaps:
        check_image(img)
        x = self.preprocess(img)
        taps: dict[str, torch.Tensor] = {}
        for spec in self.layout:
            if spec == POOL:
                x = F.max_pool2d(x, kernel_size=2, stride=2)
                continue
            assert isinstance(spec, ConvSpec)
            x = F.relu(_conv3x3(x, self.convs[spec.tag]))
            if spec.tap is not None:
                taps[spec.tap] = x
                if spec.tap == depth.tap:
                    break
        return EncoderTaps(taps=taps, depth=depth)

    def checksum(self) -> str:
        """SHA-256 over every parameter and buffer, for frozenness checks."""
        digest = hashlib.sha256()
        for name, tensor in sorted(self.state_dict().items()):
            digest.update(name.encode())
            digest.update(tensor.detach().cpu().contiguous().numpy().tobytes())
        return digest.hexdigest()


class Decoder(nn.Module):
    """Trainable mirror of the truncated encoder."""

    def __init__(
        self, layout: tuple[LayerSpec, ...] = VGG19_LAYOUT, depth: Depth = Depth.DEEP
    ) -> None:
        super().__init__()
        specs = truncate_layout(layout, depth)
        self.depth = depth
        self.in_channels = tap_channels(layout, depth)
        first = next(spec for spec in specs if isinstance(spec, ConvSpec))

        layers: list[nn.Module] = []
        for spec in reversed(specs):
            if spec == POOL:
                layers.append(nn.Upsample(scale_factor=2, mode="nearest"))
                continue
            assert isinstance(spec, ConvSpec)
            layers.append(nn.ReflectionPad2d(1))
            layers.append(nn.Conv2d(spec.out_channels, spec.in_channels, kernel_size=3))
            if spec is not first:
                layers.append(nn.ReLU())
        self.net = nn.Sequential(*layers)

    def forward(self, f: torch.Tensor) -> torch.Tensor:
        if f.dim() != 4 or f.shape[1] != self.in_channels:
            raise ChannelMismatchError(
                f"decoder ({self.depth.value}) expects {self.in_channels} channels, "
                f"got shape {tuple(f.shape)}"
            )
        return self.net(f)


def check_image(img: torch.Tensor, min_size: int = MIN_SIZE) -> None:
    """
    Validate an image batch before encoding.

    Raises:
        ImageSizeError: Not (B, 3, H, W) or a side below ``min_size``
    """
    if img.dim() != 4 or img.shape[1] != 3:
        raise ImageSizeError(f"expected (batch, 3, H, W) image, got {tuple(img.shape)}")
    height, width = img.shape[-2:]
    if height < min_size or width < min_size:
        raise ImageSizeError(
            f"image {width}x{height} is too small: minimum size is {min_size}x{min_size}"
        )


def load_encoder(path: Path, layout: tuple[LayerSpec, ...] = VGG19_LAYOUT) -> Encoder:
    """
    Load pretrained encoder weights from an MCCW1 file.

    Args:
        path: Weight file holding ``<conv>.weight`` / ``<conv>.bias`` records
        layout: Expected layout (VGG19 through conv4_1 by default)

    Returns:
        Frozen Encoder

    Raises:
        WeightFileError: Missing or truncated file
        LayerShapeError: Record missing or shaped differently from the layout
    """
    records = read_records(path)
    encoder = Encoder(layout)
    state: dict[str, torch.Tensor] = {}
    for spec in layout:
        if not isinstance(spec, ConvSpec):
            continue
        expected = {
            "weight": (spec.out_channels, spec.in_channels, 3, 3),
            "bias": (spec.out_channels,),
        }
        for kind, shape in expected.items():
            tag = f"{spec.tag}.{kind}"
            if tag not in records:
                raise LayerShapeError(spec.tag, f"missing {kind} record")
            found = tuple(records[tag].shape)
            if found != shape:
                raise LayerShapeError(spec.tag, f"{kind} has shape {found}, expected {shape}")
            state[f"convs.{tag}"] = records[tag].to(torch.float32)
    extra = sorted(set(records) - {key.removeprefix("convs.") for key in state})
    if extra:
        logger.debug("Ignoring %d records beyond the encoder layout: %s", len(extra), extra)
    encoder.load_state_dict(state, strict=False)
    return encoder


def save_encoder(encoder: Encoder, path: Path) -> None:
    """Write encoder convolution weights to an MCCW1 file (inverse of load_encoder)."""
    records: Mapping[str, torch.Tensor] = {
        f"{tag}.{kind}": getattr(conv, kind) for tag, conv in encoder.convs.items()
        for kind in ("weight", "bias")
    }
    write_records(path, records)


def encode(img: torch.Tensor, encoder: Encoder, depth: Depth = Depth.DEEP) -> EncoderTaps:
    """
    Encode an image batch into taps up to the depth's deepest layer.

    Args:
        img: (B, 3, H, W) RGB in [0, 1], both sides >= 16
        encoder: Frozen encoder
        depth: Deepest tap to compute

    Returns:
        EncoderTaps with relu1_1 .. depth.tap
    """
    return encoder(img, depth)


def decode(f: torch.Tensor, decoder: Decoder) -> torch.Tensor:
    """
    Decode a deepest-tap feature map into an image clamped to [0, 1].

    Raises:
        ChannelMismatchError: ``f`` does not have the decoder depth's channel count
    """
    return decoder(f).clamp(0.0, 1.0)
