"""The style-transfer generator: encoder -> correlation fusion -> decoder."""

from __future__ import annotations

from collections.abc import Iterator

import torch
from torch import nn

from ..models.config import Depth, FusionMode
from .codec import Decoder, Encoder, tap_channels
from .transform import MultiChannelCorrelation


class Generator(nn.Module):
    """
    Full stylization network.

    Only the correlation module and the decoder are trainable; the encoder
    is shared and frozen.
    """

    def __init__(
        self,
        encoder: Encoder,
        depth: Depth = Depth.DEEP,
        mode: FusionMode = FusionMode.MULTI_CHANNEL,
    ) -> None:
        super().__init__()
        self.depth = depth
        self.mode = mode
        self.encoder = encoder
        self.mcc = MultiChannelCorrelation(tap_channels(encoder.layout, depth), mode)
        self.decoder = Decoder(encoder.layout, depth)

    @property
    def factor(self) -> int:
        """Spatial downsampling between images and the fused feature."""
        return self.depth.factor

    def trainable_parameters(self) -> Iterator[nn.Parameter]:
        """Decoder and correlation-module parameters, in a stable order."""
        yield from self.mcc.parameters()
        yield from self.decoder.parameters()

    def style_gains(self, style: torch.Tensor) -> torch.Tensor:
        """Encode a style image once and reduce it to per-channel gains."""
        return self.mcc.gains(self.encoder(style, self.depth).deepest)

    def stylize_with(
        self,
        content: torch.Tensor,
        gains: torch.Tensor,
        *,
        alpha: float = 1.0,
        clamp: bool = True,
    ) -> torch.Tensor:
        """Stylize content images with precomputed style gains."""
        feature = self.mcc.apply_gains(self.encoder(content, self.depth).deepest, gains, alpha)
        out = self.decoder(feature)
        return out.clamp(0.0, 1.0) if clamp else out

    def forward(
        self,
        content: torch.Tensor,
        style: torch.Tensor,
        *,
        alpha: float = 1.0,
        clamp: bool = True,
    ) -> torch.Tensor:
        return self.stylize_with(content, self.style_gains(style), alpha=alpha, clamp=clamp)

    def state_records(self) -> dict[str, torch.Tensor]:
        """Trainable weights as MCCW1 records (``mcc.*`` and ``decoder.*`` tags)."""
        records = {f"mcc.{k}": v for k, v in self.mcc.state_dict().items()}
        records.update({f"decoder.{k}": v for k, v in self.decoder.state_dict().items()})
        return records

    def load_records(self, records: dict[str, torch.Tensor]) -> None:
        """Load trainable weights written by :meth:`state_records`."""
        self.mcc.load_state_dict(
            {k.removeprefix("mcc."): v for k, v in records.items() if k.startswith("mcc.")}
        )
        self.decoder.load_state_dict(
            {k.removeprefix("decoder."): v for k, v in records.items() if k.startswith("decoder.")}
        )


def build_generator(
    encoder: Encoder,
    depth: Depth = Depth.DEEP,
    mode: FusionMode = FusionMode.MULTI_CHANNEL,
    seed: int = 0,
) -> Generator:
    """Construct a generator whose fresh weights depend only on ``seed``."""
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        generator = Generator(encoder, depth, mode)
    return generator.to(encoder.mean.device)
