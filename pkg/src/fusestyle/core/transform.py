"""Multi-channel correlation: fuse content and style features.

Content and style features are instance-normalized and passed through 1x1
projections. Each style channel is reduced to its energy (sum of squared
activations, divided by the number of spatial positions so the style
image's resolution does not rescale it). A bias-free dense mixer turns the
energy vector into one gain per content channel:

    g_i = 1 + sum_k w_ik * e_k        (multi_channel)
    g_i = 1 + e_i                     (channel_wise)

The fused feature is ``g_i * content_i``, i.e. an exact per-channel multiple
of the content branch, followed by a 1x1 output projection.

Correlating a content channel with a style channel through the explicit
N x N matrix ``c^T s`` and multiplying back by ``s`` collapses to
``(sum_j s_j^2) * c``; :func:`correlation_route` keeps that explicit route
for tests.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

from ..errors import ChannelMismatchError
from ..models.config import FusionMode

NORM_EPS = 1e-5
INIT_NOISE = 1e-2


def normalize(f: torch.Tensor, eps: float = NORM_EPS) -> torch.Tensor:
    """
    Per-sample, per-channel instance normalization without affine terms.

    Constant channels map to zeros (eps keeps the division finite).
    """
    return F.instance_norm(f, eps=eps)


def channel_energy(f_s: torch.Tensor) -> torch.Tensor:
    """
    Sum of squared activations of every channel.

    Args:
        f_s: (B, C, H, W) feature map

    Returns:
        (B, C) non-negative energies
    """
    return f_s.pow(2).sum(dim=(2, 3))


def correlation_route(f_c_ch: torch.Tensor, f_s_ch: torch.Tensor) -> torch.Tensor:
    """
    Rearrange one style channel through the explicit N x N correlation matrix.

    Materializes ``CO = f_c^T s`` and returns ``s CO^T``. Memory is O(N^2);
    only meant for checking the closed form ``(sum s_j^2) * f_c``.

    Args:
        f_c_ch: Flattened content channel, length N
        f_s_ch: Flattened style channel, length N

    Returns:
        Rearranged style channel, length N
    """
    if f_c_ch.dim() != 1 or f_s_ch.dim() != 1 or f_c_ch.numel() != f_s_ch.numel():
        raise ValueError(
            f"channel vectors must be 1-D of equal length, got {tuple(f_c_ch.shape)} "
            f"and {tuple(f_s_ch.shape)}"
        )
    correlation = torch.outer(f_c_ch, f_s_ch)
    return f_s_ch @ correlation.T


def _near_identity(conv: nn.Conv2d, noise: float) -> None:
    with torch.no_grad():
        channels = conv.weight.shape[0]
        eye = torch.eye(channels, dtype=conv.weight.dtype).view(channels, channels, 1, 1)
        conv.weight.copy_(eye + noise * torch.randn_like(conv.weight))
        if conv.bias is not None:
            conv.bias.zero_()


class MultiChannelCorrelation(nn.Module):
    """Learnable fusion of content and style features (projections, mixer, output)."""

    def __init__(
        self,
        channels: int,
        mode: FusionMode = FusionMode.MULTI_CHANNEL,
        init_noise: float = INIT_NOISE,
    ) -> None:
        super().__init__()
        self.channels = channels
        self.mode = mode
        self.proj_c = nn.Conv2d(channels, channels, kernel_size=1)
        self.proj_s = nn.Conv2d(channels, channels, kernel_size=1)
        self.mixer = nn.Linear(channels, channels, bias=False)
        self.proj_out = nn.Conv2d(channels, channels, kernel_size=1)

        for conv in (self.proj_c, self.proj_s, self.proj_out):
            _near_identity(conv, init_noise)
        # Gains start at exactly 1; the mixer is learned from zero.
        nn.init.zeros_(self.mixer.weight)

    def _check(self, f: torch.Tensor, role: str) -> None:
        if f.dim() != 4 or f.shape[1] != self.channels:
            raise ChannelMismatchError(
                f"{role} feature has shape {tuple(f.shape)}, expected {self.channels} channels"
            )

    def content_branch(self, f_c: torch.Tensor) -> torch.Tensor:
        """Normalized, projected content feature."""
        self._check(f_c, "content")
        return self.proj_c(normalize(f_c))

    def style_branch(self, f_s: torch.Tensor) -> torch.Tensor:
        """Normalized, projected style feature."""
        self._check(f_s, "style")
        return self.proj_s(normalize(f_s))

    def energies(self, f_s: torch.Tensor) -> torch.Tensor:
        """Style-branch channel energies per spatial position, shape (B, C)."""
        style = self.style_branch(f_s)
        positions = style.shape[-2] * style.shape[-1]
        return channel_energy(style) / positions

    def gains(self, f_s: torch.Tensor) -> torch.Tensor:
        """Per-channel content gains derived from a style feature, shape (B, C)."""
        energy = self.energies(f_s)
        if self.mode is FusionMode.CHANNEL_WISE:
            return 1.0 + energy
        return 1.0 + self.mixer(energy)

    def fuse(
        self, content: torch.Tensor, gains: torch.Tensor, alpha: float = 1.0
    ) -> torch.Tensor:
        """
        Scale each content-branch channel by its gain.

        Args:
            content: (B, C, H, W) content branch
            gains: (B, C) or (1, C) gains
            alpha: Style strength; 1 is the full fused feature, 0 the content branch

        Returns:
            Fused feature of the content branch's shape
        """
        fused = content * gains[:, :, None, None]
        if alpha != 1.0:
            fused = alpha * fused + (1.0 - alpha) * content
        return fused

    def forward(
        self, f_c: torch.Tensor, f_s: torch.Tensor, alpha: float = 1.0
    ) -> torch.Tensor:
        return self.apply_gains(f_c, self.gains(f_s), alpha)

    def apply_gains(
        self, f_c: torch.Tensor, gains: torch.Tensor, alpha: float = 1.0
    ) -> torch.Tensor:
        """Fuse a content feature with precomputed style gains and project the result."""
        return self.proj_out(self.fuse(self.content_branch(f_c), gains, alpha))


def lipschitz_bound(mcc: MultiChannelCorrelation, f_s: torch.Tensor) -> float:
    """
    Largest absolute channel gain for a style feature.

    At the fusion stage ``||fuse(a) - fuse(b)|| <= bound * ||a - b||`` for any
    two content branches a, b under the same style.
    """
    with torch.no_grad():
        return float(mcc.gains(f_s).abs().max())
