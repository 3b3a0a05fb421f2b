"""Training losses: content, style, identity and illumination.

Every distance is a mean squared error, so loss magnitudes do not depend on
image resolution. The content and style terms compare frozen-encoder taps;
the identity and illumination terms run the generator itself and compare
pixels.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, fields

import torch
import torch.nn.functional as F

from ..errors import NonFiniteLossError
from ..models.config import Depth, LossWeights
from ..models.reports import LossBundle
from .codec import TAPS, Encoder, EncoderTaps

STD_EPS = 1e-5

GeneratorFn = Callable[[torch.Tensor, torch.Tensor], torch.Tensor]


@dataclass(frozen=True)
class LossTerms:
    """Unweighted loss terms of one step (scalar tensors)."""

    content: torch.Tensor
    style: torch.Tensor
    identity: torch.Tensor
    illumination: torch.Tensor

    def items(self) -> list[tuple[str, torch.Tensor]]:
        return [(f.name, getattr(self, f.name)) for f in fields(self)]


def mean_std(f: torch.Tensor, eps: float = STD_EPS) -> tuple[torch.Tensor, torch.Tensor]:
    """Per-sample, per-channel mean and standard deviation of a (B, C, H, W) map."""
    var, mean = torch.var_mean(f, dim=(2, 3), correction=0)
    return mean, torch.sqrt(var + eps)


def content_distance(taps_cs: EncoderTaps, taps_c: EncoderTaps) -> torch.Tensor:
    """MSE between the relu4_1 taps of two images."""
    return F.mse_loss(taps_cs["relu4_1"], taps_c["relu4_1"])


def style_distance(taps_cs: EncoderTaps, taps_s: EncoderTaps) -> torch.Tensor:
    """Sum over relu1_1..relu4_1 of mean- and std-statistic MSEs."""
    loss = taps_cs["relu1_1"].new_zeros(())
    for tag in TAPS:
        mean_cs, std_cs = mean_std(taps_cs[tag])
        mean_s, std_s = mean_std(taps_s[tag])
        loss = loss + F.mse_loss(mean_cs, mean_s) + F.mse_loss(std_cs, std_s)
    return loss


def content_loss(i_cs: torch.Tensor, i_c: torch.Tensor, encoder: Encoder) -> torch.Tensor:
    """
    Content perceptual loss at relu4_1.

    Raises:
        ValueError: Image shapes differ
    """
    if i_cs.shape != i_c.shape:
        raise ValueError(f"shape mismatch: {tuple(i_cs.shape)} vs {tuple(i_c.shape)}")
    return content_distance(encoder(i_cs, Depth.DEEP), encoder(i_c, Depth.DEEP))


def style_loss(i_cs: torch.Tensor, i_s: torch.Tensor, encoder: Encoder) -> torch.Tensor:
    """Style perceptual loss; the two images may differ in size."""
    return style_distance(encoder(i_cs, Depth.DEEP), encoder(i_s, Depth.DEEP))


def identity_loss(generator: GeneratorFn, i_c: torch.Tensor, i_s: torch.Tensor) -> torch.Tensor:
    """Reconstruction error when content and style are the same image, for both inputs."""
    i_cc = generator(i_c, i_c)
    i_ss = generator(i_s, i_s)
    return F.mse_loss(i_cc, i_c) + F.mse_loss(i_ss, i_s)


def illumination_loss(
    generator: GeneratorFn,
    i_c: torch.Tensor,
    i_s: torch.Tensor,
    sigma: float,
    rng: torch.Generator,
    clean: torch.Tensor | None = None,
) -> torch.Tensor:
    """
    Output change under one Gaussian perturbation of the content image.

    Args:
        generator: Stylization function ``(content, style) -> image``
        i_c: Content batch
        i_s: Style batch
        sigma: Noise standard deviation
        rng: Noise source; one draw of ``i_c``'s shape is consumed
        clean: Already computed ``generator(i_c, i_s)``, reused when given

    Returns:
        Pixel MSE between the clean and perturbed outputs
    """
    noise = torch.randn(i_c.shape, generator=rng, device=rng.device, dtype=i_c.dtype)
    delta = noise.to(i_c.device) * sigma
    if clean is None:
        clean = generator(i_c, i_s)
    return F.mse_loss(clean, generator(i_c + delta, i_s))


def weighted_sum(terms: LossTerms, weights: LossWeights, step: int | None = None) -> torch.Tensor:
    """
    Differentiable weighted total of the loss terms.

    Raises:
        NonFiniteLossError: A term is NaN or infinite (names the term and step)
    """
    total = terms.content.new_zeros(())
    for name, value in terms.items():
        if not torch.isfinite(value).all():
            raise NonFiniteLossError(name, step)
        total = total + getattr(weights, name) * value
    return total


def total_loss(terms: LossTerms | tuple[float, float, float, float], weights: LossWeights) -> LossBundle:
    """
    Report the loss terms and their exact weighted sum.

    Args:
        terms: Tensors from a training step or plain floats in
            (content, style, identity, illumination) order
        weights: Loss weights

    Returns:
        LossBundle with ``total = sum(weight * term)``

    Raises:
        NonFiniteLossError: A term is NaN or infinite
    """
    raw = [v for _, v in terms.items()] if isinstance(terms, LossTerms) else list(terms)
    values = [float(v) for v in raw]
    names = ("content", "style", "identity", "illumination")
    for name, value in zip(names, values, strict=True):
        if not math.isfinite(value):
            raise NonFiniteLossError(name)
    total = sum(getattr(weights, name) * value for name, value in zip(names, values, strict=True))
    return LossBundle(**dict(zip(names, values, strict=True)), total=total)
