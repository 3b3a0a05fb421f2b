"""Shared fixtures: miniature codecs, weight files, corpora and checkpoints."""

from pathlib import Path

import numpy as np
import pytest
import torch
from PIL import Image

from fusestyle.core.codec import VGG19_LAYOUT, ConvSpec, Encoder, make_layout
from fusestyle.core.model import Generator, build_generator
from fusestyle.core.trainer import Trainer
from fusestyle.core.weights import write_records
from fusestyle.models.config import Depth, FusionMode, LossWeights, TrainConfig

# Same block structure as VGG19 through relu4_1, eight channels wide.
TINY_LAYOUT = make_layout((8, 8, 8, 8), (1, 1, 1, 1))


def random_encoder(layout=TINY_LAYOUT, seed: int = 0) -> Encoder:
    """Encoder with seeded random weights (stand-in for pretrained VGG)."""
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        encoder = Encoder(layout)
    return encoder


def random_vgg_records(seed: int = 0) -> dict[str, torch.Tensor]:
    """Random records shaped like VGG19 conv1_1 .. conv4_1."""
    gen = torch.Generator().manual_seed(seed)
    records = {}
    for spec in VGG19_LAYOUT:
        if isinstance(spec, ConvSpec):
            fan_in = spec.in_channels * 9
            records[f"{spec.tag}.weight"] = (
                torch.randn(spec.out_channels, spec.in_channels, 3, 3, generator=gen) / fan_in**0.5
            )
            records[f"{spec.tag}.bias"] = torch.zeros(spec.out_channels)
    return records


def write_image(path: Path, array: np.ndarray) -> Path:
    """Save an (H, W, 3) uint8 array as an image file."""
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(array).save(path)
    return path


def random_image_array(rng: np.random.Generator, height: int, width: int) -> np.ndarray:
    return rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8)


@pytest.fixture
def tiny_encoder() -> Encoder:
    return random_encoder()


@pytest.fixture
def tiny_generator(tiny_encoder: Encoder) -> Generator:
    return build_generator(tiny_encoder, Depth.DEEP, FusionMode.MULTI_CHANNEL, seed=0)


@pytest.fixture(scope="session")
def vgg_weights(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """A VGG19-shaped MCCW1 file with random weights."""
    path = tmp_path_factory.mktemp("weights") / "vgg19.mccw"
    write_records(path, random_vgg_records())
    return path


@pytest.fixture
def corpora(tmp_path: Path) -> tuple[Path, Path]:
    """Small content and style directories of random-noise images."""
    rng = np.random.default_rng(7)
    content = tmp_path / "content"
    style = tmp_path / "style"
    for index in range(6):
        write_image(content / f"c{index}.png", random_image_array(rng, 40, 48))
    for index in range(3):
        write_image(style / f"s{index}.png", random_image_array(rng, 36, 36))
    return content, style


@pytest.fixture
def tiny_config(tmp_path: Path, corpora: tuple[Path, Path]) -> TrainConfig:
    """A few-step training config on the synthetic corpora."""
    content, style = corpora
    return TrainConfig(
        content_dir=content,
        style_dir=style,
        encoder_weights=tmp_path / "unused.mccw",
        output_dir=tmp_path / "run",
        crop=16,
        resize_max=32,
        batch=2,
        steps=4,
        checkpoint_every=2,
        log_every=1,
        loss=LossWeights(illumination=30.0),
    )


@pytest.fixture
def tiny_trainer(tiny_config: TrainConfig, tiny_encoder: Encoder) -> Trainer:
    return Trainer(tiny_config, tiny_encoder)


@pytest.fixture
def image_file(tmp_path: Path) -> Path:
    return write_image(tmp_path / "image.png", random_image_array(np.random.default_rng(1), 24, 32))
