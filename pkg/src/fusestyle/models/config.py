"""Configuration models for fusestyle."""

from enum import Enum
from pathlib import Path
from typing import Self

from pydantic import BaseModel, Field, model_validator
from pydantic_settings import BaseSettings, PydanticBaseSettingsSource, SettingsConfigDict


class Depth(str, Enum):
    """Codec depth: which encoder tap feeds the fusion module."""

    DEEP = "deep"  # relu4_1
    SHALLOW = "shallow"  # relu3_1

    @property
    def tap(self) -> str:
        """Deepest encoder tap used at this depth."""
        return "relu4_1" if self is Depth.DEEP else "relu3_1"

    @property
    def factor(self) -> int:
        """Total spatial downsampling between the image and the deepest tap."""
        return 8 if self is Depth.DEEP else 4

    @property
    def channels(self) -> int:
        """Channel count of the deepest tap in the VGG19 layout."""
        return 512 if self is Depth.DEEP else 256


class FusionMode(str, Enum):
    """How style channel energies become per-channel content gains."""

    MULTI_CHANNEL = "multi_channel"
    CHANNEL_WISE = "channel_wise"


class LossWeights(BaseModel):
    """Weights of the four training losses and the illumination noise level."""

    content: float = Field(default=4.0, ge=0.0, description="Content perceptual loss weight")
    style: float = Field(default=15.0, ge=0.0, description="Style perceptual loss weight")
    identity: float = Field(default=70.0, ge=0.0, description="Identity loss weight")
    illumination: float = Field(
        default=3000.0, ge=0.0, description="Illumination loss weight (0 disables it)"
    )
    noise_sigma: float = Field(
        default=0.01, ge=0.0, description="Std of the Gaussian content perturbation"
    )


class TrainConfig(BaseSettings):
    """Training run configuration, usually loaded from a TOML file."""

    model_config = SettingsConfigDict(
        env_prefix="FUSESTYLE_",
        env_nested_delimiter="__",
        case_sensitive=False,
    )

    # Corpora and weights
    content_dir: Path = Field(default=Path("data/content"), description="Content image directory")
    style_dir: Path = Field(default=Path("data/style"), description="Style image directory")
    encoder_weights: Path = Field(
        default=Path("weights/vgg19.mccw"), description="Pretrained encoder weight file"
    )
    output_dir: Path = Field(default=Path("runs/default"), description="Run directory")

    # Protocol
    crop: int = Field(default=256, ge=16, description="Training crop size")
    resize_max: int = Field(
        default=512, ge=16, description="Short side is scaled down to this before cropping"
    )
    batch: int = Field(default=8, ge=1, description="Training batch size")
    steps: int = Field(default=160_000, ge=0, description="Optimization steps")
    depth: Depth = Depth.DEEP
    mode: FusionMode = FusionMode.MULTI_CHANNEL
    learning_rate: float = Field(default=1e-4, gt=0.0, description="Adam learning rate")
    seed: int = 0
    checkpoint_every: int = Field(default=1000, ge=1, description="Checkpoint period in steps")
    log_every: int = Field(default=50, ge=1, description="Console summary period in steps")
    prefetch: int = Field(default=2, ge=1, description="Batches the loader worker keeps ready")
    device: str = "cpu"

    loss: LossWeights = Field(default_factory=LossWeights)

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        # FUSESTYLE_* variables win over values read from a config file
        return env_settings, init_settings, dotenv_settings, file_secret_settings

    @model_validator(mode="after")
    def check_crop_factor(self) -> Self:
        """Crop must survive the depth's downsampling chain without remainder."""
        if self.crop % self.depth.factor:
            raise ValueError(
                f"crop {self.crop} is not divisible by {self.depth.factor} "
                f"({self.depth.value} depth)"
            )
        return self
