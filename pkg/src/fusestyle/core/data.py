"""Training data: image corpora, random crops and a prefetching batch loader."""

from __future__ import annotations

import copy
import logging
from collections.abc import Iterator
from dataclasses import dataclass
from pathlib import Path
from types import TracebackType
from typing import Any

import numpy as np
import torch
from PIL import Image
from torch.utils.data import DataLoader, IterableDataset

from ..errors import CorpusError, EmptyCorpusError
from ..utils.images import is_image_file, pil_to_tensor

logger = logging.getLogger(__name__)


class ImageCorpus:
    """All image files below a directory, in sorted order."""

    def __init__(self, root: Path) -> None:
        """
        Scan a corpus directory.

        Args:
            root: Directory searched recursively for PNG/JPEG/BMP/WebP files

        Raises:
            EmptyCorpusError: Directory missing or holding no images
        """
        if not root.is_dir():
            raise EmptyCorpusError(f"Corpus directory not found: {root}")
        self.root = root
        self.files = sorted(p for p in root.rglob("*") if is_image_file(p))
        if not self.files:
            raise EmptyCorpusError(f"No images in {root}")
        self._bad: set[Path] = set()

    def __len__(self) -> int:
        return len(self.files)

    def __getitem__(self, index: int) -> Path:
        return self.files[index]

    def mark_bad(self, path: Path) -> None:
        """Exclude an unreadable file from future draws."""
        self._bad.add(path)
        if len(self._bad) == len(self.files):
            raise CorpusError(f"No readable images left in {self.root}")

    def is_bad(self, path: Path) -> bool:
        return path in self._bad


def resize_for_crop(image: Image.Image, crop: int, resize_max: int) -> Image.Image:
    """
    Rescale so the short side is ``min(short, resize_max)`` but never below ``crop``.

    Images already in range are returned unchanged.
    """
    width, height = image.size
    short = min(width, height)
    target = max(min(short, resize_max), crop)
    if target == short:
        return image
    scale = target / short
    size = (max(crop, round(width * scale)), max(crop, round(height * scale)))
    return image.resize(size, Image.Resampling.BICUBIC)


def random_crop(path: Path, crop: int, resize_max: int, rng: np.random.Generator) -> torch.Tensor:
    """
    Load one image, resize it for cropping and cut a uniformly placed square.

    Returns:
        (3, crop, crop) tensor in [0, 1]
    """
    with Image.open(path) as opened:
        image = resize_for_crop(opened.convert("RGB"), crop, resize_max)
    width, height = image.size
    top = int(rng.integers(0, height - crop + 1))
    left = int(rng.integers(0, width - crop + 1))
    return pil_to_tensor(image.crop((left, top, left + crop, top + crop)))[0]


def sample_images(
    corpus: ImageCorpus, rng: np.random.Generator, batch: int, crop: int, resize_max: int
) -> torch.Tensor:
    """Draw ``batch`` crops uniformly with replacement, skipping unreadable files."""
    images: list[torch.Tensor] = []
    while len(images) < batch:
        path = corpus[int(rng.integers(len(corpus)))]
        if corpus.is_bad(path):
            continue
        try:
            images.append(random_crop(path, crop, resize_max, rng))
        except (OSError, ValueError) as exc:
            logger.warning("Skipping unreadable image %s: %s", path, exc)
            corpus.mark_bad(path)
    return torch.stack(images)


def build_batch(
    content: ImageCorpus,
    style: ImageCorpus,
    rng: np.random.Generator,
    batch: int = 8,
    crop: int = 256,
    resize_max: int = 512,
) -> tuple[torch.Tensor, torch.Tensor]:
    """
    Sample one content batch and one style batch.

    Returns:
        Two (batch, 3, crop, crop) tensors; the sequence depends only on ``rng``
    """
    return (
        sample_images(content, rng, batch, crop, resize_max),
        sample_images(style, rng, batch, crop, resize_max),
    )


@dataclass(frozen=True)
class Batch:
    """A produced batch and the data-RNG state right after producing it."""

    content: torch.Tensor
    style: torch.Tensor
    rng_state: dict[str, Any]


class BatchStream(IterableDataset[Batch]):
    """
    Endless stream of batches drawn from one RNG.

    Each batch carries the RNG state after it was drawn; restoring that
    state continues the exact sequence.
    """

    def __init__(
        self,
        content: ImageCorpus,
        style: ImageCorpus,
        rng: np.random.Generator,
        batch: int,
        crop: int,
        resize_max: int,
    ) -> None:
        super().__init__()
        self.content = content
        self.style = style
        self.rng = rng
        self.batch = batch
        self.crop = crop
        self.resize_max = resize_max

    def __iter__(self) -> Iterator[Batch]:
        while True:
            content, style = build_batch(
                self.content, self.style, self.rng, self.batch, self.crop, self.resize_max
            )
            yield Batch(content, style, copy.deepcopy(self.rng.bit_generator.state))


class BatchPrefetcher:
    """
    Produce batches in one loader worker, at most ``depth`` ahead of the consumer.

    A single worker owns the RNG, so batch order is deterministic. Worker
    failures are re-raised on the consumer side.
    """

    def __init__(
        self,
        content: ImageCorpus,
        style: ImageCorpus,
        rng: np.random.Generator,
        batch: int,
        crop: int,
        resize_max: int,
        depth: int = 2,
    ) -> None:
        self.loader: DataLoader[Batch] = DataLoader(
            BatchStream(content, style, rng, batch, crop, resize_max),
            batch_size=None,
            num_workers=1,
            prefetch_factor=depth,
        )
        self._iterator: Iterator[Batch] | None = None

    def __iter__(self) -> BatchPrefetcher:
        return self

    def __next__(self) -> Batch:
        if self._iterator is None:
            self._iterator = iter(self.loader)
        return next(self._iterator)

    def close(self) -> None:
        """Stop the loader worker."""
        iterator, self._iterator = self._iterator, None
        shutdown = getattr(iterator, "_shutdown_workers", None)
        if shutdown is not None:
            shutdown()

    def __enter__(self) -> BatchPrefetcher:
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        tb: TracebackType | None,
    ) -> None:
        self.close()
