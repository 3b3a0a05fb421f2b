"""Image and frame-directory I/O.

Images travel through the package as float32 tensors of shape
(batch, 3, H, W) with RGB values in [0, 1].
"""

from itertools import groupby
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from ..errors import FrameSequenceError

IMAGE_SUFFIXES = frozenset({".png", ".jpg", ".jpeg", ".bmp", ".webp"})


def is_image_file(path: Path) -> bool:
    """Check whether a path looks like a readable image by suffix."""
    return path.is_file() and path.suffix.lower() in IMAGE_SUFFIXES


def pil_to_tensor(image: Image.Image) -> torch.Tensor:
    """Convert a PIL image to a (1, 3, H, W) float tensor in [0, 1]."""
    array = np.asarray(image.convert("RGB"), dtype=np.float32) / 255.0
    return torch.from_numpy(array.copy()).permute(2, 0, 1).unsqueeze(0)


def tensor_to_pil(img: torch.Tensor) -> Image.Image:
    """Convert a (1, 3, H, W) or (3, H, W) tensor in [0, 1] to an 8-bit RGB image."""
    if img.dim() == 4:
        if img.shape[0] != 1:
            raise ValueError(f"expected a single image, got batch of {img.shape[0]}")
        img = img[0]
    array = img.detach().to("cpu", torch.float32).clamp(0.0, 1.0).permute(1, 2, 0).numpy()
    return Image.fromarray(np.rint(array * 255.0).astype(np.uint8))


def load_image(path: Path) -> torch.Tensor:
    """
    Load an image file as a (1, 3, H, W) tensor.

    Args:
        path: Image file path

    Returns:
        RGB tensor with values in [0, 1]
    """
    with Image.open(path) as image:
        return pil_to_tensor(image)


def save_image(img: torch.Tensor, path: Path) -> None:
    """
    Save a (1, 3, H, W) tensor as an image file; the format follows the suffix.

    Args:
        img: RGB tensor with values in [0, 1] (clamped on save)
        path: Destination path; parent directories are created
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    tensor_to_pil(img).save(path)


def list_frames(frames_dir: Path) -> list[Path]:
    """
    List the frames of a frame directory in lexicographic order.

    Args:
        frames_dir: Directory of PNG/JPEG frames

    Returns:
        Sorted frame paths

    Raises:
        FrameSequenceError: Directory missing or holding no frames
    """
    if not frames_dir.is_dir():
        raise FrameSequenceError(f"Frame directory not found: {frames_dir}")
    frames = sorted(p for p in frames_dir.iterdir() if is_image_file(p))
    if not frames:
        raise FrameSequenceError(f"No frames in {frames_dir}")
    return frames


def check_uniform_size(frames: list[Path]) -> tuple[int, int]:
    """
    Ensure all frames share one resolution.

    Returns:
        (width, height) of the sequence

    Raises:
        FrameSequenceError: Listing every frame whose size differs from the first
    """
    sizes = []
    for frame in frames:
        with Image.open(frame) as image:
            sizes.append(image.size)
    expected = sizes[0]
    offenders = [f"{p.name} {w}x{h}" for p, (w, h) in zip(frames, sizes, strict=True) if (w, h) != expected]
    if offenders:
        raise FrameSequenceError(
            f"Mixed frame resolutions (expected {expected[0]}x{expected[1]}): "
            + ", ".join(offenders)
        )
    return expected


def check_unique_stems(frames: list[Path]) -> None:
    """
    Ensure no two frames share a file stem, since outputs are written as ``<stem>.png``.

    Raises:
        FrameSequenceError: Naming every clashing group
    """
    by_stem = groupby(sorted(frames, key=lambda p: p.stem), key=lambda p: p.stem)
    clashes = []
    for _, group in by_stem:
        names = sorted(p.name for p in group)
        if len(names) > 1:
            clashes.append(", ".join(names))
    if clashes:
        raise FrameSequenceError("Frames share an output name: " + "; ".join(clashes))


def load_frames(frames_dir: Path) -> list[torch.Tensor]:
    """Load a uniform-resolution frame directory as a list of (1, 3, H, W) tensors."""
    frames = list_frames(frames_dir)
    check_uniform_size(frames)
    return [load_image(p) for p in frames]
