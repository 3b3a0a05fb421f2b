"""The MCCW1 weight container.

Layout (all integers little-endian)::

    b"MCCW1"                      magic
    uint32                        record count
    per record:
      uint32 + UTF-8 bytes        tag
      uint8                       dtype code (0 = f32, 1 = u8)
      uint8 + rank * uint32       shape
      raw values                  little-endian, C order

The same container holds encoder weights and training checkpoints.
"""

from __future__ import annotations

import json
import struct
from collections.abc import Mapping
from pathlib import Path
from typing import Any, BinaryIO

import numpy as np
import torch

from ..errors import WeightFileError

MAGIC = b"MCCW1"

DTYPES: dict[int, tuple[np.dtype[Any], torch.dtype]] = {
    0: (np.dtype("<f4"), torch.float32),
    1: (np.dtype("u1"), torch.uint8),
}
_CODES = {torch_dtype: code for code, (_, torch_dtype) in DTYPES.items()}


def _read_exact(fh: BinaryIO, size: int, what: str) -> bytes:
    data = fh.read(size)
    if len(data) != size:
        raise WeightFileError(f"Truncated file while reading {what}")
    return data


def write_records(path: Path, records: Mapping[str, torch.Tensor]) -> None:
    """
    Write tensors to an MCCW1 file.

    Float tensors are stored as f32, uint8 tensors as u8; anything else is
    rejected. The file is written to a temporary sibling and renamed, so a
    crash never leaves a half-written checkpoint behind.

    Args:
        path: Destination file
        records: Ordered tag -> tensor mapping
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    try:
        with open(tmp, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<I", len(records)))
            for tag, tensor in records.items():
                value = tensor.detach().to("cpu")
                if value.is_floating_point():
                    value = value.to(torch.float32)
                if value.dtype not in _CODES:
                    raise WeightFileError(f"{tag}: unsupported dtype {value.dtype}")
                code = _CODES[value.dtype]
                encoded = tag.encode("utf-8")
                fh.write(struct.pack("<I", len(encoded)))
                fh.write(encoded)
                fh.write(struct.pack("<BB", code, value.dim()))
                fh.write(struct.pack(f"<{value.dim()}I", *value.shape))
                fh.write(value.contiguous().numpy().astype(DTYPES[code][0], copy=False).tobytes())
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise
    tmp.replace(path)


def read_records(path: Path) -> dict[str, torch.Tensor]:
    """
    Read every record of an MCCW1 file.

    Args:
        path: Source file

    Returns:
        Ordered tag -> tensor mapping

    Raises:
        WeightFileError: Missing file, bad magic, or truncation (naming the
            record being read)
    """
    if not path.is_file():
        raise WeightFileError(f"Weight file not found: {path}")

    records: dict[str, torch.Tensor] = {}
    with open(path, "rb") as fh:
        if fh.read(len(MAGIC)) != MAGIC:
            raise WeightFileError(f"{path} is not an MCCW1 container")
        (count,) = struct.unpack("<I", _read_exact(fh, 4, "record count"))
        for index in range(count):
            (tag_len,) = struct.unpack("<I", _read_exact(fh, 4, f"record {index} tag"))
            tag = _read_exact(fh, tag_len, f"record {index} tag").decode("utf-8")
            code, rank = struct.unpack("<BB", _read_exact(fh, 2, f"layer {tag} header"))
            if code not in DTYPES:
                raise WeightFileError(f"layer {tag}: unknown dtype code {code}")
            shape = struct.unpack(f"<{rank}I", _read_exact(fh, 4 * rank, f"layer {tag} shape"))
            np_dtype, _ = DTYPES[code]
            count_values = int(np.prod(shape, dtype=np.int64))
            raw = _read_exact(fh, count_values * np_dtype.itemsize, f"layer {tag} values")
            array = np.frombuffer(raw, dtype=np_dtype).reshape(shape)
            records[tag] = torch.from_numpy(array.copy())
    return records


def pack_json(payload: Mapping[str, Any]) -> torch.Tensor:
    """Encode a JSON-serializable mapping as a u8 record."""
    data = json.dumps(payload, sort_keys=True, default=str).encode("utf-8")
    return torch.frombuffer(bytearray(data), dtype=torch.uint8).clone()


def unpack_json(record: torch.Tensor) -> dict[str, Any]:
    """Decode a u8 record written by :func:`pack_json`."""
    loaded: dict[str, Any] = json.loads(bytes(record.numpy().tobytes()).decode("utf-8"))
    return loaded


def describe(path: Path) -> list[tuple[str, str, tuple[int, ...]]]:
    """List (tag, dtype, shape) for every record of a file."""
    return [
        (tag, "f32" if t.dtype == torch.float32 else "u8", tuple(t.shape))
        for tag, t in read_records(path).items()
    ]
