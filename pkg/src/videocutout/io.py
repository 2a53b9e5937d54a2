"""Image and dataset I/O.

Dataset layout: ``<seq>/frames/%05d.png`` plus optional ``<seq>/masks/%05d.png``.
Mask files are 8-bit images; on load any pixel >= 128 becomes foreground.
On save, foreground is written as 255 so that save/load round-trips exactly.
"""
from __future__ import annotations

import re
from pathlib import Path

import numpy as np
from PIL import Image

from .data import Mask, VideoSequence

_NUM_RE = re.compile(r"(\d+)")


def _numeric_key(path: Path):
    m = _NUM_RE.search(path.stem)
    return (0, int(m.group(1)), path.name) if m else (1, 0, path.name)


def load_sequence(directory, pattern: str = "*.png") -> VideoSequence:
    """Load all frames matching ``pattern``, ordered by their numeric index."""
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"missing directory: {directory}")
    paths = sorted(directory.glob(pattern), key=_numeric_key)
    if not paths:
        raise FileNotFoundError(f"no files matching {pattern!r} in {directory}")
    frames = []
    shape = None
    for p in paths:
        try:
            with Image.open(p) as img:
                arr = np.asarray(img.convert("RGB"), dtype=np.uint8)
        except Exception as exc:
            raise ValueError(f"undecodable file {p.name}: {exc}") from exc
        if shape is None:
            shape = arr.shape
        elif arr.shape != shape:
            raise ValueError(
                f"mixed dimensions: {p.name} is {arr.shape[1]}x{arr.shape[0]}, "
                f"expected {shape[1]}x{shape[0]}"
            )
        frames.append(arr)
    return VideoSequence(tuple(frames))


def load_mask(path, frame_index: int, expected_shape=None) -> Mask:
    """Load a binary mask; pixel >= 128 -> 1, else 0."""
    path = Path(path)
    try:
        with Image.open(path) as img:
            arr = np.asarray(img.convert("L"))
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise ValueError(f"unreadable mask {path.name}: {exc}") from exc
    if expected_shape is not None and arr.shape != tuple(expected_shape):
        raise ValueError(
            f"mask {path.name} is {arr.shape[1]}x{arr.shape[0]}, "
            f"expected {expected_shape[1]}x{expected_shape[0]}"
        )
    return Mask((arr >= 128).astype(np.uint8), frame_index)


def save_mask(mask, path) -> None:
    """Write a mask as an 8-bit single-channel PNG (1 -> 255, 0 -> 0)."""
    labels = mask.labels if isinstance(mask, Mask) else np.asarray(mask, dtype=np.uint8)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray((labels * 255).astype(np.uint8), mode="L").save(path)


def encode_mask_png(labels: np.ndarray) -> bytes:
    """Mask as PNG bytes, same encoding as :func:`save_mask`."""
    import io as _io

    buf = _io.BytesIO()
    Image.fromarray((np.asarray(labels, dtype=np.uint8) * 255), mode="L").save(buf, format="PNG")
    return buf.getvalue()


def decode_mask_png(data: bytes, frame_index: int = 0) -> Mask:
    import io as _io

    with Image.open(_io.BytesIO(data)) as img:
        arr = np.asarray(img.convert("L"))
    return Mask((arr >= 128).astype(np.uint8), frame_index)


def encode_frame_png(frame: np.ndarray) -> bytes:
    import io as _io

    buf = _io.BytesIO()
    Image.fromarray(frame, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def save_grayscale(values: np.ndarray, path) -> None:
    """Debug dump of a [0, 1] field as an 8-bit grayscale PNG."""
    img = np.clip(np.rint(np.asarray(values, dtype=np.float64) * 255), 0, 255)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(img.astype(np.uint8), mode="L").save(path)


def save_id_map(ids: np.ndarray, path) -> None:
    """Debug dump of per-pixel superpixel ids as a 16-bit PNG."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.asarray(ids, dtype=np.uint16)).save(path)


def load_dataset_sequence(seq_dir):
    """Load ``frames/`` and any ``masks/`` of one dataset sequence.

    Returns (VideoSequence, dict of 1-based frame index -> Mask).
    """
    seq_dir = Path(seq_dir)
    sequence = load_sequence(seq_dir / "frames")
    masks = {}
    masks_dir = seq_dir / "masks"
    if masks_dir.is_dir():
        paths = sorted(masks_dir.glob("*.png"), key=_numeric_key)
        frame_paths = sorted((seq_dir / "frames").glob("*.png"), key=_numeric_key)
        stem_to_index = {p.stem: i + 1 for i, p in enumerate(frame_paths)}
        for p in paths:
            idx = stem_to_index.get(p.stem)
            if idx is None:
                continue
            masks[idx] = load_mask(p, idx, expected_shape=(sequence.height, sequence.width))
    return sequence, masks
