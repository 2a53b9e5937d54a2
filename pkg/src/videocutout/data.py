"""Core data types shared across the cutout engine.

Frames are (H, W, 3) uint8 RGB arrays and masks are (H, W) uint8 arrays
with values in {0, 1}. Frame indices are 1-based everywhere in the public
API; file numbering on disk may start at 0 (the loader maps the n-th file,
in numeric order, to frame index n).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .base import check_frame, check_mask


@dataclass(frozen=True)
class VideoSequence:
    """An ordered list of same-sized RGB frames.

    Treated as immutable after construction; safe to share across threads.
    """

    frames: tuple

    def __post_init__(self):
        if len(self.frames) < 1:
            raise ValueError("a sequence needs at least one frame")
        first = check_frame(self.frames[0])
        for i, f in enumerate(self.frames[1:], start=2):
            f = check_frame(f)
            if f.shape != first.shape:
                raise ValueError(
                    f"mixed dimensions: frame {i} is {f.shape[1]}x{f.shape[0]}, "
                    f"expected {first.shape[1]}x{first.shape[0]}"
                )

    @property
    def n_frames(self) -> int:
        return len(self.frames)

    @property
    def height(self) -> int:
        return self.frames[0].shape[0]

    @property
    def width(self) -> int:
        return self.frames[0].shape[1]

    def frame(self, index: int) -> np.ndarray:
        """Frame by 1-based index."""
        if not 1 <= index <= self.n_frames:
            raise IndexError(f"frame index {index} out of range 1..{self.n_frames}")
        return self.frames[index - 1]


@dataclass(frozen=True)
class Mask:
    """Binary foreground labels aligned to one frame (1-based index)."""

    labels: np.ndarray
    frame_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "labels", check_mask(self.labels))

    @property
    def shape(self):
        return self.labels.shape


@dataclass(frozen=True)
class AnnotationSet:
    """Human-annotated masks for a strictly increasing set of frames."""

    entries: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if len(self.entries) < 1:
            raise ValueError("annotation set must not be empty")
        indices = [idx for idx, _ in self.entries]
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise ValueError("annotation frame indices must be strictly increasing")
        if indices[0] < 1:
            raise ValueError("frame indices are 1-based")

    @classmethod
    def from_masks(cls, masks) -> "AnnotationSet":
        entries = tuple(sorted(((m.frame_index, m) for m in masks), key=lambda e: e[0]))
        return cls(entries)

    @property
    def count(self) -> int:
        return len(self.entries)

    @property
    def frame_indices(self) -> list:
        return [idx for idx, _ in self.entries]

    def mask(self, frame_index: int) -> Mask:
        for idx, m in self.entries:
            if idx == frame_index:
                return m
        raise KeyError(f"no annotation for frame {frame_index}")

    def check_against(self, sequence: VideoSequence) -> "AnnotationSet":
        for idx, m in self.entries:
            if not 1 <= idx <= sequence.n_frames:
                raise ValueError(f"annotated frame {idx} outside 1..{sequence.n_frames}")
            if m.labels.shape != (sequence.height, sequence.width):
                raise ValueError(
                    f"annotation for frame {idx} is {m.labels.shape}, "
                    f"frames are {(sequence.height, sequence.width)}"
                )
        return self
