"""Run configuration and the flat key=value config file format.

Every field of :class:`RunConfig` can be set from a config file (one
``key = value`` pair per line, ``#`` comments allowed) or from CLI
``--set key=value`` overrides. Unset keys keep the defaults below.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

# Superpixel density anchored at 2000 superpixels for a 1280x720 frame.
DEFAULT_SUPERPIXELS_PER_MEGAPIXEL = 2000.0 / (1280 * 720 / 1e6)


@dataclass
class RunConfig:
    """Tunable parameters for segmentation, refinement and frame selection.

    pyramid_levels:
        Finest level of the spatial pyramid. Level ``l`` splits the frame
        into 2^l x 2^l cells; the static classifier averages levels 1..L
        (level 0 alone when L = 0).
    bins_per_channel:
        Uniform color quantization per RGB channel; must divide 256.
    superpixels_per_megapixel:
        Oversegmentation density; the per-frame target count scales
        linearly with pixel count.
    slic_compactness / slic_iterations:
        SLIC spatial regularity weight and k-means iteration count.
    window_sizes:
        Side lengths (pixels) of the local classifier windows; windows of
        each scale tile the frame on a half-window-overlap grid.
    annotation_budget:
        Default number of frames (K) to recommend for human annotation.
    search_area_fraction:
        The window matcher searches candidate offsets inside a box of
        this fraction of the frame height/width (offsets up to half the
        box in each direction).
    merge_threshold:
        Cutoff of the boolean step used when merging forward/backward
        masks (value < threshold -> 0, else 1).
    contour_tolerance:
        Pixel tolerance of the contour F-measure; ``None`` selects
        0.8% of the frame diagonal (rounded up).
    match_radius_fraction:
        Superpixel matching (frame selection) searches neighbors whose
        centroid lies within this fraction of the frame diagonal.
    """

    pyramid_levels: int = 3
    bins_per_channel: int = 32
    superpixels_per_megapixel: float = DEFAULT_SUPERPIXELS_PER_MEGAPIXEL
    slic_compactness: float = 10.0
    slic_iterations: int = 10
    window_sizes: tuple[int, ...] = (30, 50, 80)
    annotation_budget: int = 1
    search_area_fraction: float = 0.25
    merge_threshold: float = 0.5
    contour_tolerance: float | None = None
    match_radius_fraction: float = 0.25

    def validate(self) -> "RunConfig":
        if self.pyramid_levels < 0:
            raise ValueError("pyramid_levels must be >= 0")
        if self.bins_per_channel < 1 or 256 % self.bins_per_channel != 0:
            raise ValueError("bins_per_channel must divide 256")
        if self.superpixels_per_megapixel <= 0:
            raise ValueError("superpixels_per_megapixel must be positive")
        if not self.window_sizes or any(s <= 0 for s in self.window_sizes):
            raise ValueError("window sizes must be positive")
        if self.annotation_budget < 1:
            raise ValueError("annotation_budget must be >= 1")
        if not 0 < self.search_area_fraction <= 1:
            raise ValueError("search_area_fraction must be in (0, 1]")
        return self

    def superpixel_target(self, width: int, height: int) -> int:
        """Per-frame superpixel count for a frame of the given size."""
        return max(1, round(self.superpixels_per_megapixel * width * height / 1e6))

    def contour_tolerance_px(self, width: int, height: int) -> float:
        if self.contour_tolerance is not None:
            return float(self.contour_tolerance)
        return math.ceil(0.008 * math.hypot(width, height))

    def search_offsets(self, height: int, width: int) -> tuple[int, int]:
        """Max absolute (dy, dx) of the window-matcher search, per axis."""
        return (
            max(1, int(height * self.search_area_fraction) // 2),
            max(1, int(width * self.search_area_fraction) // 2),
        )

    def match_radius(self, width: int, height: int) -> float:
        return self.match_radius_fraction * math.hypot(width, height)

    # -- flat key=value serialization ------------------------------------

    def apply_overrides(self, pairs) -> "RunConfig":
        for pair in pairs:
            if "=" not in pair:
                raise ValueError(f"override must look like key=value, got {pair!r}")
            key, value = pair.split("=", 1)
            self._set_key(key.strip(), value.strip())
        return self

    def _set_key(self, key: str, raw: str) -> None:
        fields = {f.name: f for f in dataclasses.fields(self)}
        if key not in fields:
            raise ValueError(f"unknown config key {key!r}")
        setattr(self, key, _parse_value(key, raw))

    def to_file(self, path) -> None:
        lines = [f"{f.name} = {_format_value(getattr(self, f.name))}"
                 for f in dataclasses.fields(self)]
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        cfg = cls()
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, value = line.split("=", 1)
            cfg._set_key(key.strip(), value.strip())
        return cfg.validate()


def _parse_value(key: str, raw: str):
    if key == "window_sizes":
        parts = [p for p in raw.replace(",", " ").split() if p]
        return tuple(int(p) for p in parts)
    if key == "contour_tolerance":
        return None if raw.lower() in ("none", "auto", "") else float(raw)
    if key in ("pyramid_levels", "bins_per_channel", "slic_iterations", "annotation_budget"):
        return int(raw)
    return float(raw)


def _format_value(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    return str(value)
