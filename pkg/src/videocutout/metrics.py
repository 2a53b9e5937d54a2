"""Mask quality metrics: region similarity J, contour accuracy F,
and the mask-transfer error rate used by propagation benchmarks."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .base import check_mask, check_same_shape


def region_similarity(mask: np.ndarray, truth: np.ndarray) -> float:
    """Intersection over union; 1.0 when both masks are empty."""
    mask = check_mask(mask).astype(bool)
    truth = check_mask(truth).astype(bool)
    check_same_shape(mask, truth, "masks")
    union = np.logical_or(mask, truth).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(mask, truth).sum() / union)


def mask_contour(mask: np.ndarray) -> np.ndarray:
    """Foreground pixels 4-adjacent to background or the frame border."""
    mask = check_mask(mask).astype(bool)
    padded = np.pad(mask, 1, constant_values=False)
    interior = (padded[:-2, 1:-1] & padded[2:, 1:-1]
                & padded[1:-1, :-2] & padded[1:-1, 2:])
    return mask & ~interior


def contour_accuracy(mask: np.ndarray, truth: np.ndarray,
                     tolerance_px: float | None = None, exact: bool = False) -> float:
    """F-measure of contour correspondence within a pixel tolerance.

    ``tolerance_px=None`` uses 0.8% of the frame diagonal (rounded up).
    The default path scores matched contour pixels through a
    distance-transform dilation; ``exact=True`` switches to maximum
    bipartite matching (quadratic in contour length, for small masks only).
    """
    mask = check_mask(mask)
    truth = check_mask(truth, shape=mask.shape)
    if tolerance_px is None:
        tolerance_px = float(np.ceil(0.008 * np.hypot(*mask.shape)))
    c_m = mask_contour(mask)
    c_g = mask_contour(truth)
    n_m = int(c_m.sum())
    n_g = int(c_g.sum())
    if n_m == 0 and n_g == 0:
        return 1.0
    if exact:
        matched = _max_bipartite_matches(c_m, c_g, tolerance_px)
        precision = matched / n_m if n_m else 1.0
        recall = matched / n_g if n_g else 1.0
    else:
        precision = _within(c_m, c_g, tolerance_px) if n_m else 1.0
        recall = _within(c_g, c_m, tolerance_px) if n_g else 1.0
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def _within(contour: np.ndarray, other: np.ndarray, tolerance_px: float) -> float:
    if not other.any():
        return 0.0
    dist = ndimage.distance_transform_edt(~other)
    return float((dist[contour] <= tolerance_px).mean())


def _max_bipartite_matches(c_a: np.ndarray, c_b: np.ndarray, tol: float) -> int:
    a_pts = np.argwhere(c_a)
    b_pts = np.argwhere(c_b)
    if len(a_pts) == 0 or len(b_pts) == 0:
        return 0
    d2 = ((a_pts[:, None, :] - b_pts[None, :, :]) ** 2).sum(axis=2)
    edges = d2 <= tol * tol
    match_of_b = np.full(len(b_pts), -1)

    def augment(i, seen):
        for j in np.flatnonzero(edges[i]):
            if seen[j]:
                continue
            seen[j] = True
            if match_of_b[j] < 0 or augment(match_of_b[j], seen):
                match_of_b[j] = i
                return True
        return False

    count = 0
    for i in range(len(a_pts)):
        if augment(i, np.zeros(len(b_pts), dtype=bool)):
            count += 1
    return count


def jumpcut_error(mask: np.ndarray, truth: np.ndarray) -> float:
    """Wrongly classified area over the ground-truth foreground area."""
    mask = check_mask(mask).astype(bool)
    truth = check_mask(truth).astype(bool)
    check_same_shape(mask, truth, "masks")
    fg = truth.sum()
    if fg == 0:
        raise ValueError("ground truth has no foreground")
    return float(np.logical_xor(mask, truth).sum() / fg)


@dataclass
class VideoResult:
    name: str
    frame_indices: list = field(default_factory=list)
    j_scores: list = field(default_factory=list)
    f_scores: list = field(default_factory=list)
    error_rates: dict = field(default_factory=dict)  # transfer distance -> mean rate

    @property
    def mean_j(self) -> float:
        return float(np.mean(self.j_scores)) if self.j_scores else float("nan")

    @property
    def mean_f(self) -> float:
        return float(np.mean(self.f_scores)) if self.f_scores else float("nan")


@dataclass
class EvalReport:
    """Per-frame scores, per-video means and dataset means."""

    protocol: str
    videos: list = field(default_factory=list)

    @property
    def mean_j(self) -> float:
        vals = [v.mean_j for v in self.videos if v.j_scores]
        return float(np.mean(vals)) if vals else float("nan")

    @property
    def mean_f(self) -> float:
        vals = [v.mean_f for v in self.videos if v.f_scores]
        return float(np.mean(vals)) if vals else float("nan")

    def mean_error(self, distance: int) -> float:
        vals = [v.error_rates[distance] for v in self.videos if distance in v.error_rates]
        return float(np.mean(vals)) if vals else float("nan")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            if self.protocol == "jumpcut":
                distances = sorted({d for v in self.videos for d in v.error_rates})
                writer.writerow(["video"] + [f"error_d{d}" for d in distances])
                for v in self.videos:
                    writer.writerow([v.name] + [f"{v.error_rates.get(d, float('nan')):.6f}"
                                                for d in distances])
                writer.writerow(["mean"] + [f"{self.mean_error(d):.6f}" for d in distances])
            else:
                writer.writerow(["video", "frame", "J", "F"])
                for v in self.videos:
                    for idx, j, f in zip(v.frame_indices, v.j_scores, v.f_scores):
                        writer.writerow([v.name, idx, f"{j:.6f}", f"{f:.6f}"])
                    writer.writerow([v.name, "mean", f"{v.mean_j:.6f}", f"{v.mean_f:.6f}"])
                writer.writerow(["dataset", "mean", f"{self.mean_j:.6f}", f"{self.mean_f:.6f}"])

    def format_table(self) -> str:
        lines = []
        if self.protocol == "jumpcut":
            distances = sorted({d for v in self.videos for d in v.error_rates})
            header = f"{'video':<20}" + "".join(f"d={d:<8}" for d in distances)
            lines.append(header)
            lines.append("-" * len(header))
            for v in self.videos:
                row = f"{v.name:<20}" + "".join(
                    f"{v.error_rates.get(d, float('nan')):<10.4f}" for d in distances)
                lines.append(row)
            lines.append(f"{'mean':<20}" + "".join(
                f"{self.mean_error(d):<10.4f}" for d in distances))
        else:
            header = f"{'video':<20}{'J':<10}{'F':<10}"
            lines.append(header)
            lines.append("-" * len(header))
            for v in self.videos:
                lines.append(f"{v.name:<20}{v.mean_j:<10.4f}{v.mean_f:<10.4f}")
            lines.append(f"{'mean':<20}{self.mean_j:<10.4f}{self.mean_f:<10.4f}")
        return "\n".join(lines)
