"""Annotation frame recommendation.

Predicts, per superpixel, the probability that a label propagated over a
chain of frame-to-frame matches arrives wrong, aggregates those
probabilities into an N x N propagation-error matrix, and picks the K
frames whose annotation minimizes the total expected labeling error by
dynamic programming.

A superpixel's single-hop mislabel probability is 1 - exp(-(d_app + d_occ)):
d_app is the (unit-scaled) color distance to its best match in the source
frame, d_occ the forward/backward match inconsistency. Multi-hop
probabilities follow the chain of best matches, compounding per hop.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .base import ParamsMixin, check_fitted
from .superpixel import SuperpixelMap

_COLOR_NORM = 255.0 * math.sqrt(3.0)


# --------------------------------------------------------------------------
# superpixel matching between adjacent frames
# --------------------------------------------------------------------------

def match_superpixels(src_map: SuperpixelMap, dst_map: SuperpixelMap,
                      radius: float) -> np.ndarray:
    """Best match in ``dst_map`` for every superpixel of ``src_map``.

    Candidates are restricted to centroids within ``radius``; the best is
    the smallest mean-color distance, ties by centroid distance. With no
    candidate in range, the search falls back to the whole frame.
    """
    src_c = src_map.centroids
    dst_c = dst_map.centroids
    d_space = np.linalg.norm(src_c[:, None, :] - dst_c[None, :, :], axis=2)
    d_color = np.linalg.norm(
        src_map.mean_colors[:, None, :] - dst_map.mean_colors[None, :, :], axis=2)
    in_range = d_space <= radius
    big = np.inf
    matches = np.empty(src_map.count, dtype=np.int64)
    for i in range(src_map.count):
        cand = in_range[i]
        if not cand.any():
            cand = np.ones(dst_map.count, dtype=bool)
        color = np.where(cand, d_color[i], big)
        best = color.min()
        tie = color == best
        space = np.where(tie, d_space[i], big)
        matches[i] = int(np.argmax(space == space.min()))
    return matches


@dataclass
class SuperpixelMatchField:
    """Forward/backward best matches and centroid displacement vectors."""

    forward: dict    # t -> matches of frame t's superpixels in frame t+1
    backward: dict   # t -> matches of frame t's superpixels in frame t-1

    def forward_vectors(self, t, maps):
        m = self.forward[t]
        return maps[t + 1].centroids[m] - maps[t].centroids

    def backward_vectors(self, t, maps):
        m = self.backward[t]
        return maps[t - 1].centroids[m] - maps[t].centroids


def build_match_field(maps: list, radius: float) -> SuperpixelMatchField:
    """Match every adjacent frame pair in both directions.

    ``maps`` is a 0-based list of per-frame SuperpixelMaps.
    """
    forward, backward = {}, {}
    for t in range(len(maps) - 1):
        forward[t] = match_superpixels(maps[t], maps[t + 1], radius)
        backward[t + 1] = match_superpixels(maps[t + 1], maps[t], radius)
    return SuperpixelMatchField(forward, backward)


# --------------------------------------------------------------------------
# mislabel probabilities
# --------------------------------------------------------------------------

def mislabel_probability(d_app: float, f_fwd, f_back) -> float:
    """Single-hop probability 1 - exp(-(d_app + d_occ)).

    ``f_fwd``/``f_back`` are the two displacement vectors whose
    inconsistency defines the occlusion term; both zero means d_occ = 0.
    """
    f_fwd = np.asarray(f_fwd, dtype=np.float64)
    f_back = np.asarray(f_back, dtype=np.float64)
    denom = np.linalg.norm(f_fwd) + np.linalg.norm(f_back)
    d_occ = float(np.linalg.norm(f_fwd + f_back) / denom) if denom > 0 else 0.0
    return 1.0 - math.exp(-(d_app + d_occ))


def _hop_probs(maps, field, t: int, toward_prev: bool) -> np.ndarray:
    """Vector of single-hop mislabel probabilities for frame t's superpixels.

    ``toward_prev`` selects labeling from frame t-1 (else from t+1). The
    occlusion term compares each superpixel's hop vector with the matched
    superpixel's own best-match vector pointing back.
    """
    if toward_prev:
        m = field.backward[t]
        v_hop = maps[t - 1].centroids[m] - maps[t].centroids
        back = field.forward[t - 1][m]
        v_return = maps[t].centroids[back] - maps[t - 1].centroids[m]
        other_colors = maps[t - 1].mean_colors[m]
    else:
        m = field.forward[t]
        v_hop = maps[t + 1].centroids[m] - maps[t].centroids
        back = field.backward[t + 1][m]
        v_return = maps[t].centroids[back] - maps[t + 1].centroids[m]
        other_colors = maps[t + 1].mean_colors[m]
    d_app = np.linalg.norm(maps[t].mean_colors - other_colors, axis=1) / _COLOR_NORM
    num = np.linalg.norm(v_hop + v_return, axis=1)
    den = np.linalg.norm(v_hop, axis=1) + np.linalg.norm(v_return, axis=1)
    d_occ = np.where(den > 0, num / np.maximum(den, 1e-300), 0.0)
    return 1.0 - np.exp(-(d_app + d_occ))


def accumulate_error(hop_probs) -> float:
    """Compound per-hop mislabel probabilities along a matched chain."""
    total = 0.0
    for q in hop_probs:
        total = total + (1.0 - total) * q
    return total


# --------------------------------------------------------------------------
# frame descriptors and the adjustment coefficient
# --------------------------------------------------------------------------

@dataclass
class FrameDescriptor:
    """Whole-frame pyramid color histograms, L1-normalized per level.

    Each level is stored sparsely as (sorted flat (cell, bin) indices,
    probabilities); the dense vector would have cells * bins^3 entries,
    nearly all zero.
    """

    bins_per_channel: int
    levels: list  # [(indices, values)] per pyramid level 0..L

    def level_sum(self, l: int) -> float:
        return float(self.levels[l][1].sum())


def frame_descriptor(frame: np.ndarray, levels: int, bins_per_channel: int) -> FrameDescriptor:
    """Build the per-level histograms of one (unlabeled) frame."""
    from .confidence import quantize_colors, _cell_index

    h, w = frame.shape[:2]
    bins = quantize_colors(frame.reshape(-1, 3), bins_per_channel)
    n_bins = bins_per_channel ** 3
    yy, xx = np.mgrid[0:h, 0:w]
    out = []
    for l in range(levels + 1):
        n = 2 ** l
        cy = _cell_index(yy.ravel(), h, n)
        cx = _cell_index(xx.ravel(), w, n)
        flat = (cy * n + cx) * n_bins + bins
        idx, counts = np.unique(flat, return_counts=True)
        out.append((idx, counts / counts.sum()))
    return FrameDescriptor(bins_per_channel, out)


def adjustment_coefficient(desc_a: FrameDescriptor, desc_b: FrameDescriptor) -> float:
    """Sum over levels of the L1 distance between level descriptors."""
    if (len(desc_a.levels) != len(desc_b.levels)
            or desc_a.bins_per_channel != desc_b.bins_per_channel):
        raise ValueError("descriptors have mismatched shapes")
    total = 0.0
    for (idx_a, val_a), (idx_b, val_b) in zip(desc_a.levels, desc_b.levels):
        _, ia, ib = np.intersect1d(idx_a, idx_b, assume_unique=True,
                                   return_indices=True)
        total += float(np.abs(val_a[ia] - val_b[ib]).sum())
        only_a = np.ones(idx_a.size, dtype=bool)
        only_a[ia] = False
        only_b = np.ones(idx_b.size, dtype=bool)
        only_b[ib] = False
        total += float(val_a[only_a].sum() + val_b[only_b].sum())
    return total


# --------------------------------------------------------------------------
# propagation error matrix and frame selection
# --------------------------------------------------------------------------

def propagation_error_matrix(maps: list, descriptors: list,
                             radius: float, field: SuperpixelMatchField | None = None
                             ) -> np.ndarray:
    """N x N matrix of predicted propagation errors between frame pairs.

    Entry (t', t) is the expected number of mislabeled pixels in frame t
    when labels propagate from frame t' (1-based frames map to 0-based
    rows/columns). The diagonal is zero.
    """
    n = len(maps)
    if field is None:
        field = build_match_field(maps, radius)
    alpha = np.zeros((n, n), dtype=np.float64)
    for a in range(n):
        for b in range(a + 1, n):
            alpha[a, b] = alpha[b, a] = adjustment_coefficient(descriptors[a], descriptors[b])

    errors = np.zeros((n, n), dtype=np.float64)
    for t in range(n):
        areas = maps[t].areas.astype(np.float64)
        # walking backward: source frames t-1, t-2, ...
        if t > 0:
            chain = np.arange(maps[t].count)
            q_acc = np.zeros(maps[t].count, dtype=np.float64)
            hop_from = t
            while hop_from > 0:
                q_hop = _hop_probs(maps, field, hop_from, toward_prev=True)[chain]
                q_acc = q_acc + (1.0 - q_acc) * q_hop
                chain = field.backward[hop_from][chain]
                hop_from -= 1
                errors[hop_from, t] = alpha[hop_from, t] * float((areas * q_acc).sum())
        # walking forward: source frames t+1, t+2, ...
        if t < n - 1:
            chain = np.arange(maps[t].count)
            q_acc = np.zeros(maps[t].count, dtype=np.float64)
            hop_from = t
            while hop_from < n - 1:
                q_hop = _hop_probs(maps, field, hop_from, toward_prev=False)[chain]
                q_acc = q_acc + (1.0 - q_acc) * q_hop
                chain = field.forward[hop_from][chain]
                hop_from += 1
                errors[hop_from, t] = alpha[hop_from, t] * float((areas * q_acc).sum())
    return errors


def selection_objective(error_matrix: np.ndarray, chosen) -> float:
    """Total expected error of a candidate annotation set (1-based frames)."""
    n = error_matrix.shape[0]
    chosen = sorted(chosen)
    if not chosen:
        raise ValueError("chosen set must not be empty")
    total = 0.0
    for t in range(1, n + 1):
        if t in chosen:
            continue
        left = max((c for c in chosen if c < t), default=None)
        right = min((c for c in chosen if c > t), default=None)
        if left is None:
            total += error_matrix[right - 1, t - 1]
        elif right is None:
            total += error_matrix[left - 1, t - 1]
        else:
            total += ((right - t) * error_matrix[left - 1, t - 1]
                      + (t - left) * error_matrix[right - 1, t - 1]) / (right - left)
    return total


def select_frames(error_matrix: np.ndarray, k: int) -> list:
    """K annotation frames minimizing the expected propagation error.

    Dynamic programming over (position, frames used); O(N^2 K) with O(N^2)
    precomputed gap costs. Ties resolve to the lexicographically smallest
    index set. Returns sorted 1-based frame indices.
    """
    error_matrix = np.asarray(error_matrix, dtype=np.float64)
    n = error_matrix.shape[0]
    if error_matrix.shape != (n, n):
        raise ValueError("error matrix must be square")
    if not 1 <= k <= n:
        raise ValueError(f"k must be in 1..{n}, got {k}")

    # prefix sums per source row: S0[s, t] = sum E[s, :t], S1 weights by frame
    ts = np.arange(1, n + 1, dtype=np.float64)
    s0 = np.concatenate([np.zeros((n, 1)), np.cumsum(error_matrix, axis=1)], axis=1)
    s1 = np.concatenate([np.zeros((n, 1)), np.cumsum(error_matrix * ts, axis=1)], axis=1)

    def row_sum(src, lo, hi):
        # sum over t in [lo, hi] of E[src, t], 1-based inclusive
        if lo > hi:
            return 0.0, 0.0
        return (s0[src - 1, hi] - s0[src - 1, lo - 1],
                s1[src - 1, hi] - s1[src - 1, lo - 1])

    def gap_cost(l, r):
        # frames strictly between chosen l and r
        if r - l < 2:
            return 0.0
        a0, a1 = row_sum(l, l + 1, r - 1)
        b0, b1 = row_sum(r, l + 1, r - 1)
        return ((r * a0 - a1) + (b1 - l * b0)) / (r - l)

    head = np.array([row_sum(j, 1, j - 1)[0] for j in range(1, n + 1)])
    tail = np.array([row_sum(j, j + 1, n)[0] for j in range(1, n + 1)])

    # best[c][j]: minimal cost from the c-th chosen frame j (1-based) onward
    best = np.full((k + 1, n + 1), np.inf)
    nxt = np.zeros((k + 1, n + 1), dtype=np.int64)
    best[k, 1:] = tail
    for c in range(k - 1, 0, -1):
        for j in range(1, n + 1):
            for m in range(j + 1, n + 1):
                cand = gap_cost(j, m) + best[c + 1, m]
                if cand < best[c, j]:
                    best[c, j] = cand
                    nxt[c, j] = m
    totals = head + best[1, 1:]
    start = int(np.argmin(totals)) + 1
    chosen = [start]
    c, j = 1, start
    while c < k:
        j = int(nxt[c, j])
        chosen.append(j)
        c += 1
    return chosen


class FrameSelector(ParamsMixin):
    """Estimator facade: fit on per-frame superpixel maps + descriptors,
    then recommend annotation frames."""

    def __init__(self, k: int = 1, radius: float = 100.0):
        self.k = k
        self.radius = radius

    def fit(self, maps, descriptors):
        self.error_matrix_ = propagation_error_matrix(maps, descriptors, self.radius)
        return self

    def recommend(self, k: int | None = None) -> list:
        check_fitted(self, "error_matrix_")
        return select_frames(self.error_matrix_, k or self.k)
