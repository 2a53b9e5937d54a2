"""Global foreground confidence: static pyramid histograms + dynamic geodesics.

The static classifier is a spatial pyramid of foreground/background color
histograms built from the annotated frames: level ``l`` tiles the frame
into 2^l x 2^l cells and each annotated pixel contributes one count to the
foreground or background histogram of its cell at every level. A superpixel
is scored by the ratio H_F / (H_F + H_B) looked up at its quantized mean
color in the cell containing its centroid, averaged over levels 1..L
(level 0 alone when L = 0, which reduces to a plain global color
histogram classifier). Bins with no evidence at all score 0.5.

The dynamic classifier connects the superpixels of two consecutive frames
into a weighted graph (spatially adjacent within a frame, overlapping
across frames; weights are mean-RGB distances) and scores each superpixel
of the new frame by its geodesic distances to the previous frame's
foreground and background regions.

Both scores multiply into the combined confidence; thresholding the
rasterized combined map at its mean gives the coarse mask.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .base import ParamsMixin, check_fitted, check_frame, check_mask, check_same_shape
from .superpixel import SuperpixelMap


# --------------------------------------------------------------------------
# static model
# --------------------------------------------------------------------------

# cells * bins^3 entries above this go to a sparse dict instead of a dense
# array (a level-6 grid at 32 bins/channel would need gigabytes dense)
_DENSE_LEVEL_LIMIT = 1 << 23


@dataclass
class PyramidModel:
    """Per-level, per-cell foreground/background color histograms.

    ``fg[l]`` and ``bg[l]`` are arrays of shape (2^l, 2^l, bins^3) for
    small levels, or dicts keyed by the flat (cell, bin) index for levels
    too large to store densely. Counts are raw pixel counts over all
    annotated frames.
    """

    levels: int
    bins_per_channel: int
    width: int
    height: int
    fg: dict
    bg: dict

    def cells_at(self, level: int) -> int:
        return 2 ** level

    def scoring_levels(self) -> list:
        # the per-level average runs over levels 1..L; a single-level model
        # (L = 0) degenerates to the global single-cell histogram
        return list(range(1, self.levels + 1)) if self.levels >= 1 else [0]


def quantize_colors(colors: np.ndarray, bins_per_channel: int) -> np.ndarray:
    """Flat histogram bin index for RGB colors (uniform per-channel bins)."""
    width = 256 // bins_per_channel
    q = np.clip(np.floor(np.asarray(colors, dtype=np.float64) / width), 0,
                bins_per_channel - 1).astype(np.int64)
    return (q[..., 0] * bins_per_channel + q[..., 1]) * bins_per_channel + q[..., 2]


def _cell_index(coords: np.ndarray, extent: int, n_cells: int) -> np.ndarray:
    """Cell index along one axis; cells tile [0, extent) exactly."""
    idx = (np.asarray(coords, dtype=np.float64) * n_cells) // extent
    return np.clip(idx, 0, n_cells - 1).astype(np.int64)


def build_pyramid_model(frames, masks, levels: int, bins_per_channel: int) -> PyramidModel:
    """Accumulate the histograms over annotated (frame, mask) pairs."""
    if len(frames) < 1 or len(frames) != len(masks):
        raise ValueError("need at least one annotated frame, one mask per frame")
    if levels < 0:
        raise ValueError("levels must be >= 0")
    first = check_frame(frames[0])
    h, w = first.shape[:2]
    n_bins = bins_per_channel ** 3

    def empty(level):
        size = 4 ** level * n_bins
        if size <= _DENSE_LEVEL_LIMIT:
            return np.zeros((2 ** level, 2 ** level, n_bins), dtype=np.int64)
        return {}

    fg = {l: empty(l) for l in range(levels + 1)}
    bg = {l: empty(l) for l in range(levels + 1)}

    def accumulate(store, flat, n):
        if isinstance(store, dict):
            keys, counts = np.unique(flat, return_counts=True)
            for key, count in zip(keys.tolist(), counts.tolist()):
                store[key] = store.get(key, 0) + count
        else:
            store += np.bincount(flat, minlength=n * n * n_bins).reshape(n, n, n_bins)

    yy, xx = np.mgrid[0:h, 0:w]
    for frame, mask in zip(frames, masks):
        frame = check_frame(frame)
        mask = check_mask(mask, shape=(h, w))
        bins = quantize_colors(frame.reshape(-1, 3), bins_per_channel)
        is_fg = mask.ravel().astype(bool)
        for l in range(levels + 1):
            n = 2 ** l
            cy = _cell_index(yy.ravel(), h, n)
            cx = _cell_index(xx.ravel(), w, n)
            flat = (cy * n + cx) * n_bins + bins
            accumulate(fg[l], flat[is_fg], n)
            accumulate(bg[l], flat[~is_fg], n)
    return PyramidModel(levels, bins_per_channel, w, h, fg, bg)


def static_confidence(model: PyramidModel, spmap: SuperpixelMap) -> np.ndarray:
    """Per-superpixel foreground probability from the pyramid model."""
    bins = quantize_colors(spmap.mean_colors, model.bins_per_channel)
    cx = spmap.centroids[:, 0]
    cy = spmap.centroids[:, 1]
    levels = model.scoring_levels()
    n_bins = model.bins_per_channel ** 3
    total = np.zeros(spmap.count, dtype=np.float64)
    for l in levels:
        n = model.cells_at(l)
        iy = _cell_index(cy, model.height, n)
        ix = _cell_index(cx, model.width, n)
        layer_f, layer_b = model.fg[l], model.bg[l]
        if isinstance(layer_f, dict):
            keys = ((iy * n + ix) * n_bins + bins).tolist()
            f = np.array([layer_f.get(k, 0) for k in keys], dtype=np.float64)
            b = np.array([layer_b.get(k, 0) for k in keys], dtype=np.float64)
        else:
            f = layer_f[iy, ix, bins].astype(np.float64)
            b = layer_b[iy, ix, bins].astype(np.float64)
        denom = f + b
        term = np.where(denom > 0, f / np.maximum(denom, 1), 0.5)
        total += term
    return total / len(levels)


# --------------------------------------------------------------------------
# dynamic model
# --------------------------------------------------------------------------

@dataclass
class InterframeGraph:
    """Weighted graph over the superpixels of two consecutive frames.

    Nodes 0..n_prev-1 are the previous frame's superpixels, the rest the
    current frame's. ``adjacency[node]`` lists (neighbor, weight) pairs.
    """

    n_prev: int
    n_cur: int
    adjacency: list

    @property
    def n_nodes(self) -> int:
        return self.n_prev + self.n_cur

    def cur_node(self, sp_id: int) -> int:
        return self.n_prev + sp_id


def _adjacent_id_pairs(ids: np.ndarray) -> set:
    """Unique unordered pairs of 8-connected distinct superpixel ids."""
    pairs = set()
    shifts = [(0, 1), (1, 0), (1, 1), (1, -1)]
    for dy, dx in shifts:
        if dy == 0:
            a, b = ids[:, :-1], ids[:, 1:]
        elif dx == 0:
            a, b = ids[:-1, :], ids[1:, :]
        elif dx == 1:
            a, b = ids[:-1, :-1], ids[1:, 1:]
        else:
            a, b = ids[:-1, 1:], ids[1:, :-1]
        a, b = a.ravel(), b.ravel()
        diff = a != b
        lo = np.minimum(a[diff], b[diff])
        hi = np.maximum(a[diff], b[diff])
        pairs.update(zip(lo.tolist(), hi.tolist()))
    return pairs


def build_interframe_graph(prev_map: SuperpixelMap, cur_map: SuperpixelMap) -> InterframeGraph:
    """Spatial edges within each frame, temporal edges on pixel overlap."""
    check_same_shape(prev_map.ids, cur_map.ids, "superpixel maps")
    n_prev, n_cur = prev_map.count, cur_map.count
    adjacency = [[] for _ in range(n_prev + n_cur)]

    def add_edge(a, b, w):
        adjacency[a].append((b, w))
        adjacency[b].append((a, w))

    for a, b in _adjacent_id_pairs(prev_map.ids):
        add_edge(a, b, float(np.linalg.norm(prev_map.mean_colors[a] - prev_map.mean_colors[b])))
    for a, b in _adjacent_id_pairs(cur_map.ids):
        add_edge(n_prev + a, n_prev + b,
                 float(np.linalg.norm(cur_map.mean_colors[a] - cur_map.mean_colors[b])))

    overlap = np.unique(
        np.stack([prev_map.ids.ravel().astype(np.int64),
                  cur_map.ids.ravel().astype(np.int64)], axis=1), axis=0)
    for a, b in overlap:
        add_edge(int(a), n_prev + int(b),
                 float(np.linalg.norm(prev_map.mean_colors[a] - cur_map.mean_colors[b])))
    return InterframeGraph(n_prev, n_cur, adjacency)


def geodesic_distance_field(graph, sources) -> np.ndarray:
    """Multi-source shortest-path distances (Dijkstra, binary heap).

    ``graph`` may be an InterframeGraph or a plain adjacency list.
    Unreachable nodes get +inf.
    """
    adjacency = graph.adjacency if isinstance(graph, InterframeGraph) else graph
    sources = list(sources)
    if not sources:
        raise ValueError("source set must not be empty")
    n = len(adjacency)
    dist = np.full(n, np.inf, dtype=np.float64)
    heap = []
    for s in sources:
        dist[s] = 0.0
        heap.append((0.0, s))
    heapq.heapify(heap)
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, w in adjacency[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def dynamic_confidence(graph: InterframeGraph, prev_labels: np.ndarray) -> np.ndarray:
    """Foreground probability of current-frame superpixels from geodesics.

    D_B / (D_F + D_B) with distances to the previous frame's foreground
    and background regions; degenerate label sets saturate to 0 or 1.
    """
    prev_labels = np.asarray(prev_labels)
    if prev_labels.shape[0] != graph.n_prev:
        raise ValueError("labels do not match the previous frame's superpixels")
    fg_sources = np.flatnonzero(prev_labels == 1)
    bg_sources = np.flatnonzero(prev_labels == 0)
    if fg_sources.size == 0:
        return np.zeros(graph.n_cur, dtype=np.float64)
    if bg_sources.size == 0:
        return np.ones(graph.n_cur, dtype=np.float64)
    d_f = geodesic_distance_field(graph, fg_sources.tolist())[graph.n_prev:]
    d_b = geodesic_distance_field(graph, bg_sources.tolist())[graph.n_prev:]
    both_inf = np.isinf(d_f) & np.isinf(d_b)
    zero_sum = (d_f + d_b) == 0
    with np.errstate(invalid="ignore"):
        out = d_b / (d_f + d_b)
    out[np.isinf(d_f) & ~both_inf] = 0.0
    out[np.isinf(d_b) & ~both_inf] = 1.0
    out[both_inf | zero_sum] = 0.5
    return out


def combine_confidence(static: np.ndarray, dynamic: np.ndarray) -> np.ndarray:
    """Elementwise product of the two confidence maps."""
    static = np.asarray(static, dtype=np.float64)
    dynamic = np.asarray(dynamic, dtype=np.float64)
    if static.shape != dynamic.shape:
        raise ValueError("confidence maps cover different superpixel sets")
    return static * dynamic


def rasterize_confidence(spmap: SuperpixelMap, values: np.ndarray) -> np.ndarray:
    """Per-pixel view of a per-superpixel confidence map."""
    values = np.asarray(values, dtype=np.float64)
    if values.shape[0] != spmap.count:
        raise ValueError("values do not match the superpixel count")
    return values[spmap.ids]


def coarse_mask(conf_image: np.ndarray) -> np.ndarray:
    """Binary mask: pixels strictly above the mean confidence."""
    conf_image = np.asarray(conf_image, dtype=np.float64)
    return (conf_image > conf_image.mean()).astype(np.uint8)


class PyramidClassifier(ParamsMixin):
    """Estimator facade over the static pyramid model.

    fit() consumes annotated (frames, masks); predict_proba() scores the
    superpixels of a new frame.
    """

    def __init__(self, levels: int = 3, bins_per_channel: int = 32):
        self.levels = levels
        self.bins_per_channel = bins_per_channel

    def fit(self, frames, masks):
        self.model_ = build_pyramid_model(frames, masks, self.levels, self.bins_per_channel)
        return self

    def predict_proba(self, spmap: SuperpixelMap) -> np.ndarray:
        check_fitted(self, "model_")
        return static_confidence(self.model_, spmap)

    def predict(self, spmap: SuperpixelMap) -> np.ndarray:
        return (self.predict_proba(spmap) > 0.5).astype(np.uint8)
