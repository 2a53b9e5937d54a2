"""SLIC oversegmentation and per-superpixel statistics.

Superpixels are the atomic unit of the global models: every frame is
partitioned into compact, color-coherent, 4-connected regions, each
summarized by its mean RGB color, centroid and pixel area.

Clustering runs directly in RGB (no Lab conversion) with the standard
joint color/space distance; seeds start on a regular grid, so the result
is deterministic for a given frame and configuration.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .base import ParamsMixin, check_frame, check_mask, check_same_shape
from .config import DEFAULT_SUPERPIXELS_PER_MEGAPIXEL

_FOUR_CONN = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


@dataclass
class SuperpixelMap:
    """Per-pixel superpixel ids plus per-superpixel statistics.

    ids are 0..count-1, every id nonempty, each region 4-connected.
    centroids hold (x, y) coordinates; mean_colors hold RGB means.
    """

    ids: np.ndarray
    count: int
    mean_colors: np.ndarray
    centroids: np.ndarray
    areas: np.ndarray

    @property
    def shape(self):
        return self.ids.shape

    @classmethod
    def from_ids(cls, frame: np.ndarray, ids: np.ndarray) -> "SuperpixelMap":
        ids = np.ascontiguousarray(ids, dtype=np.int32)
        count = int(ids.max()) + 1
        flat = ids.ravel()
        areas = np.bincount(flat, minlength=count).astype(np.int64)
        if np.any(areas == 0):
            raise ValueError("superpixel ids must be contiguous with no empty id")
        colors = frame.reshape(-1, 3).astype(np.float64)
        mean_colors = np.empty((count, 3), dtype=np.float64)
        for c in range(3):
            mean_colors[:, c] = np.bincount(flat, weights=colors[:, c], minlength=count)
        mean_colors /= areas[:, None]
        h, w = ids.shape
        yy, xx = np.mgrid[0:h, 0:w]
        cx = np.bincount(flat, weights=xx.ravel(), minlength=count) / areas
        cy = np.bincount(flat, weights=yy.ravel(), minlength=count) / areas
        return cls(ids, count, mean_colors, np.column_stack([cx, cy]), areas)


def slic_segment(frame: np.ndarray, target_count: int, compactness: float = 10.0,
                 n_iters: int = 10) -> SuperpixelMap:
    """Oversegment a frame into roughly ``target_count`` superpixels.

    The realized count stays within about +/-20% of the target; orphan
    fragments left by the clustering are merged into their largest
    neighboring region so every superpixel is 4-connected.
    """
    frame = check_frame(frame)
    h, w = frame.shape[:2]
    if not 1 <= target_count <= h * w:
        raise ValueError(f"target_count must be in 1..{h * w}, got {target_count}")

    colors = frame.astype(np.float32)
    step = float(np.sqrt(h * w / target_count))
    ky = max(1, round(h / step))
    kx = max(1, round(target_count / ky))
    seeds_y = ((np.arange(ky) + 0.5) * h / ky)
    seeds_x = ((np.arange(kx) + 0.5) * w / kx)
    cy, cx = [g.ravel() for g in np.meshgrid(seeds_y, seeds_x, indexing="ij")]
    k = cy.size
    centers_rgb = colors[cy.astype(int), cx.astype(int)].astype(np.float64)
    centers_y = cy.astype(np.float64)
    centers_x = cx.astype(np.float64)

    # spatial distances are weighted by (compactness / step)^2 against
    # squared RGB distances, per the usual SLIC trade-off
    ratio2 = (compactness / step) ** 2
    reach = int(np.ceil(step))
    labels = np.full((h, w), -1, dtype=np.int32)
    best = np.full((h, w), np.inf, dtype=np.float64)
    yy, xx = np.mgrid[0:h, 0:w]

    for _ in range(max(1, n_iters)):
        best.fill(np.inf)
        labels.fill(-1)
        for i in range(k):
            y0 = max(0, int(centers_y[i]) - reach)
            y1 = min(h, int(centers_y[i]) + reach + 1)
            x0 = max(0, int(centers_x[i]) - reach)
            x1 = min(w, int(centers_x[i]) + reach + 1)
            patch = colors[y0:y1, x0:x1].astype(np.float64)
            dc = patch - centers_rgb[i]
            dist = (dc * dc).sum(axis=2)
            dy = yy[y0:y1, x0:x1] - centers_y[i]
            dx = xx[y0:y1, x0:x1] - centers_x[i]
            dist = dist + ratio2 * (dy * dy + dx * dx)
            sub_best = best[y0:y1, x0:x1]
            sub_labels = labels[y0:y1, x0:x1]
            better = dist < sub_best
            sub_best[better] = dist[better]
            sub_labels[better] = i
        # pixels outside every search window (possible for stretched grids)
        # fall back to the nearest seed by spatial distance
        if (labels < 0).any():
            miss = np.argwhere(labels < 0)
            d = (miss[:, 0:1] - centers_y) ** 2 + (miss[:, 1:2] - centers_x) ** 2
            labels[miss[:, 0], miss[:, 1]] = np.argmin(d, axis=1)
        flat = labels.ravel()
        counts = np.bincount(flat, minlength=k).astype(np.float64)
        counts[counts == 0] = 1.0
        for c in range(3):
            centers_rgb[:, c] = np.bincount(flat, weights=colors[..., c].ravel(),
                                            minlength=k) / counts
        centers_y = np.bincount(flat, weights=yy.ravel(), minlength=k) / counts
        centers_x = np.bincount(flat, weights=xx.ravel(), minlength=k) / counts

    ids = _enforce_connectivity(labels, k)
    return SuperpixelMap.from_ids(frame, ids)


def _enforce_connectivity(labels: np.ndarray, k: int) -> np.ndarray:
    """Split disconnected clusters; merge orphans into their largest neighbor."""
    h, w = labels.shape
    comp = np.full((h, w), -1, dtype=np.int32)
    n_comp = 0
    objects = ndimage.find_objects(labels + 1, max_label=k)
    for i in range(k):
        sl = objects[i]
        if sl is None:
            continue
        mask = labels[sl] == i
        lab, n = ndimage.label(mask, structure=_FOUR_CONN)
        comp[sl][mask] = lab[mask] + n_comp - 1
        n_comp += n
    flat_comp = comp.ravel()
    sizes = np.bincount(flat_comp, minlength=n_comp)

    # component adjacency from horizontal/vertical neighbor pairs
    pairs = set()
    a, b = comp[:, :-1].ravel(), comp[:, 1:].ravel()
    diff = a != b
    pairs.update(zip(a[diff].tolist(), b[diff].tolist()))
    a, b = comp[:-1, :].ravel(), comp[1:, :].ravel()
    diff = a != b
    pairs.update(zip(a[diff].tolist(), b[diff].tolist()))
    neighbors = [[] for _ in range(n_comp)]
    for a, b in pairs:
        neighbors[a].append(b)
        neighbors[b].append(a)

    # the largest component of each cluster keeps it; the rest are orphans
    _, first_pos = np.unique(flat_comp, return_index=True)
    comp_cluster = labels.ravel()[first_pos]
    owner_roots = set()
    for i in range(k):
        members = np.where(comp_cluster == i)[0]
        if members.size:
            owner_roots.add(int(members[np.argmax(sizes[members])]))

    parent = np.arange(n_comp, dtype=np.int64)
    size_now = sizes.astype(np.int64).copy()

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    # orphan chains can only reach an owner through already-merged orphans,
    # so sweep until no mergeable orphan root remains
    changed = True
    while changed:
        changed = False
        for c in range(n_comp):
            rc = find(c)
            if rc in owner_roots:
                continue
            roots = {find(nb) for nb in neighbors[c]} - {rc}
            if not roots:
                continue
            target = max(roots, key=lambda r: (size_now[r], -r))
            size_now[target] += size_now[rc]
            parent[rc] = target
            changed = True

    final = np.array([find(c) for c in range(n_comp)], dtype=np.int64)
    # renumber to 0..count-1 in raster order of first appearance
    flat_final = final[flat_comp]
    uniq, first = np.unique(flat_final, return_index=True)
    remap = {int(root): new for new, root in enumerate(uniq[np.argsort(first)])}
    lut = np.zeros(n_comp, dtype=np.int32)
    for root, new in remap.items():
        lut[final == root] = new
    return lut[comp]


def superpixel_labels(spmap: SuperpixelMap, mask: np.ndarray) -> np.ndarray:
    """Majority-vote binary label per superpixel.

    A superpixel is foreground only when strictly more of its pixels are
    foreground than background; exact ties go to background.
    """
    mask = check_mask(mask)
    check_same_shape(spmap.ids, mask, "superpixel map and mask")
    fg = np.bincount(spmap.ids.ravel(), weights=mask.ravel().astype(np.float64),
                     minlength=spmap.count)
    return (2 * fg > spmap.areas).astype(np.uint8)


class SlicSegmenter(ParamsMixin):
    """Estimator-style wrapper around :func:`slic_segment`.

    ``n_segments=None`` derives the per-frame target from
    ``per_megapixel`` and the frame size.
    """

    def __init__(self, n_segments=None, per_megapixel=DEFAULT_SUPERPIXELS_PER_MEGAPIXEL,
                 compactness=10.0, n_iters=10):
        self.n_segments = n_segments
        self.per_megapixel = per_megapixel
        self.compactness = compactness
        self.n_iters = n_iters

    def fit(self, frame=None, y=None):
        return self

    def transform(self, frame: np.ndarray) -> SuperpixelMap:
        frame = check_frame(frame)
        h, w = frame.shape[:2]
        target = self.n_segments or max(1, round(self.per_megapixel * w * h / 1e6))
        return slic_segment(frame, target, self.compactness, self.n_iters)

    fit_transform = transform
