"""Uncertainty-gated local refinement of the coarse mask.

Pixels whose label flipped against the previous frame, or whose inter-frame
color change exceeds the frame mean, form the propagation-uncertainty set.
Local classifier windows (a half-overlap grid per scale) are enabled only
where they cover that set; each enabled window is matched against the
previous frame by a joint shape+color score over an exhaustive offset
search, then every uncertain pixel takes the label of its best
color-matching pixel inside the matched window. Votes from overlapping
windows are merged by majority, certain pixels keep the coarse label,
and forward/backward results merge by temporal distance weighting.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import ndimage

from .base import check_frame, check_mask, check_same_shape

_FOUR_CONN = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
_COLOR_NORM = 255.0 * np.sqrt(3.0)


def propagation_uncertainty(prev_frame: np.ndarray, cur_frame: np.ndarray) -> np.ndarray:
    """Per-pixel RGB distance between co-located pixels of two frames."""
    prev_frame = check_frame(prev_frame)
    cur_frame = check_frame(cur_frame)
    check_same_shape(prev_frame, cur_frame, "frames")
    d = prev_frame.astype(np.float64) - cur_frame.astype(np.float64)
    return np.sqrt((d * d).sum(axis=2))


def partition_certainty(coarse: np.ndarray, prev_mask: np.ndarray,
                        energy: np.ndarray):
    """Split pixels into the uncertainty set and its exact complement.

    Uncertain: label changed against the previous mask OR inter-frame
    change strictly above the mean.
    """
    coarse = check_mask(coarse)
    prev_mask = check_mask(prev_mask, shape=coarse.shape)
    uncertain = (coarse != prev_mask) | (energy > energy.mean())
    return uncertain, ~uncertain


@dataclass(frozen=True)
class Window:
    """One local classifier window (cropped to the frame at borders)."""

    y: int
    x: int
    h: int
    w: int
    scale: int


@dataclass(frozen=True)
class MatchedWindow:
    window: Window
    match_y: int
    match_x: int
    score: float


def window_grid(height: int, width: int, size: int) -> list:
    """Half-overlap grid of ``size``-sized windows covering the frame."""
    def anchors(extent):
        if size >= extent:
            return [0]
        stride = max(1, size // 2)
        last = -(-(extent - size) // stride)  # ceil division
        return [i * stride for i in range(last + 1)]

    out = []
    for y in anchors(height):
        for x in anchors(width):
            out.append(Window(y, x, min(size, height - y), min(size, width - x), size))
    return out


def enabled_windows(uncertain: np.ndarray, sizes, shape=None) -> list:
    """Grid windows (all scales) that cover at least one uncertain pixel."""
    h, w = uncertain.shape
    acc = np.zeros((h + 1, w + 1), dtype=np.int64)
    acc[1:, 1:] = uncertain.astype(np.int64).cumsum(0).cumsum(1)
    out = []
    for size in sizes:
        for win in window_grid(h, w, size):
            y0, x0, y1, x1 = win.y, win.x, win.y + win.h, win.x + win.w
            covered = acc[y1, x1] - acc[y0, x1] - acc[y1, x0] + acc[y0, x0]
            if covered > 0:
                out.append(win)
    return out


# --------------------------------------------------------------------------
# window matching
# --------------------------------------------------------------------------

def candidate_range(window: Window, height: int, width: int, max_dy: int, max_dx: int):
    """Clamped top-left range of same-sized candidate windows."""
    y_lo = max(0, window.y - max_dy)
    y_hi = min(height - window.h, window.y + max_dy)
    x_lo = max(0, window.x - max_dx)
    x_hi = min(width - window.w, window.x + max_dx)
    return y_lo, y_hi, x_lo, x_hi


def window_candidate_scores(cur_frame, coarse, prev_frame, prev_mask,
                            window: Window, max_dy: int, max_dx: int):
    """Score every candidate placement of one window (reference path).

    Returns (scores, ys, xs): scores[i, j] is the shape+color cost of the
    candidate with top-left (ys[i], xs[j]). The color term is per-pixel
    RGB distance scaled to [0, 1]; the shape term counts label flips.
    """
    h, w = cur_frame.shape[:2]
    y_lo, y_hi, x_lo, x_hi = candidate_range(window, h, w, max_dy, max_dx)
    ys = np.arange(y_lo, y_hi + 1)
    xs = np.arange(x_lo, x_hi + 1)
    wy, wx, wh, ww = window.y, window.x, window.h, window.w
    ref = cur_frame[wy:wy + wh, wx:wx + ww].astype(np.int64)
    ref_m = coarse[wy:wy + wh, wx:wx + ww].astype(np.int64)
    scores = np.empty((ys.size, xs.size), dtype=np.float64)
    strip_w = x_hi - x_lo + ww
    for i, yc in enumerate(ys):
        strip = prev_frame[yc:yc + wh, x_lo:x_lo + strip_w].astype(np.int64)
        strip_m = prev_mask[yc:yc + wh, x_lo:x_lo + strip_w].astype(np.int64)
        cands = sliding_window_view(strip, ww, axis=1)      # (wh, n_x, 3, ww)
        cands_m = sliding_window_view(strip_m, ww, axis=1)  # (wh, n_x, ww)
        d = cands - ref.transpose(0, 2, 1)[:, None]
        color = np.sqrt((d * d).sum(axis=2)) / _COLOR_NORM
        shape_term = np.abs(cands_m - ref_m[:, None, :])
        scores[i] = (color + shape_term).sum(axis=(0, 2))
    return scores, ys, xs


def _select_best(scores, ys, xs, window: Window) -> MatchedWindow:
    """Argmin with ties broken by displacement norm, then (dy, dx)."""
    dy = ys - window.y
    dx = xs - window.x
    disp2 = (dy[:, None] ** 2 + dx[None, :] ** 2).astype(np.float64)
    flat = np.lexsort((
        np.broadcast_to(dx[None, :], scores.shape).ravel(),
        np.broadcast_to(dy[:, None], scores.shape).ravel(),
        disp2.ravel(),
        scores.ravel(),
    ))[0]
    i, j = np.unravel_index(flat, scores.shape)
    return MatchedWindow(window, int(ys[i]), int(xs[j]), float(scores[i, j]))


def match_window(cur_frame, coarse, prev_frame, prev_mask, window: Window,
                 max_dy: int, max_dx: int) -> MatchedWindow:
    """Best-matching same-sized window of the previous frame."""
    scores, ys, xs = window_candidate_scores(
        cur_frame, coarse, prev_frame, prev_mask, window, max_dy, max_dx)
    return _select_best(scores, ys, xs, window)


def _numba_kernel():
    if os.environ.get("VIDEOCUTOUT_NO_NUMBA"):
        return None
    global _KERNEL
    try:
        return _KERNEL
    except NameError:
        pass
    try:
        os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")
        from numba import njit, prange
    except ImportError:
        _KERNEL = None
        return None

    @njit(cache=True, parallel=True)
    def kernel(cur, prev_pad, coarse, mask_pad, y_a, x_a, bh, bw,
               dys, dxs, pad_y, pad_x, win_y, win_x, win_h, win_w, inv_norm):
        n_dy = dys.shape[0]
        n_dx = dxs.shape[0]
        n_win = win_y.shape[0]
        scores = np.empty((n_win, n_dy, n_dx), np.float64)
        for oi in prange(n_dy * n_dx):
            di = oi // n_dx
            dj = oi % n_dx
            dy = dys[di]
            dx = dxs[dj]
            acc = np.empty((bh + 1, bw + 1), np.float64)
            for j in range(bw + 1):
                acc[0, j] = 0.0
            for y in range(bh):
                acc[y + 1, 0] = 0.0
                rowsum = 0.0
                yy = y_a + y
                py = yy + dy + pad_y
                for x in range(bw):
                    xx = x_a + x
                    px = xx + dx + pad_x
                    d0 = np.int64(cur[yy, xx, 0]) - np.int64(prev_pad[py, px, 0])
                    d1 = np.int64(cur[yy, xx, 1]) - np.int64(prev_pad[py, px, 1])
                    d2 = np.int64(cur[yy, xx, 2]) - np.int64(prev_pad[py, px, 2])
                    c = np.sqrt(np.float64(d0 * d0 + d1 * d1 + d2 * d2)) * inv_norm
                    if coarse[yy, xx] != mask_pad[py, px]:
                        c += 1.0
                    rowsum += c
                    acc[y + 1, x + 1] = acc[y, x + 1] + rowsum
            for w in range(n_win):
                ys = win_y[w] - y_a
                xs = win_x[w] - x_a
                ye = ys + win_h[w]
                xe = xs + win_w[w]
                scores[w, di, dj] = acc[ye, xe] - acc[ys, xe] - acc[ye, xs] + acc[ys, xs]
        return scores

    _KERNEL = kernel
    return kernel


def match_windows(cur_frame, coarse, prev_frame, prev_mask, windows,
                  max_dy: int, max_dx: int) -> list:
    """Match a batch of enabled windows against the previous frame.

    All windows share the per-offset cost fields (one summed-area table
    per offset), which makes dense window sets cheap. Falls back to the
    per-window reference path when numba is unavailable.
    """
    if not windows:
        return []
    kernel = _numba_kernel()
    if kernel is None:
        return [match_window(cur_frame, coarse, prev_frame, prev_mask, w, max_dy, max_dx)
                for w in windows]

    h, w = cur_frame.shape[:2]
    y_a = min(win.y for win in windows)
    x_a = min(win.x for win in windows)
    bh = max(win.y + win.h for win in windows) - y_a
    bw = max(win.x + win.w for win in windows) - x_a
    prev_pad = np.pad(prev_frame, ((max_dy, max_dy), (max_dx, max_dx), (0, 0)))
    mask_pad = np.pad(prev_mask, ((max_dy, max_dy), (max_dx, max_dx)))
    dys = np.arange(-max_dy, max_dy + 1, dtype=np.int64)
    dxs = np.arange(-max_dx, max_dx + 1, dtype=np.int64)
    win_y = np.array([win.y for win in windows], dtype=np.int64)
    win_x = np.array([win.x for win in windows], dtype=np.int64)
    win_h = np.array([win.h for win in windows], dtype=np.int64)
    win_w = np.array([win.w for win in windows], dtype=np.int64)
    scores = kernel(np.ascontiguousarray(cur_frame), np.ascontiguousarray(prev_pad),
                    np.ascontiguousarray(coarse), np.ascontiguousarray(mask_pad),
                    y_a, x_a, bh, bw, dys, dxs, max_dy, max_dx,
                    win_y, win_x, win_h, win_w, 1.0 / _COLOR_NORM)

    out = []
    for k, win in enumerate(windows):
        y_lo, y_hi, x_lo, x_hi = candidate_range(win, h, w, max_dy, max_dx)
        i0 = y_lo - win.y + max_dy
        i1 = y_hi - win.y + max_dy
        j0 = x_lo - win.x + max_dx
        j1 = x_hi - win.x + max_dx
        sub = scores[k, i0:i1 + 1, j0:j1 + 1]
        out.append(_select_best(sub, np.arange(y_lo, y_hi + 1),
                                np.arange(x_lo, x_hi + 1), win))
    return out


# --------------------------------------------------------------------------
# local classification and fusion
# --------------------------------------------------------------------------

def local_classify(cur_frame, prev_frame, prev_mask, matched: MatchedWindow,
                   pixel_ys, pixel_xs) -> np.ndarray:
    """Label of the best color-matching pixel inside the matched window.

    Ties go to the spatially closest candidate (relative to the pixel's
    own in-window position), then to row-major order.
    """
    win = matched.window
    region = prev_frame[matched.match_y:matched.match_y + win.h,
                        matched.match_x:matched.match_x + win.w]
    cand_colors = region.reshape(-1, 3).astype(np.int32)
    cand_labels = prev_mask[matched.match_y:matched.match_y + win.h,
                            matched.match_x:matched.match_x + win.w].ravel()
    cy, cx = np.mgrid[0:win.h, 0:win.w]
    cand_pos = np.stack([cy.ravel(), cx.ravel()], axis=1).astype(np.int32)

    pixel_ys = np.asarray(pixel_ys)
    pixel_xs = np.asarray(pixel_xs)
    labels = np.empty(pixel_ys.size, dtype=np.uint8)
    big = np.iinfo(np.int32).max
    chunk = max(1, 2_000_000 // max(1, cand_colors.shape[0]))
    for start in range(0, pixel_ys.size, chunk):
        ys = pixel_ys[start:start + chunk]
        xs = pixel_xs[start:start + chunk]
        colors = cur_frame[ys, xs].astype(np.int32)
        d = colors[:, None, :] - cand_colors[None, :, :]
        d_color = (d * d).sum(axis=2)
        best = d_color.min(axis=1, keepdims=True)
        tie = d_color == best
        rel = np.stack([ys - win.y, xs - win.x], axis=1).astype(np.int32)
        ds = ((cand_pos[None, :, :] - rel[:, None, :]) ** 2).sum(axis=2)
        ds = np.where(tie, ds, big)
        closest = ds.min(axis=1, keepdims=True)
        idx = np.argmax(tie & (ds == closest), axis=1)
        labels[start:start + chunk] = cand_labels[idx]
    return labels


def vote_local_labels(cur_frame, prev_frame, prev_mask, matched_windows,
                      uncertain, coarse) -> np.ndarray:
    """Resolve per-pixel labels from all covering windows (majority vote).

    Returns int8 labels over the frame: 0/1 where at least one window
    voted, -1 where no enabled window covers the pixel.
    """
    h, w = uncertain.shape
    vote_fg = np.zeros((h, w), dtype=np.int32)
    vote_n = np.zeros((h, w), dtype=np.int32)
    for mw in matched_windows:
        win = mw.window
        sub = uncertain[win.y:win.y + win.h, win.x:win.x + win.w]
        if not sub.any():
            continue
        ys, xs = np.nonzero(sub)
        ys = ys + win.y
        xs = xs + win.x
        labels = local_classify(cur_frame, prev_frame, prev_mask, mw, ys, xs)
        vote_fg[ys, xs] += labels
        vote_n[ys, xs] += 1
    out = np.full((h, w), -1, dtype=np.int8)
    voted = vote_n > 0
    out[voted & (2 * vote_fg > vote_n)] = 1
    out[voted & (2 * vote_fg < vote_n)] = 0
    split = voted & (2 * vote_fg == vote_n)
    out[split] = coarse[split]
    return out


def fuse_masks(coarse: np.ndarray, local_labels: np.ndarray,
               uncertain: np.ndarray) -> np.ndarray:
    """Coarse labels on certain pixels, local labels on uncertain ones.

    Uncertain pixels with no local label (-1) keep the coarse label.
    """
    out = np.asarray(coarse, dtype=np.uint8).copy()
    take = uncertain & (local_labels >= 0)
    out[take] = local_labels[take].astype(np.uint8)
    return out


def merge_bidirectional(m_left: np.ndarray, m_right: np.ndarray,
                        l_t: int, r_t: int, t: int,
                        threshold: float = 0.5) -> np.ndarray:
    """Distance-weighted merge of forward and backward masks at frame t."""
    if l_t >= r_t:
        raise ValueError(f"left annotation index {l_t} must precede right {r_t}")
    m_left = check_mask(m_left)
    m_right = check_mask(m_right, shape=m_left.shape)
    value = ((r_t - t) * m_left.astype(np.float64)
             + (t - l_t) * m_right.astype(np.float64)) / (r_t - l_t)
    return (~(value < threshold)).astype(np.uint8)


def fill_holes(mask: np.ndarray) -> np.ndarray:
    """Relabel background regions not 4-connected to the border."""
    mask = check_mask(mask)
    bg = mask == 0
    lab, n = ndimage.label(bg, structure=_FOUR_CONN)
    if n == 0:
        return mask.copy()
    border = np.unique(np.concatenate([
        lab[0, :], lab[-1, :], lab[:, 0], lab[:, -1]]))
    keep = np.zeros(n + 1, dtype=bool)
    keep[border[border > 0]] = True
    out = mask.copy()
    holes = bg & ~keep[lab]
    out[holes] = 1
    return out


def refine_frame(cur_frame, prev_frame, prev_mask, coarse, sizes,
                 max_dy: int, max_dx: int) -> np.ndarray:
    """One full local-refinement step: coarse mask -> final frame mask."""
    energy = propagation_uncertainty(prev_frame, cur_frame)
    uncertain, _certain = partition_certainty(coarse, prev_mask, energy)
    if not uncertain.any():
        return coarse.copy()
    windows = enabled_windows(uncertain, sizes)
    matched = match_windows(cur_frame, coarse, prev_frame, prev_mask,
                            windows, max_dy, max_dx)
    local = vote_local_labels(cur_frame, prev_frame, prev_mask, matched,
                              uncertain, coarse)
    return fuse_masks(coarse, local, uncertain)
