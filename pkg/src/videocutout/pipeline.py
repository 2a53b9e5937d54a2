"""End-to-end orchestration: recommend annotation frames, propagate
annotations forward/backward with the global+local models, merge the two
passes, and evaluate against ground truth.

Each direction walks frame by frame from its nearest annotation: the
static pyramid score and the geodesic score of the previous frame's mask
combine into a coarse mask, which local window classification refines on
the uncertain pixels. Frames between two annotations merge both passes
by temporal distance; hole filling runs last. Annotated frames always
keep their annotation.
"""
from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from .base import ParamsMixin, check_fitted
from .config import RunConfig
from .confidence import (
    build_interframe_graph,
    build_pyramid_model,
    coarse_mask,
    combine_confidence,
    dynamic_confidence,
    rasterize_confidence,
    static_confidence,
)
from .data import AnnotationSet, Mask, VideoSequence
from .frameselect import frame_descriptor, propagation_error_matrix, select_frames
from .metrics import EvalReport, VideoResult, contour_accuracy, jumpcut_error, region_similarity
from .refine import fill_holes, merge_bidirectional, refine_frame
from .superpixel import slic_segment, superpixel_labels

log = logging.getLogger(__name__)


class CutoutSession:
    """State of one cutout run: sequence, config, annotations, results.

    Per-frame superpixel maps and descriptors are computed once and
    cached; forward/backward masks and the merged finals are kept per
    frame (1-based indices).
    """

    def __init__(self, sequence: VideoSequence, config: RunConfig | None = None,
                 annotations: AnnotationSet | None = None, dumps: dict | None = None):
        self.sequence = sequence
        self.config = (config or RunConfig()).validate()
        self.annotations = annotations.check_against(sequence) if annotations else None
        self.dumps = dumps or {}
        self.masks_left: dict = {}
        self.masks_right: dict = {}
        self.masks_final: dict = {}
        self.status = {t: "pending" for t in range(1, sequence.n_frames + 1)}
        self.error_matrix_ = None
        self._spmaps: dict = {}
        self._descriptors: dict = {}
        self._static: dict = {}
        self._model = None

    # -- cached per-frame derived data ------------------------------------

    def superpixels(self, t: int):
        if t not in self._spmaps:
            frame = self.sequence.frame(t)
            target = self.config.superpixel_target(self.sequence.width, self.sequence.height)
            self._spmaps[t] = slic_segment(frame, target, self.config.slic_compactness,
                                           self.config.slic_iterations)
            if "superpixels" in self.dumps:
                from .io import save_id_map
                save_id_map(self._spmaps[t].ids,
                            Path(self.dumps["superpixels"]) / f"{t:05d}.png")
        return self._spmaps[t]

    def descriptor(self, t: int):
        if t not in self._descriptors:
            self._descriptors[t] = frame_descriptor(
                self.sequence.frame(t), self.config.pyramid_levels,
                self.config.bins_per_channel)
        return self._descriptors[t]

    def _static_confidence(self, t: int):
        if t not in self._static:
            self._static[t] = static_confidence(self._model, self.superpixels(t))
        return self._static[t]

    # -- frame recommendation ---------------------------------------------

    def recommend(self, k: int | None = None) -> list:
        k = k or self.config.annotation_budget
        if not 1 <= k <= self.sequence.n_frames:
            raise ValueError(f"k must be in 1..{self.sequence.n_frames}")
        if self.error_matrix_ is None:
            maps = [self.superpixels(t) for t in range(1, self.sequence.n_frames + 1)]
            descriptors = [self.descriptor(t) for t in range(1, self.sequence.n_frames + 1)]
            radius = self.config.match_radius(self.sequence.width, self.sequence.height)
            self.error_matrix_ = propagation_error_matrix(maps, descriptors, radius)
        return select_frames(self.error_matrix_, k)

    # -- propagation -------------------------------------------------------

    def set_annotations(self, annotations: AnnotationSet) -> None:
        self.annotations = annotations.check_against(self.sequence)
        self._model = None

    def propagate(self, forward_only: bool = False, progress_cb=None) -> list:
        """Run both passes and merge. Returns Masks for covered frames."""
        if self.annotations is None or self.annotations.count == 0:
            raise ValueError("propagation needs at least one annotation")
        ann = self.annotations
        n = self.sequence.n_frames
        first, last = ann.frame_indices[0], ann.frame_indices[-1]
        annotated = {idx: m.labels for idx, m in ann.entries}
        self._model = build_pyramid_model(
            [self.sequence.frame(i) for i in ann.frame_indices],
            [annotated[i] for i in ann.frame_indices],
            self.config.pyramid_levels, self.config.bins_per_channel)
        self._static.clear()  # scores depend on the model just rebuilt
        self.masks_left.clear()
        self.masks_right.clear()
        self.masks_final.clear()

        steps_total = (n - first) + (0 if forward_only else last - 1)
        done = 0

        def tick(t, phase):
            nonlocal done
            done += 1
            if progress_cb:
                progress_cb(done, max(1, steps_total), t, phase)

        failures = []
        try:
            prev = annotated[first]
            self.masks_left[first] = prev
            for t in range(first + 1, n + 1):
                if t in annotated:
                    self.masks_left[t] = prev = annotated[t]
                else:
                    self.masks_left[t] = prev = self._step(t, t - 1, prev)
                tick(t, "forward")
        except Exception as exc:  # a direction aborts alone, with a diagnostic
            failures.append(("forward", exc))
            log.warning("forward pass aborted at a frame: %s", exc)

        if not forward_only:
            try:
                prev = annotated[last]
                self.masks_right[last] = prev
                for t in range(last - 1, 0, -1):
                    if t in annotated:
                        self.masks_right[t] = prev = annotated[t]
                    else:
                        self.masks_right[t] = prev = self._step(t, t + 1, prev)
                    tick(t, "backward")
            except Exception as exc:
                failures.append(("backward", exc))
                log.warning("backward pass aborted at a frame: %s", exc)

        if len(failures) == (1 if forward_only else 2):
            raise failures[0][1]

        indices = ann.frame_indices
        for t in range(1, n + 1):
            if t in annotated:
                self.masks_final[t] = annotated[t]
                self.status[t] = "done"
                continue
            left = max((c for c in indices if c < t), default=None)
            right = min((c for c in indices if c > t), default=None)
            has_l = t in self.masks_left
            has_r = t in self.masks_right
            if has_l and has_r:
                merged = merge_bidirectional(self.masks_left[t], self.masks_right[t],
                                             left, right, t, self.config.merge_threshold)
            elif has_l:
                merged = self.masks_left[t]
            elif has_r:
                merged = self.masks_right[t]
            else:
                continue  # uncovered (e.g. forward-only before the first annotation)
            self.masks_final[t] = fill_holes(merged)
            self.status[t] = "done"
        return [Mask(self.masks_final[t], t) for t in sorted(self.masks_final)]

    def _step(self, t: int, src_t: int, prev_mask: np.ndarray) -> np.ndarray:
        """Propagate one frame: coarse global mask + local refinement."""
        cur_map = self.superpixels(t)
        prev_map = self.superpixels(src_t)
        graph = build_interframe_graph(prev_map, cur_map)
        prev_labels = superpixel_labels(prev_map, prev_mask)
        g = combine_confidence(self._static_confidence(t),
                               dynamic_confidence(graph, prev_labels))
        conf_image = rasterize_confidence(cur_map, g)
        coarse = coarse_mask(conf_image)
        if "confidence" in self.dumps:
            from .io import save_grayscale
            save_grayscale(conf_image, Path(self.dumps["confidence"]) / f"{t:05d}.png")
        cur_frame = self.sequence.frame(t)
        prev_frame = self.sequence.frame(src_t)
        if "uncertainty" in self.dumps:
            from .io import save_grayscale
            from .refine import partition_certainty, propagation_uncertainty
            energy = propagation_uncertainty(prev_frame, cur_frame)
            uncertain, _ = partition_certainty(coarse, prev_mask, energy)
            peak = energy.max()
            save_grayscale(energy / peak if peak > 0 else energy,
                           Path(self.dumps["uncertainty"]) / f"{t:05d}.png")
            overlay = cur_frame.copy()
            overlay[uncertain] = (overlay[uncertain] // 2) + np.array([127, 0, 0], np.uint8)
            from PIL import Image
            Path(self.dumps["uncertainty"]).mkdir(parents=True, exist_ok=True)
            Image.fromarray(overlay).save(
                Path(self.dumps["uncertainty"]) / f"{t:05d}_set.png")
        max_dy, max_dx = self.config.search_offsets(self.sequence.height, self.sequence.width)
        return refine_frame(cur_frame, prev_frame, prev_mask, coarse,
                            self.config.window_sizes, max_dy, max_dx)


# --------------------------------------------------------------------------
# module-level operations
# --------------------------------------------------------------------------

def recommend(sequence: VideoSequence, k: int, config: RunConfig | None = None) -> list:
    """Frames whose annotation minimizes the predicted propagation error."""
    return CutoutSession(sequence, config).recommend(k)


def propagate(sequence: VideoSequence, annotations: AnnotationSet,
              config: RunConfig | None = None, forward_only: bool = False,
              progress_cb=None, dumps: dict | None = None) -> list:
    """Propagate annotations over the whole sequence; returns Masks."""
    session = CutoutSession(sequence, config, annotations, dumps)
    return session.propagate(forward_only=forward_only, progress_cb=progress_cb)


def _default_propagator(sequence, annotations, config, forward_only):
    masks = propagate(sequence, annotations, config, forward_only=forward_only)
    return {m.frame_index: m.labels for m in masks}


def benchmark(dataset_root, protocol: str, config: RunConfig | None = None,
              propagator=None) -> EvalReport:
    """Evaluate mask propagation over a dataset directory.

    ``davis`` protocol: annotate the first frame, propagate forward, score
    J and F on the remaining frames. ``jumpcut`` protocol: transfer the
    ground-truth mask from anchor frames t = 0, 16, ... 96 over distances
    d in {1, 4, 8, 16} and report the error rate at t+d.
    """
    from .io import load_dataset_sequence

    config = (config or RunConfig()).validate()
    propagator = propagator or _default_propagator
    root = Path(dataset_root)
    if not root.is_dir():
        raise FileNotFoundError(f"missing dataset root: {root}")
    seq_dirs = sorted(p for p in root.iterdir() if (p / "frames").is_dir())
    if not seq_dirs:
        raise FileNotFoundError(f"no sequence directories under {root}")
    report = EvalReport(protocol=protocol)
    for seq_dir in seq_dirs:
        sequence, gt = load_dataset_sequence(seq_dir)
        if not gt:
            raise FileNotFoundError(f"{seq_dir.name}: ground-truth masks required")
        result = VideoResult(name=seq_dir.name)
        if protocol == "davis":
            ann = AnnotationSet(((1, gt[1]),))
            masks = propagator(sequence, ann, config, True)
            for t in range(2, sequence.n_frames + 1):
                if t not in gt or t not in masks:
                    continue
                result.frame_indices.append(t)
                result.j_scores.append(region_similarity(masks[t], gt[t].labels))
                result.f_scores.append(contour_accuracy(
                    masks[t], gt[t].labels,
                    config.contour_tolerance_px(sequence.width, sequence.height)))
        elif protocol == "jumpcut":
            n = min(sequence.n_frames, 128)
            for d in (1, 4, 8, 16):
                rates = []
                for t0 in range(1, min(98, n) + 1, 16):
                    target = t0 + d
                    if target > n or t0 not in gt or target not in gt:
                        continue
                    sub = VideoSequence(tuple(sequence.frames[t0 - 1:target]))
                    ann = AnnotationSet(((1, Mask(gt[t0].labels, 1)),))
                    masks = propagator(sub, ann, config, True)
                    local_target = target - t0 + 1
                    if local_target in masks:
                        rates.append(jumpcut_error(masks[local_target], gt[target].labels))
                if rates:
                    result.error_rates[d] = float(np.mean(rates))
        else:
            raise ValueError(f"unknown protocol {protocol!r}")
        report.videos.append(result)
    return report


class SelectiveVideoCutout(ParamsMixin):
    """Estimator facade over the full pipeline.

    fit() ingests a sequence plus its annotations and runs propagation;
    predict() returns the per-frame masks.
    """

    def __init__(self, config: RunConfig | None = None, forward_only: bool = False):
        self.config = config
        self.forward_only = forward_only

    def fit(self, sequence: VideoSequence, annotations: AnnotationSet):
        self.session_ = CutoutSession(sequence, self.config, annotations)
        self.masks_ = self.session_.propagate(forward_only=self.forward_only)
        return self

    def predict(self) -> list:
        check_fitted(self, "masks_")
        return self.masks_

    def recommend(self, sequence: VideoSequence, k: int) -> list:
        return recommend(sequence, k, self.config)
