"""COCO-style average-precision evaluation: AP per class and IoU threshold,
mAP50 and mAP50-95, PR curves and TP/FP/FN counts.

Matching is greedy in score order (the COCO convention): each prediction
claims the unclaimed ground-truth box of maximal IoU, provided the IoU
reaches the threshold. AP uses 101-point interpolation over the precision
envelope. Everything is deterministic for a given input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .geometry import BBox, Detection, iou_matrix
from .io import GroundTruth, VideoDetections

IOU_THRESHOLDS: tuple[float, ...] = tuple(round(0.50 + 0.05 * i, 2) for i in range(10))


@dataclass
class EvalReport:
    """Evaluation result over one or more (predictions, ground truth) pairs."""

    classes: list[int]
    per_class_ap: dict[tuple[int, float], float]
    map50: float
    map50_95: float
    pr_curves: dict[tuple[int, float], list[tuple[float, float]]]
    counts: dict[float, tuple[int, int, int]]  # threshold -> (TP, FP, FN)

    def class_ap50_95(self, class_id: int) -> float:
        return float(
            np.mean([self.per_class_ap[(class_id, t)] for t in IOU_THRESHOLDS])
        )

    def to_dict(self) -> dict:
        """JSON-friendly mirror of the report."""
        return {
            "classes": self.classes,
            "map50": self.map50,
            "map50_95": self.map50_95,
            "per_class_ap": {
                str(c): {f"{t:.2f}": self.per_class_ap[(c, t)] for t in IOU_THRESHOLDS}
                for c in self.classes
            },
            "counts": {
                f"{t:.2f}": {"tp": tp, "fp": fp, "fn": fn}
                for t, (tp, fp, fn) in self.counts.items()
            },
        }


def match_predictions(
    preds: list[Detection],
    gts: list[BBox],
    iou_thresh: float,
    iou_mat: np.ndarray | None = None,
) -> list[bool]:
    """Label each prediction TP/FP against one frame's same-class gt boxes.

    Predictions are visited by descending score (ties by box x, then y); each
    claims the unclaimed gt box of maximal IoU when that IoU is at least
    iou_thresh (ties on IoU go to the earliest gt). Returns flags parallel to
    the input order; unclaimed gt boxes are the false negatives.

    iou_mat can carry a precomputed preds x gts IoU matrix so sweeping many
    thresholds does not recompute overlaps.
    """
    if iou_mat is None:
        iou_mat = iou_matrix([d.bbox for d in preds], gts)
    order = sorted(
        range(len(preds)), key=lambda i: (-preds[i].score, preds[i].bbox.x, preds[i].bbox.y)
    )
    labels = [False] * len(preds)
    claimed = [False] * len(gts)
    for i in order:
        best_j = -1
        best = 0.0
        for j in range(len(gts)):
            if claimed[j]:
                continue
            v = iou_mat[i, j]
            if v > best:
                best = v
                best_j = j
        if best_j >= 0 and best >= iou_thresh:
            claimed[best_j] = True
            labels[i] = True
    return labels


def average_precision(scored: list[tuple[float, bool]], num_gt: int) -> float:
    """101-point interpolated AP from (score, is_tp) labels.

    The precision envelope (running max from the right) is sampled at recalls
    0.00, 0.01, ..., 1.00 and averaged. With no ground truth the AP is
    defined as 0.
    """
    if num_gt < 0:
        raise ContractError(f"num_gt must be >= 0, got {num_gt}")
    if num_gt == 0 or not scored:
        return 0.0
    ordered = sorted(scored, key=lambda p: -p[0])
    tp = np.cumsum([1.0 if lab else 0.0 for _, lab in ordered])
    n = np.arange(1, len(ordered) + 1)
    recall = tp / num_gt
    precision = tp / n
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    sample_recalls = np.linspace(0.0, 1.0, 101)
    idx = np.searchsorted(recall, sample_recalls, side="left")
    sampled = np.where(idx < len(ordered), envelope[np.minimum(idx, len(ordered) - 1)], 0.0)
    return float(np.mean(sampled))


def evaluate(preds: VideoDetections, gt: GroundTruth) -> EvalReport:
    """Evaluate one prediction stream against its ground truth."""
    return evaluate_streams([(preds, gt)])


def evaluate_streams(
    pairs: list[tuple[VideoDetections, GroundTruth]]
) -> EvalReport:
    """Evaluate prediction/ground-truth pairs, pooling detections across videos.

    Every pair must agree on video_id, frame shape and frame count. Classes
    absent from both predictions and ground truth do not enter the means;
    mAP50-95 averages AP over the 10 thresholds 0.50:0.05:0.95, then over
    classes.
    """
    for v, g in pairs:
        if v.video_id != g.video_id:
            raise ContractError(
                f"video_id mismatch: {v.video_id!r} vs {g.video_id!r}"
            )
        if v.frame_count != g.frame_count:
            raise ContractError(
                f"frame_count mismatch for {v.video_id!r}: "
                f"{v.frame_count} vs {g.frame_count}"
            )
        if v.frame_shape != g.frame_shape:
            raise ContractError(
                f"frame shape mismatch for {v.video_id!r}: "
                f"{v.frame_shape} vs {g.frame_shape}"
            )

    classes = sorted(
        {d.class_id for v, _ in pairs for f in v.frames.values() for d in f}
        | {b.class_id for _, g in pairs for f in g.frames.values() for b in f}
    )

    per_class_ap: dict[tuple[int, float], float] = {}
    pr_curves: dict[tuple[int, float], list[tuple[float, float]]] = {}
    count_acc = {t: [0, 0, 0] for t in IOU_THRESHOLDS}

    for c in classes:
        # cache per-frame detections and IoU matrices once per class
        frame_cache = []
        for v, g in pairs:
            for f in range(v.frame_count):
                preds_f = [d for d in v.frames[f] if d.class_id == c]
                gts_f = [b.bbox for b in g.frames[f] if b.class_id == c]
                if preds_f or gts_f:
                    mat = iou_matrix([d.bbox for d in preds_f], gts_f)
                    frame_cache.append((preds_f, gts_f, mat))

        for t in IOU_THRESHOLDS:
            scored: list[tuple[float, bool]] = []
            num_gt = 0
            for preds_f, gts_f, mat in frame_cache:
                labels = match_predictions(preds_f, gts_f, t, iou_mat=mat)
                scored.extend((d.score, lab) for d, lab in zip(preds_f, labels))
                num_gt += len(gts_f)
            ap = average_precision(scored, num_gt)
            per_class_ap[(c, t)] = ap
            pr_curves[(c, t)] = _pr_points(scored, num_gt)
            tp = sum(1 for _, lab in scored if lab)
            count_acc[t][0] += tp
            count_acc[t][1] += len(scored) - tp
            count_acc[t][2] += num_gt - tp

    if classes:
        map50 = float(np.mean([per_class_ap[(c, 0.5)] for c in classes]))
        map50_95 = float(
            np.mean([per_class_ap[(c, t)] for c in classes for t in IOU_THRESHOLDS])
        )
    else:
        map50 = 0.0
        map50_95 = 0.0

    return EvalReport(
        classes=classes,
        per_class_ap=per_class_ap,
        map50=map50,
        map50_95=map50_95,
        pr_curves=pr_curves,
        counts={t: tuple(acc) for t, acc in count_acc.items()},
    )


def _pr_points(scored: list[tuple[float, bool]], num_gt: int) -> list[tuple[float, float]]:
    """Raw cumulative (recall, precision) points in score order."""
    if num_gt == 0 or not scored:
        return []
    ordered = sorted(scored, key=lambda p: -p[0])
    points = []
    tp = 0
    for k, (_, lab) in enumerate(ordered, start=1):
        if lab:
            tp += 1
        points.append((tp / num_gt, tp / k))
    return points
