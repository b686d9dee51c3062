"""Task 3: one-to-one IoU matching and precision/recall/F with multi-GT selection."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

from ._parallel import ordered_map
from .annotation_io import DetectionSubmission, GroundTruth, GroundTruthVariant, TextInstance
from .geometry import GeometryError, Quad, iou

log = logging.getLogger(__name__)

DEFAULT_THRESHOLDS = (0.5, 0.7)
# variant choice and ranking both use IoU 0.5
SELECT_IOU = 0.5


@dataclass
class MatchResult:
    pairs: list[tuple[int, int, float]] = field(default_factory=list)
    unmatched_detections: list[int] = field(default_factory=list)
    unmatched_gts: list[int] = field(default_factory=list)
    ignored_detections: list[int] = field(default_factory=list)
    ignored_gts: list[int] = field(default_factory=list)

    @property
    def tp(self) -> int:
        return len(self.pairs)

    @property
    def n_det_counted(self) -> int:
        return len(self.pairs) + len(self.unmatched_detections)

    @property
    def n_gt_counted(self) -> int:
        return len(self.pairs) + len(self.unmatched_gts)


def iou_matrix(dets: Sequence[Quad], gts: Sequence[Quad]) -> list[list[float]]:
    """``m[d][g] = iou(dets[d], gts[g])``.

    A self-intersecting detection gets IoU 0 with everything instead of
    aborting the evaluation.
    """
    rows = []
    for d in dets:
        row = []
        dx0, dy0, dx1, dy1 = d.bbox
        for g in gts:
            gx0, gy0, gx1, gy1 = g.bbox
            if dx0 >= gx1 or gx0 >= dx1 or dy0 >= gy1 or gy0 >= dy1:
                row.append(0.0)
                continue
            try:
                row.append(iou(d, g))
            except GeometryError:
                row.append(0.0)
        rows.append(row)
    return rows


def match_ious(ious: Sequence[Sequence[float]], gt_ignore: Sequence[bool], threshold: float) -> MatchResult:
    """Greedy one-to-one matching on a precomputed IoU matrix.

    Each detection claims its best-IoU ground truth if that IoU exceeds
    ``threshold``. A ground truth claimed several times keeps only the
    highest-IoU claimant; the others stay unmatched. Detections kept by an
    ignored ground truth are dropped from the counts. Ties go to the lower
    index.
    """
    n_gt = len(gt_ignore)
    claims: dict[int, tuple[int, float]] = {}
    for d, row in enumerate(ious):
        best_g, best = -1, threshold
        for g in range(n_gt):
            if row[g] > best:
                best_g, best = g, row[g]
        if best_g < 0:
            continue
        held = claims.get(best_g)
        if held is None or best > held[1]:
            claims[best_g] = (d, best)

    res = MatchResult()
    matched_dets = {}
    for g, (d, v) in claims.items():
        matched_dets[d] = (g, v)
    for d in range(len(ious)):
        hit = matched_dets.get(d)
        if hit is None:
            res.unmatched_detections.append(d)
        elif gt_ignore[hit[0]]:
            res.ignored_detections.append(d)
        else:
            res.pairs.append((d, hit[0], hit[1]))
    for g in range(n_gt):
        if gt_ignore[g]:
            res.ignored_gts.append(g)
        elif g not in claims:
            res.unmatched_gts.append(g)
    return res


def match_image(dets: Sequence[Quad], gts: Sequence[TextInstance], threshold: float = SELECT_IOU) -> MatchResult:
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"IoU threshold must be in (0, 1), got {threshold}")
    ious = iou_matrix(dets, [g.quad for g in gts])
    return match_ious(ious, [g.ignore for g in gts], threshold)


def prf(tp: int, n_det: int, n_gt: int) -> tuple[float, float, float]:
    """Precision, recall, F. Empty detection or GT sets count as perfect on that side."""
    p = tp / n_det if n_det else 1.0
    r = tp / n_gt if n_gt else 1.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def _variant_f(m: MatchResult) -> float:
    return prf(m.tp, m.n_det_counted, m.n_gt_counted)[2]


def _select(dets: Sequence[Quad], variants: Sequence[GroundTruthVariant]):
    best = None
    for v, var in enumerate(variants):
        ious = iou_matrix(dets, [g.quad for g in var.instances])
        ignore = [g.ignore for g in var.instances]
        m = match_ious(ious, ignore, SELECT_IOU)
        key = (_variant_f(m), m.tp)
        if best is None or key > best[0]:
            best = (key, v, m, ious, ignore)
    return best[1:]


def select_variant(dets: Sequence[Quad], variants: Sequence[GroundTruthVariant]) -> tuple[int, MatchResult]:
    """Pick the ground-truth variant with the best per-image F at IoU 0.5.

    Ties go to the variant with more true positives, then the lower index.
    """
    if not variants:
        raise ValueError("need at least one ground-truth variant")
    v, m, _, _ = _select(dets, variants)
    return v, m


@dataclass
class ThresholdMetrics:
    precision: float
    recall: float
    f_score: float
    tp: int
    n_det_counted: int
    n_gt_counted: int


@dataclass
class DetectionReport:
    thresholds: tuple[float, ...]
    metrics: dict[float, ThresholdMetrics]
    per_image: list[dict] = field(default_factory=list)

    @property
    def ranking_score(self) -> float:
        return self.metrics[SELECT_IOU].f_score

    def to_dict(self) -> dict:
        d: dict = {"task": "task3"}
        for t in self.thresholds:
            m = self.metrics[t]
            d[f"f_{t:g}"] = m.f_score
            d[f"p_{t:g}"] = m.precision
            d[f"r_{t:g}"] = m.recall
        d["ranking_metric"] = f"f_{SELECT_IOU:g}"
        d["ranking_score"] = self.ranking_score
        d["counts"] = {f"{t:g}": {"tp": self.metrics[t].tp,
                                  "n_det_counted": self.metrics[t].n_det_counted,
                                  "n_gt_counted": self.metrics[t].n_gt_counted}
                       for t in self.thresholds}
        d["per_image"] = self.per_image
        return d


def score_image_task3(item) -> dict:
    """Per-image work unit: ``(image_id, det quads, variants, thresholds)``."""
    image_id, dets, variants, thresholds = item
    v, m05, ious, ignore = _select(dets, variants)
    counts = {}
    for t in thresholds:
        m = m05 if t == SELECT_IOU else match_ious(ious, ignore, t)
        counts[f"{t:g}"] = [m.tp, m.n_det_counted, m.n_gt_counted]
    return {"image_id": image_id, "variant": v, "n_variants": len(variants), "counts": counts}


def normalize_thresholds(thresholds: Sequence[float]) -> tuple[float, ...]:
    ts = set(float(t) for t in thresholds)
    for t in ts:
        if not 0.0 < t < 1.0:
            raise ValueError(f"IoU threshold must be in (0, 1), got {t}")
    ts.add(SELECT_IOU)
    return tuple(sorted(ts))


def eval_task3(gt: GroundTruth, pred: DetectionSubmission,
               thresholds: Sequence[float] = DEFAULT_THRESHOLDS, jobs: int = 1) -> DetectionReport:
    """Corpus precision/recall/F, micro-averaged over images.

    The ground-truth variant of each image is chosen once at IoU 0.5 and
    reused for every threshold.
    """
    if len(gt) == 0:
        raise ValueError("ground truth is empty")
    ths = normalize_thresholds(thresholds)
    extra = [k for k in pred.records if k not in gt]
    if extra:
        log.warning("ignoring predictions for %d unknown image id(s)", len(extra))
    items = [(image_id, tuple(r.quad for r in pred.get(image_id)), variants, ths)
             for image_id, variants in gt.entries.items()]
    per_image = ordered_map(score_image_task3, items, jobs)

    metrics = {}
    for t in ths:
        key = f"{t:g}"
        tp = sum(r["counts"][key][0] for r in per_image)
        nd = sum(r["counts"][key][1] for r in per_image)
        ng = sum(r["counts"][key][2] for r in per_image)
        p, r, f = prf(tp, nd, ng)
        metrics[t] = ThresholdMetrics(p, r, f, tp, nd, ng)
    return DetectionReport(ths, metrics, per_image)
