"""Task 4: detection matching followed by normalized edit distance on the matches."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

from ._parallel import ordered_map
from .annotation_io import DetectionSubmission, GroundTruth, GroundTruthVariant
from .detection import SELECT_IOU, MatchResult, iou_matrix, match_ious
from .text_metrics import norm_edit_distance

log = logging.getLogger(__name__)

# distance charged for a missed ground truth or an unmatched detection
MISS_PENALTY = 1.0


@dataclass
class VariantTerms:
    variant: int
    match: MatchResult
    pair_distances: list[float]

    @property
    def terms(self) -> list[float]:
        m = self.match
        misses = len(m.unmatched_gts) + len(m.unmatched_detections)
        return self.pair_distances + [MISS_PENALTY] * misses

    @property
    def mean_distance(self) -> float:
        t = self.terms
        return math.fsum(t) / len(t) if t else 0.0


def variant_terms(dets, texts: Sequence[str], variant: GroundTruthVariant, index: int = 0) -> VariantTerms:
    gts = variant.instances
    ious = iou_matrix(dets, [g.quad for g in gts])
    m = match_ious(ious, [g.ignore for g in gts], SELECT_IOU)
    dists = [norm_edit_distance(texts[d], gts[g].transcription) for d, g, _ in m.pairs]
    return VariantTerms(index, m, dists)


def select_variant_e2e(dets, texts: Sequence[str], variants: Sequence[GroundTruthVariant]) -> VariantTerms:
    """Variant with the lowest mean term distance; ties prefer more pairs, then lower index."""
    best = None
    for v, var in enumerate(variants):
        vt = variant_terms(dets, texts, var, v)
        key = (vt.mean_distance, -vt.match.tp)
        if best is None or key < best[0]:
            best = (key, vt)
    return best[1]


def score_image_task4(item) -> dict:
    image_id, dets, texts, variants = item
    vt = select_variant_e2e(dets, texts, variants)
    m = vt.match
    return {
        "image_id": image_id,
        "variant": vt.variant,
        "n_variants": len(variants),
        "pairs": [[d, g, dist] for (d, g, _), dist in zip(m.pairs, vt.pair_distances)],
        "unmatched_gts": len(m.unmatched_gts),
        "unmatched_detections": len(m.unmatched_detections),
        "n_terms": len(vt.terms),
        "mean_distance": vt.mean_distance,
    }


@dataclass
class E2EReport:
    score: float
    n_terms: int
    per_image: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"task": "task4", "score": self.score, "ranking_score": self.score,
                "n_terms": self.n_terms, "per_image": self.per_image}


def eval_task4(gt: GroundTruth, pred: DetectionSubmission, jobs: int = 1) -> E2EReport:
    """1 - mean normalized edit distance over matched pairs and misses.

    Matched pairs contribute their distance; every unmatched non-ignored
    ground truth and every unmatched detection contributes 1. A corpus with
    no terms at all scores 1.
    """
    if len(gt) == 0:
        raise ValueError("ground truth is empty")
    extra = [k for k in pred.records if k not in gt]
    if extra:
        log.warning("ignoring predictions for %d unknown image id(s)", len(extra))
    items = []
    for image_id, variants in gt.entries.items():
        recs = pred.get(image_id)
        if any(r.transcription is None for r in recs):
            raise ValueError(f"{image_id}: end-to-end predictions need a transcript")
        items.append((image_id, tuple(r.quad for r in recs), tuple(r.transcription for r in recs), variants))
    per_image = ordered_map(score_image_task4, items, jobs)

    terms = []
    for r in per_image:
        terms.extend(p[2] for p in r["pairs"])
        terms.extend([MISS_PENALTY] * (r["unmatched_gts"] + r["unmatched_detections"]))
    n_terms = len(terms)
    score = 1.0 - math.fsum(terms) / n_terms if n_terms else 1.0
    return E2EReport(score, n_terms, per_image)
