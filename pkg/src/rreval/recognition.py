"""Task 1 (character accuracy) and task 2 (1 - mean normalized edit distance)."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Union

from .annotation_io import LabelSubmission
from .text_metrics import norm_edit_distance

log = logging.getLogger(__name__)

Labels = Union[LabelSubmission, Mapping[str, str]]


@dataclass
class RecognitionReport:
    task: str
    score: float
    n_total: int
    per_image: list[tuple[str, float]] = field(default_factory=list)
    n_right: int | None = None

    def to_dict(self) -> dict:
        d = {"task": self.task, "score": self.score, "n_total": self.n_total}
        if self.n_right is not None:
            d["n_right"] = self.n_right
        d["per_image"] = [{"image_id": i, "value": v} for i, v in self.per_image]
        return d


def _records(x: Labels) -> Mapping[str, str]:
    return x.records if isinstance(x, LabelSubmission) else x


def _check(gt: Mapping[str, str], pred: Mapping[str, str]) -> None:
    if not gt:
        raise ValueError("ground truth is empty")
    extra = [k for k in pred if k not in gt]
    if extra:
        log.warning("ignoring %d prediction(s) for unknown image ids", len(extra))


def eval_task1(gt: Labels, pred: Labels) -> RecognitionReport:
    """Fraction of images whose label equals the ground truth exactly.

    No width or case folding is applied; a missing prediction is wrong.
    """
    gt, pred = _records(gt), _records(pred)
    _check(gt, pred)
    per_image = []
    n_right = 0
    for image_id, label in gt.items():
        ok = pred.get(image_id) == label
        n_right += ok
        per_image.append((image_id, 1.0 if ok else 0.0))
    return RecognitionReport("task1", n_right / len(gt), len(gt), per_image, n_right=n_right)


def eval_task2(gt: Labels, pred: Labels) -> RecognitionReport:
    gt, pred = _records(gt), _records(pred)
    _check(gt, pred)
    per_image = [(image_id, norm_edit_distance(pred.get(image_id, ""), label))
                 for image_id, label in gt.items()]
    # fsum is exactly rounded, so record order cannot change the score
    total = math.fsum(d for _, d in per_image)
    return RecognitionReport("task2", 1.0 - total / len(gt), len(gt), per_image)
