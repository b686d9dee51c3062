from __future__ import annotations

import random

from rreval.annotation_io import (DetectionRecord, DetectionSubmission, GroundTruth, GroundTruthVariant,
                                  TextInstance)
from rreval.geometry import Quad

WORDS = ["砂锅", "炒面", "拌面", "烩肉", "泡馍", "牛肉面", "KFC", "Coffee", "24小时", "便利店"]


def box(x0, y0, x1, y1) -> Quad:
    """Axis-aligned quad, clockwise on screen from the top-left corner."""
    return Quad(((x0, y0), (x1, y0), (x1, y1), (x0, y1)))


def inst(x0, y0, x1, y1, text="", ignore=False) -> TextInstance:
    return TextInstance(box(x0, y0, x1, y1), text, ignore)


def variant(*instances) -> GroundTruthVariant:
    return GroundTruthVariant(tuple(instances))


def single_gt(image_id, *instances) -> GroundTruth:
    return GroundTruth({image_id: (variant(*instances),)})


def dets(image_id, *records) -> DetectionSubmission:
    """``records`` are Quads or (Quad, transcript) pairs."""
    out = []
    for r in records:
        out.append(DetectionRecord(*r) if isinstance(r, tuple) else DetectionRecord(r))
    return DetectionSubmission({image_id: tuple(out)})


def fig2_variants():
    split = [inst(100 * i, 0, 100 * i + 100, 100, w) for i, w in enumerate(WORDS[:5])]
    merged = inst(0, 0, 500, 100, "".join(WORDS[:5]))
    return variant(merged), variant(*split)


def _jitter(rng, b, amount):
    x0, y0, x1, y1 = b
    return (x0 + rng.uniform(-amount, amount), y0 + rng.uniform(-amount, amount),
            x1 + rng.uniform(-amount, amount), y1 + rng.uniform(-amount, amount))


def _mangle(rng, text):
    if rng.random() < 0.6:
        return text
    chars = list(text)
    i = rng.randrange(len(chars))
    chars[i] = rng.choice("错字abc")
    return "".join(chars)


def random_image(rng: random.Random, n_boxes: int, n_variants: int = 1, ignore_rate: float = 0.1,
                 jitter: float = 6.0, miss_rate: float = 0.1, false_alarms: int = 1):
    """One synthetic image: GT variants plus a noisy end-to-end prediction list.

    Variant 0 holds the base boxes; further variants merge neighbouring boxes
    so the variants genuinely disagree.
    """
    base = []
    for k in range(n_boxes):
        x0 = 60 * k + rng.uniform(0, 10)
        y0 = rng.uniform(0, 200)
        base.append(((x0, y0, x0 + rng.uniform(30, 55), y0 + rng.uniform(15, 40)),
                     rng.choice(WORDS), rng.random() < ignore_rate))
    variants = [variant(*(inst(*b, t, ig) for b, t, ig in base))]
    for _ in range(n_variants - 1):
        merged = []
        k = 0
        while k < len(base):
            if k + 1 < len(base) and rng.random() < 0.5:
                (a, ta, ia), (b, tb, ib) = base[k], base[k + 1]
                merged.append(((a[0], min(a[1], b[1]), b[2], max(a[3], b[3])), ta + tb, ia and ib))
                k += 2
            else:
                merged.append(base[k])
                k += 1
        variants.append(variant(*(inst(*b, t, ig) for b, t, ig in merged)))

    source = base if rng.random() < 0.5 or n_variants == 1 else merged
    preds = []
    for b, t, _ in source:
        if rng.random() < miss_rate:
            continue
        preds.append(DetectionRecord(box(*_jitter(rng, b, jitter)), _mangle(rng, t)))
    for _ in range(false_alarms):
        x0, y0 = rng.uniform(0, 600), rng.uniform(0, 250)
        preds.append(DetectionRecord(box(x0, y0, x0 + 20, y0 + 20), rng.choice(WORDS)))
    rng.shuffle(preds)
    return tuple(variants), tuple(preds)


def synthetic_corpus(n_images: int, seed: int = 0, boxes_per_image: int = 10, max_variants: int = 1):
    rng = random.Random(seed)
    entries, records = {}, {}
    for i in range(n_images):
        image_id = f"img_{i:05d}"
        nv = rng.randint(1, max_variants)
        variants, preds = random_image(rng, boxes_per_image, nv)
        entries[image_id] = variants
        records[image_id] = preds
    return GroundTruth(entries), DetectionSubmission(records)
