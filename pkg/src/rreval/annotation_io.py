"""Ground-truth and submission file formats.

Ground truth (tasks 3 and 4) is a UTF-8 JSON list::

    [{"image_id": "img_1",
      "variants": [{"lines": [{"points": [x1, y1, ..., x4, y4],
                               "transcription": "...",
                               "ignore": false}]}]}]

Task 1/2 ground truth and label submissions are ``id<TAB>text`` lines.
Detection submissions are ``id<TAB>x1,y1,...,x4,y4`` with an extra
``<TAB>text`` field for end-to-end runs. The transcript always runs to the
end of the line, so it may contain commas and tabs.
"""
from __future__ import annotations

import bisect
import json
import json.decoder
import json.scanner
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Optional

from .geometry import GeometryError, Quad


@dataclass(frozen=True)
class Diagnostic:
    level: str  # "error" or "warning"
    message: str
    source: str = ""
    line: Optional[int] = None

    def __str__(self) -> str:
        where = self.source
        if self.line is not None:
            where = f"{where}:{self.line}"
        return f"{where}: {self.level}: {self.message}" if where else f"{self.level}: {self.message}"


class ParseError(ValueError):
    """A file could not be loaded. ``diagnostics`` holds every error found."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        first = str(self.diagnostics[0]) if self.diagnostics else "parse error"
        more = len(self.diagnostics) - 1
        super().__init__(first + (f" (and {more} more errors)" if more > 0 else ""))


@dataclass(frozen=True)
class TextInstance:
    quad: Quad
    transcription: str = ""
    ignore: bool = False


@dataclass(frozen=True)
class GroundTruthVariant:
    instances: tuple[TextInstance, ...] = ()


@dataclass(frozen=True)
class GroundTruth:
    """Image id -> one or more equally valid annotations, in file order."""

    entries: Mapping[str, tuple[GroundTruthVariant, ...]]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[str]:
        return iter(self.entries)

    def __getitem__(self, image_id: str) -> tuple[GroundTruthVariant, ...]:
        return self.entries[image_id]

    def __contains__(self, image_id) -> bool:
        return image_id in self.entries


@dataclass(frozen=True)
class LabelSubmission:
    records: Mapping[str, str]

    def __len__(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class DetectionRecord:
    quad: Quad
    transcription: Optional[str] = None


@dataclass(frozen=True)
class DetectionSubmission:
    records: Mapping[str, tuple[DetectionRecord, ...]] = field(default_factory=dict)

    def get(self, image_id: str) -> tuple[DetectionRecord, ...]:
        return self.records.get(image_id, ())

    def __len__(self) -> int:
        return len(self.records)


# -- reading helpers ---------------------------------------------------------

def _read_text(path, diags_source: str) -> str:
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = raw[: exc.start].count(b"\n") + 1
        raise ParseError([Diagnostic("error", f"invalid UTF-8: {exc.reason}", diags_source, line)])
    return text.removeprefix("\ufeff")


def _lines(text: str) -> Iterator[tuple[int, str]]:
    for lineno, line in enumerate(text.split("\n"), 1):
        if line.endswith("\r"):
            line = line[:-1]
        yield lineno, line


def _parse_coords(raw: str) -> list[float]:
    parts = raw.split(",")
    if len(parts) != 8:
        raise ValueError(f"expected 8 coordinates, got {len(parts)}")
    coords = []
    for i, p in enumerate(parts):
        try:
            v = float(p)
        except ValueError:
            raise ValueError(f"coordinate {i + 1} is not a number: {p.strip()!r}") from None
        if not math.isfinite(v):
            raise ValueError(f"coordinate {i + 1} is not finite: {p.strip()!r}")
        coords.append(v)
    return coords


def _load_json_tracking_lines(text: str):
    """json.loads that also returns ``{id(obj): line}`` for every JSON object."""
    newlines = [i for i, ch in enumerate(text) if ch == "\n"]
    lines: dict[int, int] = {}

    decoder = json.JSONDecoder()

    def parse_object(s_and_end, *args, **kwargs):
        start = s_and_end[1]
        obj, end = json.decoder.JSONObject(s_and_end, *args, **kwargs)
        lines[id(obj)] = bisect.bisect_left(newlines, start - 1) + 1
        return obj, end

    decoder.parse_object = parse_object
    decoder.scan_once = json.scanner.py_make_scanner(decoder)
    return decoder.decode(text), lines


def _collinear(q: Quad) -> bool:
    (ax, ay), *rest = q.vertices
    return all((bx - ax) * (cy - ay) == (by - ay) * (cx - ax)
               for (bx, by) in rest for (cx, cy) in rest)


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


# -- ground truth ------------------------------------------------------------

def parse_ground_truth(path, diagnostics: Optional[list[Diagnostic]] = None) -> GroundTruth:
    """Load and validate a multi-variant ground-truth JSON file.

    Every quad must be simple and have non-zero area. Counter-clockwise
    quads are accepted with a warning. All errors are collected and raised
    together as a :class:`ParseError`.
    """
    src = str(path)
    text = _read_text(path, src)
    try:
        data, obj_lines = _load_json_tracking_lines(text)
    except json.JSONDecodeError as exc:
        raise ParseError([Diagnostic("error", f"invalid JSON: {exc.msg}", src, exc.lineno)])

    errors: list[Diagnostic] = []
    warns: list[Diagnostic] = []

    def err(msg, obj=None, line=None):
        errors.append(Diagnostic("error", msg, src, line if line is not None else obj_lines.get(id(obj))))

    if not isinstance(data, list):
        raise ParseError([Diagnostic("error", "top level must be a list of images", src, 1)])

    entries: dict[str, tuple[GroundTruthVariant, ...]] = {}
    for i, image in enumerate(data):
        if not isinstance(image, dict):
            err(f"images[{i}] is not an object", line=None)
            continue
        image_id = image.get("image_id")
        if not isinstance(image_id, str) or not image_id:
            err(f"images[{i}]: missing or non-string 'image_id'", image)
            continue
        if image_id in entries:
            err(f"duplicate image id {image_id!r}", image)
            continue
        variants_raw = image.get("variants")
        if not isinstance(variants_raw, list) or not variants_raw:
            err(f"{image_id}: 'variants' must be a non-empty list", image)
            continue
        variants = []
        for v, var in enumerate(variants_raw):
            ctx = f"{image_id} variant {v}"
            if not isinstance(var, dict) or not isinstance(var.get("lines"), list):
                err(f"{ctx}: expected an object with a 'lines' list", var if isinstance(var, dict) else image)
                continue
            instances = []
            for k, rec in enumerate(var["lines"]):
                lctx = f"{ctx} line {k}"
                if not isinstance(rec, dict):
                    err(f"{lctx}: not an object", var)
                    continue
                pts = rec.get("points")
                if not isinstance(pts, list):
                    err(f"{lctx}: missing 'points'", rec)
                    continue
                if len(pts) != 8:
                    err(f"{lctx}: 'points' needs 8 numbers (4 vertices), got {len(pts)}", rec)
                    continue
                if not all(_is_number(c) and math.isfinite(c) for c in pts):
                    err(f"{lctx}: 'points' contains a non-numeric or non-finite coordinate", rec)
                    continue
                if "transcription" not in rec:
                    err(f"{lctx}: missing 'transcription'", rec)
                    continue
                trans = rec["transcription"]
                if not isinstance(trans, str):
                    err(f"{lctx}: 'transcription' must be a string", rec)
                    continue
                if "\n" in trans or "\r" in trans:
                    err(f"{lctx}: 'transcription' contains a line break", rec)
                    continue
                ignore = rec.get("ignore", False)
                if not isinstance(ignore, bool):
                    err(f"{lctx}: 'ignore' must be true or false", rec)
                    continue
                quad = Quad.from_flat(pts)
                if quad.is_degenerate and _collinear(quad):
                    err(f"{lctx}: degenerate quad (zero area)", rec)
                    continue
                if quad.is_degenerate or not quad.is_simple:
                    err(f"{lctx}: self-intersecting quad", rec)
                    continue
                if not quad.is_clockwise:
                    warns.append(Diagnostic("warning", f"{lctx}: vertices are counter-clockwise",
                                            src, obj_lines.get(id(rec))))
                instances.append(TextInstance(quad, trans, ignore))
            variants.append(GroundTruthVariant(tuple(instances)))
        entries[image_id] = tuple(variants)

    if diagnostics is not None:
        diagnostics.extend(warns)
    if errors:
        raise ParseError(errors)
    return GroundTruth(entries)


def _num(v: float):
    return int(v) if float(v).is_integer() else v


def ground_truth_to_json(gt: GroundTruth) -> list:
    return [
        {"image_id": image_id,
         "variants": [
             {"lines": [{"points": [_num(c) for c in inst.quad.flat()],
                         "transcription": inst.transcription,
                         "ignore": inst.ignore}
                        for inst in var.instances]}
             for var in variants]}
        for image_id, variants in gt.entries.items()
    ]


def dumps_ground_truth(gt: GroundTruth) -> str:
    """JSON text with one annotated text line per physical line."""
    def enc(v):
        return json.dumps(v, ensure_ascii=False)

    images = []
    for image in ground_truth_to_json(gt):
        variants = []
        for var in image["variants"]:
            lines = ",\n".join(f"   {enc(rec)}" for rec in var["lines"])
            variants.append("  {\"lines\": [\n" + lines + "\n  ]}" if lines else "  {\"lines\": []}")
        images.append(f" {{\"image_id\": {enc(image['image_id'])}, \"variants\": [\n"
                      + ",\n".join(variants) + "\n ]}")
    return "[\n" + ",\n".join(images) + "\n]\n"


def write_ground_truth(gt: GroundTruth, path) -> None:
    Path(path).write_text(dumps_ground_truth(gt), encoding="utf-8")


# -- submissions -------------------------------------------------------------

def parse_label_submission(path) -> LabelSubmission:
    """Read ``id<TAB>text`` lines. Also used for task 1/2 ground truth."""
    src = str(path)
    text = _read_text(path, src)
    records: dict[str, str] = {}
    errors: list[Diagnostic] = []
    for lineno, line in _lines(text):
        if not line.strip():
            continue
        if "\t" not in line:
            errors.append(Diagnostic("error", "missing TAB between image id and transcript", src, lineno))
            continue
        image_id, trans = line.split("\t", 1)
        if not image_id:
            errors.append(Diagnostic("error", "empty image id", src, lineno))
        elif image_id in records:
            errors.append(Diagnostic("error", f"duplicate image id {image_id!r}", src, lineno))
        else:
            records[image_id] = trans
    if errors:
        raise ParseError(errors)
    return LabelSubmission(records)


def parse_detection_submission(path, with_transcripts: bool,
                               diagnostics: Optional[list[Diagnostic]] = None) -> DetectionSubmission:
    """Read ``id<TAB>coords[<TAB>text]`` lines, grouped per image in file order.

    Degenerate and counter-clockwise quads are kept. Self-intersecting quads
    are kept too but never match anything; both cases produce warnings.
    """
    src = str(path)
    text = _read_text(path, src)
    records: dict[str, list[DetectionRecord]] = {}
    errors: list[Diagnostic] = []
    warns: list[Diagnostic] = []
    nfields = 3 if with_transcripts else 2
    for lineno, line in _lines(text):
        if not line.strip():
            continue
        fields = line.split("\t", nfields - 1)
        if len(fields) != nfields or (not with_transcripts and "\t" in fields[-1]):
            want = "id, coordinates and transcript" if with_transcripts else "id and coordinates"
            errors.append(Diagnostic("error", f"expected {nfields} TAB-separated fields ({want})",
                                     src, lineno))
            continue
        image_id = fields[0]
        if not image_id:
            errors.append(Diagnostic("error", "empty image id", src, lineno))
            continue
        try:
            quad = Quad.from_flat(_parse_coords(fields[1]))
        except (ValueError, GeometryError) as exc:
            errors.append(Diagnostic("error", str(exc), src, lineno))
            continue
        if quad.is_degenerate and _collinear(quad):
            warns.append(Diagnostic("warning", "degenerate quad (zero area)", src, lineno))
        elif quad.is_degenerate or not quad.is_simple:
            warns.append(Diagnostic("warning", "self-intersecting quad, will not match", src, lineno))
        elif not quad.is_clockwise:
            warns.append(Diagnostic("warning", "vertices are counter-clockwise", src, lineno))
        trans = fields[2] if with_transcripts else None
        records.setdefault(image_id, []).append(DetectionRecord(quad, trans))
    if diagnostics is not None:
        diagnostics.extend(warns)
    if errors:
        raise ParseError(errors)
    return DetectionSubmission({k: tuple(v) for k, v in records.items()})


def _fmt_coord(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def write_label_submission(records: Mapping[str, str], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for image_id, text in records.items():
            fh.write(f"{image_id}\t{text}\n")


def write_detection_submission(sub: DetectionSubmission, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for image_id, recs in sub.records.items():
            for rec in recs:
                coords = ",".join(_fmt_coord(c) for c in rec.quad.flat())
                tail = "" if rec.transcription is None else f"\t{rec.transcription}"
                fh.write(f"{image_id}\t{coords}{tail}\n")


def coverage_diagnostics(gt_ids: Iterable[str], pred_ids: Iterable[str], source: str = "") -> list[Diagnostic]:
    """Warnings for images missing from a submission and for unknown ids."""
    gt_ids = list(gt_ids)
    gt_set = set(gt_ids)
    pred_ids = list(pred_ids)
    pred_set = set(pred_ids)
    out = []
    missing = [i for i in gt_ids if i not in pred_set]
    unknown = [i for i in pred_ids if i not in gt_set]
    if missing:
        out.append(Diagnostic("warning", f"{len(missing)} ground-truth image(s) have no predictions "
                                         f"and score as misses: {', '.join(missing)}", source))
    if unknown:
        out.append(Diagnostic("warning", f"{len(unknown)} prediction image id(s) not in ground truth, "
                                         f"ignored: {', '.join(unknown)}", source))
    return out
