"""Command-line front end.

Exit status: 0 on success, 1 when validation fails (or warnings under
``--strict``), 2 for unreadable or malformed input.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional

from . import __version__
from .annotation_io import (Diagnostic, ParseError, coverage_diagnostics, parse_detection_submission,
                            parse_ground_truth, parse_label_submission)
from .detection import DEFAULT_THRESHOLDS, SELECT_IOU, eval_task3, normalize_thresholds
from .e2e import MISS_PENALTY, eval_task4
from .leaderboard import ManifestError, RunCapExceeded, leaderboards, load_manifest, render_table
from .recognition import eval_task1, eval_task2

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2

_MATCHING = ("each detection claims its max-IoU ground truth when IoU > threshold; "
             "a ground truth claimed twice keeps the higher-IoU detection; ties to lower index")

CONVENTIONS = {
    "task1": {"folding": "none (exact code-point equality)",
              "missing_prediction": "counted wrong"},
    "task2": {"folding": "U+FF01..U+FF5E and U+3000 to half width, A-Z to a-z",
              "distance": "levenshtein / max(len(pred), len(gt)); 0 when both empty",
              "missing_prediction": "empty string"},
    "task3": {"matching": _MATCHING,
              "ignored": "detections kept by an ignored ground truth and all ignored ground truths are excluded",
              "variant_selection": f"max per-image F at IoU {SELECT_IOU:g}, then more tp, then lower index; "
                                   "reused at every threshold",
              "zero_division": "P=1 with no counted detections, R=1 with no counted ground truth, F=0 if P+R=0",
              "averaging": "micro over the corpus"},
    "task4": {"matching": _MATCHING,
              "iou_threshold": SELECT_IOU,
              "miss_penalty": MISS_PENALTY,
              "terms": "one per matched pair (its normalized edit distance), one per unmatched "
                       "non-ignored ground truth and one per unmatched detection",
              "variant_selection": "min mean term distance, then more pairs, then lower index",
              "empty_corpus": "score 1 when there are no terms"},
}


class _Failure(Exception):
    def __init__(self, code: int, message: str = ""):
        super().__init__(message)
        self.code = code


def _default_jobs() -> int:
    raw = os.environ.get("RRE_JOBS")
    if not raw:
        return 1
    try:
        return int(raw)
    except ValueError:
        raise _Failure(EXIT_INVALID, f"RRE_JOBS must be an integer, got {raw!r}")


def _emit(diags: list[Diagnostic]) -> None:
    for d in diags:
        print(d, file=sys.stderr)


def _gate(diags: list[Diagnostic], strict: bool) -> None:
    _emit(diags)
    if strict and diags:
        raise _Failure(EXIT_INVALID, f"{len(diags)} warning(s) in strict mode")


def _write_report(report: dict, path: Optional[str]) -> None:
    if path:
        Path(path).write_text(json.dumps(report, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")


def _wrap(task: str, body: dict, args, extra_conventions: Optional[dict] = None) -> dict:
    conv = dict(CONVENTIONS[task])
    if extra_conventions:
        conv.update(extra_conventions)
    return {"toolkit": "rreval", "version": __version__, "gt": args.gt, "pred": args.pred,
            "conventions": conv, **body}


def _cmd_recognition(args) -> int:
    gt = parse_label_submission(args.gt)
    pred = parse_label_submission(args.pred)
    _gate(coverage_diagnostics(gt.records, pred.records, args.pred), args.strict)
    if args.command == "task1":
        rep = eval_task1(gt, pred)
        summary = f"task1 accuracy={rep.score:.4f} ({rep.n_right}/{rep.n_total})"
    else:
        rep = eval_task2(gt, pred)
        summary = f"task2 1-NED={rep.score:.4f} (N={rep.n_total})"
    body = rep.to_dict()
    body["ranking_score"] = rep.score
    _write_report(_wrap(args.command, body, args), args.report)
    print(summary)
    return EXIT_OK


def _cmd_detection(args) -> int:
    e2e = args.command == "task4"
    diags: list[Diagnostic] = []
    gt = parse_ground_truth(args.gt, diags)
    pred = parse_detection_submission(args.pred, with_transcripts=e2e, diagnostics=diags)
    diags += coverage_diagnostics(gt.entries, pred.records, args.pred)
    _gate(diags, args.strict)
    if e2e:
        rep = eval_task4(gt, pred, jobs=args.jobs)
        report = _wrap("task4", rep.to_dict(), args)
        summary = f"task4 1-NED={rep.score:.4f} (terms={rep.n_terms})"
    else:
        rep = eval_task3(gt, pred, thresholds=args.iou_thresholds, jobs=args.jobs)
        report = _wrap("task3", rep.to_dict(), args, {"iou_thresholds": list(rep.thresholds)})
        parts = [f"F@{t:g}={m.f_score:.4f} P={m.precision:.4f} R={m.recall:.4f}"
                 for t, m in rep.metrics.items()]
        summary = "task3 " + " ".join(parts)
    _write_report(report, args.report)
    print(summary)
    return EXIT_OK


def _cmd_leaderboard(args) -> int:
    try:
        runs = load_manifest(args.manifest)
    except ManifestError as exc:
        raise _Failure(EXIT_IO, str(exc))
    if args.task:
        runs = [r for r in runs if r.task == args.task]
    try:
        boards = leaderboards(runs)
    except RunCapExceeded as exc:
        raise _Failure(EXIT_INVALID, str(exc))
    if not boards:
        raise _Failure(EXIT_INVALID, "no runs to rank")
    blocks = []
    for task, entries in boards.items():
        blocks.append(f"[{task}]\n" + render_table(entries, task, args.top))
    sys.stdout.write("\n".join(blocks))
    _write_report({task: [e.to_dict() for e in entries
                          if args.top is None or e.baseline or e.rank <= args.top]
                   for task, entries in boards.items()}, args.report)
    return EXIT_OK


def _guess_e2e(pred_path: str) -> bool:
    with open(pred_path, encoding="utf-8", errors="replace") as fh:
        for line in fh:
            if line.strip():
                return line.count("\t") >= 2
    return False


def validate(gt_path: str, pred_path: Optional[str] = None, task: Optional[str] = None) -> list[Diagnostic]:
    """Run every parse-time check without scoring and return all diagnostics."""
    diags: list[Diagnostic] = []
    if task is None:
        if not gt_path.lower().endswith(".json"):
            task = "task2"
        elif pred_path is not None and _guess_e2e(pred_path):
            task = "task4"
        else:
            task = "task3"
    try:
        if task in ("task1", "task2"):
            gt_ids = parse_label_submission(gt_path).records
        else:
            gt_ids = parse_ground_truth(gt_path, diags).entries
    except ParseError as exc:
        return diags + exc.diagnostics
    if pred_path is None:
        return diags
    try:
        if task in ("task1", "task2"):
            pred_ids = parse_label_submission(pred_path).records
        else:
            pred_ids = parse_detection_submission(pred_path, task == "task4", diags).records
    except ParseError as exc:
        return diags + exc.diagnostics
    return diags + coverage_diagnostics(gt_ids, pred_ids, pred_path)


def _cmd_validate(args) -> int:
    diags = validate(args.gt, args.pred, args.task)
    _emit(diags)
    n_err = sum(d.level == "error" for d in diags)
    n_warn = len(diags) - n_err
    print(f"validate: {n_err} error(s), {n_warn} warning(s)")
    if n_err or (args.strict and n_warn):
        return EXIT_INVALID
    return EXIT_OK


def _threshold(raw: str) -> float:
    v = float(raw)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"threshold must be in (0, 1), got {raw}")
    return v


def _jobs(raw: str) -> int:
    v = int(raw)
    if v < 1:
        raise argparse.ArgumentTypeError("jobs must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rreval", description="Score scene-text reading submissions.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, pred_required=True):
        p.add_argument("--gt", required=True, help="ground-truth file")
        p.add_argument("--pred", required=pred_required, help="submission file")
        p.add_argument("--strict", action="store_true", help="treat warnings as errors")

    for name, help_ in (("task1", "character recognition accuracy"),
                        ("task2", "text line recognition, 1 - mean NED")):
        p = sub.add_parser(name, help=help_)
        common(p)
        p.add_argument("--report", help="write the JSON report here")
    for name, help_ in (("task3", "text line detection P/R/F"),
                        ("task4", "end-to-end recognition, 1 - mean NED")):
        p = sub.add_parser(name, help=help_)
        common(p)
        p.add_argument("--report", help="write the JSON report here")
        p.add_argument("--jobs", type=_jobs, default=None,
                       help="worker processes (default: $RRE_JOBS or 1)")
        if name == "task3":
            p.add_argument("--iou-thresholds", type=_threshold, nargs="+", default=list(DEFAULT_THRESHOLDS),
                           help="IoU thresholds; 0.5 is always included for ranking")

    p = sub.add_parser("leaderboard", help="rank runs from a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--task", choices=["task1", "task2", "task3", "task4"])
    p.add_argument("--top", type=int, default=None, help="show only ranks up to this value")
    p.add_argument("--report", help="write the rankings as JSON here")

    p = sub.add_parser("validate", help="check files without scoring")
    common(p, pred_required=False)
    p.add_argument("--task", choices=["task1", "task2", "task3", "task4"],
                   help="file formats to expect (guessed from the files if omitted)")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    # coverage problems are reported as diagnostics below
    logging.getLogger("rreval").setLevel(logging.ERROR)
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "jobs", 1) is None:
            args.jobs = _default_jobs()
            if args.jobs < 1:
                raise _Failure(EXIT_INVALID, "RRE_JOBS must be >= 1")
        if args.command in ("task1", "task2"):
            return _cmd_recognition(args)
        if args.command in ("task3", "task4"):
            if args.command == "task3":
                args.iou_thresholds = list(normalize_thresholds(args.iou_thresholds))
            return _cmd_detection(args)
        if args.command == "leaderboard":
            return _cmd_leaderboard(args)
        return _cmd_validate(args)
    except _Failure as exc:
        if str(exc):
            print(f"rreval: {exc}", file=sys.stderr)
        return exc.code
    except ParseError as exc:
        _emit(exc.diagnostics)
        return EXIT_IO
    except (OSError, ValueError) as exc:
        print(f"rreval: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
