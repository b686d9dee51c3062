"""Per-task rankings with the best-of-five-runs rule."""
from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

TASKS = ("task1", "task2", "task3", "task4")
METRIC_HEADERS = {"task1": "Accuracy", "task2": "N.E.D", "task3": "F-score", "task4": "N.E.D"}
MAX_RUNS = 5


class RunCapExceeded(ValueError):
    pass


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class RunRecord:
    team: str
    task: str
    score: float
    affiliation: str = ""
    run_label: str = ""
    student: bool = False
    # organizer reference runs are listed below the ranking without a rank
    baseline: bool = False


@dataclass(frozen=True)
class LeaderboardEntry:
    rank: Optional[int]
    team: str
    affiliation: str
    best_score: float
    run_label: str = ""
    student: bool = False
    baseline: bool = False

    def to_dict(self) -> dict:
        return {"rank": self.rank, "team": self.team, "affiliation": self.affiliation,
                "score": self.best_score, "score_display": f"{self.best_score:.4f}",
                "run_label": self.run_label, "student": self.student, "baseline": self.baseline}


def best_of_runs(runs: Sequence[RunRecord]) -> RunRecord:
    """Highest-scoring run; the earliest one wins a tie."""
    if not runs:
        raise ValueError("no runs given")
    if len(runs) > MAX_RUNS:
        r = runs[0]
        raise RunCapExceeded(f"{r.team!r} has {len(runs)} runs for {r.task}; at most {MAX_RUNS} are allowed")
    best = runs[0]
    for r in runs[1:]:
        if r.score > best.score:
            best = r
    return best


def build_leaderboard(runs: Iterable[RunRecord]) -> list[LeaderboardEntry]:
    """Rank teams by their best run, highest first.

    Equal scores share a rank and the next rank skips (1, 1, 3). Baseline
    runs follow the ranked rows with ``rank=None``.
    """
    groups: dict[tuple[bool, str], list[RunRecord]] = {}
    tasks = set()
    for r in runs:
        tasks.add(r.task)
        groups.setdefault((r.baseline, r.team), []).append(r)
    if len(tasks) > 1:
        raise ValueError(f"runs mix several tasks: {sorted(tasks)}")

    best = [best_of_runs(g) for g in groups.values()]
    ranked = sorted((r for r in best if not r.baseline), key=lambda r: -r.score)
    entries = []
    prev_score, prev_rank = None, 0
    for pos, r in enumerate(ranked, 1):
        rank = prev_rank if r.score == prev_score else pos
        prev_score, prev_rank = r.score, rank
        entries.append(LeaderboardEntry(rank, r.team, r.affiliation, r.score, r.run_label, r.student))
    for r in sorted((r for r in best if r.baseline), key=lambda r: -r.score):
        entries.append(LeaderboardEntry(None, r.team, r.affiliation, r.score, r.run_label, r.student, True))
    return entries


def _width(s: str) -> int:
    return sum(2 if unicodedata.east_asian_width(c) in "WF" else 1 for c in s)


def _pad(s: str, w: int) -> str:
    return s + " " * (w - _width(s))


def render_table(entries: Sequence[LeaderboardEntry], task: str, top: Optional[int] = None) -> str:
    header = ["Ranking", "Team Name", "Affiliation", METRIC_HEADERS[task]]
    rows = []
    for e in entries:
        if e.baseline:
            rank = "Baseline"
        elif top is not None and e.rank > top:
            continue
        else:
            rank = str(e.rank)
        team = e.team + (" *" if e.student else "")
        rows.append([rank, team, e.affiliation, f"{e.best_score:.4f}"])
    widths = [max(_width(r[i]) for r in [header] + rows) for i in range(4)]
    out = []
    for r in [header] + rows:
        out.append("  ".join(_pad(c, widths[i]) for i, c in enumerate(r[:3])) + "  " + r[3])
    return "\n".join(line.rstrip() for line in out) + "\n"


def load_manifest(path) -> list[RunRecord]:
    """Read a run manifest.

    The document is either a list of runs or ``{"runs": [...]}``. Each run
    has ``team``, ``task`` and either ``score`` or ``report``; a report path
    is resolved relative to the manifest and its ``ranking_score`` is used.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from None
    if isinstance(data, dict):
        data = data.get("runs")
    if not isinstance(data, list):
        raise ManifestError(f"{path}: expected a list of runs or an object with a 'runs' list")
    runs = []
    for i, item in enumerate(data):
        where = f"{path}: runs[{i}]"
        if not isinstance(item, dict):
            raise ManifestError(f"{where}: not an object")
        team = item.get("team")
        task = item.get("task")
        if not isinstance(team, str):
            raise ManifestError(f"{where}: missing 'team'")
        if task not in TASKS:
            raise ManifestError(f"{where}: 'task' must be one of {', '.join(TASKS)}")
        if "score" in item:
            score = item["score"]
        elif "report" in item:
            score = _score_from_report(path.parent / item["report"], task, where)
        else:
            raise ManifestError(f"{where}: needs 'score' or 'report'")
        if isinstance(score, bool) or not isinstance(score, (int, float)) or not 0.0 <= score <= 1.0:
            raise ManifestError(f"{where}: score must be a number in [0, 1]")
        runs.append(RunRecord(team, task, float(score), item.get("affiliation", ""),
                              item.get("run_label", ""), bool(item.get("student", False)),
                              bool(item.get("baseline", False))))
    return runs


def _score_from_report(report_path: Path, task: str, where: str) -> float:
    try:
        rep = json.loads(report_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"{where}: cannot read report {report_path}: {exc}") from None
    if rep.get("task") != task:
        raise ManifestError(f"{where}: report {report_path} is for {rep.get('task')!r}, not {task}")
    return rep["ranking_score"]


def leaderboards(runs: Iterable[RunRecord]) -> dict[str, list[LeaderboardEntry]]:
    by_task: dict[str, list[RunRecord]] = {}
    for r in runs:
        by_task.setdefault(r.task, []).append(r)
    return {t: build_leaderboard(by_task[t]) for t in TASKS if t in by_task}
