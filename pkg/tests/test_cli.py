import json
import subprocess
import sys
from pathlib import Path

import pytest

from rreval.annotation_io import write_detection_submission, write_ground_truth
from rreval.cli import main, validate

from helpers import synthetic_corpus

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def corpus(tmp_path):
    gt, sub = synthetic_corpus(12, seed=21, boxes_per_image=5, max_variants=2)
    write_ground_truth(gt, tmp_path / "gt.json")
    write_detection_submission(sub, tmp_path / "e2e.tsv")
    with open(tmp_path / "det.tsv", "w", encoding="utf-8") as fh:
        for line in (tmp_path / "e2e.tsv").read_text(encoding="utf-8").splitlines():
            fh.write(line.rsplit("\t", 1)[0] + "\n")
    return tmp_path


def test_task3_fig2_fixtures(tmp_path, capsys):
    for name, variant in (("fig2_split_det.tsv", 1), ("fig2_merged_det.tsv", 0)):
        out = tmp_path / "out.json"
        rc = main(["task3", "--gt", str(FIXTURES / "fig2_gt.json"), "--pred", str(FIXTURES / name),
                   "--report", str(out)])
        assert rc == 0
        assert capsys.readouterr().out.startswith("task3 F@0.5=1.0000 P=1.0000 R=1.0000 F@0.7=1.0000")
        rep = json.loads(out.read_text(encoding="utf-8"))
        assert rep["f_0.5"] == 1.0 and rep["ranking_score"] == 1.0
        assert rep["per_image"][0]["variant"] == variant
        assert rep["version"] and rep["conventions"]["iou_thresholds"] == [0.5, 0.7]


def test_task3_rejects_transcripts(capsys):
    rc = main(["task3", "--gt", str(FIXTURES / "fig2_gt.json"), "--pred", str(FIXTURES / "fig2_split.tsv")])
    assert rc == 2
    assert "fig2_split.tsv:1: error: expected 2 TAB-separated fields" in capsys.readouterr().err


def test_task4_fig2(tmp_path, capsys):
    for name in ("fig2_split.tsv", "fig2_merged.tsv"):
        rc = main(["task4", "--gt", str(FIXTURES / "fig2_gt.json"), "--pred", str(FIXTURES / name)])
        assert rc == 0
        assert capsys.readouterr().out.startswith("task4 1-NED=1.0000")


def test_task1_and_task2(tmp_path, capsys):
    (tmp_path / "gt.txt").write_text("a\t砂\nb\tA\n", encoding="utf-8")
    (tmp_path / "p.txt").write_text("a\t砂\nb\tＡ\n", encoding="utf-8")
    assert main(["task1", "--gt", str(tmp_path / "gt.txt"), "--pred", str(tmp_path / "p.txt"),
                 "--report", str(tmp_path / "r1.json")]) == 0
    assert "accuracy=0.5000 (1/2)" in capsys.readouterr().out
    assert main(["task2", "--gt", str(tmp_path / "gt.txt"), "--pred", str(tmp_path / "p.txt")]) == 0
    assert "1-NED=1.0000" in capsys.readouterr().out
    rep = json.loads((tmp_path / "r1.json").read_text(encoding="utf-8"))
    assert rep["task"] == "task1" and rep["n_total"] == 2 and rep["ranking_score"] == 0.5


def test_report_identical_across_jobs(corpus, monkeypatch):
    for cmd, pred in (("task3", "det.tsv"), ("task4", "e2e.tsv")):
        outs = []
        for jobs in ("1", "3"):
            out = corpus / f"{cmd}_{jobs}.json"
            assert main([cmd, "--gt", str(corpus / "gt.json"), "--pred", str(corpus / pred),
                         "--report", str(out), "--jobs", jobs]) == 0
            outs.append(out.read_bytes())
        monkeypatch.setenv("RRE_JOBS", "2")
        out = corpus / f"{cmd}_env.json"
        assert main([cmd, "--gt", str(corpus / "gt.json"), "--pred", str(corpus / pred), "--report", str(out)]) == 0
        outs.append(out.read_bytes())
        monkeypatch.delenv("RRE_JOBS")
        assert outs[0] == outs[1] == outs[2]


def test_leaderboard_table1(capsys):
    rc = main(["leaderboard", "--manifest", str(FIXTURES / "task1_runs.json"), "--top", "5"])
    assert rc == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "[task1]"
    assert lines[2].startswith("1") and "BASELINE-v1" in lines[2] and lines[2].endswith("0.9737")
    assert lines[-1].startswith("Baseline") and lines[-1].endswith("0.9140")


def test_leaderboard_run_cap(tmp_path, capsys):
    runs = [{"team": "A", "task": "task1", "score": 0.1 * i} for i in range(1, 7)]
    (tmp_path / "m.json").write_text(json.dumps(runs))
    assert main(["leaderboard", "--manifest", str(tmp_path / "m.json")]) == 1
    assert "at most 5" in capsys.readouterr().err


def test_leaderboard_bad_manifest(tmp_path, capsys):
    (tmp_path / "m.json").write_text("{")
    assert main(["leaderboard", "--manifest", str(tmp_path / "m.json")]) == 2
    assert main(["leaderboard", "--manifest", str(tmp_path / "nope.json")]) == 2


def test_leaderboard_closes_the_loop(tmp_path, capsys):
    det = tmp_path / "det.tsv"
    det.write_text("sign_0001\t0,0,500,0,500,100,0,100\n", encoding="utf-8")
    assert main(["task3", "--gt", str(FIXTURES / "fig2_gt.json"), "--pred", str(det),
                 "--report", str(tmp_path / "rep.json")]) == 0
    (tmp_path / "m.json").write_text(json.dumps({"runs": [
        {"team": "Merged", "task": "task3", "report": "rep.json"},
        {"team": "Other", "task": "task3", "score": 0.5}]}))
    capsys.readouterr()
    assert main(["leaderboard", "--manifest", str(tmp_path / "m.json"), "--report", str(tmp_path / "lb.json")]) == 0
    board = json.loads((tmp_path / "lb.json").read_text())["task3"]
    assert [(e["team"], e["rank"], e["score_display"]) for e in board] == [("Merged", 1, "1.0000"),
                                                                         ("Other", 2, "0.5000")]


def test_validate_seven_coordinates(tmp_path, capsys):
    gt = tmp_path / "gt.json"
    gt.write_text('[\n {"image_id": "a", "variants": [\n  {"lines": [\n'
                  '   {"points": [0, 0, 10, 0, 10, 5, 0], "transcription": "x", "ignore": false}\n'
                  '  ]}\n ]}\n]\n', encoding="utf-8")
    assert main(["validate", "--gt", str(gt)]) == 1
    err = capsys.readouterr().err
    assert f"{gt}:4: error:" in err


def test_validate_clean_fixture(capsys):
    assert validate(str(FIXTURES / "fig2_gt.json"), str(FIXTURES / "fig2_split.tsv")) == []
    assert main(["validate", "--gt", str(FIXTURES / "fig2_gt.json"), "--pred", str(FIXTURES / "fig2_split.tsv")]) == 0


def test_validate_warnings_and_strict(tmp_path, capsys):
    pred = tmp_path / "p.tsv"
    pred.write_text("sign_0001\t0,0,0,100,100,100,100,0\nghost\t0,0,10,0,10,5,0,5\n", encoding="utf-8")
    gt = str(FIXTURES / "fig2_gt.json")
    diags = validate(gt, str(pred), "task3")
    assert [d.level for d in diags] == ["warning", "warning"]
    assert "counter-clockwise" in diags[0].message and "ghost" in diags[1].message
    assert main(["validate", "--gt", gt, "--pred", str(pred), "--task", "task3"]) == 0
    assert main(["validate", "--gt", gt, "--pred", str(pred), "--task", "task3", "--strict"]) == 1
    assert main(["task3", "--gt", gt, "--pred", str(pred), "--strict"]) == 1
    assert main(["task3", "--gt", gt, "--pred", str(pred)]) == 0


def test_format_and_io_errors(tmp_path, capsys):
    gt = str(FIXTURES / "fig2_gt.json")
    bad = tmp_path / "bad.tsv"
    bad.write_text("sign_0001\t0,0,1\n", encoding="utf-8")
    assert main(["task3", "--gt", gt, "--pred", str(bad)]) == 2
    assert f"{bad}:1: error" in capsys.readouterr().err
    assert main(["task3", "--gt", gt, "--pred", str(tmp_path / "missing.tsv")]) == 2
    assert main(["validate", "--gt", str(tmp_path / "missing.json")]) == 2
    assert capsys.readouterr().err


def test_bad_thresholds_rejected():
    with pytest.raises(SystemExit):
        main(["task3", "--gt", "g", "--pred", "p", "--iou-thresholds", "1.2"])
    with pytest.raises(SystemExit):
        main(["task3", "--gt", "g", "--pred", "p", "--jobs", "0"])


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "rreval", "leaderboard", "--manifest",
                          str(FIXTURES / "task4_runs.json")], capture_output=True, text=True, encoding="utf-8")
    assert res.returncode == 0
    assert "Tencent-DPPR" in res.stdout.splitlines()[2]
