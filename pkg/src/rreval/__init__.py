"""Evaluation toolkit for Chinese scene-text reading benchmarks.

Four tasks are scored: character recognition, text line recognition, text
line detection and end-to-end recognition.
"""

__version__ = "0.1.0"

from .geometry import GeometryError, Point, Quad, intersection_area, iou, quad_area
from .text_metrics import levenshtein, norm_edit_distance, normalize
from .annotation_io import (DetectionRecord, DetectionSubmission, GroundTruth, GroundTruthVariant,
                            LabelSubmission, ParseError, TextInstance, parse_detection_submission,
                            parse_ground_truth, parse_label_submission)
from .recognition import RecognitionReport, eval_task1, eval_task2
from .detection import DetectionReport, MatchResult, eval_task3, match_image, select_variant
from .e2e import E2EReport, eval_task4
from .leaderboard import RunRecord, LeaderboardEntry, best_of_runs, build_leaderboard
