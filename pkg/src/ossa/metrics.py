"""Six-metric scoring against reference plans, aggregation, and rendering.

Denominators are ground-truth objects (recall-style): unmatched objects
count as wrong on every metric, hallucinated extras are reported but never
scored, and Unknown never equals anything.  Ambiguity accuracy is defined
only where ambiguity exists (expected-uncertain objects); elsewhere it is
undefined and rendered "-".
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Mapping, Sequence

from ossa.catalog import Catalog, load_catalog
from ossa.labels import canonicalize_label
from ossa.oracle import TaskSpec, ground_truth_plan
from ossa.plans import ObjectManipulationPlan
from ossa.scene import Destination, Scene

METRICS = ("StaA", "AmbA", "DesA", "GraA", "PlaA", "ComA")


class EmptyScene(ValueError):
    """Scoring needs at least one ground-truth object."""


class NoRuns(ValueError):
    """Aggregation and rendering need at least one run."""


@dataclass(frozen=True)
class Matching:
    """Deterministic pairing of predictions onto ground-truth objects."""

    pairs: tuple[tuple[int, int], ...]
    unmatched_gt: tuple[int, ...]
    extra_predictions: tuple[int, ...]


def _index_of(label) -> int:
    return label.index if label.index is not None else 0


def match_objects(
    predictions: Sequence[ObjectManipulationPlan], scene: Scene
) -> Matching:
    """Greedy pairing on canonical category stem, index order within a stem."""
    gt_by_stem: dict[str, list[int]] = {}
    gt_labels = [canonicalize_label(a.name) for a in scene.objects]
    for i, label in enumerate(gt_labels):
        gt_by_stem.setdefault(label.stem, []).append(i)
    pred_by_stem: dict[str, list[int]] = {}
    pred_labels = [canonicalize_label(p.name) for p in predictions]
    for j, label in enumerate(pred_labels):
        pred_by_stem.setdefault(label.stem, []).append(j)

    pairs: list[tuple[int, int]] = []
    matched_preds: set[int] = set()
    for stem, gt_indexes in gt_by_stem.items():
        gt_sorted = sorted(
            gt_indexes, key=lambda i: (_index_of(gt_labels[i]), i)
        )
        pred_sorted = sorted(
            pred_by_stem.get(stem, []), key=lambda j: (_index_of(pred_labels[j]), j)
        )
        for gt_index, pred_index in zip(gt_sorted, pred_sorted):
            pairs.append((gt_index, pred_index))
            matched_preds.add(pred_index)
    pairs.sort()
    matched_gt = {i for i, _ in pairs}
    unmatched_gt = tuple(i for i in range(len(scene.objects)) if i not in matched_gt)
    extra = tuple(j for j in range(len(predictions)) if j not in matched_preds)
    return Matching(pairs=tuple(pairs), unmatched_gt=unmatched_gt, extra_predictions=extra)


@dataclass(frozen=True)
class SceneScores:
    scene_id: str
    counts: Mapping[str, tuple[int, int]]
    extra_predictions: int

    def accuracy(self, metric: str) -> float | None:
        numerator, denominator = self.counts[metric]
        if denominator == 0:
            return None
        return numerator / denominator


def score_task(
    predictions: Sequence[ObjectManipulationPlan],
    scene: Scene,
    task: TaskSpec,
    catalog: Catalog | None = None,
) -> SceneScores:
    """Score predictions for one scene under one task."""
    if not scene.objects:
        raise EmptyScene(f"scene '{scene.scene_id}' has no objects")
    catalog = catalog or load_catalog()
    matching = match_objects(predictions, scene)
    pred_for_gt = {i: predictions[j] for i, j in matching.pairs}

    total = len(scene.objects)
    hits = {"StaA": 0, "DesA": 0, "GraA": 0, "PlaA": 0, "ComA": 0}
    amb_total = 0
    amb_hits = 0
    for i, annotation in enumerate(scene.objects):
        expected = ground_truth_plan(annotation, task, catalog)
        if expected.destination is Destination.UNCERTAIN:
            amb_total += 1
        prediction = pred_for_gt.get(i)
        if prediction is None:
            continue
        state_ok = prediction.state == annotation.state
        dest_ok = prediction.destination == expected.destination
        grasp_ok = prediction.grasping_type == expected.grasping_type
        place_ok = prediction.placing_type == expected.placing_type
        hits["StaA"] += state_ok
        hits["DesA"] += dest_ok
        hits["GraA"] += grasp_ok
        hits["PlaA"] += place_ok
        hits["ComA"] += state_ok and dest_ok and grasp_ok and place_ok
        if expected.destination is Destination.UNCERTAIN:
            amb_hits += prediction.destination is Destination.UNCERTAIN
    counts = {
        "StaA": (hits["StaA"], total),
        "AmbA": (amb_hits, amb_total),
        "DesA": (hits["DesA"], total),
        "GraA": (hits["GraA"], total),
        "PlaA": (hits["PlaA"], total),
        "ComA": (hits["ComA"], total),
    }
    return SceneScores(
        scene_id=scene.scene_id,
        counts=counts,
        extra_predictions=len(matching.extra_predictions),
    )


def overall_scores(scene_scores: Sequence[SceneScores]) -> dict[str, float | None]:
    """Object-weighted dataset accuracy per metric (None when undefined)."""
    out: dict[str, float | None] = {}
    for metric in METRICS:
        numerator = sum(s.counts[metric][0] for s in scene_scores)
        denominator = sum(s.counts[metric][1] for s in scene_scores)
        out[metric] = None if denominator == 0 else numerator / denominator
    return out


def aggregate_runs(scores: Sequence[float]) -> tuple[float, float | None]:
    """Mean and sample (n-1) standard deviation; std is None for one run."""
    if not scores:
        raise NoRuns("no run scores to aggregate")
    mean = statistics.fmean(scores)
    std = statistics.stdev(scores) if len(scores) >= 2 else None
    return mean, std


@dataclass(frozen=True)
class ReportRow:
    task_id: str
    method: str
    mode: str
    metrics: Mapping[str, tuple[float, float | None, int] | None]


@dataclass(frozen=True)
class MetricsReport:
    rows: tuple[ReportRow, ...]
    provenance: Mapping[str, object]


def format_cell(value: tuple[float, float | None, int] | None) -> str:
    if value is None:
        return "-"
    mean, std, _runs = value
    if std is None:
        return f"{mean * 100:.2f}"
    return f"{mean * 100:.2f}±{std * 100:.2f}"


def render_report(report: MetricsReport, fmt: str = "plain") -> str:
    """Render the task x method table; byte-stable for equal input."""
    if not report.rows:
        raise NoRuns("report has no rows")
    header = ["Task", "Method", "Mode", *METRICS]
    rows = [
        [row.task_id, row.method, row.mode]
        + [format_cell(row.metrics.get(metric)) for metric in METRICS]
        for row in report.rows
    ]
    if fmt == "csv":
        lines = [",".join(header)] + [",".join(r) for r in rows]
        return "\n".join(lines) + "\n"
    if fmt == "markdown":
        lines = [
            "| " + " | ".join(header) + " |",
            "| " + " | ".join("---" for _ in header) + " |",
        ]
        lines += ["| " + " | ".join(r) + " |" for r in rows]
        return "\n".join(lines) + "\n"
    if fmt == "plain":
        widths = [
            max(len(header[c]), *(len(r[c]) for r in rows)) for c in range(len(header))
        ]
        lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
        lines += ["  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in rows]
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")
