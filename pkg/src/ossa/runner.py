"""Evaluation runs: execute runs x tasks x backend over a dataset.

Every run directory is self-describing: a manifest with the full
configuration (seeds, backend descriptor, prompt hash), per-scene scores,
and the rendered tables in all three formats.  Deterministic backends
reproduce the directory byte-for-byte.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from ossa.backends import (
    LOCAL_BACKENDS,
    REMOTE_BACKENDS,
    PlanBackend,
    SceneInput,
    make_backend,
    plan_with_backend,
)
from ossa.captions import CaptionErrorModel
from ossa.catalog import Catalog, load_catalog
from ossa.chat_client import ChatModelClient
from ossa.dataset_io import load_dataset
from ossa.generate import GenConfig, generate_dataset
from ossa.metrics import (
    METRICS,
    MetricsReport,
    ReportRow,
    SceneScores,
    aggregate_runs,
    overall_scores,
    render_report,
    score_task,
)
from ossa.oracle import TaskSpec
from ossa.prompts import PlanScope, PromptMode, PromptSpec, build_prompt, default_exemplars
from ossa.scene import Dataset

ALL_TASKS = ("T1", "T2", "T3")


@dataclass(frozen=True)
class RunConfig:
    backend_id: str = "oracle"
    tasks: tuple[str, ...] = ALL_TASKS
    mode: PromptMode = PromptMode.ZERO_SHOT
    scope: PlanScope = PlanScope.FULL
    runs: int = 1
    seed: int = 42
    dataset_path: str | None = None
    gen: GenConfig | None = None
    out_dir: str | None = None
    base_url: str | None = None
    model: str = "gpt-4o"
    temperature: float = 0.0
    p_state_omit: float = 0.0
    p_object_miss: float = 0.0
    concurrency: int = 4
    max_attempts: int = 3

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.backend_id not in LOCAL_BACKENDS | REMOTE_BACKENDS:
            raise ValueError(f"unknown backend '{self.backend_id}'")
        if self.backend_id in REMOTE_BACKENDS and not self.base_url:
            raise ValueError(f"backend '{self.backend_id}' requires --base-url")
        bad = [t for t in self.tasks if t not in ALL_TASKS]
        if bad:
            raise ValueError(f"unknown tasks: {bad}")


def resolve_dataset(config: RunConfig, catalog: Catalog | None = None) -> Dataset:
    if config.dataset_path is not None:
        return load_dataset(config.dataset_path)
    gen = config.gen or GenConfig(seed=config.seed)
    return generate_dataset(gen, catalog or load_catalog())


def prompt_fingerprint(config: RunConfig, catalog: Catalog | None = None) -> str:
    """Hash of every prompt this configuration can issue."""
    if config.backend_id not in REMOTE_BACKENDS:
        return hashlib.sha256(config.backend_id.encode()).hexdigest()
    catalog = catalog or load_catalog()
    exemplars = default_exemplars() if config.mode is PromptMode.FEW_SHOT else ()
    digest = hashlib.sha256()
    input_kind = "caption" if config.backend_id == "modular-remote" else "scene"
    for task_id in config.tasks:
        spec = PromptSpec(
            task=TaskSpec.of(task_id),
            mode=config.mode,
            exemplars=exemplars,
            scope=config.scope,
        )
        text, _ = build_prompt(spec, input_kind, catalog)
        digest.update(text.encode("utf-8"))
    return digest.hexdigest()


def _build_backend(config: RunConfig, run_index: int, catalog: Catalog) -> PlanBackend:
    error_model = None
    client = None
    if config.backend_id == "modular-sim":
        # Per-run caption seed so multi-run std reflects caption noise.
        error_model = CaptionErrorModel(
            p_state_omit=config.p_state_omit,
            p_object_miss=config.p_object_miss,
            seed=config.seed + run_index,
        )
    if config.backend_id in REMOTE_BACKENDS:
        client = ChatModelClient(
            base_url=config.base_url,
            max_attempts=config.max_attempts,
            max_in_flight=config.concurrency,
        )
    return make_backend(
        config.backend_id,
        error_model=error_model,
        client=client,
        model=config.model,
        temperature=config.temperature,
        scope=config.scope,
        catalog=catalog,
    )


def _score_scenes(
    backend: PlanBackend,
    dataset: Dataset,
    task: TaskSpec,
    config: RunConfig,
    catalog: Catalog,
) -> list[SceneScores]:
    workers = config.concurrency if backend.descriptor.concurrency_safe else 1
    workers = max(1, min(workers, len(dataset.scenes)))

    def one(scene) -> SceneScores:
        result = plan_with_backend(backend, SceneInput.from_scene(scene), task, config.mode)
        return score_task(result.report.plans, scene, task, catalog)

    if workers == 1:
        return [one(scene) for scene in dataset.scenes]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, dataset.scenes))


@dataclass
class EvaluationResult:
    report: MetricsReport
    scores: dict
    manifest: dict


def evaluate(
    config: RunConfig,
    dataset: Dataset | None = None,
    catalog: Catalog | None = None,
) -> EvaluationResult:
    """Run the full evaluation grid and aggregate per task."""
    catalog = catalog or load_catalog()
    if dataset is None:
        dataset = resolve_dataset(config, catalog)
    mode_label = config.mode.value.replace("_", "-")
    metric_set = METRICS if config.scope is PlanScope.FULL else ("StaA",)

    rows = []
    scores_doc: dict = {"tasks": {}}
    for task_id in config.tasks:
        task = TaskSpec.of(task_id)
        per_metric_runs: dict[str, list[float | None]] = {m: [] for m in METRICS}
        run_docs = []
        for run_index in range(config.runs):
            backend = _build_backend(config, run_index, catalog)
            scene_scores = _score_scenes(backend, dataset, task, config, catalog)
            overall = overall_scores(scene_scores)
            for metric in METRICS:
                per_metric_runs[metric].append(overall[metric])
            run_docs.append(
                {
                    "overall": {
                        m: overall[m] for m in METRICS
                    },
                    "scenes": {
                        s.scene_id: {
                            "counts": {m: list(s.counts[m]) for m in METRICS},
                            "extra_predictions": s.extra_predictions,
                        }
                        for s in scene_scores
                    },
                }
            )
        metrics_summary: dict[str, tuple[float, float | None, int] | None] = {}
        for metric in METRICS:
            values = per_metric_runs[metric]
            defined = [v for v in values if v is not None]
            if metric not in metric_set or not defined:
                metrics_summary[metric] = None
                continue
            mean, std = aggregate_runs(defined)
            metrics_summary[metric] = (mean, std, len(defined))
        rows.append(
            ReportRow(
                task_id=task_id,
                method=config.backend_id,
                mode=mode_label,
                metrics=metrics_summary,
            )
        )
        scores_doc["tasks"][task_id] = {"runs": run_docs}

    manifest = build_manifest(config, dataset, catalog)
    report = MetricsReport(rows=tuple(rows), provenance=manifest["provenance"])
    return EvaluationResult(report=report, scores=scores_doc, manifest=manifest)


def config_to_doc(config: RunConfig) -> dict:
    """Flat config block; feed it back via ``eval run --config`` to rerun."""
    return {
        "backend": config.backend_id,
        "tasks": list(config.tasks),
        "mode": config.mode.value,
        "scope": config.scope.value,
        "runs": config.runs,
        "seed": config.seed,
        "dataset": config.dataset_path,
        "base_url": config.base_url,
        "model": config.model,
        "temperature": config.temperature,
        "p_state_omit": config.p_state_omit,
        "p_object_miss": config.p_object_miss,
        "concurrency": config.concurrency,
    }


def build_manifest(config: RunConfig, dataset: Dataset, catalog: Catalog) -> dict:
    backend_options: dict = {}
    if config.backend_id == "modular-sim":
        backend_options = {
            "p_state_omit": config.p_state_omit,
            "p_object_miss": config.p_object_miss,
            "caption_seed_policy": "seed + run_index",
        }
    if config.backend_id in REMOTE_BACKENDS:
        backend_options = {"model": config.model, "base_url": config.base_url}
    return {
        "config": config_to_doc(config),
        "provenance": {
            "seed": config.seed,
            "backend": config.backend_id,
            "mode": config.mode.value,
            "scope": config.scope.value,
            "temperature": config.temperature,
            "prompt_hash": prompt_fingerprint(config, catalog),
        },
        "backend": {"id": config.backend_id, "options": backend_options},
        "tasks": list(config.tasks),
        "runs": config.runs,
        "concurrency": config.concurrency,
        "dataset": {
            "name": dataset.name,
            "version": dataset.version,
            "catalog_version": dataset.catalog_version,
            "scene_count": len(dataset.scenes),
            "object_count": sum(len(s.objects) for s in dataset.scenes),
            "path": config.dataset_path,
        },
    }


def write_run_dir(result: EvaluationResult, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.json").write_text(
        json.dumps(result.manifest, indent=2, ensure_ascii=True) + "\n", encoding="utf-8"
    )
    (out / "scores.json").write_text(
        json.dumps(result.scores, indent=2, ensure_ascii=True) + "\n", encoding="utf-8"
    )
    for fmt, suffix in (("plain", "txt"), ("markdown", "md"), ("csv", "csv")):
        (out / f"report.{suffix}").write_text(
            render_report(result.report, fmt), encoding="utf-8"
        )
    return out


def load_report(run_dir: str | Path) -> MetricsReport:
    """Rebuild the metrics report from a run directory's stored scores."""
    run_dir = Path(run_dir)
    manifest = json.loads((run_dir / "manifest.json").read_text(encoding="utf-8"))
    scores = json.loads((run_dir / "scores.json").read_text(encoding="utf-8"))
    mode_label = manifest["provenance"]["mode"].replace("_", "-")
    scope = manifest["provenance"].get("scope", "full")
    metric_set = METRICS if scope == "full" else ("StaA",)
    rows = []
    for task_id, task_doc in scores["tasks"].items():
        per_metric: dict[str, tuple[float, float | None, int] | None] = {}
        for metric in METRICS:
            values = [run["overall"][metric] for run in task_doc["runs"]]
            defined = [v for v in values if v is not None]
            if metric not in metric_set or not defined:
                per_metric[metric] = None
                continue
            mean, std = aggregate_runs(defined)
            per_metric[metric] = (mean, std, len(defined))
        rows.append(
            ReportRow(
                task_id=task_id,
                method=manifest["backend"]["id"],
                mode=mode_label,
                metrics=per_metric,
            )
        )
    return MetricsReport(rows=tuple(rows), provenance=manifest["provenance"])
