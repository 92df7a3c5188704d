"""Command-line entry point.

Subcommands: ``dataset gen``, ``dataset validate``, ``eval run``,
``report render``, ``serve``.  Exit codes: 0 success, 1 backend/validation
failure, 2 configuration error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from ossa.chat_client import ChatError
from ossa.dataset_io import ParseError, SchemaError, load_dataset, save_dataset
from ossa.episode import BackendError
from ossa.generate import GenConfig, InvalidConfig, generate_dataset, load_gen_config
from ossa.metrics import render_report
from ossa.prompts import PlanScope, PromptMode
from ossa.runner import ALL_TASKS, RunConfig, evaluate, load_report, write_run_dir

_MODES = {"zero-shot": PromptMode.ZERO_SHOT, "few-shot": PromptMode.FEW_SHOT}
_SCOPES = {"full": PlanScope.FULL, "state-only": PlanScope.STATE_ONLY}


@click.group()
def main():
    """Object state-sensitive planning bench."""


@main.group()
def dataset():
    """Generate and validate scene datasets."""


@dataset.command("gen")
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--scenes", type=int, default=40, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def dataset_gen(seed: int, scenes: int, config_path: str | None, out_path: str):
    """Generate a synthetic dataset file."""
    try:
        if config_path:
            config = load_gen_config(config_path)
        else:
            config = GenConfig(seed=seed, scene_count=scenes)
        data = generate_dataset(config)
    except (InvalidConfig, ValueError, json.JSONDecodeError) as exc:
        raise click.UsageError(str(exc))
    save_dataset(data, out_path)
    objects = sum(len(s.objects) for s in data.scenes)
    click.echo(f"wrote {out_path}: {len(data.scenes)} scenes, {objects} objects")


@dataset.command("validate")
@click.option("--dataset", "dataset_path", required=True, type=click.Path(dir_okay=False))
def dataset_validate(dataset_path: str):
    """Load and validate a dataset file."""
    if not Path(dataset_path).is_file():
        raise click.UsageError(f"dataset file not found: {dataset_path}")
    try:
        data = load_dataset(dataset_path)
    except (ParseError, SchemaError) as exc:
        click.echo(f"invalid: {exc}", err=True)
        sys.exit(1)
    objects = sum(len(s.objects) for s in data.scenes)
    click.echo(f"ok: {len(data.scenes)} scenes, {objects} objects")


@main.group("eval")
def eval_group():
    """Evaluation runs."""


def _file_config(path: str | None) -> dict:
    """Load a stored config: either a flat config file or a run manifest."""
    if path is None:
        return {}
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"unreadable config file: {exc}")
    if not isinstance(raw, dict):
        raise click.UsageError("config file must hold a JSON object")
    return raw.get("config", raw)


@eval_group.command("run")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="Config file or a previous run's manifest.json; flags override.")
@click.option("--dataset", "dataset_path", type=click.Path(dir_okay=False))
@click.option("--gen-config", type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--task",
    type=click.Choice(["t1", "t2", "t3", "all"], case_sensitive=False),
    default="all",
    show_default=True,
)
@click.option(
    "--backend",
    type=click.Choice(["oracle", "modular-sim", "modular-remote", "monolithic-remote"]),
    default="oracle",
    show_default=True,
)
@click.option("--mode", type=click.Choice(sorted(_MODES)), default="zero-shot", show_default=True)
@click.option("--scope", type=click.Choice(sorted(_SCOPES)), default="full", show_default=True)
@click.option("--runs", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--base-url", default=None)
@click.option("--model", default="gpt-4o", show_default=True)
@click.option("--temperature", type=float, default=0.0, show_default=True)
@click.option("--p-state-omit", type=float, default=0.0, show_default=True)
@click.option("--p-object-miss", type=float, default=0.0, show_default=True)
@click.option("--concurrency", type=int, default=4, show_default=True)
@click.pass_context
def eval_run(
    ctx: click.Context,
    config_path: str | None,
    dataset_path: str | None,
    gen_config: str | None,
    task: str,
    backend: str,
    mode: str,
    scope: str,
    runs: int,
    seed: int,
    out_dir: str,
    base_url: str | None,
    model: str,
    temperature: float,
    p_state_omit: float,
    p_object_miss: float,
    concurrency: int,
):
    """Evaluate a backend over a dataset and write the run directory."""
    stored = _file_config(config_path)

    def pick(param: str, flag_value, stored_key: str, convert=lambda v: v):
        source = ctx.get_parameter_source(param)
        if source is click.core.ParameterSource.COMMANDLINE or stored_key not in stored:
            return flag_value
        return convert(stored[stored_key])

    backend = pick("backend", backend, "backend", str)
    mode_value = pick("mode", _MODES[mode], "mode", PromptMode)
    scope_value = pick("scope", _SCOPES[scope], "scope", PlanScope)
    runs = pick("runs", runs, "runs", int)
    seed = pick("seed", seed, "seed", int)
    dataset_path = pick("dataset_path", dataset_path, "dataset", lambda v: v)
    base_url = pick("base_url", base_url, "base_url", lambda v: v)
    model = pick("model", model, "model", str)
    temperature = pick("temperature", temperature, "temperature", float)
    p_state_omit = pick("p_state_omit", p_state_omit, "p_state_omit", float)
    p_object_miss = pick("p_object_miss", p_object_miss, "p_object_miss", float)
    concurrency = pick("concurrency", concurrency, "concurrency", int)
    if ctx.get_parameter_source("task") is click.core.ParameterSource.COMMANDLINE:
        tasks = ALL_TASKS if task.lower() == "all" else (task.upper(),)
    elif "tasks" in stored:
        tasks = tuple(stored["tasks"])
    else:
        tasks = ALL_TASKS if task.lower() == "all" else (task.upper(),)

    if dataset_path is not None and not Path(dataset_path).is_file():
        raise click.UsageError(f"dataset file not found: {dataset_path}")
    try:
        config = RunConfig(
            backend_id=backend,
            tasks=tasks,
            mode=mode_value,
            scope=scope_value,
            runs=runs,
            seed=seed,
            dataset_path=dataset_path,
            gen=load_gen_config(gen_config) if gen_config else None,
            out_dir=out_dir,
            base_url=base_url,
            model=model,
            temperature=temperature,
            p_state_omit=p_state_omit,
            p_object_miss=p_object_miss,
            concurrency=concurrency,
        )
    except (ValueError, InvalidConfig) as exc:
        raise click.UsageError(str(exc))
    try:
        result = evaluate(config)
    except (ParseError, SchemaError, InvalidConfig) as exc:
        raise click.UsageError(str(exc))
    except (ChatError, BackendError) as exc:
        click.echo(f"backend failure: {exc}", err=True)
        sys.exit(1)
    write_run_dir(result, out_dir)
    click.echo(render_report(result.report, "plain"), nl=False)
    click.echo(f"run directory: {out_dir}")


@main.group()
def report():
    """Render stored run results."""


@report.command("render")
@click.option("--run-dir", required=True, type=click.Path(file_okay=False, exists=True))
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["plain", "markdown", "csv"]),
    default="plain",
    show_default=True,
)
def report_render(run_dir: str, fmt: str):
    """Re-render the report tables from a run directory."""
    try:
        loaded = load_report(run_dir)
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"unreadable run directory: {exc}")
    click.echo(render_report(loaded, fmt), nl=False)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8330, show_default=True)
@click.option("--dataset", "dataset_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "results_dir", type=click.Path(file_okay=False),
              help="Write completed episode results here as they finish.")
@click.option("--p-state-omit", type=float, default=0.0, show_default=True)
@click.option("--p-object-miss", type=float, default=0.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def serve(
    host: str,
    port: int,
    dataset_path: str | None,
    results_dir: str | None,
    p_state_omit: float,
    p_object_miss: float,
    seed: int,
):
    """Serve the interactive session API."""
    import uvicorn

    from ossa.backends import ModularSimBackend, OracleBackend
    from ossa.captions import CaptionErrorModel
    from ossa.service import create_app

    data = load_dataset(dataset_path) if dataset_path else None
    backends = {
        "oracle": OracleBackend(),
        "modular-sim": ModularSimBackend(
            CaptionErrorModel(p_state_omit=p_state_omit, p_object_miss=p_object_miss, seed=seed)
        ),
    }
    app = create_app(backends, data, results_dir=results_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
