"""Pluggable plan-generation backends behind one contract.

Every backend maps ``(SceneInput, TaskSpec, PromptMode)`` to a parsed plan
report plus a stage-by-stage trace, so the episode loop and the evaluation
harness never care which one is wired in:

* ``oracle``            -- reference plans, serialized and reparsed so the
                           full text pipeline is exercised;
* ``modular-sim``       -- simulated captioner (with its state-blindness
                           error model) feeding a rule-based text planner;
* ``modular-remote``    -- caption stage feeding a text-only chat model;
* ``monolithic-remote`` -- one chat call from image/scene plus instruction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Protocol

from ossa.captions import (
    CaptionErrorModel,
    parse_captions,
    scene_description,
    simulate_captions,
)
from ossa.catalog import Catalog, load_catalog
from ossa.chat_client import ChatModelClient, ChatRequest, image_part, text_part, user_message
from ossa.oracle import TaskSpec, grasp_for, ground_truth_plan
from ossa.plans import (
    NoStructuredContent,
    ObjectManipulationPlan,
    ParseReport,
    emit_plans,
    parse_model_output,
)
from ossa.prompts import PlanScope, PromptMode, PromptSpec, build_prompt, default_exemplars
from ossa.scene import ObjectAnnotation, ObjectState, PlaceType, Scene, indexed_names


class IncompatibleInput(ValueError):
    """Input variant the backend cannot consume."""


@dataclass(frozen=True)
class SceneInput:
    """Exactly one of image bytes, caption text, or a ground-truth scene."""

    image: bytes | None = None
    media_type: str | None = None
    caption: str | None = None
    scene: Scene | None = None

    def __post_init__(self):
        populated = sum(
            1 for v in (self.image, self.caption, self.scene) if v is not None
        )
        if populated != 1:
            raise ValueError("exactly one input variant must be populated")
        if self.image is not None and not self.media_type:
            raise ValueError("image input requires a media type")

    @property
    def kind(self) -> str:
        if self.image is not None:
            return "image"
        if self.caption is not None:
            return "caption"
        return "scene"

    @classmethod
    def from_image(cls, image: bytes, media_type: str) -> "SceneInput":
        return cls(image=image, media_type=media_type)

    @classmethod
    def from_caption(cls, caption: str) -> "SceneInput":
        return cls(caption=caption)

    @classmethod
    def from_scene(cls, scene: Scene) -> "SceneInput":
        return cls(scene=scene)


@dataclass(frozen=True)
class BackendDescriptor:
    backend_id: str
    options: Mapping[str, object]
    concurrency_safe: bool = True
    temperature: float | None = None


@dataclass
class RunTrace:
    """Stage inputs/outputs recorded during one backend invocation."""

    stages: list[tuple[str, dict]] = field(default_factory=list)

    def record(self, stage: str, **detail) -> None:
        self.stages.append((stage, detail))


@dataclass(frozen=True)
class BackendResult:
    report: ParseReport
    trace: RunTrace


class PlanBackend(Protocol):
    descriptor: BackendDescriptor
    accepts: frozenset[str]

    def plan(self, scene_input: SceneInput, task: TaskSpec, mode: PromptMode) -> BackendResult:
        ...


def plan_with_backend(
    backend: PlanBackend,
    scene_input: SceneInput,
    task: TaskSpec,
    mode: PromptMode = PromptMode.ZERO_SHOT,
) -> BackendResult:
    """Validate input compatibility and dispatch to the backend."""
    if scene_input.kind not in backend.accepts:
        raise IncompatibleInput(
            f"backend '{backend.descriptor.backend_id}' does not accept "
            f"'{scene_input.kind}' input (accepts: {sorted(backend.accepts)})"
        )
    return backend.plan(scene_input, task, mode)


def _parse_text(text: str, trace: RunTrace) -> ParseReport:
    try:
        return parse_model_output(text)
    except NoStructuredContent:
        trace.record("parse", error="no structured content")
        return ParseReport(plans=(), warnings=("no structured content in output",))


def _plan_from_annotation(
    a: ObjectAnnotation, task: TaskSpec, catalog: Catalog
) -> ObjectManipulationPlan:
    expected = ground_truth_plan(a, task, catalog)
    return ObjectManipulationPlan(
        name=a.name,
        color=a.color,
        size=a.size,
        shape=a.shape,
        container=a.container,
        state=a.state,
        destination=expected.destination,
        grasping_type=expected.grasping_type,
        placing_type=expected.placing_type,
    )


class OracleBackend:
    """Perfect perception and reasoning from the ground-truth scene."""

    accepts = frozenset({"scene"})

    def __init__(self, catalog: Catalog | None = None):
        self._catalog = catalog or load_catalog()
        self.descriptor = BackendDescriptor(
            backend_id="oracle", options={}, concurrency_safe=True
        )

    def plan(self, scene_input: SceneInput, task: TaskSpec, mode: PromptMode) -> BackendResult:
        trace = RunTrace()
        scene = scene_input.scene
        assert scene is not None
        plans = [_plan_from_annotation(a, task, self._catalog) for a in scene.objects]
        emitted = emit_plans(plans)
        trace.record("emit", text=emitted)
        report = _parse_text(emitted, trace)
        trace.record("parse", plan_count=len(report.plans), warnings=len(report.warnings))
        return BackendResult(report=report, trace=trace)


class RuleBasedTextPlanner:
    """Deterministic caption-to-plan stage standing in for a text LLM.

    Perception comes only from the caption text; reasoning reuses the
    reference rules, so any plan error traces back to caption degradation.
    """

    def __init__(self, catalog: Catalog | None = None):
        self._catalog = catalog or load_catalog()

    def plan_text(self, caption_text: str, task: TaskSpec) -> str:
        catalog = self._catalog
        percepts = parse_captions(caption_text, catalog)
        display = [
            catalog.entries[p.category].display_name(p.state)
            if p.category is not None and p.state is not None
            else p.phrase
            for p in percepts
        ]
        names = indexed_names(display)
        plans: list[ObjectManipulationPlan] = []
        for name, perceived in zip(names, percepts):
            if perceived.category is None or perceived.state is None:
                plans.append(ObjectManipulationPlan(name=name))
                continue
            entry = catalog.entries[perceived.category]
            size = perceived.size or entry.sizes[0]
            shape = perceived.shape or entry.shapes[0]
            pours = entry.container and perceived.state is ObjectState.CONTAINING_LEFTOVER_FOOD
            annotation = ObjectAnnotation(
                name=name,
                color=perceived.color or entry.colors[0],
                size=size,
                shape=shape,
                container=entry.container,
                state=perceived.state,
                destination=entry.destinations[perceived.state],
                grasping_type=grasp_for(entry.container, shape, size, catalog),
                placing_type=PlaceType.POUR if pours else PlaceType.PLACE,
                edible=entry.edible,
            )
            plans.append(_plan_from_annotation(annotation, task, catalog))
        return emit_plans(plans)


class ModularSimBackend:
    """Simulated captioner plus the rule-based text planner."""

    accepts = frozenset({"scene", "caption"})

    def __init__(
        self,
        error_model: CaptionErrorModel | None = None,
        catalog: Catalog | None = None,
    ):
        self._catalog = catalog or load_catalog()
        self.error_model = error_model or CaptionErrorModel()
        self._planner = RuleBasedTextPlanner(self._catalog)
        self.descriptor = BackendDescriptor(
            backend_id="modular-sim",
            options={
                "p_state_omit": self.error_model.p_state_omit,
                "p_object_miss": self.error_model.p_object_miss,
                "caption_seed": self.error_model.seed,
            },
            concurrency_safe=True,
        )

    def plan(self, scene_input: SceneInput, task: TaskSpec, mode: PromptMode) -> BackendResult:
        trace = RunTrace()
        if scene_input.kind == "scene":
            captions = simulate_captions(scene_input.scene, self.error_model, self._catalog)
        else:
            captions = scene_input.caption or ""
        trace.record("caption", text=captions)
        emitted = self._planner.plan_text(captions, task)
        trace.record("plan", text=emitted)
        report = _parse_text(emitted, trace)
        trace.record("parse", plan_count=len(report.plans), warnings=len(report.warnings))
        return BackendResult(report=report, trace=trace)


class _RemoteBackend:
    def __init__(
        self,
        backend_id: str,
        client: ChatModelClient,
        model: str,
        temperature: float = 0.0,
        max_tokens: int = 2048,
        scope: PlanScope = PlanScope.FULL,
        catalog: Catalog | None = None,
    ):
        self._client = client
        self._model = model
        self._temperature = temperature
        self._max_tokens = max_tokens
        self._scope = scope
        self._catalog = catalog or load_catalog()
        self.descriptor = BackendDescriptor(
            backend_id=backend_id,
            options={"model": model, "base_url": client.base_url, "scope": scope.value},
            concurrency_safe=True,
            temperature=temperature,
        )

    def _prompt_spec(self, task: TaskSpec, mode: PromptMode) -> PromptSpec:
        exemplars = default_exemplars() if mode is PromptMode.FEW_SHOT else ()
        return PromptSpec(task=task, mode=mode, exemplars=exemplars, scope=self._scope)

    def _query(self, parts: list[dict], trace: RunTrace) -> str:
        request = ChatRequest(
            model=self._model,
            messages=(user_message(*parts),),
            temperature=self._temperature,
            max_tokens=self._max_tokens,
        )
        response = self._client.query_chat_model(request)
        trace.record(
            "chat",
            latency_s=response.latency_s,
            attempts=response.attempt_count,
            usage=response.usage,
        )
        return response.text


class MonolithicRemoteBackend(_RemoteBackend):
    """One vision-language call from image (or scene stand-in) to plans."""

    accepts = frozenset({"image", "scene"})

    def __init__(self, client: ChatModelClient, model: str, **kwargs):
        super().__init__("monolithic-remote", client, model, **kwargs)

    def plan(self, scene_input: SceneInput, task: TaskSpec, mode: PromptMode) -> BackendResult:
        trace = RunTrace()
        spec = self._prompt_spec(task, mode)
        prompt, wants_image = build_prompt(spec, scene_input.kind, self._catalog)
        trace.record("prompt", text=prompt)
        parts = [text_part(prompt)]
        if wants_image:
            parts.append(image_part(scene_input.image, scene_input.media_type))
        else:
            parts.append(text_part(scene_description(scene_input.scene, self._catalog)))
        text = self._query(parts, trace)
        trace.record("response", text=text)
        report = _parse_text(text, trace)
        return BackendResult(report=report, trace=trace)


class ModularRemoteBackend(_RemoteBackend):
    """Caption stage feeding a text-only chat model call."""

    accepts = frozenset({"image", "caption", "scene"})

    def __init__(self, client: ChatModelClient, model: str, **kwargs):
        super().__init__("modular-remote", client, model, **kwargs)

    def _captions(self, scene_input: SceneInput, trace: RunTrace) -> str:
        if scene_input.kind == "caption":
            return scene_input.caption
        if scene_input.kind == "scene":
            return scene_description(scene_input.scene, self._catalog)
        caption_prompt = (
            "Describe every object on the table in the attached image, one "
            "per line, as 'a <color> <size> <shape> <object>.'; include "
            "visible state words such as half, sliced, peel, dirty, or "
            "'with soup'."
        )
        trace.record("caption_prompt", text=caption_prompt)
        return self._query(
            [text_part(caption_prompt), image_part(scene_input.image, scene_input.media_type)],
            trace,
        )

    def plan(self, scene_input: SceneInput, task: TaskSpec, mode: PromptMode) -> BackendResult:
        trace = RunTrace()
        captions = self._captions(scene_input, trace)
        trace.record("caption", text=captions)
        spec = self._prompt_spec(task, mode)
        prompt, _ = build_prompt(spec, "caption", self._catalog)
        trace.record("prompt", text=prompt)
        text = self._query([text_part(prompt), text_part(captions)], trace)
        trace.record("response", text=text)
        report = _parse_text(text, trace)
        return BackendResult(report=report, trace=trace)


REMOTE_BACKENDS = {"modular-remote", "monolithic-remote"}
LOCAL_BACKENDS = {"oracle", "modular-sim"}


def make_backend(
    backend_id: str,
    error_model: CaptionErrorModel | None = None,
    client: ChatModelClient | None = None,
    model: str = "gpt-4o",
    temperature: float = 0.0,
    scope: PlanScope = PlanScope.FULL,
    catalog: Catalog | None = None,
) -> PlanBackend:
    if backend_id == "oracle":
        return OracleBackend(catalog)
    if backend_id == "modular-sim":
        return ModularSimBackend(error_model, catalog)
    if backend_id in REMOTE_BACKENDS:
        if client is None:
            raise ValueError(f"backend '{backend_id}' requires a configured client")
        cls = ModularRemoteBackend if backend_id == "modular-remote" else MonolithicRemoteBackend
        return cls(
            client, model, temperature=temperature, scope=scope, catalog=catalog
        )
    raise ValueError(f"unknown backend '{backend_id}'")
