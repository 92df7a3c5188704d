"""Prompt construction for plan-generation backends.

Prompts are fully deterministic: role preamble, the task instruction
verbatim, the four reasoning steps (state, destination, grasp, placing),
the output-format stanza, and, in few-shot mode, worked exemplars whose
plans come from the reference planner so they are always task-correct.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources

from ossa.captions import caption_line
from ossa.catalog import Catalog, load_catalog
from ossa.oracle import TaskSpec, ground_truth_plan
from ossa.plans import ObjectManipulationPlan, emit_plans
from ossa.scene import (
    Destination,
    GraspType,
    ObjectAnnotation,
    ObjectState,
    PlaceType,
    ShapeClass,
    SizeClass,
)


class PromptMode(str, Enum):
    ZERO_SHOT = "zero_shot"
    FEW_SHOT = "few_shot"


class PlanScope(str, Enum):
    """Full eight-field plans versus the state-only detection variant."""

    FULL = "full"
    STATE_ONLY = "state_only"


COT_STEPS = (
    "Identify each object's state from what is visible, using common sense "
    "(a half apple is leftover food; a plate can be clean or dirty; a bowl "
    "may contain leftover food).",
    "Choose each object's destination from its state and the user's "
    "preference; when the instruction leaves leftover handling open, set "
    "the destination to 'uncertain'.",
    "Choose the grasping type from the object's state, shape, and size.",
    "Choose the placing type from the object's state and destination; pour "
    "only when discarding a container holding leftover food.",
)


class MissingExemplars(ValueError):
    """Few-shot prompts require at least one exemplar."""


@dataclass(frozen=True)
class Exemplar:
    caption: str
    annotation: ObjectAnnotation


@dataclass(frozen=True)
class PromptSpec:
    task: TaskSpec
    mode: PromptMode = PromptMode.ZERO_SHOT
    cot_steps: tuple[str, str, str, str] = COT_STEPS
    exemplars: tuple[Exemplar, ...] = ()
    scope: PlanScope = PlanScope.FULL

    def __post_init__(self):
        if len(self.cot_steps) != 4:
            raise ValueError("exactly 4 reasoning steps required, in order")


@lru_cache(maxsize=1)
def default_exemplars() -> tuple[Exemplar, ...]:
    """The two packaged exemplars: a leftover container and an intact fruit."""
    raw = json.loads(
        resources.files("ossa.fixtures").joinpath("exemplars.json").read_text("utf-8")
    )
    out = []
    for entry in raw["exemplars"]:
        annotation = ObjectAnnotation(
            name=entry["name"],
            color=entry["color"],
            size=SizeClass(entry["size"]),
            shape=ShapeClass(entry["shape"]),
            container=entry["container"],
            state=ObjectState(entry["state"]),
            destination=Destination(entry["destination"]),
            grasping_type=GraspType(entry["grasping_type"]),
            placing_type=PlaceType(entry["placing_type"]),
            edible=entry["edible"],
        )
        caption = caption_line(
            annotation.color, annotation.size, annotation.shape, annotation.name
        )
        out.append(Exemplar(caption=caption, annotation=annotation))
    return tuple(out)


_FULL_SCHEMA = """\
"object name": {
  "color": "<color>",
  "size": "small | medium | big",
  "shape": "elongated | irregular | oval | round | spherical | cylindrical | rectangle",
  "container": true or false,
  "state": "clean | dirty | containing leftover food | intact | peel | leftover food",
  "destination": "trash bin | fridge | cupboard | dishwasher | uncertain",
  "grasping_type": "top grasp | edge grasp",
  "placing_type": "place | pour"
}"""

_STATE_ONLY_SCHEMA = """\
"object name": {
  "state": "clean | dirty | containing leftover food | intact | peel | leftover food"
}"""


def output_stanza(scope: PlanScope) -> str:
    schema = _FULL_SCHEMA if scope is PlanScope.FULL else _STATE_ONLY_SCHEMA
    return (
        "Respond with JSON only, one entry per object; number repeated "
        "object names ('plate 1', 'plate 2'):\n" + schema
    )


_INPUT_PHRASES = {
    "image": "the attached image of the table",
    "caption": "the scene description below",
    "scene": "the scene listing below",
}


def _exemplar_block(spec: PromptSpec, catalog: Catalog) -> str:
    parts = ["Examples:"]
    for exemplar in spec.exemplars:
        expected = ground_truth_plan(exemplar.annotation, spec.task, catalog)
        if spec.scope is PlanScope.STATE_ONLY:
            plan = ObjectManipulationPlan(
                name=exemplar.annotation.name, state=exemplar.annotation.state
            )
        else:
            plan = ObjectManipulationPlan(
                name=exemplar.annotation.name,
                color=exemplar.annotation.color,
                size=exemplar.annotation.size,
                shape=exemplar.annotation.shape,
                container=exemplar.annotation.container,
                state=exemplar.annotation.state,
                destination=expected.destination,
                grasping_type=expected.grasping_type,
                placing_type=expected.placing_type,
            )
        parts.append(f"Scene: {exemplar.caption}")
        parts.append(f"Plans:\n{emit_plans([plan])}")
    return "\n".join(parts)


def build_prompt(
    spec: PromptSpec,
    input_kind: str,
    catalog: Catalog | None = None,
) -> tuple[str, bool]:
    """Assemble the prompt text; returns (text, wants_image_attachment)."""
    if input_kind not in _INPUT_PHRASES:
        raise ValueError(f"unknown input kind {input_kind!r}")
    if spec.mode is PromptMode.FEW_SHOT and not spec.exemplars:
        raise MissingExemplars("few-shot prompt requested with no exemplars")
    catalog = catalog or load_catalog()
    sections = [
        "You are a household robot's task planner. Plan how to handle every "
        f"object in {_INPUT_PHRASES[input_kind]}.",
        f'User instruction: "{spec.task.instruction}"',
        "Reason step by step:\n"
        + "\n".join(f"{i}. {step}" for i, step in enumerate(spec.cot_steps, start=1)),
        output_stanza(spec.scope),
    ]
    if spec.mode is PromptMode.FEW_SHOT:
        sections.append(_exemplar_block(spec, catalog))
    return "\n\n".join(sections), input_kind == "image"
