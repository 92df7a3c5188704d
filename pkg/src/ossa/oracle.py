"""Reference task semantics.

A deterministic rule engine for the three table-clearing tasks: it
classifies leftovers, derives context-free default destinations, and turns
an annotation plus a task into the expected per-object plan.  It triples as
ground-truth generator, perfect backend, and the rule base that resolves
keep/discard clarifications.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
import re

from ossa.catalog import Catalog, load_catalog
from ossa.labels import canonicalize_label
from ossa.scene import (
    Destination,
    GraspType,
    ObjectAnnotation,
    ObjectState,
    PlaceType,
    Scene,
    ShapeClass,
    SizeClass,
)

TASK_INSTRUCTIONS = {
    "T1": "clear the table",
    "T2": "clear the table and keep all the leftover food",
    "T3": "clear the table and discard all the leftover food",
}

_WS = re.compile(r"\s+")


@dataclass(frozen=True)
class TaskSpec:
    task_id: str
    instruction: str

    def __post_init__(self):
        canonical = TASK_INSTRUCTIONS.get(self.task_id)
        if canonical is None:
            raise ValueError(f"unknown task id {self.task_id!r}")
        if _WS.sub(" ", self.instruction.strip()) != canonical:
            raise ValueError(
                f"instruction for {self.task_id} must match {canonical!r}"
            )

    @classmethod
    def of(cls, task_id: str) -> "TaskSpec":
        task_id = task_id.strip().upper()
        if task_id not in TASK_INSTRUCTIONS:
            raise ValueError(f"unknown task id {task_id!r}; expected one of T1, T2, T3")
        return cls(task_id=task_id, instruction=TASK_INSTRUCTIONS[task_id])


class LeftoverClass(str, Enum):
    NONE = "none"
    LEFTOVER_FOOD = "leftover food"
    CONTAINING_LEFTOVER_FOOD = "containing leftover food"


class IncompatiblePair(ValueError):
    """State/container combination that no valid annotation can carry."""


class LeftoverNotDefaultable(ValueError):
    """Default destinations exist only for non-leftover objects."""


@dataclass(frozen=True)
class ExpectedPlan:
    """Reference plan for one object under one task."""

    name: str
    state: ObjectState
    destination: Destination
    grasping_type: GraspType
    placing_type: PlaceType
    ambiguous: bool

    def __post_init__(self):
        if self.ambiguous != (self.destination is Destination.UNCERTAIN):
            raise ValueError("ambiguous must hold exactly when destination is uncertain")
        if self.placing_type is PlaceType.POUR and self.destination is not Destination.DISHWASHER:
            raise ValueError("pour implies dishwasher destination")


def classify_leftover(state: ObjectState, container: bool) -> LeftoverClass:
    """Partition a (state, container) pair into the leftover classes."""
    if container:
        if state not in (ObjectState.CLEAN, ObjectState.DIRTY, ObjectState.CONTAINING_LEFTOVER_FOOD):
            raise IncompatiblePair(f"container cannot be '{state.value}'")
    else:
        if state is ObjectState.CONTAINING_LEFTOVER_FOOD:
            raise IncompatiblePair("containing leftover food requires a container")
    if state is ObjectState.CONTAINING_LEFTOVER_FOOD:
        return LeftoverClass.CONTAINING_LEFTOVER_FOOD
    if state is ObjectState.LEFTOVER_FOOD:
        return LeftoverClass.LEFTOVER_FOOD
    return LeftoverClass.NONE


def grasp_for(
    container: bool,
    shape: ShapeClass,
    size: SizeClass,
    catalog: Catalog | None = None,
) -> GraspType:
    """Grasp rule: edge grasp for containers and for large flat shapes."""
    catalog = catalog or load_catalog()
    if container:
        return GraspType.EDGE_GRASP
    if shape in catalog.grasp_edge_shapes and size in catalog.grasp_edge_sizes:
        return GraspType.EDGE_GRASP
    return GraspType.TOP_GRASP


_STATE_FALLBACK_DESTINATIONS = {
    ObjectState.PEEL: Destination.TRASH_BIN,
    ObjectState.DIRTY: Destination.DISHWASHER,
    ObjectState.CLEAN: Destination.CUPBOARD,
    ObjectState.INTACT: Destination.CUPBOARD,
}


def default_destination(a: ObjectAnnotation, catalog: Catalog | None = None) -> Destination:
    """Context-free destination for a non-leftover object.

    Peel goes to the trash bin, dirty things to the dishwasher, clean
    things to the cupboard; intact food uses the catalog's per-category
    default (bananas to the cupboard, apples and oranges to the fridge).
    """
    catalog = catalog or load_catalog()
    if classify_leftover(a.state, a.container) is not LeftoverClass.NONE:
        raise LeftoverNotDefaultable(
            f"'{a.name}' is leftover-class; destination depends on the task"
        )
    category = catalog.category_for_display(canonicalize_label(a.name).stem)
    if category is not None:
        entry = catalog.entries[category]
        destination = entry.destinations.get(a.state)
        if destination is not None:
            return destination
    return _STATE_FALLBACK_DESTINATIONS[a.state]


def ground_truth_plan(
    a: ObjectAnnotation,
    task: TaskSpec,
    catalog: Catalog | None = None,
) -> ExpectedPlan:
    """Expected plan for one annotated object under one task.

    Leftovers are the only task-sensitive objects: T1 marks them uncertain,
    T2 stores them in the fridge, T3 trashes manipulable leftovers and
    pours container contents before the container goes to the dishwasher.
    """
    catalog = catalog or load_catalog()
    leftover = classify_leftover(a.state, a.container)
    placing = PlaceType.PLACE
    ambiguous = False
    if leftover is LeftoverClass.NONE:
        destination = default_destination(a, catalog)
    elif task.task_id == "T1":
        destination = Destination.UNCERTAIN
        ambiguous = True
    elif task.task_id == "T2":
        destination = Destination.FRIDGE
    elif leftover is LeftoverClass.CONTAINING_LEFTOVER_FOOD:
        destination = Destination.DISHWASHER
        placing = PlaceType.POUR
    else:
        destination = Destination.TRASH_BIN
    return ExpectedPlan(
        name=a.name,
        state=a.state,
        destination=destination,
        grasping_type=grasp_for(a.container, a.shape, a.size, catalog),
        placing_type=placing,
        ambiguous=ambiguous,
    )


def expected_plans(
    scene: Scene, task: TaskSpec, catalog: Catalog | None = None
) -> list[ExpectedPlan]:
    catalog = catalog or load_catalog()
    return [ground_truth_plan(a, task, catalog) for a in scene.objects]
