"""Canonical data model for annotated tabletop scenes and datasets.

Every object carries the eight manipulation-plan fields (attributes, state,
destination, grasp, placing) plus an ``edible`` flag that makes the
state-compatibility rules checkable.  All values are immutable after
construction and safe to share between threads.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from enum import Enum

from ossa.labels import canonicalize_label


class SizeClass(str, Enum):
    SMALL = "small"
    MEDIUM = "medium"
    BIG = "big"


class ShapeClass(str, Enum):
    ELONGATED = "elongated"
    IRREGULAR = "irregular"
    OVAL = "oval"
    ROUND = "round"
    SPHERICAL = "spherical"
    CYLINDRICAL = "cylindrical"
    RECTANGLE = "rectangle"


class ObjectState(str, Enum):
    CLEAN = "clean"
    DIRTY = "dirty"
    CONTAINING_LEFTOVER_FOOD = "containing leftover food"
    INTACT = "intact"
    PEEL = "peel"
    LEFTOVER_FOOD = "leftover food"


class Destination(str, Enum):
    TRASH_BIN = "trash bin"
    FRIDGE = "fridge"
    CUPBOARD = "cupboard"
    DISHWASHER = "dishwasher"
    UNCERTAIN = "uncertain"


class GraspType(str, Enum):
    TOP_GRASP = "top grasp"
    EDGE_GRASP = "edge grasp"


class PlaceType(str, Enum):
    PLACE = "place"
    POUR = "pour"


# Allowed states per object class.  Containers never take food states; only
# edible non-containers take intact/peel/leftover food.
CONTAINER_STATES = frozenset(
    {ObjectState.CLEAN, ObjectState.DIRTY, ObjectState.CONTAINING_LEFTOVER_FOOD}
)
EDIBLE_STATES = frozenset(
    {ObjectState.INTACT, ObjectState.PEEL, ObjectState.LEFTOVER_FOOD}
)
INEDIBLE_STATES = frozenset({ObjectState.CLEAN, ObjectState.DIRTY})


@dataclass(frozen=True)
class ObjectAnnotation:
    """One annotated object.

    ``destination`` stores the context-free default ("where it belongs"
    absent any task); task-dependent expectations are derived by the
    reference planner, never stored here.
    """

    name: str
    color: str
    size: SizeClass
    shape: ShapeClass
    container: bool
    state: ObjectState
    destination: Destination
    grasping_type: GraspType
    placing_type: PlaceType
    edible: bool


@dataclass(frozen=True)
class Scene:
    scene_id: str
    objects: tuple[ObjectAnnotation, ...]
    image_ref: str | None = None


@dataclass(frozen=True)
class Dataset:
    name: str
    version: str
    scenes: tuple[Scene, ...]
    catalog_version: str


def validate_annotation(a: ObjectAnnotation) -> list[str]:
    """Return every violated annotation invariant (empty list means valid)."""
    violations: list[str] = []
    if not a.name or not a.name.strip():
        violations.append("empty object name")
    if a.container:
        if a.state not in CONTAINER_STATES:
            violations.append(f"state '{a.state.value}' not allowed for container")
    elif a.edible:
        if a.state not in EDIBLE_STATES:
            violations.append(
                f"state '{a.state.value}' not allowed for edible non-container"
            )
    else:
        if a.state not in INEDIBLE_STATES:
            violations.append(
                f"state '{a.state.value}' not allowed for inedible non-container"
            )
    if a.state is ObjectState.CONTAINING_LEFTOVER_FOOD and not a.container:
        violations.append("containing leftover food requires container")
    if a.placing_type is PlaceType.POUR and not a.container:
        violations.append("pour requires container")
    if a.destination is Destination.UNCERTAIN:
        violations.append("uncertain destination not allowed in stored annotations")
    return violations


def validate_scene(scene: Scene) -> list[str]:
    """Scene-level invariants plus every per-object violation."""
    violations: list[str] = []
    if not scene.objects:
        violations.append(f"{scene.scene_id}: empty object list")
    names = [a.name for a in scene.objects]
    for name, count in Counter(names).items():
        if count > 1:
            violations.append(f"{scene.scene_id}: duplicate object name '{name}'")
    by_stem: dict[str, list[int | None]] = defaultdict(list)
    for name in names:
        label = canonicalize_label(name)
        by_stem[label.stem].append(label.index)
    for stem, indexes in by_stem.items():
        if len(indexes) > 1:
            if any(i is None for i in indexes):
                violations.append(
                    f"{scene.scene_id}: duplicated category '{stem}' has an unindexed name"
                )
            elif len(set(indexes)) != len(indexes):
                violations.append(
                    f"{scene.scene_id}: duplicated category '{stem}' reuses an index"
                )
    for a in scene.objects:
        for violation in validate_annotation(a):
            violations.append(f"{scene.scene_id}.objects['{a.name}']: {violation}")
    return violations


def validate_dataset(dataset: Dataset) -> list[str]:
    violations: list[str] = []
    seen_ids = Counter(s.scene_id for s in dataset.scenes)
    for scene_id, count in seen_ids.items():
        if count > 1:
            violations.append(f"duplicate scene_id '{scene_id}'")
    for scene in dataset.scenes:
        violations.extend(validate_scene(scene))
    return violations


def indexed_names(display_names: list[str]) -> list[str]:
    """Apply the duplicate-naming rule: repeated names get ' 1', ' 2', ... suffixes."""
    counts = Counter(display_names)
    seen: Counter[str] = Counter()
    out: list[str] = []
    for name in display_names:
        if counts[name] > 1:
            seen[name] += 1
            out.append(f"{name} {seen[name]}")
        else:
            out.append(name)
    return out
