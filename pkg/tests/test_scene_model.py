from __future__ import annotations

import pytest

from conftest import make_annotation, soup_bowl
from ossa.scene import (
    Destination,
    GraspType,
    ObjectState,
    PlaceType,
    Scene,
    ShapeClass,
    SizeClass,
    indexed_names,
    validate_annotation,
    validate_dataset,
    validate_scene,
)
from ossa.scene import Dataset

ALL_ENUMS = (SizeClass, ShapeClass, ObjectState, Destination, GraspType, PlaceType)


@pytest.mark.parametrize("enum_cls", ALL_ENUMS)
def test_enum_parse_emit_bijection(enum_cls):
    values = [member.value for member in enum_cls]
    assert len(set(values)) == len(values)
    for member in enum_cls:
        assert enum_cls(member.value) is member
    with pytest.raises(ValueError):
        enum_cls("no-such-value")


def test_soup_bowl_is_valid():
    assert validate_annotation(soup_bowl()) == []


def test_clean_state_invalid_for_edible_non_container():
    a = make_annotation(state=ObjectState.CLEAN, destination=Destination.CUPBOARD)
    violations = validate_annotation(a)
    assert any("edible non-container" in v for v in violations)


def test_containing_requires_container_reports_both_rules():
    a = make_annotation(state=ObjectState.CONTAINING_LEFTOVER_FOOD)
    violations = validate_annotation(a)
    assert any("requires container" in v for v in violations)
    assert len(violations) >= 2  # class rule violated as well


def test_pour_requires_container():
    a = make_annotation(placing_type=PlaceType.POUR)
    assert any("pour requires container" in v for v in validate_annotation(a))


def test_uncertain_destination_rejected_in_storage():
    a = make_annotation(destination=Destination.UNCERTAIN)
    assert any("uncertain" in v for v in validate_annotation(a))


def test_scene_duplicate_names_flagged():
    scene = Scene("s", objects=(make_annotation(), make_annotation()))
    assert any("duplicate object name" in v for v in validate_scene(scene))


def test_scene_duplicate_category_requires_indexes():
    scene = Scene(
        "s",
        objects=(
            make_annotation(name="plate", container=True, state=ObjectState.CLEAN,
                            destination=Destination.CUPBOARD, edible=False,
                            grasping_type=GraspType.EDGE_GRASP),
            make_annotation(name="plate 2", container=True, state=ObjectState.CLEAN,
                            destination=Destination.CUPBOARD, edible=False,
                            grasping_type=GraspType.EDGE_GRASP),
        ),
    )
    assert any("unindexed name" in v for v in validate_scene(scene))


def test_indexed_scene_valid():
    scene = Scene(
        "s",
        objects=(
            make_annotation(name="plate 1", container=True, state=ObjectState.CLEAN,
                            destination=Destination.CUPBOARD, edible=False,
                            grasping_type=GraspType.EDGE_GRASP),
            make_annotation(name="plate 2", container=True, state=ObjectState.DIRTY,
                            destination=Destination.DISHWASHER, edible=False,
                            grasping_type=GraspType.EDGE_GRASP),
        ),
    )
    assert validate_scene(scene) == []


def test_empty_scene_flagged():
    assert any("empty object list" in v for v in validate_scene(Scene("s", objects=())))


def test_dataset_duplicate_scene_ids():
    scene = Scene("same", objects=(make_annotation(),))
    dataset = Dataset(name="d", version="1", scenes=(scene, scene), catalog_version="1")
    assert any("duplicate scene_id" in v for v in validate_dataset(dataset))


def test_indexed_names_rule():
    assert indexed_names(["plate", "plate", "apple"]) == ["plate 1", "plate 2", "apple"]
    assert indexed_names(["apple"]) == ["apple"]
