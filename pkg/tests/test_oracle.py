from __future__ import annotations

import itertools

import pytest

from conftest import half_orange, make_annotation, soup_bowl
from ossa.generate import GenConfig, generate_dataset
from ossa.oracle import (
    IncompatiblePair,
    LeftoverClass,
    LeftoverNotDefaultable,
    TaskSpec,
    classify_leftover,
    default_destination,
    grasp_for,
    ground_truth_plan,
)
from ossa.scene import (
    Destination,
    GraspType,
    ObjectState,
    PlaceType,
    ShapeClass,
    SizeClass,
)

T1, T2, T3 = TaskSpec.of("T1"), TaskSpec.of("T2"), TaskSpec.of("T3")


def test_task_instructions_canonical():
    assert T1.instruction == "clear the table"
    assert "keep all the leftover food" in T2.instruction
    assert "discard all the leftover food" in T3.instruction
    with pytest.raises(ValueError):
        TaskSpec(task_id="T1", instruction="tidy up")
    # whitespace-normalized variants are accepted
    TaskSpec(task_id="T2", instruction="  clear the table and  keep all the leftover food ")
    with pytest.raises(ValueError):
        TaskSpec.of("T4")


def test_classify_leftover_table():
    assert (
        classify_leftover(ObjectState.CONTAINING_LEFTOVER_FOOD, True)
        is LeftoverClass.CONTAINING_LEFTOVER_FOOD
    )
    assert classify_leftover(ObjectState.LEFTOVER_FOOD, False) is LeftoverClass.LEFTOVER_FOOD
    assert classify_leftover(ObjectState.INTACT, False) is LeftoverClass.NONE
    assert classify_leftover(ObjectState.CLEAN, True) is LeftoverClass.NONE
    assert classify_leftover(ObjectState.DIRTY, False) is LeftoverClass.NONE


@pytest.mark.parametrize(
    "state,container",
    [
        (ObjectState.CONTAINING_LEFTOVER_FOOD, False),
        (ObjectState.INTACT, True),
        (ObjectState.PEEL, True),
        (ObjectState.LEFTOVER_FOOD, True),
    ],
)
def test_classify_rejects_incompatible_pairs(state, container):
    with pytest.raises(IncompatiblePair):
        classify_leftover(state, container)


def test_default_destinations():
    peel = make_annotation(
        name="banana peel", color="yellow", shape=ShapeClass.IRREGULAR,
        state=ObjectState.PEEL, destination=Destination.TRASH_BIN,
    )
    assert default_destination(peel) is Destination.TRASH_BIN
    bananas = make_annotation(
        name="bananas", color="yellow", shape=ShapeClass.ELONGATED,
        state=ObjectState.INTACT, destination=Destination.CUPBOARD,
    )
    assert default_destination(bananas) is Destination.CUPBOARD
    dirty_plate = make_annotation(
        name="plate", color="white", size=SizeClass.MEDIUM, container=True,
        state=ObjectState.DIRTY, destination=Destination.DISHWASHER,
        grasping_type=GraspType.EDGE_GRASP, edible=False,
    )
    assert default_destination(dirty_plate) is Destination.DISHWASHER


def test_default_destination_rejects_leftovers():
    with pytest.raises(LeftoverNotDefaultable):
        default_destination(soup_bowl())


def test_default_destination_consistent_with_generated_datasets(catalog):
    for seed in (0, 42):
        dataset = generate_dataset(GenConfig(seed=seed, scene_count=8))
        for scene in dataset.scenes:
            for a in scene.objects:
                if classify_leftover(a.state, a.container) is LeftoverClass.NONE:
                    assert default_destination(a, catalog) == a.destination, a


def test_unknown_category_falls_back_by_state():
    pear = make_annotation(name="pear", color="green", state=ObjectState.INTACT,
                           destination=Destination.CUPBOARD)
    assert default_destination(pear) is Destination.CUPBOARD


def test_soup_bowl_t3_pours_into_dishwasher():
    plan = ground_truth_plan(soup_bowl(), T3)
    assert plan.destination is Destination.DISHWASHER
    assert plan.placing_type is PlaceType.POUR
    assert plan.ambiguous is False


def test_half_orange_t1_uncertain_t2_fridge():
    t1_plan = ground_truth_plan(half_orange(), T1)
    assert t1_plan.destination is Destination.UNCERTAIN
    assert t1_plan.ambiguous is True
    assert t1_plan.placing_type is PlaceType.PLACE
    t2_plan = ground_truth_plan(half_orange(), T2)
    assert t2_plan.destination is Destination.FRIDGE
    assert t2_plan.placing_type is PlaceType.PLACE


def test_leftover_food_t3_to_trash():
    plan = ground_truth_plan(half_orange(), T3)
    assert plan.destination is Destination.TRASH_BIN
    assert plan.placing_type is PlaceType.PLACE


def test_intact_apple_task_insensitive():
    apple = make_annotation()
    plans = {t.task_id: ground_truth_plan(apple, t) for t in (T1, T2, T3)}
    assert plans["T1"] == plans["T2"] == plans["T3"]
    assert plans["T1"].destination == default_destination(apple)
    assert plans["T1"].ambiguous is False


def test_grasp_rule():
    assert grasp_for(True, ShapeClass.ROUND, SizeClass.SMALL) is GraspType.EDGE_GRASP
    assert grasp_for(False, ShapeClass.RECTANGLE, SizeClass.MEDIUM) is GraspType.EDGE_GRASP
    assert grasp_for(False, ShapeClass.OVAL, SizeClass.BIG) is GraspType.EDGE_GRASP
    assert grasp_for(False, ShapeClass.RECTANGLE, SizeClass.SMALL) is GraspType.TOP_GRASP
    assert grasp_for(False, ShapeClass.ROUND, SizeClass.BIG) is GraspType.TOP_GRASP


def _catalog_annotations(catalog):
    for entry in catalog.entries.values():
        for state in entry.states:
            pours = entry.container and state is ObjectState.CONTAINING_LEFTOVER_FOOD
            yield make_annotation(
                name=entry.display_name(state),
                color=entry.colors[0],
                size=entry.sizes[0],
                shape=entry.shapes[0],
                container=entry.container,
                state=state,
                destination=entry.destinations[state],
                grasping_type=grasp_for(entry.container, entry.shapes[0], entry.sizes[0]),
                placing_type=PlaceType.POUR if pours else PlaceType.PLACE,
                edible=entry.edible,
            )


def test_totality_and_task_sensitivity_confined_to_leftovers(catalog):
    for a, task in itertools.product(_catalog_annotations(catalog), (T1, T2, T3)):
        plan = ground_truth_plan(a, task, catalog)
        assert plan.name == a.name
        leftover = classify_leftover(a.state, a.container)
        if leftover is LeftoverClass.NONE:
            assert plan == ground_truth_plan(a, T1, catalog)
        # pour appears exactly for T3 x containing leftover food
        expects_pour = (
            task.task_id == "T3" and leftover is LeftoverClass.CONTAINING_LEFTOVER_FOOD
        )
        assert (plan.placing_type is PlaceType.POUR) == expects_pour
        # uncertain appears exactly for T1 x leftover-class
        expects_uncertain = task.task_id == "T1" and leftover is not LeftoverClass.NONE
        assert (plan.destination is Destination.UNCERTAIN) == expects_uncertain
