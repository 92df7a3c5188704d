from __future__ import annotations

import pytest

from ossa.catalog import load_catalog
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


def make_annotation(
    name: str = "apple",
    color: str = "red",
    size: SizeClass = SizeClass.SMALL,
    shape: ShapeClass = ShapeClass.ROUND,
    container: bool = False,
    state: ObjectState = ObjectState.INTACT,
    destination: Destination = Destination.FRIDGE,
    grasping_type: GraspType = GraspType.TOP_GRASP,
    placing_type: PlaceType = PlaceType.PLACE,
    edible: bool = True,
) -> ObjectAnnotation:
    return ObjectAnnotation(
        name=name,
        color=color,
        size=size,
        shape=shape,
        container=container,
        state=state,
        destination=destination,
        grasping_type=grasping_type,
        placing_type=placing_type,
        edible=edible,
    )


def soup_bowl(name: str = "bowl with soup") -> ObjectAnnotation:
    return make_annotation(
        name=name,
        color="white",
        size=SizeClass.MEDIUM,
        shape=ShapeClass.ROUND,
        container=True,
        state=ObjectState.CONTAINING_LEFTOVER_FOOD,
        destination=Destination.FRIDGE,
        grasping_type=GraspType.EDGE_GRASP,
        placing_type=PlaceType.POUR,
        edible=False,
    )


def half_orange(name: str = "sliced oranges") -> ObjectAnnotation:
    return make_annotation(
        name=name,
        color="orange",
        size=SizeClass.SMALL,
        shape=ShapeClass.ROUND,
        state=ObjectState.LEFTOVER_FOOD,
        destination=Destination.FRIDGE,
    )


@pytest.fixture(scope="session")
def catalog():
    return load_catalog()


@pytest.fixture()
def soup_scene() -> Scene:
    return Scene(scene_id="soup", objects=(soup_bowl(),))


@pytest.fixture()
def mixed_scene() -> Scene:
    return Scene(
        scene_id="mixed",
        objects=(
            soup_bowl(),
            half_orange(),
            make_annotation(name="apple"),
            make_annotation(
                name="napkin",
                color="white",
                shape=ShapeClass.RECTANGLE,
                state=ObjectState.DIRTY,
                destination=Destination.DISHWASHER,
                edible=False,
            ),
        ),
    )
