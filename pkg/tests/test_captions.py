from __future__ import annotations

import math

import pytest

from conftest import make_annotation
from ossa.captions import (
    CaptionErrorModel,
    parse_caption_line,
    parse_captions,
    scene_description,
    simulate_captions,
)
from ossa.generate import GenConfig, generate_dataset
from ossa.labels import canonicalize_label
from ossa.scene import ObjectState, Scene


def binom_cdf(k: int, n: int, p: float) -> float:
    return sum(math.comb(n, i) * p**i * (1 - p) ** (n - i) for i in range(k + 1))


def binom_interval_99(n: int, p: float) -> tuple[int, int]:
    lo = 0
    while binom_cdf(lo, n, p) < 0.005:
        lo += 1
    hi = lo
    while binom_cdf(hi, n, p) < 0.995:
        hi += 1
    return lo, hi


def _qualified_scene(catalog) -> Scene:
    objects = []
    for category, state in [
        ("apple", ObjectState.LEFTOVER_FOOD),
        ("bowl", ObjectState.CONTAINING_LEFTOVER_FOOD),
        ("plate", ObjectState.DIRTY),
        ("bananas", ObjectState.PEEL),
    ]:
        entry = catalog.entries[category]
        objects.append(
            make_annotation(
                name=entry.display_name(state),
                color=entry.colors[0],
                size=entry.sizes[0],
                shape=entry.shapes[0],
                container=entry.container,
                state=state,
                destination=entry.destinations[state],
                edible=entry.edible,
            )
        )
    return Scene(scene_id="qualified", objects=tuple(objects))


def test_zero_noise_captions_contain_state_words(catalog):
    scene = _qualified_scene(catalog)
    captions = simulate_captions(scene, CaptionErrorModel(), catalog)
    assert "half apple" in captions
    assert "bowl with soup" in captions
    assert "dirty plate" in captions
    assert "banana peel" in captions
    assert len(captions.splitlines()) == len(scene.objects)


def test_saturated_omission_drops_every_qualifier(catalog):
    scene = _qualified_scene(catalog)
    captions = simulate_captions(scene, CaptionErrorModel(p_state_omit=1.0), catalog)
    for qualifier in ("half", "soup", "dirty", "peel"):
        assert qualifier not in captions
    # objects are still reported under their bare category names
    assert "apple" in captions and "bowl" in captions and "plate" in captions


def test_captions_deterministic(catalog):
    scene = _qualified_scene(catalog)
    em = CaptionErrorModel(p_state_omit=0.4, p_object_miss=0.3, seed=11)
    assert simulate_captions(scene, em, catalog) == simulate_captions(scene, em, catalog)


def test_object_miss_within_binomial_interval(catalog):
    config = GenConfig(seed=3, scene_count=20, objects_per_scene=(5, 5))
    dataset = generate_dataset(config)
    total = sum(len(s.objects) for s in dataset.scenes)
    assert total == 100
    em = CaptionErrorModel(p_object_miss=0.5, seed=99)
    retained = sum(
        len(simulate_captions(s, em, catalog).splitlines()) for s in dataset.scenes
    )
    lo, hi = binom_interval_99(100, 0.5)
    assert lo <= retained <= hi, (retained, lo, hi)


def test_probability_bounds_validated():
    with pytest.raises(ValueError):
        CaptionErrorModel(p_state_omit=1.5)
    with pytest.raises(ValueError):
        CaptionErrorModel(p_object_miss=-0.1)


def test_caption_round_trip_perception(catalog):
    scene = _qualified_scene(catalog)
    captions = scene_description(scene, catalog)
    percepts = parse_captions(captions, catalog)
    assert [(p.category, p.state) for p in percepts] == [
        ("apple", ObjectState.LEFTOVER_FOOD),
        ("bowl", ObjectState.CONTAINING_LEFTOVER_FOOD),
        ("plate", ObjectState.DIRTY),
        ("bananas", ObjectState.PEEL),
    ]
    for perceived, annotation in zip(percepts, scene.objects):
        assert perceived.color == annotation.color
        assert perceived.size is annotation.size
        assert perceived.shape is annotation.shape


def test_bare_name_perceived_as_default_state(catalog):
    perceived = parse_caption_line("a white medium round plate.", catalog)
    assert perceived.category == "plate"
    assert perceived.state is ObjectState.CLEAN
    perceived = parse_caption_line("a red small round apple.", catalog)
    assert perceived.state is ObjectState.INTACT


def test_unknown_phrase_has_no_category(catalog):
    perceived = parse_caption_line("a purple small round gemstone.", catalog)
    assert perceived.category is None
    assert perceived.phrase == "gemstone"


def test_unknown_object_names_pass_through(catalog):
    scene = Scene(
        "s",
        objects=(make_annotation(name="pear", color="green"),),
    )
    captions = simulate_captions(scene, CaptionErrorModel(), catalog)
    assert "pear" in captions


def test_monotone_coupling_per_object(catalog):
    # the same object never regains its qualifier as p grows
    dataset = generate_dataset(GenConfig(seed=5, scene_count=6))
    grid = [0.0, 0.25, 0.5, 0.75, 1.0]
    for scene in dataset.scenes:
        dropped_prev: set[int] = set()
        for p in grid:
            em = CaptionErrorModel(p_state_omit=p, seed=7)
            lines = simulate_captions(scene, em, catalog).splitlines()
            dropped = set()
            for i, (line, a) in enumerate(zip(lines, scene.objects)):
                stem = canonicalize_label(a.name).stem
                category = catalog.category_for_display(stem)
                phrase = catalog.entries[category].caption_phrase(a.state)
                if phrase not in line:
                    dropped.add(i)
            assert dropped_prev <= dropped
            dropped_prev = dropped
