from __future__ import annotations

import dataclasses

import pytest

from conftest import make_annotation
from ossa.backends import ModularSimBackend, OracleBackend, SceneInput
from ossa.episode import (
    BackendError,
    Command,
    CommandLog,
    EpisodeDriver,
    InteractivePolicy,
    NotAmbiguous,
    PolicyExhausted,
    ScriptedPolicy,
    UnrecognizedAnswer,
    normalize_answer,
    revise_plan,
    run_episode,
    to_commands,
)
from ossa.generate import GenConfig, generate_dataset
from ossa.oracle import LeftoverClass, TaskSpec, classify_leftover, ground_truth_plan
from ossa.plans import UNKNOWN, ObjectManipulationPlan
from ossa.scene import Destination, GraspType, ObjectState, PlaceType, Scene

T1, T2, T3 = TaskSpec.of("T1"), TaskSpec.of("T2"), TaskSpec.of("T3")


def test_normalize_answer_synonyms():
    assert normalize_answer("Keep") == "keep"
    assert normalize_answer("throw it away") == "discard"
    assert normalize_answer("save it") == "keep"
    with pytest.raises(UnrecognizedAnswer):
        normalize_answer("maybe later")
    with pytest.raises(UnrecognizedAnswer):
        normalize_answer("   ")


def test_scripted_policy_validates_on_construction():
    with pytest.raises(UnrecognizedAnswer):
        ScriptedPolicy(global_answer="shrug")
    policy = ScriptedPolicy(global_answer="Discard It", per_object={"half apple": "KEEP"})
    assert policy.answer_for("half apple") == "keep"
    assert policy.answer_for("bowl with soup") == "discard"


def _uncertain_plan(name="bowl with soup", state=ObjectState.CONTAINING_LEFTOVER_FOOD,
                    container=True):
    return ObjectManipulationPlan(
        name=name,
        container=container,
        state=state,
        destination=Destination.UNCERTAIN,
        grasping_type=GraspType.EDGE_GRASP,
        placing_type=PlaceType.PLACE,
    )


def test_revise_keep_goes_to_fridge():
    revised = revise_plan(_uncertain_plan(), "keep")
    assert revised.destination is Destination.FRIDGE
    assert revised.placing_type is PlaceType.PLACE
    assert revised.grasping_type is GraspType.EDGE_GRASP


def test_revise_discard_container_pours_into_dishwasher():
    revised = revise_plan(_uncertain_plan(), "discard")
    assert revised.destination is Destination.DISHWASHER
    assert revised.placing_type is PlaceType.POUR


def test_revise_discard_manipulable_leftover_to_trash():
    plan = _uncertain_plan(name="half orange", state=ObjectState.LEFTOVER_FOOD, container=False)
    revised = revise_plan(plan, "discard")
    assert revised.destination is Destination.TRASH_BIN
    assert revised.placing_type is PlaceType.PLACE


def test_revise_non_uncertain_rejected():
    plan = dataclasses.replace(_uncertain_plan(), destination=Destination.FRIDGE)
    with pytest.raises(NotAmbiguous):
        revise_plan(plan, "keep")


def test_revise_unrecognized_answer():
    with pytest.raises(UnrecognizedAnswer):
        revise_plan(_uncertain_plan(), "incinerate")


def test_revision_matches_task_rules_for_all_leftovers(catalog):
    dataset = generate_dataset(GenConfig(seed=42, scene_count=10))
    checked = 0
    for scene in dataset.scenes:
        for annotation in scene.objects:
            if classify_leftover(annotation.state, annotation.container) is LeftoverClass.NONE:
                continue
            t1_expected = ground_truth_plan(annotation, T1, catalog)
            plan = ObjectManipulationPlan(
                name=annotation.name,
                container=annotation.container,
                state=annotation.state,
                destination=t1_expected.destination,
                grasping_type=t1_expected.grasping_type,
                placing_type=t1_expected.placing_type,
            )
            kept = revise_plan(plan, "keep")
            t2_expected = ground_truth_plan(annotation, T2, catalog)
            assert kept.destination is t2_expected.destination
            assert kept.placing_type is t2_expected.placing_type
            discarded = revise_plan(plan, "discard")
            t3_expected = ground_truth_plan(annotation, T3, catalog)
            assert discarded.destination is t3_expected.destination
            assert discarded.placing_type is t3_expected.placing_type
            checked += 1
    assert checked > 0


def test_to_commands_quarantines_unknown_fields():
    good = ObjectManipulationPlan(
        name="apple",
        destination=Destination.FRIDGE,
        grasping_type=GraspType.TOP_GRASP,
        placing_type=PlaceType.PLACE,
    )
    bad = ObjectManipulationPlan(name="mystery", destination=Destination.FRIDGE)
    commands, quarantined = to_commands([good, bad])
    assert [c.name for c in commands] == ["apple"]
    assert quarantined[0].name == "mystery"
    assert "unknown grasping" in quarantined[0].reasons[0]


def test_to_commands_asserts_on_uncertain():
    with pytest.raises(RuntimeError):
        to_commands([_uncertain_plan()])


def test_command_constructor_rejects_uncertain_and_unknown():
    with pytest.raises(ValueError):
        Command(name="x", grasping_type=GraspType.TOP_GRASP,
                destination=Destination.UNCERTAIN, placing_type=PlaceType.PLACE)
    with pytest.raises(ValueError):
        Command(name="x", grasping_type=UNKNOWN,
                destination=Destination.FRIDGE, placing_type=PlaceType.PLACE)


def test_episode_keep_answer(soup_scene):
    log = CommandLog()
    result = run_episode(
        SceneInput.from_scene(soup_scene), T1, OracleBackend(),
        ScriptedPolicy(global_answer="keep"), executor=log,
    )
    assert len(result.clarifications) == 1
    (command,) = result.commands
    assert command.destination is Destination.FRIDGE
    assert command.placing_type is PlaceType.PLACE
    assert log.batches == [(command,)]


def test_episode_discard_answer(soup_scene):
    result = run_episode(
        SceneInput.from_scene(soup_scene), T1, OracleBackend(),
        ScriptedPolicy(global_answer="discard"),
    )
    (command,) = result.commands
    assert command.destination is Destination.DISHWASHER
    assert command.placing_type is PlaceType.POUR


def test_episode_without_leftovers_has_no_clarifications():
    scene = Scene(
        "plain",
        objects=(
            make_annotation(name="apple"),
            make_annotation(name="napkin", state=ObjectState.DIRTY, edible=False,
                            destination=Destination.DISHWASHER),
        ),
    )
    result = run_episode(
        SceneInput.from_scene(scene), T1, OracleBackend(), ScriptedPolicy(global_answer="keep")
    )
    assert result.clarifications == ()
    assert len(result.commands) == len(scene.objects)


def test_clarification_conservation_on_t1(catalog):
    dataset = generate_dataset(GenConfig(seed=11, scene_count=8))
    for scene in dataset.scenes:
        leftovers = sum(
            classify_leftover(a.state, a.container) is not LeftoverClass.NONE
            for a in scene.objects
        )
        result = run_episode(
            SceneInput.from_scene(scene), T1, OracleBackend(catalog),
            ScriptedPolicy(global_answer="keep"),
        )
        assert len(result.clarifications) == leftovers
        for task in (T2, T3):
            result = run_episode(
                SceneInput.from_scene(scene), task, OracleBackend(catalog),
                ScriptedPolicy(global_answer="keep"),
            )
            assert result.clarifications == ()


def test_safety_no_dispatched_command_is_uncertain_or_unknown(catalog):
    dataset = generate_dataset(GenConfig(seed=13, scene_count=6))
    log = CommandLog()
    for scene in dataset.scenes:
        for task in (T1, T2, T3):
            for backend in (OracleBackend(catalog), ModularSimBackend(catalog=catalog)):
                run_episode(
                    SceneInput.from_scene(scene), task, backend,
                    ScriptedPolicy(global_answer="discard"), executor=log,
                )
    assert log.batches
    for batch in log.batches:
        for command in batch:
            assert command.destination is not Destination.UNCERTAIN
            assert command.destination is not UNKNOWN
            assert command.grasping_type is not UNKNOWN
            assert command.placing_type is not UNKNOWN


def test_episode_deterministic_modulo_timings(mixed_scene):
    first = run_episode(
        SceneInput.from_scene(mixed_scene), T1, OracleBackend(),
        ScriptedPolicy(global_answer="keep"),
    )
    second = run_episode(
        SceneInput.from_scene(mixed_scene), T1, OracleBackend(),
        ScriptedPolicy(global_answer="keep"),
    )
    assert first.without_timings() == second.without_timings()
    assert set(first.timings) == {"plan_s", "clarify_s", "dispatch_s"}


def test_per_object_script_overrides_global(mixed_scene):
    result = run_episode(
        SceneInput.from_scene(mixed_scene), T1, OracleBackend(),
        ScriptedPolicy(global_answer="keep", per_object={"bowl with soup": "discard"}),
    )
    by_name = {c.name: c for c in result.commands}
    assert by_name["bowl with soup"].destination is Destination.DISHWASHER
    assert by_name["sliced oranges"].destination is Destination.FRIDGE


def test_interactive_policy_retries_then_exhausts(soup_scene):
    answers = iter(["hmm", "dunno", "whatever"])
    policy = InteractivePolicy(ask=lambda request: next(answers))
    with pytest.raises(PolicyExhausted):
        run_episode(SceneInput.from_scene(soup_scene), T1, OracleBackend(), policy)


def test_interactive_policy_accepts_late_answer(soup_scene):
    answers = iter(["hmm", "keep"])
    policy = InteractivePolicy(ask=lambda request: next(answers))
    result = run_episode(SceneInput.from_scene(soup_scene), T1, OracleBackend(), policy)
    assert result.commands[0].destination is Destination.FRIDGE


def test_scripted_policy_without_answer_for_object(soup_scene):
    with pytest.raises(PolicyExhausted):
        run_episode(
            SceneInput.from_scene(soup_scene), T1, OracleBackend(),
            ScriptedPolicy(per_object={"other": "keep"}),
        )


def test_backend_failure_wrapped(soup_scene):
    from ossa.backends import BackendDescriptor

    class Exploding:
        accepts = frozenset({"scene"})
        descriptor = BackendDescriptor(backend_id="boom", options={})

        def plan(self, scene_input, task, mode):
            raise RuntimeError("kaput")

    with pytest.raises(BackendError):
        run_episode(
            SceneInput.from_scene(soup_scene), T1, Exploding(),
            ScriptedPolicy(global_answer="keep"),
        )


def test_driver_rejects_wrong_object_answer(soup_scene):
    from ossa.backends import plan_with_backend

    report = plan_with_backend(OracleBackend(), SceneInput.from_scene(soup_scene), T1).report
    driver = EpisodeDriver(T1, report)
    with pytest.raises(NotAmbiguous):
        driver.submit_answer("apple", "keep")
    request = driver.pending()
    driver.submit_answer(request.object_name, "keep")
    assert driver.finished
