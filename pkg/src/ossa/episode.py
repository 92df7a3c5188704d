"""Per-episode orchestration.

The loop body: generate plans once, route every plan whose destination is
uncertain through exactly one clarification (keep/discard), revise it with
the task rules, quarantine anything with unknown mandatory fields, and
dispatch the validated commands to the executor stub.  The driver exposes
the same walk step-by-step so the HTTP session service can pause on
clarifications.
"""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass, field
from typing import Callable, Mapping, Union

from ossa.backends import PlanBackend, SceneInput, plan_with_backend
from ossa.labels import EmptyLabel, canonicalize_label, field_synonyms
from ossa.oracle import TaskSpec
from ossa.plans import UNKNOWN, ObjectManipulationPlan, ParseReport
from ossa.prompts import PromptMode
from ossa.scene import Destination, GraspType, PlaceType, ObjectState

RECOGNIZED_ANSWERS = ("keep", "discard")

#: Plan fields a command cannot carry as Unknown.
_MANDATORY_FIELDS = ("destination", "grasping_type", "placing_type")


class NotAmbiguous(ValueError):
    """revise_plan called on a plan whose destination is not uncertain."""


class UnrecognizedAnswer(ValueError):
    """Answer outside the recognized set after normalization."""


class PolicyExhausted(RuntimeError):
    """Interactive answer retries exceeded; the episode aborts."""


class BackendError(RuntimeError):
    """Backend failure; the episode aborted with a partial trace."""


def normalize_answer(text: str) -> str:
    """Map a free-form reply onto keep/discard; raises UnrecognizedAnswer."""
    try:
        token = canonicalize_label(text).token
    except EmptyLabel:
        raise UnrecognizedAnswer("empty answer") from None
    token = field_synonyms("answer").get(token, token)
    if token not in RECOGNIZED_ANSWERS:
        raise UnrecognizedAnswer(f"unrecognized answer {text!r}; say keep or discard")
    return token


@dataclass(frozen=True)
class ScriptedPolicy:
    """Fixed answers: one global default and/or per-object overrides."""

    global_answer: str | None = None
    per_object: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.global_answer is not None:
            object.__setattr__(self, "global_answer", normalize_answer(self.global_answer))
        object.__setattr__(
            self,
            "per_object",
            {name: normalize_answer(answer) for name, answer in self.per_object.items()},
        )

    def answer_for(self, object_name: str) -> str:
        answer = self.per_object.get(object_name, self.global_answer)
        if answer is None:
            raise PolicyExhausted(f"no scripted answer for '{object_name}'")
        return answer


@dataclass(frozen=True)
class InteractivePolicy:
    """Answers come from a session-bound callback; bounded retries."""

    ask: Callable[["ClarificationRequest"], str]
    max_retries: int = 3


UserPolicy = Union[ScriptedPolicy, InteractivePolicy]


@dataclass(frozen=True)
class ClarificationRequest:
    object_name: str
    detected_state: object
    question: str
    allowed_answers: tuple[str, ...] = RECOGNIZED_ANSWERS


@dataclass(frozen=True)
class Command:
    """Dispatchable command; never uncertain, never Unknown."""

    name: str
    grasping_type: GraspType
    destination: Destination
    placing_type: PlaceType

    def __post_init__(self):
        if self.destination is Destination.UNCERTAIN:
            raise ValueError("command destination cannot be uncertain")
        for field_name in ("grasping_type", "destination", "placing_type"):
            if getattr(self, field_name) is UNKNOWN:
                raise ValueError(f"command {field_name} cannot be Unknown")


@dataclass(frozen=True)
class QuarantinedPlan:
    name: str
    reasons: tuple[str, ...]


@dataclass(frozen=True)
class ClarificationRecord:
    request: ClarificationRequest
    answer: str


@dataclass(frozen=True)
class EpisodeResult:
    task_id: str
    plans_initial: tuple[ObjectManipulationPlan, ...]
    plans_final: tuple[ObjectManipulationPlan, ...]
    clarifications: tuple[ClarificationRecord, ...]
    commands: tuple[Command, ...]
    quarantined: tuple[QuarantinedPlan, ...]
    warnings: tuple[str, ...]
    timings: Mapping[str, float]

    def without_timings(self) -> "EpisodeResult":
        return dataclasses.replace(self, timings={})


class CommandLog:
    """Validating executor stub: records what a real robot would receive."""

    def __init__(self):
        self.batches: list[tuple[Command, ...]] = []

    def dispatch(self, commands: tuple[Command, ...]) -> None:
        for command in commands:
            assert command.destination is not Destination.UNCERTAIN
        self.batches.append(commands)


def _state_phrase(state: object) -> str:
    if isinstance(state, ObjectState):
        return state.value
    return "an unclear state"


def make_clarification(plan: ObjectManipulationPlan) -> ClarificationRequest:
    question = (
        f"The {plan.name} looks like {_state_phrase(plan.state)}. "
        "Should I keep it or discard it?"
    )
    return ClarificationRequest(
        object_name=plan.name, detected_state=plan.state, question=question
    )


def revise_plan(plan: ObjectManipulationPlan, answer: str) -> ObjectManipulationPlan:
    """Resolve an uncertain destination with the user's keep/discard answer.

    keep applies the keep-task rule (fridge); discard applies the
    discard-task rule, pouring container contents before the dishwasher.
    All other fields are preserved.
    """
    if plan.destination is not Destination.UNCERTAIN:
        raise NotAmbiguous(f"plan for '{plan.name}' is not uncertain")
    answer = normalize_answer(answer)
    if answer == "keep":
        return dataclasses.replace(
            plan, destination=Destination.FRIDGE, placing_type=PlaceType.PLACE
        )
    holds_contents = (
        plan.state is ObjectState.CONTAINING_LEFTOVER_FOOD or plan.container is True
    )
    if holds_contents:
        return dataclasses.replace(
            plan, destination=Destination.DISHWASHER, placing_type=PlaceType.POUR
        )
    return dataclasses.replace(
        plan, destination=Destination.TRASH_BIN, placing_type=PlaceType.PLACE
    )


def to_commands(
    plans: tuple[ObjectManipulationPlan, ...] | list[ObjectManipulationPlan],
) -> tuple[tuple[Command, ...], tuple[QuarantinedPlan, ...]]:
    """Commands for finalized plans; Unknown mandatory fields quarantine."""
    commands: list[Command] = []
    quarantined: list[QuarantinedPlan] = []
    for plan in plans:
        if plan.destination is Destination.UNCERTAIN:
            raise RuntimeError(
                f"internal invariant violation: unresolved uncertain plan '{plan.name}'"
            )
        reasons = tuple(
            f"unknown {field_name.replace('_type', '')}"
            for field_name in _MANDATORY_FIELDS
            if getattr(plan, field_name) is UNKNOWN
        )
        if reasons:
            quarantined.append(QuarantinedPlan(name=plan.name, reasons=reasons))
            continue
        commands.append(
            Command(
                name=plan.name,
                grasping_type=plan.grasping_type,
                destination=plan.destination,
                placing_type=plan.placing_type,
            )
        )
    return tuple(commands), tuple(quarantined)


class EpisodeDriver:
    """Stepwise walk over one episode's plans.

    ``pending()`` yields the next unresolved clarification (in plan order);
    ``submit_answer`` revises that plan; ``finalize`` builds the result and
    dispatches commands.
    """

    def __init__(self, task: TaskSpec, report: ParseReport):
        self.task = task
        self.report = report
        self._plans: list[ObjectManipulationPlan] = list(report.plans)
        self._cursor = 0
        self._clarifications: list[ClarificationRecord] = []
        self._advance()

    def _advance(self) -> None:
        while self._cursor < len(self._plans):
            if self._plans[self._cursor].destination is Destination.UNCERTAIN:
                return
            self._cursor += 1

    def pending(self) -> ClarificationRequest | None:
        if self._cursor >= len(self._plans):
            return None
        return make_clarification(self._plans[self._cursor])

    @property
    def finished(self) -> bool:
        return self.pending() is None

    def submit_answer(self, object_name: str, answer: str) -> ObjectManipulationPlan:
        request = self.pending()
        if request is None:
            raise NotAmbiguous("no clarification pending")
        if object_name != request.object_name:
            raise NotAmbiguous(
                f"pending clarification is for '{request.object_name}', not '{object_name}'"
            )
        revised = revise_plan(self._plans[self._cursor], answer)
        self._plans[self._cursor] = revised
        self._clarifications.append(
            ClarificationRecord(request=request, answer=normalize_answer(answer))
        )
        self._cursor += 1
        self._advance()
        return revised

    def current_plans(self) -> tuple[ObjectManipulationPlan, ...]:
        return tuple(self._plans)

    def finalize(
        self,
        executor: CommandLog | None = None,
        timings: Mapping[str, float] | None = None,
    ) -> EpisodeResult:
        if not self.finished:
            raise RuntimeError("episode still has pending clarifications")
        started = time.perf_counter()
        commands, quarantined = to_commands(self._plans)
        if commands and executor is not None:
            executor.dispatch(commands)
        dispatch_s = time.perf_counter() - started
        all_timings = dict(timings or {})
        all_timings["dispatch_s"] = dispatch_s
        return EpisodeResult(
            task_id=self.task.task_id,
            plans_initial=self.report.plans,
            plans_final=tuple(self._plans),
            clarifications=tuple(self._clarifications),
            commands=commands,
            quarantined=quarantined,
            warnings=self.report.warnings,
            timings=all_timings,
        )


def _resolve_answer(policy: UserPolicy, request: ClarificationRequest) -> str:
    if isinstance(policy, ScriptedPolicy):
        return policy.answer_for(request.object_name)
    attempts = 0
    while attempts < policy.max_retries:
        raw = policy.ask(request)
        attempts += 1
        try:
            return normalize_answer(raw)
        except UnrecognizedAnswer:
            continue
    raise PolicyExhausted(
        f"no recognized answer for '{request.object_name}' after {attempts} attempts"
    )


def run_episode(
    scene_input: SceneInput,
    task: TaskSpec,
    backend: PlanBackend,
    policy: UserPolicy,
    mode: PromptMode = PromptMode.ZERO_SHOT,
    executor: CommandLog | None = None,
) -> EpisodeResult:
    """Run one full episode: plan, clarify, revise, dispatch."""
    timings: dict[str, float] = {}
    started = time.perf_counter()
    try:
        result = plan_with_backend(backend, scene_input, task, mode)
    except Exception as exc:
        raise BackendError(f"plan generation failed: {exc}") from exc
    timings["plan_s"] = time.perf_counter() - started
    driver = EpisodeDriver(task, result.report)
    started = time.perf_counter()
    while True:
        request = driver.pending()
        if request is None:
            break
        answer = _resolve_answer(policy, request)
        driver.submit_answer(request.object_name, answer)
    timings["clarify_s"] = time.perf_counter() - started
    return driver.finalize(executor=executor, timings=timings)
