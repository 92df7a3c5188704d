"""Extract, parse, and normalize model-emitted manipulation plans.

Models wrap plan JSON in prose, code fences, single quotes, trailing
commas, and bare key/value documents without outer braces; everything here
is tolerant.  Values that cannot be mapped onto the closed vocabulary
become the ``UNKNOWN`` sentinel (never an exception) so scoring can give
per-field partial credit, and no top-level key is ever dropped silently:
``len(plans) + discarded_fragments`` accounts for every key occurrence.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

from ossa.labels import EmptyLabel, canonicalize_label, field_synonyms
from ossa.scene import (
    Destination,
    GraspType,
    ObjectState,
    PlaceType,
    ShapeClass,
    SizeClass,
)


class UnknownValue:
    """Sentinel for unparseable or missing plan fields.

    Distinct from every canonical value: comparisons with anything but the
    sentinel itself are False, so scoring never credits unknowns.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Unknown"

    def __deepcopy__(self, memo):
        return self

    def __copy__(self):
        return self


UNKNOWN = UnknownValue()

PLAN_FIELDS = (
    "color",
    "size",
    "shape",
    "container",
    "state",
    "destination",
    "grasping_type",
    "placing_type",
)

# Annotation metadata that may appear next to plan fields; parsed documents
# carry it but plans do not score it.
_IGNORED_FIELDS = frozenset({"edible"})

_ENUM_FIELDS = {
    "size": SizeClass,
    "shape": ShapeClass,
    "state": ObjectState,
    "destination": Destination,
    "grasping_type": GraspType,
    "placing_type": PlaceType,
}


@dataclass(frozen=True)
class ObjectManipulationPlan:
    """One parsed per-object plan; any field may be UNKNOWN."""

    name: str
    color: object = UNKNOWN
    size: object = UNKNOWN
    shape: object = UNKNOWN
    container: object = UNKNOWN
    state: object = UNKNOWN
    destination: object = UNKNOWN
    grasping_type: object = UNKNOWN
    placing_type: object = UNKNOWN
    raw_source: str = field(default="", compare=False)


@dataclass(frozen=True)
class ParseReport:
    plans: tuple[ObjectManipulationPlan, ...]
    warnings: tuple[str, ...] = ()
    discarded_fragments: int = 0


class NoStructuredContent(ValueError):
    """Input text contains no recognizable structured block."""


class MalformedBlock(ValueError):
    """Unrecoverable syntax inside a structured block."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (offset {offset})"
        super().__init__(message)
        self.offset = offset


_FENCE_SPAN = re.compile(r"```(.*?)```", re.DOTALL)
# A document-level key/value sequence without outer braces.  The key must be
# quoted (as in the annotation format), so prose labels like "Plan: {...}"
# route to balanced-brace extraction instead.
_BARE_MAPPING = re.compile(r"^\s*[\"'][^\"'\n]+[\"']\s*:\s*\{")
_LANG_LINE = re.compile(r"[a-zA-Z0-9_-]*\s*")


def _fence_contents(text: str) -> list[str]:
    out = []
    for match in _FENCE_SPAN.finditer(text):
        body = match.group(1)
        first, sep, rest = body.partition("\n")
        if sep and _LANG_LINE.fullmatch(first):
            body = rest
        out.append(body.strip())
    return out


def _balanced_blocks(text: str) -> list[str]:
    """Maximal balanced brace spans, quote-aware inside braces only."""
    blocks: list[str] = []
    depth = 0
    start = -1
    quote: str | None = None
    escape = False
    for i, ch in enumerate(text):
        if depth == 0:
            if ch == "{":
                start = i
                depth = 1
            continue
        if quote:
            if escape:
                escape = False
            elif ch == "\\":
                escape = True
            elif ch == quote:
                quote = None
            continue
        if ch in "\"'":
            quote = ch
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                blocks.append(text[start : i + 1])
    return blocks


def _has_structure(text: str) -> bool:
    return bool(_balanced_blocks(text)) or bool(_BARE_MAPPING.match(text))


def extract_structured_block(text: str) -> list[str]:
    """Candidate structured blocks in order, preferring fenced regions.

    A document that is itself a sequence of ``"name": {...}`` entries (the
    annotation format without outer braces) is returned whole.  Raises
    :class:`NoStructuredContent` when nothing structured exists.
    """
    if not text or not text.strip():
        raise NoStructuredContent("empty text")
    fenced = [body for body in _fence_contents(text) if _has_structure(body)]
    if fenced:
        return fenced
    stripped = text.strip()
    if not stripped.startswith("{") and _BARE_MAPPING.match(stripped):
        return [stripped]
    blocks = _balanced_blocks(text)
    if blocks:
        return blocks
    raise NoStructuredContent("no balanced structured block found")


def normalize_value(field_name: str, raw: object):
    """Map free-form field text onto the closed vocabulary.

    Canonicalizes the label, applies field-specific synonyms, then parses
    the enumeration (booleans for ``container``, cleaned text for
    ``color``).  Returns UNKNOWN on any miss; never raises on bad text.
    """
    if field_name not in PLAN_FIELDS:
        raise ValueError(f"unknown plan field {field_name!r}")
    if isinstance(raw, UnknownValue) or raw is None:
        return UNKNOWN
    if field_name == "container" and isinstance(raw, bool):
        return raw
    try:
        canonical = canonicalize_label(str(raw)).token
    except EmptyLabel:
        return UNKNOWN
    canonical = field_synonyms(field_name).get(canonical, canonical)
    if field_name == "color":
        return canonical
    if field_name == "container":
        if canonical == "true":
            return True
        if canonical == "false":
            return False
        return UNKNOWN
    try:
        return _ENUM_FIELDS[field_name](canonical)
    except ValueError:
        return UNKNOWN


class _Pairs(list):
    """Marker type so JSON objects are distinguishable from arrays."""


def _repair_block(block: str) -> str:
    t = block.strip()
    if not t.startswith("{"):
        t = "{" + t + "}"
    t = re.sub(r"\bTrue\b", "true", t)
    t = re.sub(r"\bFalse\b", "false", t)
    t = re.sub(r"\bNone\b", "null", t)
    # single-quoted strings -> double-quoted
    t = re.sub(
        r"'((?:[^'\\]|\\.)*)'",
        lambda m: json.dumps(m.group(1).replace("\\'", "'")),
        t,
    )
    # unquoted keys
    t = re.sub(
        r"([{,]\s*)([A-Za-z_][A-Za-z0-9_ \-]*?)(\s*:)",
        lambda m: m.group(1) + json.dumps(m.group(2).strip()) + m.group(3),
        t,
    )
    # unquoted scalar values (reserved words stay bare)
    def _quote_value(m: re.Match) -> str:
        v = m.group(2).strip()
        if v in ("true", "false", "null"):
            return m.group(0)
        return m.group(1) + json.dumps(v) + m.group(3)

    t = re.sub(r"(:\s*)([A-Za-z_][A-Za-z0-9_ \-]*?)(\s*[,}\]])", _quote_value, t)
    # missing commas between entries (valid JSON never abuts '}' and '"')
    t = re.sub(r"\}(\s*)(\")", r"},\1\2", t)
    # trailing commas
    t = re.sub(r",(\s*[}\]])", r"\1", t)
    return t


def _loads_tolerant(block: str) -> _Pairs:
    try:
        data = json.loads(block, object_pairs_hook=_Pairs)
    except json.JSONDecodeError:
        repaired = _repair_block(block)
        try:
            data = json.loads(repaired, object_pairs_hook=_Pairs)
        except json.JSONDecodeError as exc:
            raise MalformedBlock(exc.msg, offset=exc.pos) from exc
    if not isinstance(data, _Pairs):
        raise MalformedBlock("top-level structure must be an object")
    return data


def _field_key(raw_key: str) -> str:
    return raw_key.strip().lower().replace(" ", "_")


def _coerce_field(field_name: str, value: object, name: str, warnings: list[str]):
    if value is None:
        return UNKNOWN
    if isinstance(value, (list, dict)):
        warnings.append(f"unmapped value {value!r} for {field_name} of '{name}'")
        return UNKNOWN
    if field_name == "container" and isinstance(value, bool):
        return value
    out = normalize_value(field_name, value)
    if out is UNKNOWN:
        warnings.append(f"unmapped value '{value}' for {field_name} of '{name}'")
    return out


def parse_plans(block: str) -> ParseReport:
    """Parse one structured block into plans.

    One plan per top-level key; tolerant of single quotes, unquoted keys,
    and trailing commas.  Unknown keys and unmappable values produce
    warnings; missing fields become UNKNOWN silently; non-object entries
    and shadowed duplicates are counted as discarded fragments.
    """
    data = _loads_tolerant(block)
    warnings: list[str] = []
    discarded = 0
    plans: list[ObjectManipulationPlan] = []
    position: dict[str, int] = {}
    for key, value in data:
        name = str(key).strip()
        if not isinstance(value, _Pairs):
            discarded += 1
            warnings.append(f"discarded non-object entry '{name}'")
            continue
        fields: dict[str, object] = {f: UNKNOWN for f in PLAN_FIELDS}
        for raw_key, raw_value in value:
            field_name = _field_key(str(raw_key))
            if field_name in _IGNORED_FIELDS:
                continue
            if field_name not in PLAN_FIELDS:
                warnings.append(f"unknown key '{raw_key}' for '{name}'")
                continue
            fields[field_name] = _coerce_field(field_name, raw_value, name, warnings)
        plan = ObjectManipulationPlan(
            name=name,
            raw_source=json.dumps(_to_plain(value), ensure_ascii=True),
            **fields,
        )
        if name in position:
            plans[position[name]] = plan
            discarded += 1
            warnings.append(f"duplicate plan for '{name}'; kept the last occurrence")
        else:
            position[name] = len(plans)
            plans.append(plan)
    return ParseReport(
        plans=tuple(plans),
        warnings=tuple(warnings),
        discarded_fragments=discarded,
    )


def _to_plain(value: object):
    if isinstance(value, _Pairs):
        return {str(k): _to_plain(v) for k, v in value}
    if isinstance(value, list):
        return [_to_plain(v) for v in value]
    return value


def parse_model_output(text: str) -> ParseReport:
    """Extract every structured block and merge the parsed plans.

    Duplicate object names across blocks keep the last occurrence, with a
    warning and the shadowed plan counted as discarded.
    """
    blocks = extract_structured_block(text)
    merged: list[ObjectManipulationPlan] = []
    warnings: list[str] = []
    discarded = 0
    position: dict[str, int] = {}
    for block in blocks:
        report = parse_plans(block)
        warnings.extend(report.warnings)
        discarded += report.discarded_fragments
        for plan in report.plans:
            if plan.name in position:
                merged[position[plan.name]] = plan
                discarded += 1
                warnings.append(
                    f"duplicate plan for '{plan.name}' across blocks; kept the last"
                )
            else:
                position[plan.name] = len(merged)
                merged.append(plan)
    return ParseReport(
        plans=tuple(merged),
        warnings=tuple(warnings),
        discarded_fragments=discarded,
    )


def emit_plans(plans: Iterable[ObjectManipulationPlan]) -> str:
    """Serialize plans in the canonical annotation format.

    UNKNOWN fields are omitted; reparsing restores them as UNKNOWN, so
    emit-then-parse is the identity on plans.
    """
    doc: dict[str, dict] = {}
    for plan in plans:
        entry: dict = {}
        for field_name in PLAN_FIELDS:
            value = getattr(plan, field_name)
            if value is UNKNOWN:
                continue
            entry[field_name] = value.value if isinstance(value, Enum) else value
        doc[plan.name] = entry
    return json.dumps(doc, indent=2, ensure_ascii=True)
