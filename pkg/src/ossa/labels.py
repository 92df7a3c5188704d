"""Label cleanup and synonym mapping.

The synonym table is data, not code: ``fixtures/synonyms.json`` ships a
versioned flat label table plus per-field value tables so that metric runs
stay comparable across table revisions.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources


class EmptyLabel(ValueError):
    """Raised when a label is blank after trimming."""


@dataclass(frozen=True)
class CanonicalLabel:
    token: str
    stem: str
    index: int | None = None


@dataclass(frozen=True)
class SynonymTable:
    version: str
    labels: dict[str, str]
    fields: dict[str, dict[str, str]]


_WS = re.compile(r"\s+")
_TRAILING_INDEX = re.compile(r"^(?P<stem>.*\S)\s+(?P<index>\d+)$")
_STRIP_CHARS = " \t\r\n.,:;!?\"'`"


@lru_cache(maxsize=1)
def synonym_table() -> SynonymTable:
    """Load the packaged synonym fixture (cached)."""
    raw = json.loads(
        resources.files("ossa.fixtures").joinpath("synonyms.json").read_text("utf-8")
    )
    return SynonymTable(
        version=raw["version"],
        labels=dict(raw["labels"]),
        fields={name: dict(entries) for name, entries in raw["fields"].items()},
    )


def canonicalize_label(raw: str, table: SynonymTable | None = None) -> CanonicalLabel:
    """Canonicalize a free-form label.

    Lowercases, trims, collapses whitespace (underscores count as
    whitespace), splits a trailing integer index off into the category stem,
    and maps the stem through the synonym table.  Raises :class:`EmptyLabel`
    on blank input.
    """
    if table is None:
        table = synonym_table()
    text = _WS.sub(" ", raw.replace("_", " ").lower()).strip(_STRIP_CHARS)
    if not text:
        raise EmptyLabel(f"blank label: {raw!r}")
    match = _TRAILING_INDEX.match(text)
    if match:
        stem, index = match.group("stem"), int(match.group("index"))
    else:
        stem, index = text, None
    stem = table.labels.get(stem, stem)
    token = f"{stem} {index}" if index is not None else stem
    return CanonicalLabel(token=token, stem=stem, index=index)


def field_synonyms(field_name: str, table: SynonymTable | None = None) -> dict[str, str]:
    """Field-specific value synonyms (empty dict when the field has none)."""
    if table is None:
        table = synonym_table()
    return table.fields.get(field_name, {})
