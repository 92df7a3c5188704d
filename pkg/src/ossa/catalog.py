"""Object catalog: per-category capabilities, naming variants, and defaults.

The catalog is the single data source for what a category can be (container
or not, edible or not, which states), how a state variant is named ("half
apple", "bowl with soup"), which attribute values the generator may draw,
and the per-state default destination.  The grasp-rule parameters live here
too so the reference planner stays data-driven.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

from ossa.scene import (
    Destination,
    ObjectState,
    ShapeClass,
    SizeClass,
)


@dataclass(frozen=True)
class CatalogEntry:
    category: str
    container: bool
    edible: bool
    states: tuple[ObjectState, ...]
    default_state: ObjectState
    names: Mapping[ObjectState, str]
    colors: tuple[str, ...]
    sizes: tuple[SizeClass, ...]
    shapes: tuple[ShapeClass, ...]
    destinations: Mapping[ObjectState, Destination]

    def display_name(self, state: ObjectState) -> str:
        """Annotation name for this category in the given state."""
        return self.names.get(state, self.category)

    def caption_phrase(self, state: ObjectState) -> str:
        """How a faithful captioner would word this category in this state.

        Named variants use the variant name; the default state uses the bare
        category name; remaining states (clean/dirty) get an adjective.
        """
        if state in self.names:
            return self.names[state]
        if state is self.default_state:
            return self.category
        return f"{state.value} {self.category}"


class Catalog:
    """Immutable lookup structure over catalog entries."""

    def __init__(
        self,
        version: str,
        entries: list[CatalogEntry],
        edge_shapes: frozenset[ShapeClass],
        edge_sizes: frozenset[SizeClass],
    ):
        self.version = version
        self.entries: dict[str, CatalogEntry] = {e.category: e for e in entries}
        self.grasp_edge_shapes = edge_shapes
        self.grasp_edge_sizes = edge_sizes
        self._category_by_display: dict[str, str] = {}
        self._by_phrase: dict[str, tuple[str, ObjectState]] = {}
        for entry in entries:
            for state in entry.states:
                self._category_by_display.setdefault(entry.display_name(state), entry.category)
                self._by_phrase.setdefault(entry.caption_phrase(state), (entry.category, state))
                self._by_phrase.setdefault(entry.display_name(state), (entry.category, state))

    def entry(self, category: str) -> CatalogEntry | None:
        return self.entries.get(category)

    def category_for_display(self, stem: str) -> str | None:
        """Category behind an annotation name stem ('half apple' -> 'apple')."""
        return self._category_by_display.get(stem)

    def lookup_phrase(self, phrase: str) -> tuple[str, ObjectState] | None:
        """Resolve a caption phrase to (category, state); None when unknown."""
        return self._by_phrase.get(phrase)


def _parse_entry(category: str, raw: dict) -> CatalogEntry:
    states = tuple(ObjectState(s) for s in raw["states"])
    names = {ObjectState(s): n for s, n in raw.get("names", {}).items()}
    destinations = {ObjectState(s): Destination(d) for s, d in raw["destinations"].items()}
    entry = CatalogEntry(
        category=category,
        container=bool(raw["container"]),
        edible=bool(raw["edible"]),
        states=states,
        default_state=ObjectState(raw["default_state"]),
        names=MappingProxyType(names),
        colors=tuple(raw["colors"]),
        sizes=tuple(SizeClass(s) for s in raw["sizes"]),
        shapes=tuple(ShapeClass(s) for s in raw["shapes"]),
        destinations=MappingProxyType(destinations),
    )
    _check_entry(entry)
    return entry


def _check_entry(entry: CatalogEntry) -> None:
    from ossa.scene import CONTAINER_STATES, EDIBLE_STATES, INEDIBLE_STATES

    if entry.container:
        allowed = CONTAINER_STATES
    elif entry.edible:
        allowed = EDIBLE_STATES
    else:
        allowed = INEDIBLE_STATES
    bad = [s.value for s in entry.states if s not in allowed]
    if bad:
        raise ValueError(f"catalog entry '{entry.category}' allows incompatible states: {bad}")
    if entry.default_state not in entry.states:
        raise ValueError(f"catalog entry '{entry.category}' default state not in states")
    missing = [s.value for s in entry.states if s not in entry.destinations]
    if missing:
        raise ValueError(f"catalog entry '{entry.category}' missing destinations for: {missing}")
    if not entry.colors or not entry.sizes or not entry.shapes:
        raise ValueError(f"catalog entry '{entry.category}' has empty attribute options")


def parse_catalog(raw: dict) -> Catalog:
    entries = [_parse_entry(cat, spec) for cat, spec in raw["categories"].items()]
    rule = raw.get("grasp_rule", {})
    return Catalog(
        version=raw["version"],
        entries=entries,
        edge_shapes=frozenset(ShapeClass(s) for s in rule.get("edge_shapes", [])),
        edge_sizes=frozenset(SizeClass(s) for s in rule.get("edge_sizes", [])),
    )


@lru_cache(maxsize=4)
def load_catalog(path: str | Path | None = None) -> Catalog:
    """Load a catalog file, defaulting to the packaged fixture (cached)."""
    if path is None:
        text = resources.files("ossa.fixtures").joinpath("catalog.json").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return parse_catalog(json.loads(text))
