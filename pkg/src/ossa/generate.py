"""Seeded synthetic scene generation.

Randomness comes from SplitMix64 (the 64-bit mix-and-increment generator
with the golden-gamma increment): pure 64-bit integer arithmetic, so equal
seeds yield byte-identical datasets on every platform.  Each scene draws
from an independent substream keyed by ``(seed, "scene", scene_index)`` and
float draws use the top 53 bits, giving exact cross-platform doubles.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from ossa.catalog import Catalog, CatalogEntry, load_catalog
from ossa.oracle import grasp_for
from ossa.scene import (
    Dataset,
    ObjectAnnotation,
    ObjectState,
    PlaceType,
    Scene,
    indexed_names,
)

_MASK64 = (1 << 64) - 1
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


class SplitMix64:
    """SplitMix64 stream; state advances by the golden gamma per draw."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN_GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def next_float(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] inclusive (modulo draw)."""
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        return lo + self.next_u64() % (hi - lo + 1)

    def choice(self, items: Sequence):
        return items[self.randint(0, len(items) - 1)]


def stable_seed(*parts: int | str) -> int:
    """Fold strings and integers into a 64-bit substream seed (FNV-1a)."""
    h = _FNV_OFFSET
    for part in parts:
        if isinstance(part, str):
            data = part.encode("utf-8")
        else:
            data = (int(part) & _MASK64).to_bytes(8, "little")
        for b in data:
            h = ((h ^ b) * _FNV_PRIME) & _MASK64
    return h


class InvalidConfig(ValueError):
    """Raised for unusable generator configurations."""


@dataclass(frozen=True)
class GenConfig:
    seed: int
    scene_count: int = 40
    objects_per_scene: tuple[int, int] = (3, 6)
    category_weights: Mapping[str, float] | None = None
    state_weights: Mapping[str, Mapping[str, float]] | None = None
    dataset_name: str = "synthetic-tabletop"


def load_gen_config(path: str | Path) -> GenConfig:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    kwargs = dict(raw)
    if "objects_per_scene" in kwargs:
        lo, hi = kwargs["objects_per_scene"]
        kwargs["objects_per_scene"] = (int(lo), int(hi))
    return GenConfig(**kwargs)


def _category_weights(config: GenConfig, catalog: Catalog) -> tuple[list[str], list[float]]:
    categories = list(catalog.entries)
    if not categories:
        raise InvalidConfig("catalog has no categories")
    if config.category_weights is None:
        return categories, [1.0] * len(categories)
    unknown = set(config.category_weights) - set(categories)
    if unknown:
        raise InvalidConfig(f"unknown categories in weights: {sorted(unknown)}")
    weights = [float(config.category_weights.get(c, 0.0)) for c in categories]
    if any(w < 0 for w in weights):
        raise InvalidConfig("category weights must be non-negative")
    if sum(weights) <= 0:
        raise InvalidConfig("category weights sum to zero")
    return categories, weights


def _state_weights(config: GenConfig, entry: CatalogEntry) -> list[float]:
    table = (config.state_weights or {}).get(entry.category)
    if table is None:
        return [1.0] * len(entry.states)
    unknown = set(table) - {s.value for s in entry.states}
    if unknown:
        raise InvalidConfig(
            f"unknown states for '{entry.category}' in weights: {sorted(unknown)}"
        )
    weights = [float(table.get(s.value, 0.0)) for s in entry.states]
    if any(w < 0 for w in weights):
        raise InvalidConfig("state weights must be non-negative")
    if sum(weights) <= 0:
        raise InvalidConfig(f"state weights for '{entry.category}' sum to zero")
    return weights


def _check_config(config: GenConfig, catalog: Catalog) -> None:
    lo, hi = config.objects_per_scene
    if lo < 1 or hi < lo:
        raise InvalidConfig(f"invalid objects_per_scene range ({lo}, {hi})")
    if config.scene_count < 0:
        raise InvalidConfig("scene_count must be >= 0")
    _category_weights(config, catalog)
    for category in config.state_weights or {}:
        entry = catalog.entries.get(category)
        if entry is None:
            raise InvalidConfig(f"state weights given for unknown category '{category}'")
        _state_weights(config, entry)


def _pick_index_weighted(rng: SplitMix64, weights: Sequence[float]) -> int:
    total = 0.0
    for w in weights:
        total += w
    u = rng.next_float() * total
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if u < acc:
            return i
    return len(weights) - 1


def generate_scene(config: GenConfig, scene_index: int, catalog: Catalog | None = None) -> Scene:
    """Generate one scene; deterministic in (config.seed, scene_index)."""
    catalog = catalog or load_catalog()
    _check_config(config, catalog)
    categories, weights = _category_weights(config, catalog)
    rng = SplitMix64(stable_seed(config.seed, "scene", scene_index))
    lo, hi = config.objects_per_scene
    count = rng.randint(lo, hi)
    drawn: list[tuple[CatalogEntry, ObjectState, str, object, object]] = []
    for _ in range(count):
        entry = catalog.entries[categories[_pick_index_weighted(rng, weights)]]
        state = entry.states[
            _pick_index_weighted(rng, _state_weights(config, entry))
        ]
        color = rng.choice(entry.colors)
        size = rng.choice(entry.sizes)
        shape = rng.choice(entry.shapes)
        drawn.append((entry, state, color, size, shape))
    names = indexed_names([entry.display_name(state) for entry, state, *_ in drawn])
    objects = []
    for name, (entry, state, color, size, shape) in zip(names, drawn):
        pours = entry.container and state is ObjectState.CONTAINING_LEFTOVER_FOOD
        objects.append(
            ObjectAnnotation(
                name=name,
                color=color,
                size=size,
                shape=shape,
                container=entry.container,
                state=state,
                destination=entry.destinations[state],
                grasping_type=grasp_for(entry.container, shape, size, catalog),
                placing_type=PlaceType.POUR if pours else PlaceType.PLACE,
                edible=entry.edible,
            )
        )
    return Scene(scene_id=f"scene-{scene_index:03d}", objects=tuple(objects))


def generate_dataset(config: GenConfig, catalog: Catalog | None = None) -> Dataset:
    """Generate ``config.scene_count`` scenes as a stamped dataset."""
    catalog = catalog or load_catalog()
    _check_config(config, catalog)
    scenes = tuple(
        generate_scene(config, index, catalog) for index in range(config.scene_count)
    )
    version = f"gen1+catalog.{catalog.version}+seed.{config.seed}"
    if not scenes:
        version += "+empty"
    return Dataset(
        name=config.dataset_name,
        version=version,
        scenes=scenes,
        catalog_version=catalog.version,
    )
