"""Scene-to-text captioning with a seeded state-blindness error model.

Stands in for a dense captioner.  The error model reproduces the typical
perception gap: with probability ``p_state_omit`` the state qualifier is
dropped from a caption ("half apple" -> "apple", "dirty plate" ->
"plate"), and with probability ``p_object_miss`` the object is not
captioned at all.  Draws are keyed per (seed, scene, object position), so
raising a probability only ever degrades more objects, never different
ones.
"""

from __future__ import annotations

from dataclasses import dataclass

from ossa.catalog import Catalog, load_catalog
from ossa.generate import SplitMix64, stable_seed
from ossa.labels import canonicalize_label
from ossa.scene import ObjectState, Scene, ShapeClass, SizeClass


@dataclass(frozen=True)
class CaptionErrorModel:
    p_state_omit: float = 0.0
    p_object_miss: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("p_state_omit", "p_object_miss"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")


@dataclass(frozen=True)
class PerceivedObject:
    """One caption line read back into attribute/category/state guesses."""

    phrase: str
    color: str | None = None
    size: SizeClass | None = None
    shape: ShapeClass | None = None
    category: str | None = None
    state: ObjectState | None = None


def caption_line(color: str, size: SizeClass, shape: ShapeClass, phrase: str) -> str:
    return f"a {color} {size.value} {shape.value} {phrase}."


def simulate_captions(
    scene: Scene,
    error_model: CaptionErrorModel,
    catalog: Catalog | None = None,
) -> str:
    """One caption line per retained object, in scene order."""
    catalog = catalog or load_catalog()
    lines: list[str] = []
    for position, a in enumerate(scene.objects):
        rng = SplitMix64(stable_seed(error_model.seed, scene.scene_id, position))
        u_miss = rng.next_float()
        u_state = rng.next_float()
        if u_miss < error_model.p_object_miss:
            continue
        stem = canonicalize_label(a.name).stem
        category = catalog.category_for_display(stem)
        if category is None:
            phrase = stem
        elif u_state < error_model.p_state_omit:
            phrase = category
        else:
            phrase = catalog.entries[category].caption_phrase(a.state)
        lines.append(caption_line(a.color, a.size, a.shape, phrase))
    return "\n".join(lines)


def scene_description(scene: Scene, catalog: Catalog | None = None) -> str:
    """Faithful textual rendering of a scene (zero-noise captions)."""
    return simulate_captions(scene, CaptionErrorModel(), catalog)


def parse_caption_line(line: str, catalog: Catalog | None = None) -> PerceivedObject | None:
    """Read one caption line back into a perception guess.

    Lines follow the ``a <color> <size> <shape> <phrase>.`` grammar; on any
    mismatch the whole line is treated as a phrase with unknown attributes.
    """
    catalog = catalog or load_catalog()
    text = line.strip().rstrip(".").strip()
    if not text:
        return None
    lowered = text.lower()
    if lowered.startswith("a "):
        text = text[2:]
    elif lowered.startswith("an "):
        text = text[3:]
    tokens = text.split()
    color: str | None = None
    size: SizeClass | None = None
    shape: ShapeClass | None = None
    phrase = text
    if len(tokens) >= 4:
        try:
            size = SizeClass(tokens[1])
            shape = ShapeClass(tokens[2])
            color = tokens[0]
            phrase = " ".join(tokens[3:])
        except ValueError:
            size = shape = None
            phrase = text
    resolved = catalog.lookup_phrase(phrase)
    if resolved is None:
        return PerceivedObject(phrase=phrase, color=color, size=size, shape=shape)
    category, state = resolved
    return PerceivedObject(
        phrase=phrase,
        color=color,
        size=size,
        shape=shape,
        category=category,
        state=state,
    )


def parse_captions(text: str, catalog: Catalog | None = None) -> list[PerceivedObject]:
    catalog = catalog or load_catalog()
    out: list[PerceivedObject] = []
    for line in text.splitlines():
        perceived = parse_caption_line(line, catalog)
        if perceived is not None:
            out.append(perceived)
    return out
