"""Dataset persistence.

Wire format: a UTF-8 JSON document with top-level
``{"name", "version", "catalog_version", "scenes": [...]}``; each scene is
``{"scene_id", "image_ref"?, "objects": {<name>: {<fields>}}}`` and each
object carries the eight plan fields plus ``edible``, with enumeration
values spelled with spaces ("trash bin", "top grasp").  Serialization is
byte-stable: equal datasets produce identical files on every platform.
"""

from __future__ import annotations

import json
from pathlib import Path

from ossa.scene import (
    Dataset,
    Destination,
    GraspType,
    ObjectAnnotation,
    ObjectState,
    PlaceType,
    Scene,
    ShapeClass,
    SizeClass,
    validate_dataset,
)


class ParseError(ValueError):
    """Malformed document; carries line/column where available."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class SchemaError(ValueError):
    """Structurally valid document violating the data-model invariants."""

    def __init__(self, message: str, path: str):
        super().__init__(f"{path}: {message}")
        self.path = path


_FIELD_ORDER = (
    "color",
    "size",
    "shape",
    "container",
    "state",
    "destination",
    "grasping_type",
    "placing_type",
)

_ENUM_FIELDS = {
    "size": SizeClass,
    "shape": ShapeClass,
    "state": ObjectState,
    "destination": Destination,
    "grasping_type": GraspType,
    "placing_type": PlaceType,
}


def object_wire(a: ObjectAnnotation) -> dict:
    """Wire dict for one annotation, in canonical field order."""
    return {
        "color": a.color,
        "size": a.size.value,
        "shape": a.shape.value,
        "container": a.container,
        "state": a.state.value,
        "destination": a.destination.value,
        "grasping_type": a.grasping_type.value,
        "placing_type": a.placing_type.value,
        "edible": a.edible,
    }


def dataset_to_wire(dataset: Dataset) -> dict:
    scenes = []
    for scene in dataset.scenes:
        entry: dict = {"scene_id": scene.scene_id}
        if scene.image_ref is not None:
            entry["image_ref"] = scene.image_ref
        entry["objects"] = {a.name: object_wire(a) for a in scene.objects}
        scenes.append(entry)
    return {
        "name": dataset.name,
        "version": dataset.version,
        "catalog_version": dataset.catalog_version,
        "scenes": scenes,
    }


def dumps_dataset(dataset: Dataset) -> str:
    return json.dumps(dataset_to_wire(dataset), indent=2, ensure_ascii=True) + "\n"


def save_dataset(dataset: Dataset, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_dataset(dataset), encoding="utf-8")
    return path


def _require(mapping: dict, key: str, kind: type, path: str):
    if key not in mapping:
        raise SchemaError(f"missing required field '{key}'", path)
    value = mapping[key]
    if kind is bool:
        if not isinstance(value, bool):
            raise SchemaError(f"field '{key}' must be a boolean", path)
    elif not isinstance(value, kind) or isinstance(value, bool):
        raise SchemaError(f"field '{key}' must be {kind.__name__}", path)
    return value


def _parse_annotation(name: str, raw: dict, path: str) -> ObjectAnnotation:
    if not isinstance(raw, dict):
        raise SchemaError("object entry must be a mapping", path)
    fields: dict = {"name": name}
    fields["color"] = _require(raw, "color", str, path)
    for key in ("size", "shape", "state", "destination", "grasping_type", "placing_type"):
        value = _require(raw, key, str, path)
        enum_cls = _ENUM_FIELDS[key]
        try:
            fields[key] = enum_cls(value)
        except ValueError:
            allowed = ", ".join(repr(e.value) for e in enum_cls)
            raise SchemaError(
                f"field '{key}' has value {value!r}, expected one of: {allowed}",
                f"{path}.{key}",
            ) from None
    fields["container"] = _require(raw, "container", bool, path)
    fields["edible"] = _require(raw, "edible", bool, path)
    unknown = set(raw) - set(_FIELD_ORDER) - {"edible"}
    if unknown:
        raise SchemaError(f"unknown fields: {sorted(unknown)}", path)
    return ObjectAnnotation(**fields)


def _parse_scene(raw: dict, path: str) -> Scene:
    if not isinstance(raw, dict):
        raise SchemaError("scene entry must be a mapping", path)
    scene_id = _require(raw, "scene_id", str, path)
    image_ref = raw.get("image_ref")
    if image_ref is not None and not isinstance(image_ref, str):
        raise SchemaError("field 'image_ref' must be a string", path)
    objects_raw = _require(raw, "objects", dict, path)
    objects = tuple(
        _parse_annotation(name, obj, f"{path}.objects['{name}']")
        for name, obj in objects_raw.items()
    )
    return Scene(scene_id=scene_id, objects=objects, image_ref=image_ref)


def parse_scene_doc(raw: dict, path: str = "$.scene") -> Scene:
    """Parse one inline scene document (used by the session service)."""
    return _parse_scene(raw, path)


def parse_dataset(text: str) -> Dataset:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from exc
    if not isinstance(raw, dict):
        raise SchemaError("top-level document must be a mapping", "$")
    name = _require(raw, "name", str, "$")
    version = _require(raw, "version", str, "$")
    catalog_version = _require(raw, "catalog_version", str, "$")
    scenes_raw = _require(raw, "scenes", list, "$")
    scenes = tuple(
        _parse_scene(s, f"$.scenes[{i}]") for i, s in enumerate(scenes_raw)
    )
    dataset = Dataset(
        name=name, version=version, scenes=scenes, catalog_version=catalog_version
    )
    violations = validate_dataset(dataset)
    if violations:
        raise SchemaError("; ".join(violations), "$")
    return dataset


def load_dataset(path: str | Path) -> Dataset:
    """Load and fully validate a dataset file."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"dataset file not found: {path}")
    return parse_dataset(path.read_text(encoding="utf-8"))
